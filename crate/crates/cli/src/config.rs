//! JSON pipeline configuration. Every key is optional; command-line flags
//! override the file.
//!
//! ```json
//! {
//!   "blade": "blade.def",
//!   "out_dir": "out",
//!   "dataset": null,
//!   "rom": null,
//!   "seed": 0,
//!   "operating_point": { "rho": 998.2, "nu": 1e-6, "n": 15, "j": 0.85, "diameter": 1.0 },
//!   "bounds": { "lower": [0.9, 0.8, 0.7, 0.7], "upper": [1.1, 1.2, 1.3, 1.3] },
//!   "lattice": [40, 40],
//!   "quadrature": [30, 30],
//!   "plan": { "n_random": 200, "corners": true },
//!   "rom_config": { "method": { "method": "rbf", "epsilon": 1.0 }, "per_field": {}, "truncation": { "energy": 0.999 } },
//!   "cv_folds": 10,
//!   "ga_preset": "standard",
//!   "ga": null,
//!   "grad": { "method": "lbfgsb", "fd_step": 1e-3, "gtol": 1e-6, "ftol": 1e-12, "max_iters": 100, "memory": 10 }
//! }
//! ```
//!
//! `blade` defaults to the built-in synthetic baseline. `dataset` and `rom`
//! default to `<out_dir>/dataset_<path>.bin` and `<out_dir>/rom_<path>.bin`,
//! where `<path>` is `standard` or `fast`. A non-null `ga` object replaces the
//! preset entirely (its `seed` is still taken from the global seed).

use std::path::{Path, PathBuf};

use propopt::geometry::{io::read_blade, GridSpec};
use propopt::optim::{GaConfig, GaPreset, GradConfig};
use propopt::oracle::{OperatingPoint, SamplingPlan};
use propopt::pipeline::EvalPath;
use propopt::rom::RomConfig;
use propopt::{BladeDefinition, ParameterBox};
use serde::{Deserialize, Serialize};

use crate::error::{usage, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanConfig {
    pub n_random: usize,
    pub corners: bool,
}

impl Default for PlanConfig {
    fn default() -> Self {
        Self {
            n_random: 200,
            corners: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub blade: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub dataset: Option<PathBuf>,
    pub rom: Option<PathBuf>,
    pub seed: u64,
    pub threads: Option<usize>,
    pub operating_point: OperatingPoint,
    pub bounds: ParameterBox,
    pub lattice: [usize; 2],
    pub quadrature: [usize; 2],
    pub plan: PlanConfig,
    pub rom_config: RomConfig,
    pub cv_folds: usize,
    pub ga_preset: GaPreset,
    pub ga: Option<GaConfig>,
    pub grad: GradConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            blade: None,
            out_dir: PathBuf::from("out"),
            dataset: None,
            rom: None,
            seed: 0,
            threads: None,
            operating_point: OperatingPoint::default(),
            bounds: ParameterBox::default(),
            lattice: [40, 40],
            quadrature: [30, 30],
            plan: PlanConfig::default(),
            rom_config: RomConfig::default(),
            cv_folds: 10,
            ga_preset: GaPreset::Standard,
            ga: None,
            grad: GradConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> CliResult<()> {
        let dims_ok = |d: [usize; 2]| d.iter().all(|&n| n >= 2);
        if !dims_ok(self.lattice) || !dims_ok(self.quadrature) {
            return Err(usage(
                "lattice and quadrature resolutions must be at least 2x2",
            ));
        }
        if self
            .bounds
            .lower
            .iter()
            .zip(&self.bounds.upper)
            .any(|(l, u)| !(l > &0.0 && l < u))
        {
            return Err(usage("bounds need 0 < lower < upper for every factor"));
        }
        self.operating_point.validate().map_err(usage)?;
        if self.threads == Some(0) {
            return Err(usage("threads must be positive"));
        }
        Ok(())
    }

    pub fn load_blade(&self) -> CliResult<BladeDefinition> {
        match &self.blade {
            Some(path) => {
                if !path.exists() {
                    return Err(usage(format!("blade file not found: {}", path.display())));
                }
                read_blade(path).map_err(usage)
            }
            None => Ok(BladeDefinition::synthetic_baseline()),
        }
    }

    pub fn grid(&self, path: EvalPath) -> GridSpec {
        match path {
            EvalPath::Standard => GridSpec::Lattice {
                n_u: self.lattice[0],
                n_v: self.lattice[1],
            },
            EvalPath::Fast => GridSpec::Quadrature {
                n_u: self.quadrature[0],
                n_v: self.quadrature[1],
            },
        }
    }

    pub fn sampling_plan(&self) -> SamplingPlan {
        SamplingPlan {
            n_random: self.plan.n_random,
            corners: self.plan.corners,
            seed: self.seed,
        }
    }

    pub fn dataset_path(&self, path: EvalPath) -> PathBuf {
        self.dataset
            .clone()
            .unwrap_or_else(|| self.out_dir.join(format!("dataset_{}.bin", path.name())))
    }

    pub fn rom_path(&self, path: EvalPath) -> PathBuf {
        self.rom
            .clone()
            .unwrap_or_else(|| self.out_dir.join(format!("rom_{}.bin", path.name())))
    }

    pub fn ga_config(&self, preset: Option<GaPreset>) -> GaConfig {
        match (preset, self.ga) {
            (None, Some(ga)) => GaConfig {
                seed: self.seed,
                ..ga
            },
            (p, _) => GaConfig::preset(p.unwrap_or(self.ga_preset), self.seed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        let c: PipelineConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, PipelineConfig::default());
        c.validate().unwrap();
    }

    #[test]
    fn documented_example_parses() {
        let doc = include_str!("config.rs")
            .lines()
            .skip_while(|l| !l.starts_with("//! ```json"))
            .skip(1)
            .take_while(|l| !l.starts_with("//! ```"))
            .map(|l| l.trim_start_matches("//!"))
            .collect::<Vec<_>>()
            .join("\n");
        let c: PipelineConfig = serde_json::from_str(&doc).unwrap();
        assert_eq!(c.blade, Some(PathBuf::from("blade.def")));
        assert_eq!(c.grad, GradConfig::default());
        assert_eq!(c.rom_config, RomConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"sede": 1}"#).is_err());
    }

    #[test]
    fn default_files_follow_path() {
        let c = PipelineConfig::default();
        assert_eq!(
            c.rom_path(EvalPath::Fast),
            PathBuf::from("out/rom_fast.bin")
        );
        assert_eq!(
            c.dataset_path(EvalPath::Standard),
            PathBuf::from("out/dataset_standard.bin")
        );
    }
}
