//! `propopt`: drives blade deformation, snapshot generation, ROM training
//! and validation, efficiency prediction and optimization.
//!
//! Data goes to stdout as CSV or JSON; diagnostics and timings go to stderr.
//! Exit status is 0 on success, 2 for usage or configuration errors and 3
//! for numerical failures.

mod commands;
mod config;
mod error;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use propopt::optim::{GaPreset, GradMethod};
use propopt::pipeline::EvalPath;
use propopt::DeformationParams;

use crate::config::PipelineConfig;
use crate::error::{exit_code, usage, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "propopt",
    version,
    about = "Propeller blade shape optimization with reduced-order models"
)]
struct Cli {
    /// JSON pipeline configuration.
    #[arg(long, global = true, env = "PROPOPT_CONFIG")]
    config: Option<PathBuf>,
    /// Seed for sampling plans and genetic runs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory receiving every output file.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Blade definition file (defaults to the synthetic baseline).
    #[arg(long, global = true)]
    blade: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Inspect or deform a blade definition.
    #[command(subcommand)]
    Blade(BladeCmd),
    /// Build snapshot datasets with the field oracle.
    #[command(subcommand)]
    Dataset(DatasetCmd),
    /// Train or cross-validate reduced-order models.
    #[command(subcommand)]
    Rom(RomCmd),
    /// Thrust, torque and efficiency at one parameter vector.
    Predict(PredictArgs),
    /// Genetic or gradient-based optimization of the efficiency.
    #[command(subcommand)]
    Optimize(OptimizeCmd),
}

#[derive(Debug, Subcommand)]
enum BladeCmd {
    /// Per-section summary and surface areas.
    Show,
    /// Apply deformation factors and write the new blade file.
    Deform {
        #[arg(long, value_parser = parse_mu)]
        mu: DeformationParams,
        /// Output file (defaults to `<out-dir>/blade_deformed.def`).
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum DatasetCmd {
    Generate {
        /// `<n>+corners`, `<n>` or `corners`.
        #[arg(long)]
        plan: Option<String>,
        #[arg(long, value_enum, default_value_t = PathArg::Standard)]
        path: PathArg,
        /// Also export the snapshots as CSV files.
        #[arg(long)]
        csv: bool,
    },
}

#[derive(Debug, Subcommand)]
enum RomCmd {
    Train {
        #[arg(long, value_enum, default_value_t = PathArg::Standard)]
        path: PathArg,
        /// Approximant for every field (overrides the configuration).
        #[arg(long)]
        method: Option<String>,
    },
    /// k-fold cross-validation of every approximant on every field.
    Validate {
        #[arg(long, value_enum, default_value_t = PathArg::Standard)]
        path: PathArg,
        #[arg(long)]
        folds: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long, value_parser = parse_mu)]
    mu: DeformationParams,
    #[arg(long, value_enum, default_value_t = PathArg::Standard)]
    method: PathArg,
    #[arg(long, value_enum, default_value_t = SourceArg::Rom)]
    source: SourceArg,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Efficiency path (defaults to the one matching the GA preset, or
    /// standard for gradient runs).
    #[arg(long, value_enum)]
    path: Option<PathArg>,
    #[arg(long, value_enum, default_value_t = SourceArg::Rom)]
    source: SourceArg,
    /// Add the example thickness and thrust penalties.
    #[arg(long)]
    constrained: bool,
}

#[derive(Debug, Subcommand)]
enum OptimizeCmd {
    Ga {
        #[arg(long, value_enum)]
        preset: Option<PresetArg>,
        #[command(flatten)]
        run: RunArgs,
    },
    Grad {
        #[arg(long, value_enum)]
        method: Option<GradArg>,
        /// Start point (defaults to 1,1,1,1).
        #[arg(long, value_parser = parse_mu)]
        x0: Option<DeformationParams>,
        /// Label written in the `test` column of the report.
        #[arg(long, default_value = "1")]
        test: String,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PathArg {
    Standard,
    Fast,
}

impl From<PathArg> for EvalPath {
    fn from(p: PathArg) -> Self {
        match p {
            PathArg::Standard => EvalPath::Standard,
            PathArg::Fast => EvalPath::Fast,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SourceArg {
    Rom,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PresetArg {
    Standard,
    Fast,
}

impl From<PresetArg> for GaPreset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Standard => GaPreset::Standard,
            PresetArg::Fast => GaPreset::Fast,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GradArg {
    Cg,
    Lbfgsb,
}

impl From<GradArg> for GradMethod {
    fn from(g: GradArg) -> Self {
        match g {
            GradArg::Cg => GradMethod::Cg,
            GradArg::Lbfgsb => GradMethod::Lbfgsb,
        }
    }
}

fn parse_mu(s: &str) -> Result<DeformationParams, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(format!(
            "expected 4 comma-separated factors, got {}",
            parts.len()
        ));
    }
    let mut a = [0.0; 4];
    for (v, p) in a.iter_mut().zip(&parts) {
        *v = p
            .parse::<f64>()
            .map_err(|_| format!("'{p}' is not a number"))?;
        if !(v.is_finite() && *v > 0.0) {
            return Err(format!("factor '{p}' must be finite and positive"));
        }
    }
    Ok(DeformationParams::from_array(a))
}

fn resolve_config(cli: &Cli) -> CliResult<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(d) = &cli.out_dir {
        cfg.out_dir = d.clone();
    }
    if let Some(t) = cli.threads {
        cfg.threads = Some(t);
    }
    if let Some(b) = &cli.blade {
        cfg.blade = Some(b.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = resolve_config(&cli)?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| usage(format!("cannot start {n} threads: {e}")))?;
    }
    match cli.command {
        Command::Blade(BladeCmd::Show) => commands::blade_show(&cfg),
        Command::Blade(BladeCmd::Deform { mu, output }) => {
            commands::blade_deform(&cfg, &mu, output)
        }
        Command::Dataset(DatasetCmd::Generate { plan, path, csv }) => {
            commands::dataset_generate(&cfg, plan.as_deref(), path.into(), csv)
        }
        Command::Rom(RomCmd::Train { path, method }) => {
            commands::rom_train(&cfg, path.into(), method.as_deref())
        }
        Command::Rom(RomCmd::Validate { path, folds }) => {
            commands::rom_validate(&cfg, path.into(), folds)
        }
        Command::Predict(a) => {
            commands::predict(&cfg, &a.mu, a.method.into(), a.source == SourceArg::Oracle)
        }
        Command::Optimize(OptimizeCmd::Ga { preset, run }) => {
            let preset = preset.map(GaPreset::from);
            let ga = cfg.ga_config(preset);
            let default_path = match preset.unwrap_or(cfg.ga_preset) {
                GaPreset::Standard => EvalPath::Standard,
                GaPreset::Fast => EvalPath::Fast,
            };
            let opts = commands::RunOptions {
                path: run.path.map_or(default_path, EvalPath::from),
                oracle: run.source == SourceArg::Oracle,
                constrained: run.constrained,
            };
            commands::optimize_ga(&cfg, &ga, preset.unwrap_or(cfg.ga_preset), &opts)
        }
        Command::Optimize(OptimizeCmd::Grad {
            method,
            x0,
            test,
            run,
        }) => {
            let mut grad = cfg.grad;
            if let Some(m) = method {
                grad.method = m.into();
            }
            let opts = commands::RunOptions {
                path: run.path.map_or(EvalPath::Standard, EvalPath::from),
                oracle: run.source == SourceArg::Oracle,
                constrained: run.constrained,
            };
            commands::optimize_grad(
                &cfg,
                &grad,
                &x0.unwrap_or(DeformationParams::IDENTITY),
                &test,
                &opts,
            )
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(exit_code(&err));
    }
}
