//! End-to-end efficiency evaluation of a deformed propeller.
//!
//! The standard path samples the deformed blades on a uniform lattice,
//! triangulates it and sums cell loads. The fast path uses Gauss nodes on
//! the deformed blades and, with a ROM source, ROM-predicted area-weighted
//! normals. Fields come either from a trained ROM or directly from the
//! oracle.

use std::sync::Arc;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geometry::{deform_blade, loft_surface, BladeDefinition, DeformationParams, GridSpec};
use crate::hydro::{forces_fast, forces_standard, triangulate_lattice, ForceResult};
use crate::oracle::{OperatingPoint, SnapshotOracle};
use crate::rom::RomModel;

#[derive(Debug, Clone)]
pub enum FieldSource {
    Oracle(SnapshotOracle),
    Rom(Arc<RomModel>),
}

/// Which evaluation procedure a pipeline follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalPath {
    Standard,
    Fast,
}

impl EvalPath {
    pub fn name(&self) -> &'static str {
        match self {
            EvalPath::Standard => "standard",
            EvalPath::Fast => "fast",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EfficiencyPipeline {
    blade: BladeDefinition,
    op: OperatingPoint,
    grid: GridSpec,
    source: FieldSource,
}

impl EfficiencyPipeline {
    /// Oracle fields on the given point set; a lattice selects the standard
    /// path, a quadrature grid the fast one.
    pub fn with_oracle(
        blade: &BladeDefinition,
        op: OperatingPoint,
        grid: GridSpec,
    ) -> Result<Self> {
        Ok(Self {
            blade: blade.clone(),
            op,
            grid,
            source: FieldSource::Oracle(SnapshotOracle::new(blade, op)?),
        })
    }

    /// ROM fields on the ROM's own point set.
    pub fn with_rom(
        blade: &BladeDefinition,
        op: OperatingPoint,
        rom: Arc<RomModel>,
    ) -> Result<Self> {
        blade.validate()?;
        op.validate()?;
        if rom.n_blades != blade.n_blades {
            return Err(Error::InvalidInput(format!(
                "ROM was trained for {} blades, blade definition has {}",
                rom.n_blades, blade.n_blades
            )));
        }
        let expected = rom.grid.n_points(blade.n_blades);
        if rom.n_dof() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: rom.n_dof(),
            });
        }
        let mut needed = vec!["pressure", "shear_x", "shear_y", "shear_z"];
        if matches!(rom.grid, GridSpec::Quadrature { .. }) {
            needed.extend(["normal_x", "normal_y", "normal_z"]);
        }
        if let Some(missing) = needed.iter().find(|n| rom.field(n).is_none()) {
            return Err(Error::InvalidInput(format!("ROM lacks field '{missing}'")));
        }
        Ok(Self {
            blade: blade.clone(),
            op,
            grid: rom.grid,
            source: FieldSource::Rom(rom),
        })
    }

    pub fn path(&self) -> EvalPath {
        match self.grid {
            GridSpec::Lattice { .. } => EvalPath::Standard,
            GridSpec::Quadrature { .. } => EvalPath::Fast,
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn operating_point(&self) -> &OperatingPoint {
        &self.op
    }

    pub fn blade(&self) -> &BladeDefinition {
        &self.blade
    }

    pub fn is_rom(&self) -> bool {
        matches!(self.source, FieldSource::Rom(_))
    }

    pub fn evaluate(&self, mu: &DeformationParams) -> Result<ForceResult> {
        let surface = loft_surface(&deform_blade(&self.blade, mu)?)?;
        let (points, weights) = self.grid.samples(&surface)?;
        let (pressure, shear, normals) = match &self.source {
            FieldSource::Oracle(o) => {
                let f = o.eval(&points, mu)?;
                (
                    f.pressure,
                    f.shear,
                    points.iter().map(|p| p.normal).collect::<Vec<_>>(),
                )
            }
            FieldSource::Rom(rom) => {
                let get = |name: &str| rom.predict_field(name, mu);
                let p = get("pressure")?;
                let (sx, sy, sz) = (get("shear_x")?, get("shear_y")?, get("shear_z")?);
                let shear = (0..p.len())
                    .map(|i| Vector3::new(sx[i], sy[i], sz[i]))
                    .collect();
                let normals = if weights.is_some() {
                    let (nx, ny, nz) = (get("normal_x")?, get("normal_y")?, get("normal_z")?);
                    (0..p.len())
                        .map(|i| Vector3::new(nx[i], ny[i], nz[i]))
                        .collect()
                } else {
                    Vec::new()
                };
                (p.as_slice().to_vec(), shear, normals)
            }
        };
        let axis = Vector3::z();
        let loads = match weights {
            Some(w) => {
                let pos: Vec<_> = points.iter().map(|p| p.position).collect();
                forces_fast(&pos, &w, &normals, &pressure, &shear, self.op.rho)?
            }
            None => {
                let (n_u, n_v) = self.grid.dims();
                let lattice = crate::geometry::SurfaceLattice {
                    n_u,
                    n_v,
                    n_blades: self.blade.n_blades,
                    points,
                };
                let tri = triangulate_lattice(&lattice)?;
                let (p, t) = tri.vertex_to_centroid(&pressure, &shear)?;
                forces_standard(&tri, &p, &t, self.op.rho)?
            }
        };
        loads.result(&axis, &self.op)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ParameterBox;
    use crate::oracle::{build_dataset, SamplingPlan};
    use crate::rom::{RomConfig, Truncation};

    #[test]
    fn oracle_paths_agree() {
        let blade = BladeDefinition::synthetic_baseline();
        let op = OperatingPoint::default();
        let std =
            EfficiencyPipeline::with_oracle(&blade, op, GridSpec::Lattice { n_u: 100, n_v: 100 })
                .unwrap();
        let fast =
            EfficiencyPipeline::with_oracle(&blade, op, GridSpec::Quadrature { n_u: 30, n_v: 30 })
                .unwrap();
        assert_eq!(std.path(), EvalPath::Standard);
        assert_eq!(fast.path(), EvalPath::Fast);
        for mu in [
            DeformationParams::IDENTITY,
            DeformationParams::new(1.08, 0.85, 1.25, 0.75),
        ] {
            let (a, b) = (std.evaluate(&mu).unwrap(), fast.evaluate(&mu).unwrap());
            assert!((a.eta - b.eta).abs() < 1e-2 * b.eta);
        }
    }

    #[test]
    fn rom_normals_close_to_geometric() {
        let blade = BladeDefinition::synthetic_baseline();
        let op = OperatingPoint::default();
        let grid = GridSpec::Quadrature { n_u: 12, n_v: 12 };
        let ds = build_dataset(
            &blade,
            &SamplingPlan {
                n_random: 60,
                corners: true,
                seed: 11,
            },
            &ParameterBox::default(),
            grid,
            &op,
        )
        .unwrap();
        let rom = Arc::new(
            RomModel::train(
                &ds,
                &RomConfig {
                    truncation: Truncation::Energy(0.999999),
                    ..Default::default()
                },
            )
            .unwrap(),
        );
        let with_rom = EfficiencyPipeline::with_rom(&blade, op, rom.clone()).unwrap();
        let oracle = EfficiencyPipeline::with_oracle(&blade, op, grid).unwrap();
        let held_out = DeformationParams::new(1.03, 1.07, 0.92, 1.11);
        let (a, b) = (
            with_rom.evaluate(&held_out).unwrap(),
            oracle.evaluate(&held_out).unwrap(),
        );
        assert!(
            (a.t_ax - b.t_ax).abs() < 1e-2 * b.t_ax.abs(),
            "{} {}",
            a.t_ax,
            b.t_ax
        );
        let mut other = blade.clone();
        other.n_blades = 5;
        assert!(EfficiencyPipeline::with_rom(&other, op, rom).is_err());
    }
}
