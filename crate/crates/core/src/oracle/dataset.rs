use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{OperatingPoint, SnapshotOracle};
use crate::error::{Error, Result};
use crate::geometry::{
    deform_blade, loft_surface, BladeDefinition, DeformationParams, GridSpec, ParameterBox,
};

/// Field names stored for every dataset.
pub const FLOW_FIELDS: [&str; 4] = ["pressure", "shear_x", "shear_y", "shear_z"];
/// Extra fields stored for quadrature datasets (area-weighted normals).
pub const NORMAL_FIELDS: [&str; 3] = ["normal_x", "normal_y", "normal_z"];

/// Uniform random designs followed by the box corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingPlan {
    pub n_random: usize,
    pub corners: bool,
    pub seed: u64,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        Self {
            n_random: 200,
            corners: true,
            seed: 0,
        }
    }
}

impl SamplingPlan {
    pub fn n_designs(&self) -> usize {
        self.n_random + if self.corners { 16 } else { 0 }
    }
}

/// Parameter vectors of a plan: `n_random` uniform draws from a ChaCha8
/// stream seeded with `plan.seed`, then the 16 corners. A draw within 1e-12
/// of an earlier one is discarded and redrawn.
pub fn sample_parameters(plan: &SamplingPlan, bounds: &ParameterBox) -> Vec<DeformationParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut out: Vec<DeformationParams> = Vec::with_capacity(plan.n_designs());
    while out.len() < plan.n_random {
        let mut a = [0.0; 4];
        for (k, v) in a.iter_mut().enumerate() {
            *v = bounds.lower[k] + (bounds.upper[k] - bounds.lower[k]) * rng.random::<f64>();
        }
        let mu = DeformationParams::from_array(a);
        if !out.iter().any(|m| same_design(m, &mu)) {
            out.push(mu);
        }
    }
    if plan.corners {
        out.extend(bounds.corners());
    }
    out
}

fn same_design(a: &DeformationParams, b: &DeformationParams) -> bool {
    a.to_array()
        .iter()
        .zip(b.to_array())
        .all(|(x, y)| (x - y).abs() <= 1e-12)
}

/// Snapshot matrices (one column per design) for several fields on a common
/// point set.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotDataset {
    pub grid: GridSpec,
    pub n_blades: usize,
    pub plan: SamplingPlan,
    pub bounds: ParameterBox,
    pub params: Vec<DeformationParams>,
    pub fields: Vec<(String, DMatrix<f64>)>,
}

impl SnapshotDataset {
    pub fn n_snapshots(&self) -> usize {
        self.params.len()
    }

    pub fn n_dof(&self) -> usize {
        self.fields.first().map_or(0, |(_, m)| m.nrows())
    }

    pub fn field(&self, name: &str) -> Option<&DMatrix<f64>> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }

    pub fn field_names(&self) -> Vec<&str> {
        self.fields.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.params.len();
        let n = self.n_dof();
        for (name, s) in &self.fields {
            if s.ncols() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: s.ncols(),
                });
            }
            if s.nrows() != n {
                return Err(Error::InvalidInput(format!(
                    "field {name} has {} rows, expected {n}",
                    s.nrows()
                )));
            }
        }
        for (i, a) in self.params.iter().enumerate() {
            if self.params[..i].iter().any(|b| same_design(a, b)) {
                return Err(Error::InvalidInput(format!("duplicate parameter row {i}")));
            }
        }
        Ok(())
    }

    /// Columns `cols` of every field, with their parameters.
    pub fn select(&self, cols: &[usize]) -> Self {
        Self {
            grid: self.grid,
            n_blades: self.n_blades,
            plan: self.plan,
            bounds: self.bounds,
            params: cols.iter().map(|&j| self.params[j]).collect(),
            fields: self
                .fields
                .iter()
                .map(|(n, s)| (n.clone(), s.select_columns(cols)))
                .collect(),
        }
    }
}

/// Column values of every stored field for one design.
pub(crate) fn design_columns(
    blade: &BladeDefinition,
    oracle: &SnapshotOracle,
    grid: &GridSpec,
    mu: &DeformationParams,
) -> Result<Vec<Vec<f64>>> {
    let surface = loft_surface(&deform_blade(blade, mu)?)?;
    let (points, _) = grid.samples(&surface)?;
    let snap = oracle.eval(&points, mu)?;
    let mut cols = vec![
        snap.pressure,
        snap.shear.iter().map(|t| t.x).collect(),
        snap.shear.iter().map(|t| t.y).collect(),
        snap.shear.iter().map(|t| t.z).collect(),
    ];
    if matches!(grid, GridSpec::Quadrature { .. }) {
        for k in 0..3 {
            cols.push(points.iter().map(|p| p.normal[k]).collect());
        }
    }
    Ok(cols)
}

/// Evaluates the oracle on every design of the plan. Designs run in
/// parallel; columns follow the parameter order.
pub fn build_dataset(
    blade: &BladeDefinition,
    plan: &SamplingPlan,
    bounds: &ParameterBox,
    grid: GridSpec,
    op: &OperatingPoint,
) -> Result<SnapshotDataset> {
    let oracle = SnapshotOracle::new(blade, *op)?;
    let params = sample_parameters(plan, bounds);
    if params.is_empty() {
        return Err(Error::InvalidInput(
            "sampling plan selects no designs".into(),
        ));
    }
    for mu in &params {
        bounds.check(mu)?;
    }
    let columns: Vec<Vec<Vec<f64>>> = params
        .par_iter()
        .map(|mu| design_columns(blade, &oracle, &grid, mu))
        .collect::<Result<_>>()?;
    let mut names: Vec<&str> = FLOW_FIELDS.to_vec();
    if matches!(grid, GridSpec::Quadrature { .. }) {
        names.extend(NORMAL_FIELDS);
    }
    let n_dof = grid.n_points(blade.n_blades);
    let fields = names
        .iter()
        .enumerate()
        .map(|(f, name)| {
            let s = DMatrix::from_fn(n_dof, params.len(), |i, j| columns[j][f][i]);
            (name.to_string(), s)
        })
        .collect();
    let ds = SnapshotDataset {
        grid,
        n_blades: blade.n_blades,
        plan: *plan,
        bounds: *bounds,
        params,
        fields,
    };
    ds.validate()?;
    Ok(ds)
}
