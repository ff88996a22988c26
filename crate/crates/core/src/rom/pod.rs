use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How many POD modes to keep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    /// Fixed rank, capped at `min(N_dof, M)`.
    Rank(usize),
    /// Smallest rank whose squared singular values reach this energy
    /// fraction.
    Energy(f64),
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::Energy(0.999)
    }
}

/// Truncated left singular vectors of a snapshot matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PodBasis {
    /// `N_dof × L`, orthonormal columns.
    pub modes: DMatrix<f64>,
    /// Leading `L` singular values, non-increasing.
    pub singular_values: Vec<f64>,
}

impl PodBasis {
    pub fn rank(&self) -> usize {
        self.modes.ncols()
    }

    pub fn n_dof(&self) -> usize {
        self.modes.nrows()
    }
}

/// Full thin SVD with modes sign-fixed so that the first entry of each
/// mode with magnitude above 1e-12 (relative) is positive.
pub(crate) fn thin_svd(s: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let (n, m) = s.shape();
    let (mut u, sigma) = if n > m {
        // Householder QR first: the SVD then runs on the small triangle.
        let qr = s.clone().qr();
        let svd = qr.r().svd(true, false);
        (
            qr.q() * svd.u.expect("left vectors requested"),
            svd.singular_values,
        )
    } else {
        let svd = s.clone().svd(true, false);
        (svd.u.expect("left vectors requested"), svd.singular_values)
    };
    for mut col in u.column_iter_mut() {
        let tol = 1e-12 * col.amax();
        if let Some(first) = col.iter().find(|v| v.abs() > tol) {
            if *first < 0.0 {
                col.neg_mut();
            }
        }
    }
    (u, sigma.iter().copied().collect())
}

/// Rank picked by a truncation rule from the full singular value list.
pub fn select_rank(sigma: &[f64], truncation: Truncation) -> Result<usize> {
    let max = sigma.len();
    match truncation {
        Truncation::Rank(l) => {
            if l == 0 || l > max {
                return Err(Error::InvalidInput(format!("rank {l} outside 1..={max}")));
            }
            Ok(l)
        }
        Truncation::Energy(e) => {
            if !(e > 0.0 && e <= 1.0) {
                return Err(Error::InvalidInput(format!(
                    "energy fraction {e} outside (0, 1]"
                )));
            }
            let total: f64 = sigma.iter().map(|s| s * s).sum();
            if total == 0.0 {
                return Ok(1);
            }
            let mut acc = 0.0;
            for (i, s) in sigma.iter().enumerate() {
                acc += s * s;
                if acc / total >= e - 1e-14 {
                    return Ok(i + 1);
                }
            }
            Ok(max)
        }
    }
}

/// Truncated POD of `S` (no mean-centering).
pub fn compute_pod(s: &DMatrix<f64>, truncation: Truncation) -> Result<PodBasis> {
    if s.is_empty() {
        return Err(Error::InvalidInput("empty snapshot matrix".into()));
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "snapshot matrix has non-finite entries".into(),
        ));
    }
    let (u, sigma) = thin_svd(s);
    let l = select_rank(&sigma, truncation)?;
    Ok(PodBasis {
        modes: u.columns(0, l).into_owned(),
        singular_values: sigma[..l].to_vec(),
    })
}

/// Reduced coefficients `Uᵀ S`.
pub fn project(s: &DMatrix<f64>, basis: &PodBasis) -> Result<DMatrix<f64>> {
    if s.nrows() != basis.n_dof() {
        return Err(Error::DimensionMismatch {
            expected: basis.n_dof(),
            got: s.nrows(),
        });
    }
    Ok(basis.modes.tr_mul(s))
}
