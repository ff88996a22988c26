//! Radial-basis-function deformation of point clouds.
//!
//! A deformer is trained on pairs of undeformed/deformed control points and
//! then moves arbitrary points with
//! `x_def = x + Σ_i α_i φ(‖x − c_i‖)`, the weights `α` solving
//! `Φ α = c_def − c_undef` with `Φ_ij = φ(‖c_i − c_j‖)`. Interpolating
//! displacements rather than positions makes identity morphs exact.

mod domain;
mod io;

pub use domain::{FluidDomain, ShaftGeometry};
pub use io::{read_points_csv, write_points_csv};

use nalgebra::{DMatrix, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymmetricSolver;

/// Radial kernel `φ(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum RbfKernel {
    /// `r² log r`, with `φ(0) = 0`.
    #[default]
    ThinPlateSpline,
    /// `√(1 + (εr)²)`.
    Multiquadric { epsilon: f64 },
}

impl RbfKernel {
    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            RbfKernel::ThinPlateSpline => {
                if r > 0.0 {
                    r * r * r.ln()
                } else {
                    0.0
                }
            }
            RbfKernel::Multiquadric { epsilon } => (1.0 + (epsilon * r).powi(2)).sqrt(),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            RbfKernel::Multiquadric { epsilon } if !(epsilon > 0.0 && epsilon.is_finite()) => {
                Err(Error::InvalidParameter(format!(
                    "multiquadric shape parameter must be positive, got {epsilon}"
                )))
            }
            _ => Ok(()),
        }
    }
}

/// Trained displacement interpolant.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfDeformer {
    kernel: RbfKernel,
    control: Vec<Vector3<f64>>,
    weights: Vec<Vector3<f64>>,
}

/// Minimum separation accepted between two control points.
pub const MIN_CONTROL_SEPARATION: f64 = 1e-12;

/// Kernel matrix `Φ_ij = φ(‖a_i − b_j‖)`.
pub fn kernel_matrix(kernel: &RbfKernel, a: &[Vector3<f64>], b: &[Vector3<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(a.len(), b.len(), |i, j| kernel.eval((a[i] - b[j]).norm()))
}

/// Solves for the weights that carry `c_undef` onto `c_def`.
pub fn train(
    c_undef: &[Vector3<f64>],
    c_def: &[Vector3<f64>],
    kernel: RbfKernel,
) -> Result<RbfDeformer> {
    kernel.validate()?;
    if c_undef.len() != c_def.len() {
        return Err(Error::DimensionMismatch {
            expected: c_undef.len(),
            got: c_def.len(),
        });
    }
    let n = c_undef.len();
    if n < 4 {
        return Err(Error::InvalidInput(format!(
            "need at least 4 control points, got {n}"
        )));
    }
    if c_undef
        .iter()
        .chain(c_def)
        .any(|p| !p.iter().all(|v| v.is_finite()))
    {
        return Err(Error::InvalidInput("control points must be finite".into()));
    }
    for i in 0..n {
        for j in 0..i {
            if (c_undef[i] - c_undef[j]).norm() < MIN_CONTROL_SEPARATION {
                return Err(Error::SingularSystem(format!(
                    "control points {j} and {i} coincide"
                )));
            }
        }
    }
    let disp = DMatrix::from_fn(n, 3, |i, k| c_def[i][k] - c_undef[i][k]);
    let weights = if disp.iter().all(|v| *v == 0.0) {
        vec![Vector3::zeros(); n]
    } else {
        let solver = SymmetricSolver::new(kernel_matrix(&kernel, c_undef, c_undef))?;
        let alpha = solver.solve(&disp);
        (0..n)
            .map(|i| Vector3::new(alpha[(i, 0)], alpha[(i, 1)], alpha[(i, 2)]))
            .collect()
    };
    Ok(RbfDeformer {
        kernel,
        control: c_undef.to_vec(),
        weights,
    })
}

impl RbfDeformer {
    /// Reassembles a deformer from stored parts.
    pub fn from_parts(
        kernel: RbfKernel,
        control: Vec<Vector3<f64>>,
        weights: Vec<Vector3<f64>>,
    ) -> Result<Self> {
        kernel.validate()?;
        if control.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: control.len(),
                got: weights.len(),
            });
        }
        Ok(Self {
            kernel,
            control,
            weights,
        })
    }

    pub fn kernel(&self) -> RbfKernel {
        self.kernel
    }

    pub fn control_points(&self) -> &[Vector3<f64>] {
        &self.control
    }

    pub fn weights(&self) -> &[Vector3<f64>] {
        &self.weights
    }

    pub fn displacement(&self, x: &Vector3<f64>) -> Vector3<f64> {
        let mut d = Vector3::zeros();
        for (c, a) in self.control.iter().zip(&self.weights) {
            d += a * self.kernel.eval((x - c).norm());
        }
        d
    }

    pub fn apply_point(&self, x: &Vector3<f64>) -> Vector3<f64> {
        x + self.displacement(x)
    }

    /// Moves every point; batches run in parallel, output order is kept.
    pub fn apply(&self, points: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
        if self.weights.iter().all(|w| *w == Vector3::zeros()) {
            return points.to_vec();
        }
        points.par_iter().map(|p| self.apply_point(p)).collect()
    }
}

/// Moves the shaft lateral surface along with the blade roots.
///
/// The shaft bases are fixed control points; the roots of all blades move
/// from `root_undef` to `root_def`.
pub fn deform_shaft(
    shaft_lateral: &[Vector3<f64>],
    shaft_bases: &[Vector3<f64>],
    root_undef: &[Vector3<f64>],
    root_def: &[Vector3<f64>],
    kernel: RbfKernel,
) -> Result<Vec<Vector3<f64>>> {
    morph_with_fixed(shaft_lateral, shaft_bases, root_undef, root_def, kernel)
}

/// Moves an interior point cloud given fixed boundaries and blade control
/// points. `fixed_boundaries` holds inlet, outlet, outer wall and the
/// (already deformed) shaft points.
pub fn deform_mesh(
    interior: &[Vector3<f64>],
    fixed_boundaries: &[Vector3<f64>],
    blade_ctrl_undef: &[Vector3<f64>],
    blade_ctrl_def: &[Vector3<f64>],
    kernel: RbfKernel,
) -> Result<Vec<Vector3<f64>>> {
    morph_with_fixed(
        interior,
        fixed_boundaries,
        blade_ctrl_undef,
        blade_ctrl_def,
        kernel,
    )
}

fn morph_with_fixed(
    targets: &[Vector3<f64>],
    fixed: &[Vector3<f64>],
    moving_undef: &[Vector3<f64>],
    moving_def: &[Vector3<f64>],
    kernel: RbfKernel,
) -> Result<Vec<Vector3<f64>>> {
    if targets.is_empty() || fixed.is_empty() || moving_undef.is_empty() {
        return Err(Error::InvalidInput(
            "morphing inputs must be non-empty".into(),
        ));
    }
    let mut undef = fixed.to_vec();
    undef.extend_from_slice(moving_undef);
    let mut def = fixed.to_vec();
    def.extend_from_slice(moving_def);
    let deformer = train(&undef, &def, kernel)?;
    Ok(deformer.apply(targets))
}
