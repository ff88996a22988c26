//! Thrust, torque and open-water coefficients from surface fields.
//!
//! Fields are density-divided, so both force sums multiply by ρ:
//!
//! ```text
//! T = ρ Σ (p n + τ) a        Q = ρ Σ (p n × x + τ × x) a
//! ```
//!
//! with `n` the outward unit normal, `τ` the wall-shear traction, `a` the
//! cell area (or quadrature weight times area Jacobian) and `x` the cell
//! position. Axial components are taken along the propeller axis.

mod triangulate;

pub use triangulate::{triangulate_grid, triangulate_lattice, TriangulatedSurface};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::OperatingPoint;

/// Integrated loads and the derived coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceResult {
    pub thrust: [f64; 3],
    pub torque: [f64; 3],
    pub t_ax: f64,
    pub q_ax: f64,
    pub kt: f64,
    pub kq: f64,
    pub eta: f64,
}

/// Force and torque vectors before the coefficients are formed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Loads {
    pub thrust: Vector3<f64>,
    pub torque: Vector3<f64>,
}

impl Loads {
    pub fn axial(&self, axis: &Vector3<f64>) -> (f64, f64) {
        (self.thrust.dot(axis), self.torque.dot(axis))
    }

    /// Coefficients at an operating point.
    pub fn result(&self, axis: &Vector3<f64>, op: &OperatingPoint) -> Result<ForceResult> {
        let (t_ax, q_ax) = self.axial(axis);
        let (kt, kq, eta) =
            coefficients_and_efficiency(t_ax, q_ax, op.rho, op.n, op.diameter, op.u0())?;
        Ok(ForceResult {
            thrust: self.thrust.into(),
            torque: self.torque.into(),
            t_ax,
            q_ax,
            kt,
            kq,
            eta,
        })
    }
}

/// `kT = T/(ρn²D⁴)`, `kQ = Q/(ρn²D⁵)`, `η = (T/Q)·u0/(2πn)`.
pub fn coefficients_and_efficiency(
    t_ax: f64,
    q_ax: f64,
    rho: f64,
    n: f64,
    d: f64,
    u0: f64,
) -> Result<(f64, f64, f64)> {
    if q_ax == 0.0 || !q_ax.is_finite() {
        return Err(Error::InvalidPhysics(format!(
            "axial torque must be finite and non-zero, got {q_ax}"
        )));
    }
    if !(rho > 0.0 && n > 0.0 && d > 0.0) {
        return Err(Error::InvalidPhysics("ρ, n and D must be positive".into()));
    }
    let kt = t_ax / (rho * n * n * d.powi(4));
    let kq = q_ax / (rho * n * n * d.powi(5));
    let eta = (t_ax / q_ax) * u0 / (2.0 * std::f64::consts::PI * n);
    Ok((kt, kq, eta))
}

/// Discrete sums over triangles with per-centroid fields.
pub fn forces_standard(
    tri: &TriangulatedSurface,
    pressure: &[f64],
    traction: &[Vector3<f64>],
    rho: f64,
) -> Result<Loads> {
    let n = tri.len();
    for len in [pressure.len(), traction.len()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: len,
            });
        }
    }
    let mut thrust = Vector3::zeros();
    let mut torque = Vector3::zeros();
    for i in 0..n {
        if tri.skipped[i] {
            continue;
        }
        let (x, nrm, a) = (tri.centroids[i], tri.normals[i], tri.areas[i]);
        let f = (pressure[i] * nrm + traction[i]) * a;
        thrust += f;
        torque += f.cross(&x);
    }
    Ok(Loads {
        thrust: rho * thrust,
        torque: rho * torque,
    })
}

/// Gauss sums with area-weighted normals `N` (geometric or predicted).
pub fn forces_fast(
    positions: &[Vector3<f64>],
    weights: &[f64],
    normals: &[Vector3<f64>],
    pressure: &[f64],
    traction: &[Vector3<f64>],
    rho: f64,
) -> Result<Loads> {
    let n = positions.len();
    for len in [weights.len(), normals.len(), pressure.len(), traction.len()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: len,
            });
        }
    }
    let mut thrust = Vector3::zeros();
    let mut torque = Vector3::zeros();
    for i in 0..n {
        let f = weights[i] * (pressure[i] * normals[i] + normals[i].norm() * traction[i]);
        thrust += f;
        torque += f.cross(&positions[i]);
    }
    Ok(Loads {
        thrust: rho * thrust,
        torque: rho * torque,
    })
}

/// Header matching [`force_csv_row`].
pub const FORCE_CSV_HEADER: &str =
    "mu_pitch,mu_camber,mu_chord,mu_thickness,T_ax,Q_ax,kT,kQ,eta,method";

pub fn force_csv_row(
    mu: &crate::geometry::DeformationParams,
    r: &ForceResult,
    method: &str,
) -> String {
    format!(
        "{},{},{},{},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{method}",
        mu.pitch, mu.camber, mu.chord, mu.thickness, r.t_ax, r.q_ax, r.kt, r.kq, r.eta
    )
}
