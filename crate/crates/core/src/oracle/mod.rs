//! Deterministic synthetic field oracle standing in for the CFD solver,
//! and the snapshot datasets built from it.
//!
//! Pressure and wall shear are density-divided (m²/s²). Pressure follows a
//! thin-airfoil style loading
//!
//! ```text
//! p = ½V² · ( s·[2π·α + 4·μ_camber·c̄(u)]·ℓ(u) − μ_thickness·t̄(u)·ℓ(u) ),   ℓ(u) = 4u(1−u)
//! ```
//!
//! with `α = atan(μ_pitch·P/(2πr)) − atan(u0/(2πnr))`, `V² = u0² + (2πnr)²`
//! and `s = +1` on the face, `−1` on the back. Shear is a flat-plate
//! friction law along the chordwise tangent:
//! `0.0296·ν^0.2·V^1.8·(u·μ_chord·c(r) + 0.01·c(r))^−0.2`.

pub(crate) mod dataset;
pub(crate) mod io;

pub use dataset::{build_dataset, sample_parameters, SamplingPlan, SnapshotDataset};
pub use io::{export_dataset_csv, load_dataset, save_dataset};

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::interp::Pchip;
use crate::geometry::{BladeDefinition, DeformationParams, Side, SurfaceSample};

/// Open-water operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    /// Density, kg/m³.
    pub rho: f64,
    /// Kinematic viscosity, m²/s.
    pub nu: f64,
    /// Revolutions per second.
    pub n: f64,
    /// Advance ratio.
    pub j: f64,
    /// Propeller diameter, m.
    pub diameter: f64,
}

impl Default for OperatingPoint {
    fn default() -> Self {
        Self {
            rho: 998.2,
            nu: 1.0e-6,
            n: 15.0,
            j: 0.85,
            diameter: 1.0,
        }
    }
}

impl OperatingPoint {
    /// Inflow speed `J·n·D`.
    pub fn u0(&self) -> f64 {
        self.j * self.n * self.diameter
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("density", self.rho),
            ("viscosity", self.nu),
            ("revolutions", self.n),
            ("diameter", self.diameter),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidPhysics(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.j.is_finite() && self.j >= 0.0) {
            return Err(Error::InvalidPhysics(format!(
                "advance ratio must be non-negative, got {}",
                self.j
            )));
        }
        Ok(())
    }
}

/// Pressure and wall-shear traction on one point set for one design.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot {
    pub pressure: Vec<f64>,
    pub shear: Vec<Vector3<f64>>,
    pub mu: DeformationParams,
}

/// Baseline distributions the oracle reads: pitch and chord against radius,
/// normalized camber and thickness against chord fraction and radius.
#[derive(Debug, Clone)]
pub struct SnapshotOracle {
    radii: Vec<f64>,
    pitch: Vec<f64>,
    chord: Vec<f64>,
    camber: Vec<Pchip>,
    thickness: Vec<Pchip>,
    op: OperatingPoint,
}

fn normalized(table: &[(f64, f64)], chord: f64) -> Result<Pchip> {
    let (x, y): (Vec<f64>, Vec<f64>) = table.iter().map(|&(u, v)| (u, v / chord)).unzip();
    Pchip::new(&x, &y)
}

impl SnapshotOracle {
    pub fn new(baseline: &BladeDefinition, op: OperatingPoint) -> Result<Self> {
        baseline.validate()?;
        op.validate()?;
        let s = &baseline.sections;
        Ok(Self {
            radii: s
                .iter()
                .map(|s| s.radius_fraction * baseline.tip_radius)
                .collect(),
            pitch: s.iter().map(|s| s.pitch).collect(),
            chord: s.iter().map(|s| s.chord).collect(),
            camber: s
                .iter()
                .map(|s| normalized(&s.camber, s.chord))
                .collect::<Result<_>>()?,
            thickness: s
                .iter()
                .map(|s| normalized(&s.thickness, s.chord))
                .collect::<Result<_>>()?,
            op,
        })
    }

    pub fn operating_point(&self) -> &OperatingPoint {
        &self.op
    }

    // Section index and linear weight for radius r, clamped to the blade.
    fn bracket(&self, r: f64) -> (usize, f64) {
        let n = self.radii.len();
        let r = r.clamp(self.radii[0], self.radii[n - 1]);
        let i = self.radii.partition_point(|&x| x <= r).clamp(1, n - 1) - 1;
        (i, (r - self.radii[i]) / (self.radii[i + 1] - self.radii[i]))
    }

    fn lerp(values: &[f64], (i, w): (usize, f64)) -> f64 {
        (1.0 - w) * values[i] + w * values[i + 1]
    }

    fn lerp_curve(curves: &[Pchip], (i, w): (usize, f64), u: f64) -> f64 {
        (1.0 - w) * curves[i].eval(u) + w * curves[i + 1].eval(u)
    }

    /// Baseline pitch at radius `r`.
    pub fn baseline_pitch(&self, r: f64) -> f64 {
        Self::lerp(&self.pitch, self.bracket(r))
    }

    /// Baseline chord at radius `r`.
    pub fn baseline_chord(&self, r: f64) -> f64 {
        Self::lerp(&self.chord, self.bracket(r))
    }

    /// Pressure and shear at one point.
    pub fn eval_point(
        &self,
        u: f64,
        r: f64,
        side: Side,
        tangent: &Vector3<f64>,
        mu: &DeformationParams,
    ) -> Result<(f64, Vector3<f64>)> {
        if !(r > 0.0) {
            return Err(Error::InvalidInput(format!(
                "radius must be positive, got {r}"
            )));
        }
        let op = &self.op;
        let u = u.clamp(0.0, 1.0);
        let br = self.bracket(r);
        let u0 = op.u0();
        let omega_r = 2.0 * PI * op.n * r;
        let beta = (u0 / omega_r).atan();
        let phi = (mu.pitch * Self::lerp(&self.pitch, br) / (2.0 * PI * r)).atan();
        let alpha = phi - beta;
        let v2 = u0 * u0 + omega_r * omega_r;
        let ell = 4.0 * u * (1.0 - u);
        let cbar = Self::lerp_curve(&self.camber, br, u);
        let tbar = Self::lerp_curve(&self.thickness, br, u);
        let p = 0.5
            * v2
            * (side.sign() * (2.0 * PI * alpha + 4.0 * mu.camber * cbar) * ell
                - mu.thickness * tbar * ell);
        let c = Self::lerp(&self.chord, br);
        let tau =
            0.0296 * op.nu.powf(0.2) * v2.powf(0.9) * (u * mu.chord * c + 0.01 * c).powf(-0.2);
        Ok((p, tau * tangent))
    }

    /// Fields on a whole point set.
    pub fn eval(&self, points: &[SurfaceSample], mu: &DeformationParams) -> Result<FieldSnapshot> {
        let mut pressure = Vec::with_capacity(points.len());
        let mut shear = Vec::with_capacity(points.len());
        for s in points {
            let (p, t) = self.eval_point(s.chord_fraction, s.radius, s.side, &s.tangent, mu)?;
            pressure.push(p);
            shear.push(t);
        }
        Ok(FieldSnapshot {
            pressure,
            shear,
            mu: *mu,
        })
    }
}

/// One-shot oracle evaluation on the baseline's distributions.
pub fn fom_oracle(
    baseline: &BladeDefinition,
    points: &[SurfaceSample],
    mu: &DeformationParams,
    op: &OperatingPoint,
) -> Result<FieldSnapshot> {
    SnapshotOracle::new(baseline, *op)?.eval(points, mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::blade::{baseline_camber_ratio, baseline_thickness_ratio};
    use crate::geometry::{deform_blade, loft_surface, GridSpec};

    fn oracle() -> SnapshotOracle {
        SnapshotOracle::new(
            &BladeDefinition::synthetic_baseline(),
            OperatingPoint::default(),
        )
        .unwrap()
    }

    // Closed-form oracle for the synthetic baseline, whose pitch is D,
    // chord is 0.25·D·(1.1 − r/R) and whose normalized camber/thickness do
    // not depend on radius.
    fn reference(u: f64, r: f64, s: f64, mu: [f64; 4]) -> (f64, f64) {
        let op = OperatingPoint::default();
        let (d, big_r) = (1.0, 0.5);
        let u0 = 0.85 * 15.0;
        let w = 2.0 * PI * 15.0 * r;
        let alpha = (mu[0] * d / (2.0 * PI * r)).atan() - (u0 / w).atan();
        let v2 = u0 * u0 + w * w;
        let ell = 4.0 * u * (1.0 - u);
        let p = 0.5
            * v2
            * (s * (2.0 * PI * alpha + 4.0 * mu[1] * baseline_camber_ratio(u)) * ell
                - mu[3] * baseline_thickness_ratio(u) * ell);
        let c = 0.25 * d * (1.1 - r / big_r);
        let tau =
            0.0296 * op.nu.powf(0.2) * v2.sqrt().powf(1.8) * (u * mu[2] * c + 0.01 * c).powf(-0.2);
        (p, tau)
    }

    #[test]
    fn matches_closed_form_on_the_baseline() {
        let o = oracle();
        let t = Vector3::new(0.0, 0.6, -0.8);
        let mu = [1.04, 0.9, 1.2, 0.75];
        for &(u, r) in &[
            (0.3, 0.1),
            (0.5, 0.25),
            (0.7, 0.37),
            (0.05, 0.49),
            (0.95, 0.5),
        ] {
            for side in Side::BOTH {
                let (p, tau) = o
                    .eval_point(u, r, side, &t, &DeformationParams::from_array(mu))
                    .unwrap();
                let (pr, taur) = reference(u, r, side.sign(), mu);
                // Camber and thickness are stored at 14 stations and
                // interpolated; the parabolic thickness is matched to the
                // interpolation accuracy.
                assert!(
                    (p - pr).abs() < 2e-3 * pr.abs().max(1.0),
                    "{u} {r} {p} {pr}"
                );
                assert!((tau - taur * t).norm() < 1e-12 * taur);
            }
        }
        // At chord stations the interpolation is exact.
        let (p, _) = o
            .eval_point(0.4, 0.3, Side::Back, &t, &DeformationParams::from_array(mu))
            .unwrap();
        assert!((p - reference(0.4, 0.3, -1.0, mu).0).abs() < 1e-10 * p.abs());
    }

    #[test]
    fn edges_carry_no_pressure() {
        let o = oracle();
        let t = Vector3::x();
        for u in [0.0, 1.0] {
            let (p, tau) = o
                .eval_point(u, 0.3, Side::Face, &t, &DeformationParams::IDENTITY)
                .unwrap();
            assert_eq!(p, 0.0);
            assert!(tau.norm().is_finite() && tau.norm() > 0.0);
        }
    }

    fn flat_blade() -> BladeDefinition {
        let mut b = BladeDefinition::synthetic_baseline();
        for s in &mut b.sections {
            for c in &mut s.camber {
                c.1 = 0.0;
            }
            for t in &mut s.thickness {
                t.1 = 0.0;
            }
        }
        b
    }

    #[test]
    fn zero_incidence_zero_pressure() {
        let o = SnapshotOracle::new(&flat_blade(), OperatingPoint::default()).unwrap();
        let r = 0.3;
        let beta = (0.85 * 15.0 / (2.0 * PI * 15.0 * r)).atan();
        let mu_pitch = beta.tan() * 2.0 * PI * r / 1.0;
        let mu = DeformationParams::new(mu_pitch, 1.0, 1.0, 1.0);
        for u in [0.2, 0.5, 0.8] {
            let (p, _) = o.eval_point(u, r, Side::Face, &Vector3::x(), &mu).unwrap();
            assert!(p.abs() < 1e-9);
        }
    }

    #[test]
    fn antisymmetric_without_thickness() {
        let o = SnapshotOracle::new(&flat_blade(), OperatingPoint::default()).unwrap();
        let mu = DeformationParams::new(1.07, 1.1, 0.9, 1.2);
        for &(u, r) in &[(0.2, 0.15), (0.6, 0.33), (0.9, 0.45)] {
            let (pf, _) = o.eval_point(u, r, Side::Face, &Vector3::x(), &mu).unwrap();
            let (pb, _) = o.eval_point(u, r, Side::Back, &Vector3::x(), &mu).unwrap();
            assert_eq!(pf, -pb);
        }
    }

    #[test]
    fn rejects_non_positive_radius() {
        let o = oracle();
        for r in [0.0, -0.1, f64::NAN] {
            assert!(matches!(
                o.eval_point(
                    0.5,
                    r,
                    Side::Face,
                    &Vector3::x(),
                    &DeformationParams::IDENTITY
                ),
                Err(Error::InvalidInput(_))
            ));
        }
        let bad = OperatingPoint {
            n: 0.0,
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(Error::InvalidPhysics(_))));
    }

    #[test]
    fn inflow_consistent() {
        let op = OperatingPoint::default();
        assert!((op.u0() - 12.75).abs() < 1e-12);
    }

    #[test]
    fn deterministic_and_lipschitz_in_mu() {
        let blade = BladeDefinition::synthetic_baseline();
        let o = oracle();
        let mu = DeformationParams::new(1.02, 0.95, 1.1, 0.9);
        let surf = loft_surface(&deform_blade(&blade, &mu).unwrap()).unwrap();
        let (pts, _) = GridSpec::Quadrature { n_u: 6, n_v: 6 }
            .samples(&surf)
            .unwrap();
        let a = o.eval(&pts, &mu).unwrap();
        assert_eq!(a, o.eval(&pts, &mu).unwrap());
        let h = 1e-4;
        for k in 0..4 {
            let mut m = mu.to_array();
            m[k] += h;
            let b = o.eval(&pts, &DeformationParams::from_array(m)).unwrap();
            for i in 0..pts.len() {
                let scale = 0.5 * (12.75f64.powi(2) + (PI * 15.0).powi(2));
                assert!((a.pressure[i] - b.pressure[i]).abs() <= 10.0 * scale * h);
                assert!((a.shear[i] - b.shear[i]).norm() <= 10.0 * a.shear[i].norm() * h + 1e-15);
            }
        }
    }
}
