//! Lofted blade surfaces.
//!
//! Each section profile is wrapped onto its cylinder: the chordwise
//! coordinate is rotated by the pitch angle `atan(P / 2πr)` in the unrolled
//! (arc, axial) plane and the arc length is turned into azimuth. The loft
//! interpolates the cylindrical coordinates of the wrapped sections with a
//! natural cubic spline in span, so every section is reproduced exactly at
//! its knot. The propeller axis is +z; blade `k` is rotated by `2πk/Z`.

use std::f64::consts::PI;

use nalgebra::Vector3;

use super::blade::BladeDefinition;
use super::gauss::gauss_legendre_unit;
use super::interp::CardinalSpline;
use super::profile::{SectionShape, Side};
use crate::error::{Error, Result};

/// Position and parametric derivatives of a surface point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub position: Vector3<f64>,
    pub du: Vector3<f64>,
    pub dv: Vector3<f64>,
    pub radius: f64,
}

impl SurfacePoint {
    /// `∂S/∂u × ∂S/∂v`, before any outward orientation.
    pub fn raw_normal(&self) -> Vector3<f64> {
        self.du.cross(&self.dv)
    }
}

#[derive(Debug, Clone, Copy)]
struct Wrapped {
    theta: f64,
    z: f64,
    dtheta: f64,
    dz: f64,
}

#[derive(Debug, Clone)]
struct LoftSection {
    shape: SectionShape,
    radius: f64,
    pitch_angle: f64,
    rake: f64,
    skew: f64,
}

impl LoftSection {
    fn wrap(&self, side: Side, u: f64) -> Wrapped {
        let p = self.shape.point(side, u);
        let (sin_p, cos_p) = self.pitch_angle.sin_cos();
        let s = p.x - 0.5 * self.shape.chord();
        let arc = s * cos_p + p.y * sin_p;
        let z = s * sin_p - p.y * cos_p + self.rake;
        let darc = p.dx * cos_p + p.dy * sin_p;
        let dz = p.dx * sin_p - p.dy * cos_p;
        Wrapped {
            theta: arc / self.radius + self.skew,
            z,
            dtheta: darc / self.radius,
            dz,
        }
    }
}

/// Smooth face and back surfaces of every blade of a propeller.
///
/// `u` runs from leading to trailing edge, `v` from root to tip.
#[derive(Debug, Clone)]
pub struct BladeSurface {
    sections: Vec<LoftSection>,
    span: CardinalSpline,
    n_blades: usize,
    hub_radius: f64,
    tip_radius: f64,
}

/// Pitch angle `atan(P / 2πr)` of a helix of pitch `P` at radius `r`.
pub fn pitch_angle(pitch: f64, radius: f64) -> f64 {
    (pitch / (2.0 * PI * radius)).atan()
}

impl BladeSurface {
    pub fn n_blades(&self) -> usize {
        self.n_blades
    }

    pub fn hub_radius(&self) -> f64 {
        self.hub_radius
    }

    pub fn tip_radius(&self) -> f64 {
        self.tip_radius
    }

    /// Span parameters of the section knots.
    pub fn section_knots(&self) -> &[f64] {
        self.span.knots()
    }

    pub fn section_pitch_angles(&self) -> Vec<f64> {
        self.sections.iter().map(|s| s.pitch_angle).collect()
    }

    /// Rotation of blade `k` about the axis.
    pub fn blade_angle(&self, blade: usize) -> f64 {
        2.0 * PI * blade as f64 / self.n_blades as f64
    }

    fn combine(&self, wrapped: &[Wrapped], v: f64, blade: usize) -> SurfacePoint {
        let (w, dw) = self.span.weights(v);
        let mut r = 0.0;
        let mut dr = 0.0;
        let (mut th, mut th_u, mut th_v) = (0.0, 0.0, 0.0);
        let (mut z, mut z_u, mut z_v) = (0.0, 0.0, 0.0);
        for (k, s) in wrapped.iter().enumerate() {
            let rk = self.sections[k].radius;
            r += w[k] * rk;
            dr += dw[k] * rk;
            th += w[k] * s.theta;
            th_u += w[k] * s.dtheta;
            th_v += dw[k] * s.theta;
            z += w[k] * s.z;
            z_u += w[k] * s.dz;
            z_v += dw[k] * s.z;
        }
        let (sin_t, cos_t) = (th + self.blade_angle(blade)).sin_cos();
        SurfacePoint {
            position: Vector3::new(r * cos_t, r * sin_t, z),
            du: Vector3::new(-r * sin_t * th_u, r * cos_t * th_u, z_u),
            dv: Vector3::new(
                dr * cos_t - r * sin_t * th_v,
                dr * sin_t + r * cos_t * th_v,
                z_v,
            ),
            radius: r,
        }
    }

    fn wrapped_column(&self, side: Side, u: f64) -> Vec<Wrapped> {
        self.sections.iter().map(|s| s.wrap(side, u)).collect()
    }

    /// Evaluates `S(u, v)` on one side of one blade.
    pub fn eval(&self, side: Side, blade: usize, u: f64, v: f64) -> SurfacePoint {
        self.combine(&self.wrapped_column(side, u), v, blade)
    }

    /// Evaluates a tensor grid on blade 0, v-major then u.
    pub fn eval_tensor(&self, side: Side, us: &[f64], vs: &[f64]) -> Vec<SurfacePoint> {
        let columns: Vec<Vec<Wrapped>> = us.iter().map(|&u| self.wrapped_column(side, u)).collect();
        let mut out = Vec::with_capacity(us.len() * vs.len());
        for &v in vs {
            for col in &columns {
                out.push(self.combine(col, v, 0));
            }
        }
        out
    }

    /// Interpolated pitch angle at span parameter `v`.
    pub fn pitch_angle_at(&self, v: f64) -> f64 {
        let phis: Vec<f64> = self.sections.iter().map(|s| s.pitch_angle).collect();
        self.span.eval(&phis, v)
    }

    /// Nominal direction pointing from the face toward the back at a point
    /// with azimuth `theta` and span parameter `v`.
    pub fn back_direction(&self, position: &Vector3<f64>, v: f64) -> Vector3<f64> {
        let theta = position.y.atan2(position.x);
        let (sin_p, cos_p) = self.pitch_angle_at(v).sin_cos();
        let e_theta = Vector3::new(-theta.sin(), theta.cos(), 0.0);
        e_theta * sin_p - Vector3::z() * cos_p
    }

    /// Outward orientation factor applied to `∂S/∂u × ∂S/∂v`.
    pub fn orientation(side: Side) -> f64 {
        match side {
            Side::Face => -1.0,
            Side::Back => 1.0,
        }
    }

    /// Wrapped section point in 3D, blade `blade`, section `k`.
    pub fn section_point(&self, k: usize, side: Side, blade: usize, u: f64) -> Vector3<f64> {
        let s = &self.sections[k];
        let w = s.wrap(side, u);
        let (sin_t, cos_t) = (w.theta + self.blade_angle(blade)).sin_cos();
        Vector3::new(s.radius * cos_t, s.radius * sin_t, w.z)
    }

    fn probe_orientation(&self) -> Result<()> {
        let (g, _) = gauss_legendre_unit(8);
        let lattice: Vec<f64> = (0..=10).map(|i| 0.05 + 0.9 * i as f64 / 10.0).collect();
        for probes in [&g, &lattice] {
            for side in Side::BOTH {
                let pts = self.eval_tensor(side, probes, probes);
                for (idx, p) in pts.iter().enumerate() {
                    let v = probes[idx / probes.len()];
                    let jac = p.raw_normal().dot(&self.back_direction(&p.position, v));
                    if !(jac > 0.0) {
                        let u = probes[idx % probes.len()];
                        return Err(Error::InvalidGeometry(format!(
                            "loft folds over on the {side:?} at (u, v) = ({u:.3}, {v:.3})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Builds the face and back surfaces through all blade sections.
pub fn loft_surface(blade: &BladeDefinition) -> Result<BladeSurface> {
    blade.validate()?;
    let root = blade.sections[0].radius_fraction;
    let knots: Vec<f64> = blade
        .sections
        .iter()
        .map(|s| (s.radius_fraction - root) / (1.0 - root))
        .collect();
    let sections = blade
        .sections
        .iter()
        .map(|s| {
            let radius = s.radius_fraction * blade.tip_radius;
            Ok(LoftSection {
                shape: SectionShape::new(s)?,
                radius,
                pitch_angle: pitch_angle(s.pitch, radius),
                rake: s.rake,
                skew: s.skew,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let surface = BladeSurface {
        sections,
        span: CardinalSpline::new(&knots)?,
        n_blades: blade.n_blades,
        hub_radius: blade.hub_radius,
        tip_radius: blade.tip_radius,
    };
    surface.probe_orientation()?;
    Ok(surface)
}
