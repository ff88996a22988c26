//! Point sets on the lofted blades: Gauss quadrature grids, uniform
//! lattices and root curves.
//!
//! Every point set is ordered face then back, blade 0..Z, v-major then u.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::blade::BladeDefinition;
use super::gauss::gauss_legendre_unit;
use super::profile::Side;
use super::surface::{loft_surface, BladeSurface, SurfacePoint};
use crate::error::{Error, Result};

/// One point of a blade point set with the attributes the field oracle and
/// the force integrals need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSample {
    pub position: Vector3<f64>,
    /// Outward normal scaled by the area Jacobian `|∂S/∂u × ∂S/∂v|`.
    pub normal: Vector3<f64>,
    /// Unit chordwise tangent pointing toward the leading edge.
    pub tangent: Vector3<f64>,
    pub chord_fraction: f64,
    pub span_fraction: f64,
    pub radius: f64,
    pub side: Side,
    pub blade: usize,
}

impl SurfaceSample {
    pub fn unit_normal(&self) -> Vector3<f64> {
        self.normal / self.normal.norm()
    }
}

fn rotate_z(v: &Vector3<f64>, angle: f64) -> Vector3<f64> {
    let (s, c) = angle.sin_cos();
    Vector3::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z)
}

fn samples_on(surface: &BladeSurface, us: &[f64], vs: &[f64]) -> Vec<SurfaceSample> {
    let per_blade = us.len() * vs.len();
    let mut out = Vec::with_capacity(2 * surface.n_blades() * per_blade);
    for side in Side::BOTH {
        let orient = BladeSurface::orientation(side);
        let base: Vec<(SurfacePoint, f64, f64)> = surface
            .eval_tensor(side, us, vs)
            .into_iter()
            .enumerate()
            .map(|(i, p)| (p, us[i % us.len()], vs[i / us.len()]))
            .collect();
        for blade in 0..surface.n_blades() {
            let angle = surface.blade_angle(blade);
            for (p, u, v) in &base {
                let normal = p.raw_normal() * orient;
                let tangent = -p.du / p.du.norm();
                out.push(SurfaceSample {
                    position: rotate_z(&p.position, angle),
                    normal: rotate_z(&normal, angle),
                    tangent: rotate_z(&tangent, angle),
                    chord_fraction: *u,
                    span_fraction: *v,
                    radius: p.radius,
                    side,
                    blade,
                });
            }
        }
    }
    out
}

/// Tensor Gauss–Legendre nodes on every blade face.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub n_u: usize,
    pub n_v: usize,
    pub n_blades: usize,
    pub points: Vec<SurfaceSample>,
    /// Product weights on `[0, 1]²`, aligned with `points`.
    pub weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `Σ w·|N|` over the nodes of one side, all blades.
    pub fn area(&self, side: Side) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .filter(|(p, _)| p.side == side)
            .map(|(p, w)| w * p.normal.norm())
            .sum()
    }

    pub fn total_area(&self) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * p.normal.norm())
            .sum()
    }
}

/// Tensor Gauss–Legendre rule on `[0, 1]²`: nodes `(u, v)` and product
/// weights, v-major then u. Exact for `u^a v^b` with `a < 2·n_u`, `b < 2·n_v`.
pub fn tensor_rule(n_u: usize, n_v: usize) -> (Vec<[f64; 2]>, Vec<f64>) {
    let (us, wu) = gauss_legendre_unit(n_u);
    let (vs, wv) = gauss_legendre_unit(n_v);
    let nodes = vs
        .iter()
        .flat_map(|&v| us.iter().map(move |&u| [u, v]))
        .collect();
    let weights = wv
        .iter()
        .flat_map(|a| wu.iter().map(move |b| a * b))
        .collect();
    (nodes, weights)
}

/// Tensor Gauss quadrature of `f` over `[0, 1]²`.
pub fn integrate_patch<F>(f: F, n_u: usize, n_v: usize) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    let (nodes, weights) = tensor_rule(n_u, n_v);
    nodes
        .iter()
        .zip(&weights)
        .map(|(&[u, v], w)| w * f(u, v))
        .sum()
}

/// Area of a parametric patch `S: [0, 1]² → R³` by tensor Gauss quadrature
/// of `|∂S/∂u × ∂S/∂v|`, with central-difference tangents of step 1e-5.
pub fn patch_area<F>(s: F, n_u: usize, n_v: usize) -> f64
where
    F: Fn(f64, f64) -> Vector3<f64>,
{
    const H: f64 = 1e-5;
    integrate_patch(
        |u, v| {
            let su = (s(u + H, v) - s(u - H, v)) / (2.0 * H);
            let sv = (s(u, v + H) - s(u, v - H)) / (2.0 * H);
            su.cross(&sv).norm()
        },
        n_u,
        n_v,
    )
}

/// Gauss quadrature grid with `n_u × n_v` nodes per blade face.
pub fn gauss_quadrature_grid(
    surface: &BladeSurface,
    n_u: usize,
    n_v: usize,
) -> Result<QuadratureGrid> {
    if n_u < 2 || n_v < 2 {
        return Err(Error::InvalidInput(format!(
            "quadrature grid needs at least 2×2 nodes, got {n_u}×{n_v}"
        )));
    }
    let (us, _) = gauss_legendre_unit(n_u);
    let (vs, _) = gauss_legendre_unit(n_v);
    let points = samples_on(surface, &us, &vs);
    let per_blade = tensor_rule(n_u, n_v).1;
    let weights = (0..2 * surface.n_blades())
        .flat_map(|_| per_blade.iter().copied())
        .collect();
    Ok(QuadratureGrid {
        n_u,
        n_v,
        n_blades: surface.n_blades(),
        points,
        weights,
    })
}

/// Uniform `n_u × n_v` lattice in parameter space mapped onto every face.
#[derive(Debug, Clone)]
pub struct SurfaceLattice {
    pub n_u: usize,
    pub n_v: usize,
    pub n_blades: usize,
    pub points: Vec<SurfaceSample>,
}

impl SurfaceLattice {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points of one side of one blade as a `n_v × n_u` block.
    pub fn patch(&self, side: Side, blade: usize) -> &[SurfaceSample] {
        let per = self.n_u * self.n_v;
        let side_idx = match side {
            Side::Face => 0,
            Side::Back => 1,
        };
        let start = (side_idx * self.n_blades + blade) * per;
        &self.points[start..start + per]
    }
}

/// Uniform lattice including the patch boundary.
pub fn sample_surface(surface: &BladeSurface, n_u: usize, n_v: usize) -> Result<SurfaceLattice> {
    if n_u < 2 || n_v < 2 {
        return Err(Error::InvalidInput(format!(
            "lattice needs at least 2×2 nodes, got {n_u}×{n_v}"
        )));
    }
    let us: Vec<f64> = (0..n_u).map(|i| i as f64 / (n_u - 1) as f64).collect();
    let vs: Vec<f64> = (0..n_v).map(|j| j as f64 / (n_v - 1) as f64).collect();
    // The lattice includes the leading and trailing edges where du can
    // vanish on a closed profile; nudge the tangent evaluation inside.
    let mut points = samples_on(surface, &us, &vs);
    for p in &mut points {
        if !p.tangent.iter().all(|c| c.is_finite()) {
            p.tangent = Vector3::zeros();
        }
    }
    Ok(SurfaceLattice {
        n_u,
        n_v,
        n_blades: surface.n_blades(),
        points,
    })
}

/// Which point set a field lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSpec {
    /// Uniform lattice used by the standard (triangulated) evaluation.
    Lattice { n_u: usize, n_v: usize },
    /// Gauss nodes used by the fast evaluation.
    Quadrature { n_u: usize, n_v: usize },
}

impl GridSpec {
    pub fn dims(&self) -> (usize, usize) {
        match *self {
            GridSpec::Lattice { n_u, n_v } | GridSpec::Quadrature { n_u, n_v } => (n_u, n_v),
        }
    }

    /// Number of points on a propeller with `n_blades` blades.
    pub fn n_points(&self, n_blades: usize) -> usize {
        let (n_u, n_v) = self.dims();
        2 * n_blades * n_u * n_v
    }

    /// Samples the point set on a lofted surface. Quadrature weights are
    /// returned for the Gauss variant.
    pub fn samples(
        &self,
        surface: &BladeSurface,
    ) -> Result<(Vec<SurfaceSample>, Option<Vec<f64>>)> {
        match *self {
            GridSpec::Lattice { n_u, n_v } => Ok((sample_surface(surface, n_u, n_v)?.points, None)),
            GridSpec::Quadrature { n_u, n_v } => {
                let g = gauss_quadrature_grid(surface, n_u, n_v)?;
                Ok((g.points, Some(g.weights)))
            }
        }
    }
}

impl std::fmt::Display for GridSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GridSpec::Lattice { n_u, n_v } => write!(f, "lattice {n_u}x{n_v}"),
            GridSpec::Quadrature { n_u, n_v } => write!(f, "quadrature {n_u}x{n_v}"),
        }
    }
}

/// `n` points around the closed root profile of every blade (back from
/// leading to trailing edge, then face back to the leading edge), blades
/// concatenated.
pub fn root_points(blade: &BladeDefinition, n: usize) -> Result<Vec<Vector3<f64>>> {
    if n < 8 {
        return Err(Error::InvalidInput(format!(
            "root curve needs at least 8 points, got {n}"
        )));
    }
    let surface = loft_surface(blade)?;
    let mut out = Vec::with_capacity(n * blade.n_blades);
    for b in 0..blade.n_blades {
        for j in 0..n {
            let tau = 2.0 * j as f64 / n as f64;
            let (side, u) = if tau <= 1.0 {
                (Side::Back, tau)
            } else {
                (Side::Face, 2.0 - tau)
            };
            out.push(surface.section_point(0, side, b, u));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::blade::{deform_blade, DeformationParams};

    fn baseline_surface() -> BladeSurface {
        loft_surface(&BladeDefinition::synthetic_baseline()).unwrap()
    }

    #[test]
    fn node_counts() {
        let s = baseline_surface();
        assert_eq!(gauss_quadrature_grid(&s, 30, 30).unwrap().len(), 10800);
        assert_eq!(sample_surface(&s, 100, 100).unwrap().len(), 120000);
    }

    #[test]
    fn rejects_tiny_grids() {
        let s = baseline_surface();
        assert!(gauss_quadrature_grid(&s, 1, 5).is_err());
        assert!(sample_surface(&s, 5, 1).is_err());
    }

    #[test]
    fn lattice_corners_are_surface_corners() {
        let s = baseline_surface();
        let lat = sample_surface(&s, 7, 9).unwrap();
        for side in Side::BOTH {
            let patch = lat.patch(side, 0);
            for (idx, (u, v)) in [
                (0, (0.0, 0.0)),
                (6, (1.0, 0.0)),
                (56, (0.0, 1.0)),
                (62, (1.0, 1.0)),
            ] {
                let expect = s.eval(side, 0, u, v).position;
                assert!((patch[idx].position - expect).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn lattice_spacing_halves() {
        let s = baseline_surface();
        let max_spacing = |n: usize| {
            let lat = sample_surface(&s, n, n).unwrap();
            let patch = lat.patch(Side::Back, 0);
            let mut worst: f64 = 0.0;
            for j in 0..n {
                for i in 0..n {
                    let p = patch[j * n + i].position;
                    let mut best = f64::INFINITY;
                    for (di, dj) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
                        let (a, b) = (i as i64 + di, j as i64 + dj);
                        if a >= 0 && b >= 0 && (a as usize) < n && (b as usize) < n {
                            best =
                                best.min((patch[b as usize * n + a as usize].position - p).norm());
                        }
                    }
                    worst = worst.max(best);
                }
            }
            worst
        };
        let (h1, h2) = (max_spacing(21), max_spacing(41));
        let ratio = h1 / h2;
        assert!((ratio - 2.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn root_points_on_hub_cylinder() {
        let b = BladeDefinition::synthetic_baseline();
        let pts = root_points(&b, 40).unwrap();
        assert_eq!(pts.len(), 240);
        for p in &pts {
            assert!(((p.x * p.x + p.y * p.y).sqrt() - b.hub_radius).abs() < 1e-9);
        }
    }

    #[test]
    fn root_points_identity_deformation() {
        let b = BladeDefinition::synthetic_baseline();
        let d = deform_blade(&b, &DeformationParams::IDENTITY).unwrap();
        assert_eq!(root_points(&b, 16).unwrap(), root_points(&d, 16).unwrap());
    }

    #[test]
    fn root_chordwise_extent_follows_chord_factor() {
        let b = BladeDefinition::synthetic_baseline();
        let d = deform_blade(&b, &DeformationParams::new(1.0, 1.0, 0.75, 1.0)).unwrap();
        let surf = baseline_surface();
        let phi = surf.section_pitch_angles()[0];
        let extent = |pts: &[Vector3<f64>]| {
            // Unroll onto the cylinder and project onto the chord direction.
            let proj: Vec<f64> = pts[..32]
                .iter()
                .map(|p| {
                    let arc = b.hub_radius * p.y.atan2(p.x);
                    arc * phi.cos() + p.z * phi.sin()
                })
                .collect();
            proj.iter().cloned().fold(f64::MIN, f64::max)
                - proj.iter().cloned().fold(f64::MAX, f64::min)
        };
        let e0 = extent(&root_points(&b, 32).unwrap());
        let e1 = extent(&root_points(&d, 32).unwrap());
        assert!((e1 / e0 - 0.75).abs() < 1e-12, "ratio {}", e1 / e0);
    }

    #[test]
    fn quadrature_area_converges() {
        let s = baseline_surface();
        let a: Vec<f64> = [5, 10, 20, 40]
            .iter()
            .map(|&n| gauss_quadrature_grid(&s, n, n).unwrap().total_area())
            .collect();
        let d: Vec<f64> = a.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        assert!(d[0] > d[1] && d[1] > d[2], "{a:?}");
        assert!(d[2] / a[3] < 1e-3);
    }

    #[test]
    fn tensor_rule_is_exact_for_products_of_low_degree() {
        for n in 1..8 {
            let (nodes, w) = tensor_rule(n, n + 1);
            for a in 0..2 * n {
                for b in 0..2 * (n + 1) {
                    let q: f64 = nodes
                        .iter()
                        .zip(&w)
                        .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                        .sum();
                    let exact = 1.0 / ((a + 1) * (b + 1)) as f64;
                    assert!((q - exact).abs() < 1e-14, "n={n} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn patch_areas() {
        // Analytic Jacobian of the flat unit square.
        let flat = integrate_patch(|_, _| Vector3::<f64>::x().cross(&Vector3::y()).norm(), 3, 3);
        assert!((flat - 1.0).abs() < 1e-12);
        // Finite-difference tangents carry roundoff of order ε/h.
        assert!((patch_area(|u, v| Vector3::new(u, v, 0.0), 3, 3) - 1.0).abs() < 1e-10);
        let (r, dtheta, h) = (0.7, 1.3, 0.4);
        let cyl = patch_area(
            |u, v| Vector3::new(r * (dtheta * u).cos(), r * (dtheta * u).sin(), h * v),
            20,
            20,
        );
        assert!((cyl - r * dtheta * h).abs() < 1e-6);
    }

    #[test]
    fn quadrature_normals_outward() {
        let s = baseline_surface();
        let g = gauss_quadrature_grid(&s, 6, 6).unwrap();
        let half = g.len() / 2;
        for i in 0..half {
            let (f, b) = (&g.points[i], &g.points[half + i]);
            assert_eq!(f.side, Side::Face);
            assert_eq!(b.side, Side::Back);
            assert!(f.normal.dot(&b.normal) < 0.0);
            // Back normals point away from the pressure side.
            let dir = s.back_direction(&b.position, b.span_fraction);
            assert!(b.normal.dot(&dir) > 0.0 && f.normal.dot(&dir) < 0.0);
        }
    }
}
