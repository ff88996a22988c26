use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geometry::{BladeSurface, Side, SurfaceLattice};

/// Two triangles per lattice quad with centroid, outward unit normal and
/// area. Zero-area triangles are flagged and left out of force sums.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangulatedSurface {
    pub vertices: Vec<Vector3<f64>>,
    pub triangles: Vec<[usize; 3]>,
    pub centroids: Vec<Vector3<f64>>,
    pub normals: Vec<Vector3<f64>>,
    pub areas: Vec<f64>,
    pub skipped: Vec<bool>,
}

impl TriangulatedSurface {
    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn n_degenerate(&self) -> usize {
        self.skipped.iter().filter(|s| **s).count()
    }

    /// Averages per-vertex pressure and traction onto the centroids.
    pub fn vertex_to_centroid(
        &self,
        pressure: &[f64],
        traction: &[Vector3<f64>],
    ) -> Result<(Vec<f64>, Vec<Vector3<f64>>)> {
        let n = self.vertices.len();
        for len in [pressure.len(), traction.len()] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: len,
                });
            }
        }
        Ok(self
            .triangles
            .iter()
            .map(|t| {
                (
                    (pressure[t[0]] + pressure[t[1]] + pressure[t[2]]) / 3.0,
                    (traction[t[0]] + traction[t[1]] + traction[t[2]]) / 3.0,
                )
            })
            .unzip())
    }

    fn append(&mut self, positions: &[Vector3<f64>], n_u: usize, n_v: usize, orientation: f64) {
        let base = self.vertices.len();
        self.vertices.extend_from_slice(positions);
        let id = |i: usize, j: usize| base + j * n_u + i;
        for j in 0..n_v - 1 {
            for i in 0..n_u - 1 {
                let quad = [id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)];
                // Counter-clockwise in (u, v) gives S_u × S_v; flip the
                // winding where the outward side is the opposite one.
                let tris = if orientation > 0.0 {
                    [[quad[0], quad[1], quad[2]], [quad[0], quad[2], quad[3]]]
                } else {
                    [[quad[0], quad[2], quad[1]], [quad[0], quad[3], quad[2]]]
                };
                for t in tris {
                    let (a, b, c) = (
                        self.vertices[t[0]],
                        self.vertices[t[1]],
                        self.vertices[t[2]],
                    );
                    let cross = (b - a).cross(&(c - a));
                    let twice = cross.norm();
                    let scale = (b - a).norm().max((c - a).norm());
                    let degenerate = !(twice > 1e-14 * scale * scale);
                    self.triangles.push(t);
                    self.centroids.push((a + b + c) / 3.0);
                    self.normals.push(if degenerate {
                        Vector3::zeros()
                    } else {
                        cross / twice
                    });
                    self.areas.push(if degenerate { 0.0 } else { 0.5 * twice });
                    self.skipped.push(degenerate);
                }
            }
        }
    }

    fn empty() -> Self {
        Self {
            vertices: Vec::new(),
            triangles: Vec::new(),
            centroids: Vec::new(),
            normals: Vec::new(),
            areas: Vec::new(),
            skipped: Vec::new(),
        }
    }
}

/// Triangulates one structured `n_u × n_v` grid (u fastest). With
/// `orientation = +1` normals follow `∂/∂u × ∂/∂v`, with `−1` they oppose it.
pub fn triangulate_grid(
    positions: &[Vector3<f64>],
    n_u: usize,
    n_v: usize,
    orientation: f64,
) -> Result<TriangulatedSurface> {
    if n_u < 2 || n_v < 2 {
        return Err(Error::InvalidInput(format!(
            "lattice must be at least 2×2, got {n_u}×{n_v}"
        )));
    }
    if positions.len() != n_u * n_v {
        return Err(Error::DimensionMismatch {
            expected: n_u * n_v,
            got: positions.len(),
        });
    }
    let mut out = TriangulatedSurface::empty();
    out.append(positions, n_u, n_v, orientation);
    Ok(out)
}

/// Triangulates every face patch of a blade lattice with outward normals.
/// Vertices keep the lattice ordering, so per-point fields index directly.
pub fn triangulate_lattice(lattice: &SurfaceLattice) -> Result<TriangulatedSurface> {
    let mut out = TriangulatedSurface::empty();
    for side in Side::BOTH {
        for blade in 0..lattice.n_blades {
            let pos: Vec<_> = lattice
                .patch(side, blade)
                .iter()
                .map(|p| p.position)
                .collect();
            if lattice.n_u < 2 || lattice.n_v < 2 {
                return Err(Error::InvalidInput("lattice must be at least 2×2".into()));
            }
            out.append(
                &pos,
                lattice.n_u,
                lattice.n_v,
                BladeSurface::orientation(side),
            );
        }
    }
    Ok(out)
}
