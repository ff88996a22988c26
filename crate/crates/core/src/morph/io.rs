//! Point-cloud CSV files and the binary deformer layout.
//!
//! Deformer layout, all fields little-endian 64-bit:
//!
//! | field | type |
//! |-------|------|
//! | kernel tag (0 = thin plate spline, 1 = multiquadric) | u64 |
//! | ε (0 for thin plate spline) | f64 |
//! | N_control | u64 |
//! | control points, row-major N×3 | f64 |
//! | weights, row-major N×3 | f64 |

use std::io::Write;
use std::path::Path;

use nalgebra::Vector3;

use super::{RbfDeformer, RbfKernel};
use crate::error::{Error, Result};

pub fn write_points_csv(path: &Path, points: &[Vector3<f64>]) -> Result<()> {
    let mut out = String::from("x,y,z\n");
    for p in points {
        out.push_str(&format!("{},{},{}\n", p.x, p.y, p.z));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_points_csv(path: &Path) -> Result<Vec<Vector3<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    match lines.next().map(|l| l.replace(' ', "")) {
        Some(h) if h == "x,y,z" => {}
        _ => {
            return Err(Error::Format(format!(
                "{}: expected 'x,y,z' header",
                path.display()
            )))
        }
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let v: Vec<f64> = l
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| {
                    Error::Format(format!("{}: bad number on line {}", path.display(), i + 2))
                })?;
            if v.len() != 3 {
                return Err(Error::Format(format!(
                    "{}: line {} has {} columns",
                    path.display(),
                    i + 2,
                    v.len()
                )));
            }
            Ok(Vector3::new(v[0], v[1], v[2]))
        })
        .collect()
}

impl RbfDeformer {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(24 + 48 * self.control_points().len());
        let (tag, eps) = match self.kernel() {
            RbfKernel::ThinPlateSpline => (0u64, 0.0),
            RbfKernel::Multiquadric { epsilon } => (1u64, epsilon),
        };
        out.extend_from_slice(&tag.to_le_bytes());
        out.extend_from_slice(&eps.to_le_bytes());
        out.extend_from_slice(&(self.control_points().len() as u64).to_le_bytes());
        for block in [self.control_points(), self.weights()] {
            for p in block {
                for v in p.iter() {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let word = |i: usize| -> Result<[u8; 8]> {
            bytes
                .get(8 * i..8 * i + 8)
                .map(|s| s.try_into().expect("slice of length 8"))
                .ok_or_else(|| Error::Format("deformer file truncated".into()))
        };
        let tag = u64::from_le_bytes(word(0)?);
        let eps = f64::from_le_bytes(word(1)?);
        let n = u64::from_le_bytes(word(2)?) as usize;
        let kernel = match tag {
            0 => RbfKernel::ThinPlateSpline,
            1 => RbfKernel::Multiquadric { epsilon: eps },
            t => return Err(Error::Format(format!("unknown kernel tag {t}"))),
        };
        let expected = 8 * (3 + 6 * n);
        if bytes.len() != expected {
            return Err(Error::Format(format!(
                "deformer file has {} bytes, expected {expected}",
                bytes.len()
            )));
        }
        let read_block = |offset: usize| -> Result<Vec<Vector3<f64>>> {
            (0..n)
                .map(|i| {
                    let base = offset + 3 * i;
                    Ok(Vector3::new(
                        f64::from_le_bytes(word(base)?),
                        f64::from_le_bytes(word(base + 1)?),
                        f64::from_le_bytes(word(base + 2)?),
                    ))
                })
                .collect()
        };
        RbfDeformer::from_parts(kernel, read_block(3)?, read_block(3 + 3 * n)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&self.to_bytes())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morph::train;

    #[test]
    fn deformer_bytes_roundtrip_and_truncation() {
        let c: Vec<_> = (0..6)
            .map(|i| Vector3::new(i as f64, (i * i) as f64 * 0.1, 1.0 - i as f64))
            .collect();
        let d: Vec<_> = c.iter().map(|p| p + Vector3::new(0.0, 0.01, 0.0)).collect();
        let def = train(&c, &d, RbfKernel::Multiquadric { epsilon: 0.7 }).unwrap();
        let bytes = def.to_bytes();
        assert_eq!(bytes.len(), 8 * (3 + 36));
        assert_eq!(RbfDeformer::from_bytes(&bytes).unwrap(), def);
        assert!(RbfDeformer::from_bytes(&bytes[..bytes.len() - 3]).is_err());
        assert!(RbfDeformer::from_bytes(&bytes[..10]).is_err());
    }

    #[test]
    fn points_csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pts.csv");
        let pts = vec![
            Vector3::new(0.1, -2.5, 3.0e-7),
            Vector3::new(1.0 / 3.0, 0.0, 9.0),
        ];
        write_points_csv(&path, &pts).unwrap();
        assert!(std::fs::read_to_string(&path)
            .unwrap()
            .starts_with("x,y,z\n"));
        assert_eq!(read_points_csv(&path).unwrap(), pts);
        std::fs::write(&path, "a,b,c\n1,2,3\n").unwrap();
        assert!(read_points_csv(&path).is_err());
    }
}
