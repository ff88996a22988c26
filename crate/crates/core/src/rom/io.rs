//! ROM container.
//!
//! Little-endian layout:
//!
//! ```text
//! magic "PROMRM1\0" | version u32
//! grid kind u32 | n_u u32 | n_v u32 | n_blades u32
//! box lower 4×f64 | box upper 4×f64
//! field count u32, then per field:
//!   name (u32 length + UTF-8) | L u64 | N_dof u64
//!   modes N_dof×L f64, row-major | singular values L×f64
//!   approximant tag u32 (0 rbf, 1 gpr, 2 knr)
//!     rbf: ε f64 | M u64 | centers M×4 | weights M×L | mean L
//!     gpr: ℓ f64 | jitter f64 | M u64 | centers M×4 | weights M×L | mean L
//!     knr: k u64 | M u64 | centers M×4 | targets M×L
//! CRC32 of everything above, u32
//! ```
//!
//! Centers are the normalized training parameters.

use std::path::Path;

use nalgebra::{DMatrix, DVector};

use super::approx::{Approximant, Fitted, Method};
use super::model::{FieldRom, RomModel};
use super::pod::PodBasis;
use crate::binio::{Reader, Writer};
use crate::error::{Error, Result};
use crate::oracle::io::{read_box, read_grid, write_box, write_grid};

const MAGIC: &[u8; 8] = b"PROMRM1\0";
pub const ROM_VERSION: u32 = 1;

fn write_rows(w: &mut Writer, m: &DMatrix<f64>) {
    for i in 0..m.nrows() {
        w.f64s(m.row(i).iter().copied());
    }
}

pub fn rom_to_bytes(rom: &RomModel) -> Vec<u8> {
    let mut w = Writer::new(MAGIC, ROM_VERSION);
    write_grid(&mut w, &rom.grid, rom.n_blades);
    write_box(&mut w, &rom.bounds);
    w.u32(rom.fields.len() as u32);
    for f in &rom.fields {
        w.str(&f.name);
        w.u64(f.basis.rank() as u64);
        w.u64(f.basis.n_dof() as u64);
        write_rows(&mut w, &f.basis.modes);
        w.f64s(f.basis.singular_values.iter().copied());
        let a = &f.approximant;
        match a.method {
            Method::Rbf { epsilon } => {
                w.u32(0);
                w.f64(epsilon);
            }
            Method::Gpr {
                length_scale,
                jitter,
            } => {
                w.u32(1);
                w.f64(length_scale);
                w.f64(jitter);
            }
            Method::Knr { k } => {
                w.u32(2);
                w.u64(k as u64);
            }
        }
        w.u64(a.centers.len() as u64);
        for c in &a.centers {
            w.f64s(*c);
        }
        match &a.fitted {
            Fitted::Kernel { weights, mean } => {
                write_rows(&mut w, weights);
                w.f64s(mean.iter().copied());
            }
            Fitted::Neighbours { targets } => write_rows(&mut w, targets),
        }
    }
    w.finish()
}

pub fn rom_from_bytes(bytes: &[u8]) -> Result<RomModel> {
    let mut r = Reader::open(bytes, MAGIC, ROM_VERSION, "ROM")?;
    let (grid, n_blades) = read_grid(&mut r)?;
    let bounds = read_box(&mut r)?;
    let n_fields = r.u32()? as usize;
    let mut fields = Vec::with_capacity(n_fields);
    for _ in 0..n_fields {
        let name = r.str()?;
        let l = r.count(8)?;
        let n = r.count(8 * l.max(1))?;
        let modes = DMatrix::from_row_slice(n, l, &r.f64s(n * l)?);
        let singular_values = r.f64s(l)?;
        let method = match r.u32()? {
            0 => Method::Rbf { epsilon: r.f64()? },
            1 => Method::Gpr {
                length_scale: r.f64()?,
                jitter: r.f64()?,
            },
            2 => Method::Knr {
                k: r.u64()? as usize,
            },
            t => return Err(Error::Format(format!("unknown approximant tag {t}"))),
        };
        let m = r.count(32)?;
        let centers: Vec<[f64; 4]> = r
            .f64s(4 * m)?
            .chunks_exact(4)
            .map(|c| [c[0], c[1], c[2], c[3]])
            .collect();
        let block = DMatrix::from_row_slice(m, l, &r.f64s(m * l)?);
        let fitted = match method {
            Method::Knr { k } => {
                if k == 0 || k > m {
                    return Err(Error::Format(format!("k={k} invalid for {m} samples")));
                }
                Fitted::Neighbours { targets: block }
            }
            _ => Fitted::Kernel {
                weights: block,
                mean: DVector::from_vec(r.f64s(l)?),
            },
        };
        fields.push(FieldRom {
            name,
            basis: PodBasis {
                modes,
                singular_values,
            },
            approximant: Approximant {
                method,
                bounds,
                centers,
                fitted,
            },
        });
    }
    r.finish()?;
    Ok(RomModel {
        grid,
        n_blades,
        bounds,
        fields,
    })
}

pub fn save_rom(rom: &RomModel, path: &Path) -> Result<()> {
    std::fs::write(path, rom_to_bytes(rom)).map_err(|e| Error::io(path, e))
}

pub fn load_rom(path: &Path) -> Result<RomModel> {
    rom_from_bytes(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}
