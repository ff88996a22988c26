//! Dataset container.
//!
//! Little-endian layout:
//!
//! ```text
//! magic "PROMDS1\0" | version u32
//! grid kind u32 (0 lattice, 1 quadrature) | n_u u32 | n_v u32 | n_blades u32
//! seed u64 | n_random u64 | corners u8
//! box lower 4×f64 | box upper 4×f64
//! field count u32, then per field: name (u32 length + UTF-8) | N_dof u64 | M u64
//! M u64 | parameter matrix M×4 f64, row-major
//! per field: N_dof×M f64, row-major
//! CRC32 of everything above, u32
//! ```

use std::path::Path;

use nalgebra::DMatrix;

use super::{SamplingPlan, SnapshotDataset};
use crate::binio::{Reader, Writer};
use crate::error::{Error, Result};
use crate::geometry::{DeformationParams, GridSpec, ParameterBox};

const MAGIC: &[u8; 8] = b"PROMDS1\0";
pub const DATASET_VERSION: u32 = 1;

pub(crate) fn write_grid(w: &mut Writer, grid: &GridSpec, n_blades: usize) {
    let (tag, (n_u, n_v)) = match grid {
        GridSpec::Lattice { .. } => (0, grid.dims()),
        GridSpec::Quadrature { .. } => (1, grid.dims()),
    };
    w.u32(tag);
    w.u32(n_u as u32);
    w.u32(n_v as u32);
    w.u32(n_blades as u32);
}

pub(crate) fn read_grid(r: &mut Reader) -> Result<(GridSpec, usize)> {
    let tag = r.u32()?;
    let (n_u, n_v, n_blades) = (r.u32()? as usize, r.u32()? as usize, r.u32()? as usize);
    let grid = match tag {
        0 => GridSpec::Lattice { n_u, n_v },
        1 => GridSpec::Quadrature { n_u, n_v },
        t => return Err(Error::Format(format!("unknown grid kind {t}"))),
    };
    Ok((grid, n_blades))
}

pub(crate) fn write_box(w: &mut Writer, b: &ParameterBox) {
    w.f64s(b.lower);
    w.f64s(b.upper);
}

pub(crate) fn read_box(r: &mut Reader) -> Result<ParameterBox> {
    let v = r.f64s(8)?;
    Ok(ParameterBox {
        lower: [v[0], v[1], v[2], v[3]],
        upper: [v[4], v[5], v[6], v[7]],
    })
}

pub fn dataset_to_bytes(ds: &SnapshotDataset) -> Vec<u8> {
    let mut w = Writer::new(MAGIC, DATASET_VERSION);
    write_grid(&mut w, &ds.grid, ds.n_blades);
    w.u64(ds.plan.seed);
    w.u64(ds.plan.n_random as u64);
    w.u8(ds.plan.corners as u8);
    write_box(&mut w, &ds.bounds);
    w.u32(ds.fields.len() as u32);
    for (name, s) in &ds.fields {
        w.str(name);
        w.u64(s.nrows() as u64);
        w.u64(s.ncols() as u64);
    }
    w.u64(ds.params.len() as u64);
    for mu in &ds.params {
        w.f64s(mu.to_array());
    }
    for (_, s) in &ds.fields {
        for i in 0..s.nrows() {
            w.f64s(s.row(i).iter().copied());
        }
    }
    w.finish()
}

pub fn dataset_from_bytes(bytes: &[u8]) -> Result<SnapshotDataset> {
    let mut r = Reader::open(bytes, MAGIC, DATASET_VERSION, "dataset")?;
    let (grid, n_blades) = read_grid(&mut r)?;
    let plan = SamplingPlan {
        seed: r.u64()?,
        n_random: r.u64()? as usize,
        corners: r.u8()? != 0,
    };
    let bounds = read_box(&mut r)?;
    let n_fields = r.u32()? as usize;
    let mut headers = Vec::new();
    for _ in 0..n_fields {
        let name = r.str()?;
        let rows = r.count(0)?;
        let cols = r.count(0)?;
        headers.push((name, rows, cols));
    }
    let m = r.count(32)?;
    let params = r
        .f64s(4 * m)?
        .chunks_exact(4)
        .map(|c| DeformationParams::new(c[0], c[1], c[2], c[3]))
        .collect();
    let mut fields = Vec::with_capacity(n_fields);
    for (name, rows, cols) in headers {
        let n = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::Format("field size overflow".into()))?;
        let data = r.f64s(n)?;
        fields.push((name, DMatrix::from_row_slice(rows, cols, &data)));
    }
    r.finish()?;
    let ds = SnapshotDataset {
        grid,
        n_blades,
        plan,
        bounds,
        params,
        fields,
    };
    ds.validate()
        .map_err(|e| Error::Format(format!("inconsistent dataset: {e}")))?;
    Ok(ds)
}

pub fn save_dataset(ds: &SnapshotDataset, path: &Path) -> Result<()> {
    std::fs::write(path, dataset_to_bytes(ds)).map_err(|e| Error::io(path, e))
}

pub fn load_dataset(path: &Path) -> Result<SnapshotDataset> {
    dataset_from_bytes(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}

/// Writes `parameters.csv` and one `<field>.csv` per field (points as rows,
/// snapshots as columns) into `dir`.
pub fn export_dataset_csv(ds: &SnapshotDataset, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut p = String::from("snapshot,pitch,camber,chord,thickness\n");
    for (j, mu) in ds.params.iter().enumerate() {
        let a = mu.to_array();
        p.push_str(&format!("{j},{},{},{},{}\n", a[0], a[1], a[2], a[3]));
    }
    let path = dir.join("parameters.csv");
    std::fs::write(&path, p).map_err(|e| Error::io(&path, e))?;
    for (name, s) in &ds.fields {
        let mut out = String::with_capacity(s.len() * 20);
        out.push_str("point");
        for j in 0..s.ncols() {
            out.push_str(&format!(",s{j}"));
        }
        out.push('\n');
        for i in 0..s.nrows() {
            out.push_str(&i.to_string());
            for v in s.row(i).iter() {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        let path = dir.join(format!("{name}.csv"));
        std::fs::write(&path, out).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
