//! Binary field snapshots: a text header `PGHD1 nx ny nz Lx Ly h\n` followed
//! by little-endian f64 values, x fastest.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{ScalarField2, ScalarField3};
use crate::grid::Grid;

const MAGIC: &str = "PGHD1";

/// Header and raw values of a snapshot file.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub lx: f64,
    pub ly: f64,
    pub h: f64,
    pub values: Vec<f64>,
}

fn encode(dims: [usize; 3], ext: [f64; 3], values: &[f64]) -> Vec<u8> {
    let header = format!("{MAGIC} {} {} {} {} {} {}\n", dims[0], dims[1], dims[2], ext[0], ext[1], ext[2]);
    let mut out = Vec::with_capacity(header.len() + 8 * values.len());
    out.extend_from_slice(header.as_bytes());
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}

pub fn write_snapshot(field: &ScalarField3, path: &Path) -> Result<()> {
    let g = field.grid();
    write_bytes(path, &encode([g.nx, g.ny, g.nz], [g.lx, g.ly, g.h], &field.interior()))
}

/// Surface fields are stored with nz = 1.
pub fn write_surface(field: &ScalarField2, path: &Path) -> Result<()> {
    let g = field.grid();
    write_bytes(path, &encode([g.nx, g.ny, 1], [g.lx, g.ly, g.h], field.values()))
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let bytes = fs::read(path)?;
    let bad = |reason: String| Error::Snapshot {
        path: path.to_path_buf(),
        reason,
    };
    let end = bytes
        .iter()
        .position(|b| *b == b'\n')
        .ok_or_else(|| bad("missing header line".into()))?;
    let header = std::str::from_utf8(&bytes[..end]).map_err(|_| bad("header is not text".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.first() != Some(&MAGIC) {
        return Err(bad(format!("bad magic {:?}", parts.first().unwrap_or(&""))));
    }
    if parts.len() != 7 {
        return Err(bad(format!("header has {} fields, expected 7", parts.len())));
    }
    let dim = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("bad dimension {s:?}")));
    let ext = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad extent {s:?}")));
    let (nx, ny, nz) = (dim(parts[1])?, dim(parts[2])?, dim(parts[3])?);
    let (lx, ly, h) = (ext(parts[4])?, ext(parts[5])?, ext(parts[6])?);
    let body = &bytes[end + 1..];
    let count = nx
        .checked_mul(ny)
        .and_then(|v| v.checked_mul(nz))
        .ok_or_else(|| bad("dimensions overflow".into()))?;
    if body.len() != 8 * count {
        return Err(bad(format!(
            "size mismatch: {} data bytes, header implies {}",
            body.len(),
            8 * count
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok(Snapshot {
        nx,
        ny,
        nz,
        lx,
        ly,
        h,
        values,
    })
}

fn check_dims(s: &Snapshot, g: &Grid, nz: usize, path: &Path) -> Result<()> {
    let same_ext = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
    if (s.nx, s.ny, s.nz) != (g.nx, g.ny, nz) || !same_ext(s.lx, g.lx) || !same_ext(s.ly, g.ly) || !same_ext(s.h, g.h) {
        return Err(Error::Snapshot {
            path: path.to_path_buf(),
            reason: format!(
                "dimension mismatch: file {}x{}x{} ({} {} {}), expected {}x{}x{} ({} {} {})",
                s.nx, s.ny, s.nz, s.lx, s.ly, s.h, g.nx, g.ny, nz, g.lx, g.ly, g.h
            ),
        });
    }
    Ok(())
}

/// Reads a volume snapshot that must match `grid`.
pub fn load_field(path: &Path, grid: &Grid) -> Result<ScalarField3> {
    let s = read_snapshot(path)?;
    check_dims(&s, grid, grid.nz, path)?;
    ScalarField3::from_interior(grid, &s.values)
}

/// Reads a surface snapshot (nz = 1) that must match the plane of `grid`.
pub fn load_surface(path: &Path, grid: &Grid) -> Result<ScalarField2> {
    let s = read_snapshot(path)?;
    check_dims(&s, grid, 1, path)?;
    ScalarField2::from_values(grid, s.values)
}
