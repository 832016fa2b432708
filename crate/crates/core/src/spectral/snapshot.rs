//! Binary field snapshots.
//!
//! Layout, little-endian throughout:
//!
//! ```text
//! b"FNLS" | version: u32 | N: u32 | n_1..n_N: u64 | L_1..L_N: f64 | (re, im): f64 × ∏n_j
//! ```

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::field::ComplexField;
use super::grid::Grid;
use crate::error::{FnlsError, Result};

pub const MAGIC: &[u8; 4] = b"FNLS";
pub const VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(mut w: W, field: &ComplexField) -> Result<()> {
    let grid = field.grid();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(grid.ndim() as u32).to_le_bytes())?;
    for &n in grid.dims() {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    for &l in grid.lengths() {
        w.write_all(&l.to_le_bytes())?;
    }
    let mut bytes = Vec::with_capacity(16 * field.values().len());
    for v in field.values() {
        bytes.extend_from_slice(&v.re.to_le_bytes());
        bytes.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&bytes)?;
    Ok(())
}

fn read_array<const K: usize, R: Read>(r: &mut R, what: &str) -> Result<[u8; K]> {
    let mut buf = [0u8; K];
    r.read_exact(&mut buf).map_err(|e| FnlsError::Snapshot(format!("truncated {what}: {e}")))?;
    Ok(buf)
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<ComplexField> {
    let magic: [u8; 4] = read_array(&mut r, "magic")?;
    if &magic != MAGIC {
        return Err(FnlsError::Snapshot(format!("bad magic {magic:?}")));
    }
    let version = u32::from_le_bytes(read_array(&mut r, "version")?);
    if version != VERSION {
        return Err(FnlsError::Snapshot(format!("unsupported version {version}")));
    }
    let nd = u32::from_le_bytes(read_array(&mut r, "dimension")?) as usize;
    if !(1..=3).contains(&nd) {
        return Err(FnlsError::Snapshot(format!("dimension {nd} out of range")));
    }
    let mut dims = Vec::with_capacity(nd);
    for _ in 0..nd {
        let n = u64::from_le_bytes(read_array(&mut r, "axis size")?);
        dims.push(usize::try_from(n).map_err(|_| FnlsError::Snapshot(format!("axis size {n}")))?);
    }
    let mut lengths = Vec::with_capacity(nd);
    for _ in 0..nd {
        lengths.push(f64::from_le_bytes(read_array(&mut r, "box length")?));
    }
    let grid = Grid::new(dims, lengths).map_err(|e| FnlsError::Snapshot(e.to_string()))?;
    let mut bytes = vec![0u8; 16 * grid.len()];
    r.read_exact(&mut bytes).map_err(|e| FnlsError::Snapshot(format!("truncated values: {e}")))?;
    let values = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(FnlsError::Snapshot("trailing bytes after field values".into()));
    }
    ComplexField::new(grid, values)
}

pub fn save_snapshot(path: impl AsRef<Path>, field: &ComplexField) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_snapshot(&mut w, field)?;
    w.flush()?;
    Ok(())
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<ComplexField> {
    let file = std::fs::File::open(path)?;
    read_snapshot(std::io::BufReader::new(file))
}
