//! `RFLD` version 1: little-endian, unpadded.
//!
//! ```text
//! "RFLD"  u32 version  u32 n  u32 shape[n]  f64 origin[n]  f64 spacing[n]  f64 values[∏shape]
//! ```

use std::path::Path;

use thiserror::Error;

use super::{FieldError, Grid, ScalarField};

pub const MAGIC: &[u8; 4] = b"RFLD";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum RfldError {
    #[error("bad magic bytes {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported version {0}")]
    UnsupportedVersion(u32),
    #[error("truncated payload: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("shape/size mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl RfldError {
    /// Stable numeric code per failure class.
    pub fn code(&self) -> u32 {
        match self {
            RfldError::BadMagic(_) => 1,
            RfldError::UnsupportedVersion(_) => 2,
            RfldError::Truncated { .. } => 3,
            RfldError::ShapeMismatch(_) => 4,
            RfldError::InvalidValue(_) => 5,
            RfldError::Io(_) => 6,
        }
    }
}

pub fn header_len(dim: usize) -> usize {
    12 + 20 * dim
}

pub fn encode_field(field: &ScalarField) -> Vec<u8> {
    let g = field.grid();
    let n = g.dim();
    let mut out = Vec::with_capacity(header_len(n) + 8 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    for &s in g.shape() {
        out.extend_from_slice(&(s as u32).to_le_bytes());
    }
    for &o in g.origin() {
        out.extend_from_slice(&o.to_le_bytes());
    }
    for &h in g.spacing() {
        out.extend_from_slice(&h.to_le_bytes());
    }
    for &v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8], RfldError> {
        let end = self.pos.checked_add(k).filter(|&e| e <= self.buf.len()).ok_or(
            RfldError::Truncated { needed: self.pos.saturating_add(k), available: self.buf.len() },
        )?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32, RfldError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, RfldError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Parses an `RFLD` byte buffer. Never allocates more than the declared
/// payload after checking it is actually present.
pub fn decode_field(bytes: &[u8]) -> Result<ScalarField, RfldError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let magic: [u8; 4] = r.take(4)?.try_into().unwrap();
    if &magic != MAGIC {
        return Err(RfldError::BadMagic(magic));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(RfldError::UnsupportedVersion(version));
    }
    let n = r.u32()? as usize;
    if n == 0 || n > super::MAX_DIM {
        return Err(RfldError::ShapeMismatch(format!("dimension {n}")));
    }
    let shape = (0..n).map(|_| r.u32().map(|s| s as usize)).collect::<Result<Vec<_>, _>>()?;
    let origin = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
    let spacing = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
    let cells = shape
        .iter()
        .try_fold(1usize, |acc, &s| acc.checked_mul(s))
        .ok_or_else(|| RfldError::ShapeMismatch("cell count overflows".into()))?;
    let payload = cells
        .checked_mul(8)
        .ok_or_else(|| RfldError::ShapeMismatch("payload size overflows".into()))?;
    let remaining = bytes.len() - r.pos;
    if remaining < payload {
        return Err(RfldError::Truncated { needed: r.pos + payload, available: bytes.len() });
    }
    if remaining > payload {
        return Err(RfldError::ShapeMismatch(format!(
            "{} trailing bytes after {cells} values",
            remaining - payload
        )));
    }
    let grid = Grid::new(shape, origin, spacing).map_err(|e| match e {
        FieldError::InvalidGrid(m) => RfldError::ShapeMismatch(m),
        other => RfldError::ShapeMismatch(other.to_string()),
    })?;
    let values = r
        .take(payload)?
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect::<Vec<_>>();
    ScalarField::new(grid, values, "field").map_err(|e| RfldError::InvalidValue(e.to_string()))
}

pub fn save_field(field: &ScalarField, path: impl AsRef<Path>) -> Result<(), RfldError> {
    std::fs::write(path, encode_field(field))?;
    Ok(())
}

pub fn load_field(path: impl AsRef<Path>) -> Result<ScalarField, RfldError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path)?;
    let mut f = decode_field(&bytes)?;
    if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
        f.name = stem.to_string();
    }
    Ok(f)
}
