//! `TDDS1` dataset files.
//!
//! ```text
//! magic     5 bytes "TDDS1"
//! n         u64 LE  record count
//! width     u32 LE
//! height    u32 LE
//! channels  u32 LE
//! k         u32 LE  factor count
//! k factor specs:
//!   kind u8 (0 uniform, 1 angle, 2 categorical), p1 f64, p2 f64
//!   (uniform: lo, hi; categorical: n, 0; angle: 0, 0),
//!   name_len u16, name UTF-8
//! n records: k factor values (f64 LE) then width*height*channels pixels (f32 LE)
//! ```

use std::path::Path;

use ndarray::Array2;

use super::factors::{FactorKind, FactorSpec};
use super::{Dataset, SampleShape};
use crate::error::{Error, Result};

pub const DATASET_MAGIC: &[u8; 5] = b"TDDS1";

pub fn encode_dataset(ds: &Dataset) -> Vec<u8> {
    let k = ds.specs.len();
    let p = ds.shape.len();
    let mut out = Vec::with_capacity(64 + ds.len() * (8 * k + 4 * p));
    out.extend_from_slice(DATASET_MAGIC);
    out.extend_from_slice(&(ds.len() as u64).to_le_bytes());
    for v in [ds.shape.width, ds.shape.height, ds.shape.channels, k] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for s in &ds.specs {
        let (tag, p1, p2) = match s.kind {
            FactorKind::Uniform { lo, hi } => (0u8, lo, hi),
            FactorKind::Angle => (1, 0.0, 0.0),
            FactorKind::Categorical { n } => (2, n as f64, 0.0),
        };
        out.push(tag);
        out.extend_from_slice(&p1.to_le_bytes());
        out.extend_from_slice(&p2.to_le_bytes());
        let name = s.name.as_bytes();
        let len = name.len().min(u16::MAX as usize);
        out.extend_from_slice(&(len as u16).to_le_bytes());
        out.extend_from_slice(&name[..len]);
    }
    for (z, x) in ds.factors.rows().into_iter().zip(ds.samples.rows()) {
        for v in z {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in x {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Parse(format!(
                "dataset truncated at byte {} (needed {n} more)",
                self.pos
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("exact length"))
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.array()?) as usize)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }
}

pub fn decode_dataset(bytes: &[u8]) -> Result<Dataset> {
    let mut c = Cursor { buf: bytes, pos: 0 };
    if c.take(5)? != DATASET_MAGIC {
        return Err(Error::Parse("not a TDDS1 dataset (bad magic)".into()));
    }
    let n = u64::from_le_bytes(c.array()?);
    let shape = SampleShape {
        width: c.u32()?,
        height: c.u32()?,
        channels: c.u32()?,
    };
    let k = c.u32()?;
    let mut specs = Vec::with_capacity(k.min(1024));
    for _ in 0..k {
        let tag = c.take(1)?[0];
        let (p1, p2) = (c.f64()?, c.f64()?);
        let len = u16::from_le_bytes(c.array()?) as usize;
        let name = std::str::from_utf8(c.take(len)?)
            .map_err(|_| Error::Parse("factor name is not UTF-8".into()))?
            .to_string();
        let kind = match tag {
            0 => FactorKind::Uniform { lo: p1, hi: p2 },
            1 => FactorKind::Angle,
            2 if p1 >= 2.0 && p1.fract() == 0.0 => FactorKind::Categorical { n: p1 as usize },
            _ => return Err(Error::Parse(format!("bad factor spec (kind {tag}, {p1}, {p2})"))),
        };
        specs.push(FactorSpec { name, kind });
    }
    let record = 8u64 * k as u64 + 4u64 * shape.len() as u64;
    let remaining = (bytes.len() - c.pos) as u64;
    if record.checked_mul(n) != Some(remaining) {
        return Err(Error::Parse(format!(
            "header declares {n} records of {record} bytes but payload has {remaining} bytes"
        )));
    }
    let n = n as usize;
    let mut factors = Array2::zeros((n, k));
    let mut samples = Array2::zeros((n, shape.len()));
    for r in 0..n {
        for j in 0..k {
            factors[[r, j]] = c.f64()?;
        }
        for j in 0..shape.len() {
            samples[[r, j]] = f32::from_le_bytes(c.array()?);
        }
    }
    Dataset::new(shape, specs, factors, samples).map_err(|e| Error::Parse(e.to_string()))
}

pub fn save_dataset(path: &Path, ds: &Dataset) -> Result<()> {
    crate::harness::write_atomic(path, &encode_dataset(ds))
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_dataset(&bytes)
}
