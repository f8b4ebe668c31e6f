//! Binary model checkpoints.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic        6 bytes  "TDVAE1"
//! mode         u8       0 = torus, 1 = euclidean
//! latent       u32      circles D or latent dim L
//! width        u32      sample shape, input_dim = width * height * channels
//! height       u32
//! channels     u32
//! enc_layers   u32
//! dec_layers   u32
//! per layer, encoder then decoder:
//!   in u32, out u32, activation u8 (0 relu, 1 tanh, 2 identity)
//! parameters   f64 LE, per layer in the same order: weights (in × out,
//!              row-major) then bias
//! ```

use std::path::Path;

use super::model::{LatentMode, Vae};
use super::network::{Activation, DenseLayer, DenseNetwork};
use crate::data::SampleShape;
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 6] = b"TDVAE1";

pub fn encode_checkpoint(model: &Vae, shape: SampleShape) -> Result<Vec<u8>> {
    if shape.len() != model.input_dim() {
        return Err(Error::Shape {
            context: "checkpoint sample shape",
            expected: model.input_dim(),
            got: shape.len(),
        });
    }
    let mut out = Vec::with_capacity(64 + 8 * model.num_params());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    let (tag, latent) = match model.mode {
        LatentMode::Torus { circles } => (0u8, circles),
        LatentMode::Euclidean { dim } => (1u8, dim),
    };
    out.push(tag);
    for v in [latent, shape.width, shape.height, shape.channels] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    let nets = [&model.encoder, &model.decoder];
    for net in nets {
        out.extend_from_slice(&(net.layers().len() as u32).to_le_bytes());
    }
    for net in nets {
        for l in net.layers() {
            out.extend_from_slice(&(l.input_dim() as u32).to_le_bytes());
            out.extend_from_slice(&(l.output_dim() as u32).to_le_bytes());
            out.push(l.activation.tag());
        }
    }
    for p in model.flatten_params() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Parse(format!(
                "checkpoint truncated at byte {} (needed {n} more)",
                self.pos
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<(Vae, SampleShape)> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(6)? != CHECKPOINT_MAGIC {
        return Err(Error::Parse("not a TDVAE1 checkpoint (bad magic)".into()));
    }
    let tag = r.u8()?;
    let latent = r.u32()?;
    let mode = match tag {
        0 => LatentMode::Torus { circles: latent },
        1 => LatentMode::Euclidean { dim: latent },
        t => return Err(Error::Parse(format!("unknown latent mode tag {t}"))),
    };
    let shape = SampleShape {
        width: r.u32()?,
        height: r.u32()?,
        channels: r.u32()?,
    };
    let (n_enc, n_dec) = (r.u32()?, r.u32()?);
    if n_enc == 0 || n_dec == 0 || n_enc > 64 || n_dec > 64 {
        return Err(Error::Parse(format!("implausible layer counts {n_enc}/{n_dec}")));
    }
    let mut read_layers = |count: usize| -> Result<Vec<DenseLayer>> {
        (0..count)
            .map(|_| {
                let (i, o) = (r.u32()?, r.u32()?);
                let act = Activation::from_tag(r.u8()?)
                    .ok_or_else(|| Error::Parse("unknown activation tag".into()))?;
                if i == 0 || o == 0 || i.saturating_mul(o) > 1 << 28 {
                    return Err(Error::Parse(format!("implausible layer shape {i}x{o}")));
                }
                Ok(DenseLayer::zeros(i, o, act))
            })
            .collect()
    };
    let enc_layers = read_layers(n_enc)?;
    let dec_layers = read_layers(n_dec)?;
    let encoder = DenseNetwork::new(enc_layers).map_err(|e| Error::Parse(e.to_string()))?;
    let decoder = DenseNetwork::new(dec_layers).map_err(|e| Error::Parse(e.to_string()))?;
    let mut model = Vae::from_parts(mode, encoder, decoder).map_err(|e| Error::Parse(e.to_string()))?;
    if shape.len() != model.input_dim() {
        return Err(Error::Parse(format!(
            "sample shape {shape:?} does not match input dim {}",
            model.input_dim()
        )));
    }
    let n = model.num_params();
    let payload = r.take(8 * n)?;
    if r.pos != bytes.len() {
        return Err(Error::Parse(format!(
            "{} trailing bytes after parameters",
            bytes.len() - r.pos
        )));
    }
    let params: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    if params.iter().any(|p| !p.is_finite()) {
        return Err(Error::Parse("checkpoint holds non-finite parameters".into()));
    }
    model.load_params(&params)?;
    Ok((model, shape))
}

pub fn save_checkpoint(path: &Path, model: &Vae, shape: SampleShape) -> Result<()> {
    let bytes = encode_checkpoint(model, shape)?;
    crate::harness::write_atomic(path, &bytes)
}

pub fn load_checkpoint(path: &Path) -> Result<(Vae, SampleShape)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes)
}
