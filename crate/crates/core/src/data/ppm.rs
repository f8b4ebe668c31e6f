use super::SampleShape;
use crate::error::{Error, Result};

/// Binary PPM (`P6`, maxval 255). Values in `[0, 1]` are scaled by 255 and
/// rounded half-up; single-channel samples are written as gray.
pub fn encode_ppm(shape: SampleShape, data: &[f32]) -> Result<Vec<u8>> {
    if data.len() != shape.len() {
        return Err(Error::Shape {
            context: "ppm pixels",
            expected: shape.len(),
            got: data.len(),
        });
    }
    if shape.channels != 1 && shape.channels != 3 {
        return Err(Error::Config(format!(
            "ppm export needs 1 or 3 channels, got {}",
            shape.channels
        )));
    }
    let mut out = format!("P6\n{} {}\n255\n", shape.width, shape.height).into_bytes();
    let byte = |v: f32| (f64::from(v).clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8;
    for px in data.chunks_exact(shape.channels) {
        if shape.channels == 1 {
            let b = byte(px[0]);
            out.extend_from_slice(&[b, b, b]);
        } else {
            out.extend(px.iter().map(|&v| byte(v)));
        }
    }
    Ok(out)
}
