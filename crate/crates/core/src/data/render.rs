use std::f64::consts::TAU;

use ndarray::{Array1, Array2};
use rayon::prelude::*;

use super::factors::{sample_factors, two_d_shapes_spec, FactorSample};
use super::{Dataset, SampleShape};
use crate::error::{Error, Result};

/// Polygon side count per shape index: triangle, square, pentagon, hexagon.
pub const SHAPE_SIDES: [usize; 4] = [3, 4, 5, 6];

/// Rotations are snapped to this grid after reduction by the shape's
/// symmetry period, so symmetric rotations render bit-identically.
const ROTATION_QUANTUM: f64 = 1e-9;

/// RGB raster, row-major from the top-left, interleaved channels.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl RasterImage {
    fn filled(width: usize, height: usize, rgb: [f32; 3]) -> Self {
        RasterImage {
            width,
            height,
            data: rgb.iter().copied().cycle().take(width * height * 3).collect(),
        }
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        let i = 3 * (y * self.width + x);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    fn set(&mut self, x: usize, y: usize, rgb: [f32; 3]) {
        let i = 3 * (y * self.width + x);
        self.data[i..i + 3].copy_from_slice(&rgb);
    }
}

/// Even-odd crossing test.
fn inside(px: f64, py: f64, poly: &[(f64, f64)]) -> bool {
    let mut c = false;
    let mut j = poly.len() - 1;
    for i in 0..poly.len() {
        let (xi, yi) = poly[i];
        let (xj, yj) = poly[j];
        if (yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi {
            c = !c;
        }
        j = i;
    }
    c
}

/// Renders a filled regular polygon on a white background.
///
/// `z` holds the 2dshapes factors (shape, scale, rotation, r, g, b). The
/// circumradius is `scale · width / 64` pixels, the centroid sits at the
/// image center, and a pixel takes the fill color iff its center lies
/// inside the polygon.
pub fn render_2dshape(z: &FactorSample, width: usize, height: usize) -> Result<RasterImage> {
    if width < 8 || height < 8 {
        return Err(Error::Domain(format!("image must be at least 8x8, got {width}x{height}")));
    }
    let spec = two_d_shapes_spec();
    if z.values.len() != spec.len() {
        return Err(Error::Shape {
            context: "2dshapes factors",
            expected: spec.len(),
            got: z.values.len(),
        });
    }
    for (v, s) in z.values.iter().zip(&spec) {
        if !s.contains(*v) {
            return Err(Error::Domain(format!("factor {} = {v} outside its support", s.name)));
        }
    }
    let sides = SHAPE_SIDES[z.values[0] as usize];
    let radius = z.values[1] * width as f64 / 64.0;
    let period = TAU / sides as f64;
    let mut rot = (z.values[2].rem_euclid(period) / ROTATION_QUANTUM).round() * ROTATION_QUANTUM;
    if rot >= period - 0.5 * ROTATION_QUANTUM {
        rot = 0.0;
    }
    let color = [z.values[3] as f32, z.values[4] as f32, z.values[5] as f32];

    let (cx, cy) = (width as f64 / 2.0, height as f64 / 2.0);
    let poly: Vec<(f64, f64)> = (0..sides)
        .map(|k| {
            let phi = rot + period * k as f64;
            // image y grows downward; positive rotation is counter-clockwise on screen
            (cx + radius * phi.cos(), cy - radius * phi.sin())
        })
        .collect();

    let mut img = RasterImage::filled(width, height, [1.0; 3]);
    for y in 0..height {
        for x in 0..width {
            if inside(x as f64 + 0.5, y as f64 + 0.5, &poly) {
                img.set(x, y, color);
            }
        }
    }
    Ok(img)
}

/// `n` rendered 2dshapes samples with factors drawn from `seed`.
pub fn two_d_shapes_dataset(n: usize, width: usize, height: usize, seed: u64) -> Result<Dataset> {
    let specs = two_d_shapes_spec();
    let draws = sample_factors(&specs, n, seed)?;
    let images = draws
        .par_iter()
        .map(|z| render_2dshape(z, width, height))
        .collect::<Result<Vec<_>>>()?;
    let shape = SampleShape {
        width,
        height,
        channels: 3,
    };
    let mut samples = Array2::zeros((n, shape.len()));
    let mut factors = Array2::zeros((n, specs.len()));
    for (r, (img, z)) in images.iter().zip(&draws).enumerate() {
        samples.row_mut(r).assign(&Array1::from(img.data.clone()));
        factors.row_mut(r).assign(&Array1::from(z.values.clone()));
    }
    Dataset::new(shape, specs, factors, samples)
}
