//! Procedural datasets with known generative factors.
//!
//! Samples are stored with values in `[0, 1]`; [`Dataset::model_inputs`] maps
//! them to `[-1, 1]` to match the decoder's tanh output range.

mod factors;
mod io;
mod ppm;
mod render;
mod synthetic;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use factors::{sample_factors, two_d_shapes_spec, FactorKind, FactorSample, FactorSpec};
pub use io::{decode_dataset, encode_dataset, load_dataset, save_dataset, DATASET_MAGIC};
pub use ppm::encode_ppm;
pub use render::{render_2dshape, two_d_shapes_dataset, RasterImage, SHAPE_SIDES};
pub use synthetic::{synthetic_factor_specs, synthetic_map_dataset, SyntheticMap, SYNTHETIC_DIM};

use crate::error::{Error, Result};

/// Layout of one sample: `width × height × channels` values, row-major with
/// interleaved channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleShape {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
}

impl SampleShape {
    pub fn len(&self) -> usize {
        self.width * self.height * self.channels
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Samples plus their ground-truth factors, row-aligned.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub shape: SampleShape,
    pub specs: Vec<FactorSpec>,
    /// `N × K`.
    pub factors: Array2<f64>,
    /// `N × shape.len()`, values in `[0, 1]`.
    pub samples: Array2<f32>,
}

impl Dataset {
    pub fn new(
        shape: SampleShape,
        specs: Vec<FactorSpec>,
        factors: Array2<f64>,
        samples: Array2<f32>,
    ) -> Result<Self> {
        if factors.nrows() != samples.nrows() {
            return Err(Error::Shape {
                context: "dataset rows",
                expected: factors.nrows(),
                got: samples.nrows(),
            });
        }
        if factors.ncols() != specs.len() {
            return Err(Error::Shape {
                context: "factor columns",
                expected: specs.len(),
                got: factors.ncols(),
            });
        }
        if samples.ncols() != shape.len() {
            return Err(Error::Shape {
                context: "sample length",
                expected: shape.len(),
                got: samples.ncols(),
            });
        }
        Ok(Dataset {
            shape,
            specs,
            factors,
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Selected samples mapped to `[-1, 1]`.
    pub fn model_inputs(&self, rows: &[usize]) -> Array2<f64> {
        self.samples
            .select(Axis(0), rows)
            .mapv(|v| 2.0 * f64::from(v) - 1.0)
    }

    pub fn factor_rows(&self, rows: &[usize]) -> Array2<f64> {
        self.factors.select(Axis(0), rows)
    }
}

/// Maps a model output in `[-1, 1]` back to a `[0, 1]` sample value.
pub fn model_to_unit(v: f64) -> f32 {
    ((v + 1.0) * 0.5).clamp(0.0, 1.0) as f32
}

/// Train/validation index split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

/// Seeded shuffle, then the first 80% train and the rest validation.
pub fn split_indices(n: usize, seed: u64) -> Result<Split> {
    if n < 2 {
        return Err(Error::Config(format!("need at least 2 samples to split, got {n}")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_val = (n / 5).max(1);
    let validation = idx.split_off(n - n_val);
    Ok(Split {
        train: idx,
        validation,
    })
}
