use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::factors::{sample_factors, FactorKind, FactorSpec};
use super::{Dataset, SampleShape};
use crate::error::{Error, Result};

/// Dimension of every synthetic sample.
pub const SYNTHETIC_DIM: usize = 16;
const HIDDEN: usize = 32;

/// `K` factors for the synthetic map. `periodic` makes every factor an
/// angle; otherwise angles alternate with `U[-1, 1]` factors.
pub fn synthetic_factor_specs(k: usize, periodic: bool) -> Result<Vec<FactorSpec>> {
    if k == 0 || k > 8 {
        return Err(Error::Config(format!("synthetic datasets support 1..=8 factors, got {k}")));
    }
    Ok((0..k)
        .map(|i| {
            if periodic || i % 2 == 0 {
                FactorSpec::angle(&format!("angle_{i}"))
            } else {
                FactorSpec::uniform(&format!("linear_{i}"), -1.0, 1.0)
            }
        })
        .collect())
}

/// A fixed random smooth map `x = ½ + 0.45·tanh(W₂ tanh(W₁ φ(z) + b₁) + b₂)`.
///
/// `φ` feeds angles as `(cos, sin)` and other factors rescaled to `[-1, 1]`,
/// so angular factors are exactly periodic.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticMap {
    specs: Vec<FactorSpec>,
    w1: Array2<f64>,
    b1: Array1<f64>,
    w2: Array2<f64>,
    b2: Array1<f64>,
}

impl SyntheticMap {
    pub fn new(specs: &[FactorSpec], seed: u64) -> Result<Self> {
        for s in specs {
            s.validate()?;
        }
        let features: usize = specs
            .iter()
            .map(|s| if s.kind == FactorKind::Angle { 2 } else { 1 })
            .sum();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut gauss = |scale: f64| -> f64 {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * scale
        };
        let w1 = Array2::from_shape_simple_fn((features, HIDDEN), || gauss(2.5 / (features as f64).sqrt()));
        let b1 = Array1::from_shape_simple_fn(HIDDEN, || gauss(0.3));
        let w2 = Array2::from_shape_simple_fn((HIDDEN, SYNTHETIC_DIM), || gauss(3.0 / (HIDDEN as f64).sqrt()));
        let b2 = Array1::from_shape_simple_fn(SYNTHETIC_DIM, || gauss(0.2));
        Ok(SyntheticMap {
            specs: specs.to_vec(),
            w1,
            b1,
            w2,
            b2,
        })
    }

    fn features(&self, z: &[f64]) -> Array1<f64> {
        let mut out = Vec::with_capacity(self.w1.nrows());
        for (v, s) in z.iter().zip(&self.specs) {
            match s.kind {
                FactorKind::Angle => {
                    out.push(v.cos());
                    out.push(v.sin());
                }
                FactorKind::Uniform { lo, hi } => out.push(2.0 * (v - lo) / (hi - lo) - 1.0),
                FactorKind::Categorical { n } => out.push(2.0 * v / (n - 1) as f64 - 1.0),
            }
        }
        Array1::from(out)
    }

    /// Noiseless sample for one factor vector, values in `(0.05, 0.95)`.
    pub fn apply(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.specs.len() {
            return Err(Error::Shape {
                context: "synthetic factors",
                expected: self.specs.len(),
                got: z.len(),
            });
        }
        let h = (self.features(z).dot(&self.w1) + &self.b1).mapv(f64::tanh);
        let x = (h.dot(&self.w2) + &self.b2).mapv(|v| 0.5 + 0.45 * v.tanh());
        Ok(x.to_vec())
    }
}

/// `n` samples of the map defined by `seed`, with optional Gaussian noise of
/// standard deviation `noise` (clamped to `[0, 1]`).
pub fn synthetic_map_dataset(specs: &[FactorSpec], n: usize, seed: u64, noise: f64) -> Result<Dataset> {
    if specs.is_empty() || specs.len() > 8 {
        return Err(Error::Config(format!(
            "synthetic datasets support 1..=8 factors, got {}",
            specs.len()
        )));
    }
    if !(noise >= 0.0) || !noise.is_finite() {
        return Err(Error::Config(format!("noise must be >= 0, got {noise}")));
    }
    let map = SyntheticMap::new(specs, seed)?;
    let draws = sample_factors(specs, n, seed.wrapping_add(0x9E37_79B9_7F4A_7C15))?;
    let mut noise_rng = ChaCha8Rng::seed_from_u64(seed);
    noise_rng.set_stream(2);
    let normal = Normal::new(0.0, noise.max(f64::MIN_POSITIVE)).expect("valid normal");
    let mut factors = Array2::zeros((n, specs.len()));
    let mut samples = Array2::zeros((n, SYNTHETIC_DIM));
    for (r, d) in draws.iter().enumerate() {
        factors.row_mut(r).assign(&Array1::from(d.values.clone()));
        for (c, v) in map.apply(&d.values)?.into_iter().enumerate() {
            let v = if noise > 0.0 { v + normal.sample(&mut noise_rng) } else { v };
            samples[[r, c]] = v.clamp(0.0, 1.0) as f32;
        }
    }
    Dataset::new(
        SampleShape {
            width: SYNTHETIC_DIM,
            height: 1,
            channels: 1,
        },
        specs.to_vec(),
        factors,
        samples,
    )
}
