use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FactorKind {
    /// `U[lo, hi)`.
    Uniform { lo: f64, hi: f64 },
    /// `U[0, 2π)`.
    Angle,
    /// Uniform over `{0, …, n-1}`, stored as the index cast to `f64`.
    Categorical { n: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorSpec {
    pub name: String,
    pub kind: FactorKind,
}

impl FactorSpec {
    pub fn uniform(name: &str, lo: f64, hi: f64) -> Self {
        FactorSpec {
            name: name.into(),
            kind: FactorKind::Uniform { lo, hi },
        }
    }

    pub fn angle(name: &str) -> Self {
        FactorSpec {
            name: name.into(),
            kind: FactorKind::Angle,
        }
    }

    pub fn categorical(name: &str, n: usize) -> Self {
        FactorSpec {
            name: name.into(),
            kind: FactorKind::Categorical { n },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            FactorKind::Uniform { lo, hi } if !(lo.is_finite() && hi.is_finite() && lo < hi) => {
                Err(Error::Config(format!(
                    "factor {}: need finite lo < hi, got [{lo}, {hi}]",
                    self.name
                )))
            }
            FactorKind::Categorical { n } if n < 2 => Err(Error::Config(format!(
                "factor {}: categorical needs at least 2 levels",
                self.name
            ))),
            _ => Ok(()),
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        match self.kind {
            FactorKind::Uniform { lo, hi } => v >= lo && v <= hi,
            FactorKind::Angle => (0.0..=TAU).contains(&v),
            FactorKind::Categorical { n } => v >= 0.0 && v < n as f64 && v.fract() == 0.0,
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            FactorKind::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            FactorKind::Angle => TAU * rng.random::<f64>(),
            FactorKind::Categorical { n } => rng.random_range(0..n) as f64,
        }
    }
}

/// One draw of all `K` factors.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorSample {
    pub values: Vec<f64>,
}

/// i.i.d. draws, fully determined by `seed`.
pub fn sample_factors(specs: &[FactorSpec], count: usize, seed: u64) -> Result<Vec<FactorSample>> {
    for s in specs {
        s.validate()?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| FactorSample {
            values: specs.iter().map(|s| s.draw(&mut rng)).collect(),
        })
        .collect())
}

/// Factors of the 2dshapes dataset, in column order: shape (triangle,
/// square, pentagon, hexagon), scale `U[20, 40]` in 64-pixel canvas units,
/// rotation, and red/green/blue fill intensities.
pub fn two_d_shapes_spec() -> Vec<FactorSpec> {
    vec![
        FactorSpec::categorical("shape", 4),
        FactorSpec::uniform("scale", 20.0, 40.0),
        FactorSpec::angle("rotation"),
        FactorSpec::uniform("red", 0.0, 1.0),
        FactorSpec::uniform("green", 0.0, 1.0),
        FactorSpec::uniform("blue", 0.0, 1.0),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_and_in_support() {
        let spec = two_d_shapes_spec();
        let a = sample_factors(&spec, 500, 3).unwrap();
        assert_eq!(a, sample_factors(&spec, 500, 3).unwrap());
        assert_ne!(a, sample_factors(&spec, 500, 4).unwrap());
        for s in &a {
            for (v, f) in s.values.iter().zip(&spec) {
                assert!(f.contains(*v), "{} = {v}", f.name);
            }
        }
    }

    #[test]
    fn marginals() {
        let spec = two_d_shapes_spec();
        let draws = sample_factors(&spec, 10_000, 11).unwrap();
        let n = draws.len() as f64;
        let scale_mean = draws.iter().map(|s| s.values[1]).sum::<f64>() / n;
        assert!((scale_mean - 30.0).abs() < 0.5, "{scale_mean}");
        for k in 0..4 {
            let freq = draws.iter().filter(|s| s.values[0] == k as f64).count() as f64 / n;
            assert!((freq - 0.25).abs() < 0.02, "shape {k}: {freq}");
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(FactorSpec::uniform("x", 1.0, 1.0).validate().is_err());
        assert!(FactorSpec::uniform("x", f64::NAN, 1.0).validate().is_err());
        assert!(FactorSpec::categorical("c", 1).validate().is_err());
        assert!(sample_factors(&[FactorSpec::categorical("c", 1)], 3, 0).is_err());
    }

    #[test]
    fn spec_json_shape() {
        let s = serde_json::to_string(&FactorSpec::uniform("scale", 20.0, 40.0)).unwrap();
        assert_eq!(s, r#"{"name":"scale","kind":{"type":"uniform","lo":20.0,"hi":40.0}}"#);
    }
}
