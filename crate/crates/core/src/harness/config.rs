use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{synthetic_factor_specs, synthetic_map_dataset, two_d_shapes_dataset, Dataset};
use crate::error::{Error, Result};
use crate::metrics::MetricsConfig;
use crate::vae::TrainConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    Shapes2d,
    Synthetic,
}

fn default_side() -> usize {
    16
}

fn default_factors() -> usize {
    3
}

fn default_periodic() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub kind: DatasetKind,
    pub size: usize,
    pub seed: u64,
    /// Image side lengths (2dshapes only).
    #[serde(default = "default_side")]
    pub width: usize,
    #[serde(default = "default_side")]
    pub height: usize,
    /// Factor count and factor type (synthetic only).
    #[serde(default = "default_factors")]
    pub factors: usize,
    #[serde(default = "default_periodic")]
    pub periodic: bool,
    #[serde(default)]
    pub noise: f64,
    /// Load this TDDS1 file instead of generating from the fields above.
    #[serde(default)]
    pub path: Option<PathBuf>,
}

impl DatasetConfig {
    pub fn synthetic(size: usize, factors: usize, seed: u64) -> Self {
        DatasetConfig {
            kind: DatasetKind::Synthetic,
            size,
            seed,
            width: default_side(),
            height: default_side(),
            factors,
            periodic: default_periodic(),
            noise: 0.0,
            path: None,
        }
    }

    pub fn shapes2d(size: usize, side: usize, seed: u64) -> Self {
        DatasetConfig {
            kind: DatasetKind::Shapes2d,
            width: side,
            height: side,
            ..Self::synthetic(size, default_factors(), seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.size < 2 {
            return Err(Error::Config(format!("dataset size must be >= 2, got {}", self.size)));
        }
        if self.kind == DatasetKind::Shapes2d && (self.width < 8 || self.height < 8) {
            return Err(Error::Config(format!(
                "images must be at least 8x8, got {}x{}",
                self.width, self.height
            )));
        }
        if !(self.noise >= 0.0) || !self.noise.is_finite() {
            return Err(Error::Config(format!("noise must be >= 0, got {}", self.noise)));
        }
        Ok(())
    }

    /// Generates the dataset described by this block (ignores `path`).
    pub fn generate(&self) -> Result<Dataset> {
        self.validate()?;
        match self.kind {
            DatasetKind::Shapes2d => two_d_shapes_dataset(self.size, self.width, self.height, self.seed),
            DatasetKind::Synthetic => {
                let specs = synthetic_factor_specs(self.factors, self.periodic)?;
                synthetic_map_dataset(&specs, self.size, self.seed, self.noise)
            }
        }
    }

    /// Loads `path` if set, otherwise generates.
    pub fn obtain(&self) -> Result<Dataset> {
        match &self.path {
            Some(p) => crate::data::load_dataset(p),
            None => self.generate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub betas: Vec<f64>,
    /// Torus dimensions `D`.
    pub circles: Vec<usize>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.betas.is_empty() || self.circles.is_empty() {
            return Err(Error::Config("sweep grids must be non-empty".into()));
        }
        Ok(())
    }
}

fn default_steps() -> usize {
    12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraverseConfig {
    pub circle: usize,
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Angles for the circles held fixed; zeros when absent.
    #[serde(default)]
    pub anchor: Option<Vec<f64>>,
}

/// Everything one experiment needs. Seeds have no defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    pub model: TrainConfig,
    pub metrics: MetricsConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub traverse: Option<TraverseConfig>,
    /// Checkpoint for `evaluate`/`traverse`; `<out>/model.ckpt` when absent.
    #[serde(default)]
    pub checkpoint: Option<PathBuf>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(dataset: DatasetConfig, model: TrainConfig, metrics: MetricsConfig) -> Self {
        ExperimentConfig {
            dataset,
            model,
            metrics,
            sweep: None,
            traverse: None,
            checkpoint: None,
            output_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.dataset.validate()?;
        self.model.validate()?;
        self.metrics.validate()?;
        if let Some(s) = &self.sweep {
            s.validate()?;
        }
        Ok(())
    }

    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|source| Error::Json {
            path: origin.to_path_buf(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text, path)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
