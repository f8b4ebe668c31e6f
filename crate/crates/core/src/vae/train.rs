use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamState};
use super::model::{Architecture, LatentMode, Vae};
use crate::error::{Error, Result};

fn default_encoder_hidden() -> Vec<usize> {
    vec![256, 128]
}

fn default_decoder_hidden() -> Vec<usize> {
    vec![128, 256]
}

/// Optimization settings. The seed has no default: every run must name one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub latent: LatentMode,
    pub beta: f64,
    #[serde(default = "TrainConfig::default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "TrainConfig::default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "TrainConfig::default_epochs")]
    pub epochs: usize,
    pub seed: u64,
    #[serde(default = "default_encoder_hidden")]
    pub encoder_hidden: Vec<usize>,
    #[serde(default = "default_decoder_hidden")]
    pub decoder_hidden: Vec<usize>,
}

impl TrainConfig {
    fn default_learning_rate() -> f64 {
        1e-4
    }

    fn default_batch_size() -> usize {
        144
    }

    fn default_epochs() -> usize {
        50
    }

    /// Full-protocol optimizer settings (Adam at 1e-4, batch 144, 50 epochs)
    /// with the desk-scale dense widths.
    pub fn new(latent: LatentMode, beta: f64, seed: u64) -> Self {
        TrainConfig {
            latent,
            beta,
            learning_rate: Self::default_learning_rate(),
            batch_size: Self::default_batch_size(),
            epochs: Self::default_epochs(),
            seed,
            encoder_hidden: default_encoder_hidden(),
            decoder_hidden: default_decoder_hidden(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.latent.validate()?;
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::Config(format!("beta must be >= 0, got {}", self.beta)));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.encoder_hidden.contains(&0) || self.decoder_hidden.contains(&0) {
            return Err(Error::Config("hidden widths must be positive".into()));
        }
        Ok(())
    }

    pub fn architecture(&self, input_dim: usize) -> Architecture {
        Architecture {
            input_dim,
            encoder_hidden: self.encoder_hidden.clone(),
            decoder_hidden: self.decoder_hidden.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean minibatch objective over the epoch.
    pub train_loss: f64,
    pub train_reconstruction: f64,
    pub train_kl: f64,
    /// Per-element reconstruction MSE on the validation set (posterior means).
    pub validation_mse: f64,
}

/// Training history and the best-validation model.
#[derive(Debug, Clone, Serialize)]
pub struct TrainReport {
    pub latent: LatentMode,
    pub beta: f64,
    pub seed: u64,
    /// Validation MSE of the freshly initialized model (epoch 0).
    pub initial_validation_mse: f64,
    pub epochs: Vec<EpochRecord>,
    /// 1-based epoch with the lowest validation MSE.
    pub best_epoch: usize,
    pub best_validation_mse: f64,
    #[serde(skip)]
    pub model: Vae,
}

impl PartialEq for TrainReport {
    fn eq(&self, other: &Self) -> bool {
        self.latent == other.latent
            && self.beta.to_bits() == other.beta.to_bits()
            && self.seed == other.seed
            && self.initial_validation_mse.to_bits() == other.initial_validation_mse.to_bits()
            && self.epochs == other.epochs
            && self.best_epoch == other.best_epoch
            && self.model == other.model
    }
}

/// Samples only, already split. Ground-truth factors never reach training.
#[derive(Debug, Clone, Copy)]
pub struct TrainingData<'a> {
    pub train: ArrayView2<'a, f64>,
    pub validation: ArrayView2<'a, f64>,
}

/// Trains a fresh model and keeps the parameters with the lowest validation
/// reconstruction MSE. Fully determined by `config.seed`.
pub fn train(config: &TrainConfig, data: TrainingData<'_>) -> Result<TrainReport> {
    train_with_progress(config, data, |_| {})
}

pub fn train_with_progress(
    config: &TrainConfig,
    data: TrainingData<'_>,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainReport> {
    config.validate()?;
    if data.train.nrows() == 0 || data.validation.nrows() == 0 {
        return Err(Error::Config("training and validation sets must be non-empty".into()));
    }
    if data.train.ncols() != data.validation.ncols() {
        return Err(Error::Shape {
            context: "validation samples",
            expected: data.train.ncols(),
            got: data.validation.ncols(),
        });
    }
    let mut model = Vae::new(config.latent, &config.architecture(data.train.ncols()), config.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);

    let initial_validation_mse = model.reconstruction_mse(data.validation)?;
    let mut best = (0usize, initial_validation_mse, model.clone());
    let mut params = model.flatten_params();
    let mut adam = AdamState::new(params.len());
    let mut order: Vec<usize> = (0..data.train.nrows()).collect();
    let gdim = config.latent.gaussian_dim();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let (mut loss_sum, mut rec_sum, mut kl_sum, mut batches) = (0.0, 0.0, 0.0, 0usize);
        for chunk in order.chunks(config.batch_size) {
            let batch = data.train.select(Axis(0), chunk);
            let noise = Array2::from_shape_simple_fn((chunk.len(), gdim), || {
                StandardNormal.sample(&mut rng)
            });
            let out = model.elbo_loss(batch.view(), config.beta, noise.view())?;
            adam_step(&mut params, &out.grads.flatten(), &mut adam, config.learning_rate)?;
            model.load_params(&params)?;
            loss_sum += out.loss;
            rec_sum += out.reconstruction;
            kl_sum += out.kl;
            batches += 1;
        }
        let validation_mse = model.reconstruction_mse(data.validation)?;
        let record = EpochRecord {
            epoch,
            train_loss: loss_sum / batches as f64,
            train_reconstruction: rec_sum / batches as f64,
            train_kl: kl_sum / batches as f64,
            validation_mse,
        };
        on_epoch(&record);
        if validation_mse < best.1 || best.0 == 0 {
            best = (epoch, validation_mse, model.clone());
        }
        history.push(record);
    }

    let (best_epoch, best_validation_mse, model) = best;
    Ok(TrainReport {
        latent: config.latent,
        beta: config.beta,
        seed: config.seed,
        initial_validation_mse,
        epochs: history,
        best_epoch,
        best_validation_mse,
        model,
    })
}
