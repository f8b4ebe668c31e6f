//! Dense encoder/decoder networks with hand-written reverse-mode gradients,
//! Adam, and the torus-latent and Euclidean β-VAE objectives.

mod adam;
mod checkpoint;
mod model;
mod network;
mod train;

pub use adam::{adam_step, AdamState, BETA1, BETA2, EPSILON};
pub use checkpoint::{
    decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC,
};
pub use model::{Architecture, EncoderOutput, LatentMode, LossOutput, Vae, VaeGrads};
pub use network::{Activation, DenseLayer, DenseNetwork, ForwardTrace, NetworkGrads};
pub use train::{train, train_with_progress, EpochRecord, TrainConfig, TrainReport, TrainingData};
