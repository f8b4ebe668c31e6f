//! Torus-latent variational autoencoder and DCI disentanglement metrics.
//!
//! The latent space is a product of `D` circles. Each circle is sampled as
//! a normalized pair of Gaussians, and the decoder sees the tensor-product
//! embedding of the circle points. Learned angles are scored against
//! ground-truth generative factors with lasso-based importance matrices
//! (disentanglement, completeness, informativeness and the DC-score).
//!
//! Modules:
//! - [`geometry`]: circle points, the embedding and its inverse, sampling, KL.
//! - [`vae`]: dense networks with hand-written gradients, Adam, training.
//! - [`metrics`]: standardization, lasso with cross-validation, DCI report.
//! - [`data`]: procedural datasets (2dshapes, synthetic factor maps) and IO.
//! - [`harness`]: experiment configs and the `generate`/`train`/`evaluate`/
//!   `sweep`/`traverse` commands used by the `tdvae` binary.

pub mod data;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod metrics;
pub mod vae;

pub use error::{Error, Result};
