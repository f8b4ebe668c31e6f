use ndarray::{Array2, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::{Activation, DenseNetwork, NetworkGrads};
use crate::error::{Error, Result};
use crate::geometry::{
    self, embedding_len, kl_component, AngleVector, CircleTuple, GaussianPairParams,
};

/// Shape of the latent space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatentMode {
    /// `D` circles; the decoder sees the `2^D + D` embedding.
    Torus { circles: usize },
    /// Plain Gaussian β-VAE latent of dimension `L`.
    Euclidean { dim: usize },
}

impl LatentMode {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LatentMode::Torus { circles } if circles == 0 || circles > 12 => Err(Error::Config(
                format!("torus circles must be in 1..=12, got {circles}"),
            )),
            LatentMode::Euclidean { dim: 0 } => {
                Err(Error::Config("euclidean latent dim must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    /// Number of Gaussian components (`2D` or `L`).
    pub fn gaussian_dim(&self) -> usize {
        match *self {
            LatentMode::Torus { circles } => 2 * circles,
            LatentMode::Euclidean { dim } => dim,
        }
    }

    pub fn encoder_outputs(&self) -> usize {
        2 * self.gaussian_dim()
    }

    pub fn decoder_inputs(&self) -> usize {
        match *self {
            LatentMode::Torus { circles } => embedding_len(circles),
            LatentMode::Euclidean { dim } => dim,
        }
    }

    /// Number of scalar codes handed to the metrics (`D` angles or `L` means).
    pub fn code_dim(&self) -> usize {
        match *self {
            LatentMode::Torus { circles } => circles,
            LatentMode::Euclidean { dim } => dim,
        }
    }

    pub fn is_torus(&self) -> bool {
        matches!(self, LatentMode::Torus { .. })
    }
}

/// Posterior parameters for a batch, one row per sample.
///
/// In torus mode column `2a + α` holds component `α` of circle `a`; the raw
/// network output is laid out per circle as `[μ_a^0, μ_a^1, s_a^0, s_a^1]`
/// with `s` the log-variance. In Euclidean mode the raw output is all means
/// followed by all log-variances.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderOutput {
    pub mu: Array2<f64>,
    pub logvar: Array2<f64>,
}

impl EncoderOutput {
    /// `σ = exp(½ logvar)`.
    pub fn sigma(&self) -> Array2<f64> {
        self.logvar.mapv(|lv| (0.5 * lv).exp())
    }

    /// Torus-mode parameters of one sample.
    pub fn pair_params(&self, row: usize) -> Result<GaussianPairParams> {
        let mu = self.mu.row(row);
        let sigma = self.sigma();
        let sigma = sigma.row(row);
        let d = mu.len() / 2;
        GaussianPairParams::new(
            (0..d).map(|a| [mu[2 * a], mu[2 * a + 1]]).collect(),
            (0..d).map(|a| [sigma[2 * a], sigma[2 * a + 1]]).collect(),
        )
    }
}

fn split_raw(mode: LatentMode, raw: &Array2<f64>) -> EncoderOutput {
    let g = mode.gaussian_dim();
    let n = raw.nrows();
    let mut mu = Array2::zeros((n, g));
    let mut logvar = Array2::zeros((n, g));
    for r in 0..n {
        for c in 0..g {
            let (mi, li) = raw_index(mode, c);
            mu[[r, c]] = raw[[r, mi]];
            logvar[[r, c]] = raw[[r, li]];
        }
    }
    EncoderOutput { mu, logvar }
}

/// Raw-output columns of the mean and log-variance of Gaussian component `c`.
fn raw_index(mode: LatentMode, c: usize) -> (usize, usize) {
    match mode {
        LatentMode::Torus { .. } => {
            let (a, alpha) = (c / 2, c % 2);
            (4 * a + alpha, 4 * a + 2 + alpha)
        }
        LatentMode::Euclidean { dim } => (c, dim + c),
    }
}

/// Network widths and activations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub input_dim: usize,
    pub encoder_hidden: Vec<usize>,
    pub decoder_hidden: Vec<usize>,
}

/// Loss value, its parts, and parameter gradients (encoder then decoder).
#[derive(Debug, Clone)]
pub struct LossOutput {
    pub loss: f64,
    /// Batch mean of the per-sample squared reconstruction error.
    pub reconstruction: f64,
    /// Batch mean of the per-sample KL term (before β).
    pub kl: f64,
    pub grads: VaeGrads,
}

#[derive(Debug, Clone)]
pub struct VaeGrads {
    pub encoder: NetworkGrads,
    pub decoder: NetworkGrads,
}

impl VaeGrads {
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.encoder.flatten_into(&mut out);
        self.decoder.flatten_into(&mut out);
        out
    }
}

/// Per-sample, per-circle draw norms `|m̂_a|` and normalized points, kept
/// for the reverse pass.
struct TorusLatent {
    norms: Vec<f64>,
    points: Vec<CircleTuple>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vae {
    pub mode: LatentMode,
    pub encoder: DenseNetwork,
    pub decoder: DenseNetwork,
}

impl Vae {
    /// Dense encoder `input -> hidden… -> 2·gaussian_dim` (relu, identity
    /// head) and decoder `latent -> hidden… -> input` (relu, tanh output).
    pub fn new(mode: LatentMode, arch: &Architecture, seed: u64) -> Result<Self> {
        mode.validate()?;
        if arch.input_dim == 0 {
            return Err(Error::Config("input dimension must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut enc_dims = vec![arch.input_dim];
        enc_dims.extend(&arch.encoder_hidden);
        enc_dims.push(mode.encoder_outputs());
        let mut dec_dims = vec![mode.decoder_inputs()];
        dec_dims.extend(&arch.decoder_hidden);
        dec_dims.push(arch.input_dim);
        let encoder = DenseNetwork::init(&enc_dims, Activation::Relu, Activation::Identity, &mut rng)?;
        let decoder = DenseNetwork::init(&dec_dims, Activation::Relu, Activation::Tanh, &mut rng)?;
        Vae::from_parts(mode, encoder, decoder)
    }

    pub fn from_parts(mode: LatentMode, encoder: DenseNetwork, decoder: DenseNetwork) -> Result<Self> {
        mode.validate()?;
        if encoder.output_dim() != mode.encoder_outputs() {
            return Err(Error::Shape {
                context: "encoder output",
                expected: mode.encoder_outputs(),
                got: encoder.output_dim(),
            });
        }
        if decoder.input_dim() != mode.decoder_inputs() {
            return Err(Error::Shape {
                context: "decoder input",
                expected: mode.decoder_inputs(),
                got: decoder.input_dim(),
            });
        }
        if decoder.output_dim() != encoder.input_dim() {
            return Err(Error::Shape {
                context: "decoder output",
                expected: encoder.input_dim(),
                got: decoder.output_dim(),
            });
        }
        Ok(Vae {
            mode,
            encoder,
            decoder,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.encoder.input_dim()
    }

    pub fn num_params(&self) -> usize {
        self.encoder.num_params() + self.decoder.num_params()
    }

    pub fn flatten_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        self.encoder.flatten_params_into(&mut out);
        self.decoder.flatten_params_into(&mut out);
        out
    }

    pub fn load_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::Shape {
                context: "model parameters",
                expected: self.num_params(),
                got: flat.len(),
            });
        }
        let used = self.encoder.load_params(flat)?;
        self.decoder.load_params(&flat[used..])?;
        Ok(())
    }

    pub fn encode(&self, x: ArrayView2<f64>) -> Result<EncoderOutput> {
        let raw = self.encoder.forward(x)?;
        Ok(split_raw(self.mode, &raw))
    }

    /// Decodes a batch of decoder inputs (`2^D + D` embeddings or `L` latents).
    pub fn decode(&self, latent: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.decoder.forward(latent)
    }

    /// Deterministic decoder input from posterior means: normalized means on
    /// the torus, the means themselves in Euclidean mode.
    pub fn mean_latent(&self, enc: &EncoderOutput) -> Result<Array2<f64>> {
        match self.mode {
            LatentMode::Torus { circles } => {
                let mut out = Array2::zeros((enc.mu.nrows(), embedding_len(circles)));
                for (r, mu) in enc.mu.rows().into_iter().enumerate() {
                    let pts = (0..circles)
                        .map(|a| geometry::normalize_pair([mu[2 * a], mu[2 * a + 1]]))
                        .collect::<Result<Vec<_>>>()?;
                    let emb = geometry::embed(&pts)?;
                    out.row_mut(r).assign(&ndarray::Array1::from(emb.to_vec()));
                }
                Ok(out)
            }
            LatentMode::Euclidean { .. } => Ok(enc.mu.clone()),
        }
    }

    /// Reconstruction from posterior means.
    pub fn reconstruct(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        let enc = self.encode(x)?;
        self.decode(self.mean_latent(&enc)?.view())
    }

    /// Per-element mean squared reconstruction error using posterior means.
    pub fn reconstruction_mse(&self, x: ArrayView2<f64>) -> Result<f64> {
        if x.nrows() == 0 {
            return Err(Error::Config("cannot score an empty batch".into()));
        }
        let mut total = 0.0;
        for chunk in x.axis_chunks_iter(Axis(0), 512) {
            let rec = self.reconstruct(chunk)?;
            total += rec
                .iter()
                .zip(chunk.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        }
        Ok(total / x.len() as f64)
    }

    /// Codes for the metrics: angles recovered from the embedding of the
    /// normalized posterior means (torus), or the posterior means (Euclidean).
    pub fn codes(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        let enc = self.encode(x)?;
        match self.mode {
            LatentMode::Torus { circles } => {
                let latent = self.mean_latent(&enc)?;
                let mut out = Array2::zeros((x.nrows(), circles));
                for (r, row) in latent.rows().into_iter().enumerate() {
                    let emb = geometry::LatentEmbedding::from_flat(circles, row.as_slice().expect("standard layout"))?;
                    let angles = geometry::recover_angles(&emb)?;
                    out.row_mut(r).assign(&ndarray::ArrayView1::from(angles.as_slice()));
                }
                Ok(out)
            }
            LatentMode::Euclidean { .. } => Ok(enc.mu),
        }
    }

    /// `G(V(cos θ, sin θ))` for one angle vector.
    pub fn generate(&self, angles: &AngleVector) -> Result<Vec<f64>> {
        let LatentMode::Torus { circles } = self.mode else {
            return Err(Error::Config("generate needs a torus-mode model".into()));
        };
        if angles.len() != circles {
            return Err(Error::Shape {
                context: "angle vector",
                expected: circles,
                got: angles.len(),
            });
        }
        let emb = geometry::embed_angles(angles)?.to_vec();
        let latent = Array2::from_shape_vec((1, emb.len()), emb).expect("row vector");
        Ok(self.decode(latent.view())?.into_raw_vec_and_offset().0)
    }

    fn sample_torus(&self, enc: &EncoderOutput, noise: &ArrayView2<f64>) -> Result<(Array2<f64>, TorusLatent)> {
        let LatentMode::Torus { circles } = self.mode else {
            unreachable!("torus sampling on euclidean model")
        };
        let n = enc.mu.nrows();
        let sigma = enc.sigma();
        let mut latent = Array2::zeros((n, embedding_len(circles)));
        let mut state = TorusLatent {
            norms: Vec::with_capacity(n * circles),
            points: Vec::with_capacity(n * circles),
        };
        for r in 0..n {
            let start = state.points.len();
            for a in 0..circles {
                let c0 = 2 * a;
                let m_hat = [
                    enc.mu[[r, c0]] + sigma[[r, c0]] * noise[[r, c0]],
                    enc.mu[[r, c0 + 1]] + sigma[[r, c0 + 1]] * noise[[r, c0 + 1]],
                ];
                let p = geometry::normalize_pair(m_hat).map_err(|e| {
                    Error::Numeric(format!("sample {r}, circle {a}: {e}"))
                })?;
                state.norms.push(m_hat[0].hypot(m_hat[1]));
                state.points.push(p);
            }
            let emb = geometry::embed(&state.points[start..])?;
            let mut row = latent.row_mut(r);
            for (dst, src) in row.iter_mut().zip(emb.v_prod.iter().chain(&emb.v_orient)) {
                *dst = *src;
            }
        }
        Ok((latent, state))
    }

    /// Minibatch objective `mean_I [ ||G(V(M_I)) − x_I||² + β·KL_I ]` and its
    /// gradients. `noise` holds one standard-normal draw per Gaussian
    /// component and sample, so the result is deterministic given it.
    pub fn elbo_loss(&self, batch: ArrayView2<f64>, beta: f64, noise: ArrayView2<f64>) -> Result<LossOutput> {
        let n = batch.nrows();
        if n == 0 {
            return Err(Error::Config("empty batch".into()));
        }
        if noise.dim() != (n, self.mode.gaussian_dim()) {
            return Err(Error::Shape {
                context: "noise",
                expected: self.mode.gaussian_dim(),
                got: noise.ncols(),
            });
        }
        let enc_trace = self.encoder.forward_trace(batch)?;
        let enc = split_raw(self.mode, enc_trace.output());
        let sigma = enc.sigma();

        let (latent, torus) = match self.mode {
            LatentMode::Torus { .. } => {
                let (l, s) = self.sample_torus(&enc, &noise)?;
                (l, Some(s))
            }
            LatentMode::Euclidean { .. } => (&enc.mu + &(&sigma * &noise), None),
        };

        let dec_trace = self.decoder.forward_trace(latent.view())?;
        let diff = dec_trace.output() - &batch;
        let reconstruction = diff.iter().map(|d| d * d).sum::<f64>() / n as f64;
        let kl = enc
            .mu
            .iter()
            .zip(sigma.iter())
            .map(|(&m, &s)| kl_component(m, s))
            .sum::<f64>()
            / n as f64;
        let loss = reconstruction + beta * kl;
        if !loss.is_finite() {
            let max_abs = batch.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let max_lv = enc.logvar.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            return Err(Error::Numeric(format!(
                "non-finite loss (reconstruction {reconstruction}, kl {kl}) on batch of {n}: \
                 max |x| = {max_abs}, max logvar = {max_lv}"
            )));
        }

        let scale = 1.0 / n as f64;
        let grad_out = diff.mapv(|d| 2.0 * d * scale);
        let (grad_latent, dec_grads) = self.decoder.backward(&dec_trace, grad_out);

        // gradient w.r.t. the reparameterized Gaussian draws
        let grad_draw = match (&self.mode, &torus) {
            (LatentMode::Torus { circles }, Some(state)) => {
                torus_draw_grad(*circles, &grad_latent, state)
            }
            _ => grad_latent,
        };

        let g = self.mode.gaussian_dim();
        let mut grad_raw = Array2::zeros((n, self.mode.encoder_outputs()));
        for r in 0..n {
            for c in 0..g {
                let (mi, li) = raw_index(self.mode, c);
                let (mu, lv, s, eps) = (enc.mu[[r, c]], enc.logvar[[r, c]], sigma[[r, c]], noise[[r, c]]);
                let gd = grad_draw[[r, c]];
                grad_raw[[r, mi]] = gd + beta * scale * mu;
                grad_raw[[r, li]] = gd * eps * s * 0.5 + beta * scale * 0.5 * (lv.exp() - 1.0);
            }
        }
        let (_, enc_grads) = self.encoder.backward(&enc_trace, grad_raw);

        Ok(LossOutput {
            loss,
            reconstruction,
            kl,
            grads: VaeGrads {
                encoder: enc_grads,
                decoder: dec_grads,
            },
        })
    }
}

/// Chains dL/dV back through the tensor product and the normalization to
/// dL/dm̂ for every sample and component.
fn torus_draw_grad(circles: usize, grad_latent: &Array2<f64>, state: &TorusLatent) -> Array2<f64> {
    let n = grad_latent.nrows();
    let size = 1usize << circles;
    let mut out = Array2::zeros((n, 2 * circles));
    let mut prefix = vec![0.0; circles + 1];
    let mut suffix = vec![0.0; circles + 1];
    let mut grad_m = vec![[0.0f64; 2]; circles];
    for r in 0..n {
        let pts = &state.points[r * circles..(r + 1) * circles];
        let g = grad_latent.row(r);
        for (a, gm) in grad_m.iter_mut().enumerate() {
            *gm = [g[size + a], 0.0];
        }
        for idx in 0..size {
            let gi = g[idx];
            if gi == 0.0 {
                continue;
            }
            let comp = |a: usize| pts[a].component((idx >> (circles - 1 - a)) & 1);
            prefix[0] = 1.0;
            for a in 0..circles {
                prefix[a + 1] = prefix[a] * comp(a);
            }
            suffix[circles] = 1.0;
            for a in (0..circles).rev() {
                suffix[a] = suffix[a + 1] * comp(a);
            }
            for a in 0..circles {
                let alpha = (idx >> (circles - 1 - a)) & 1;
                grad_m[a][alpha] += gi * prefix[a] * suffix[a + 1];
            }
        }
        for a in 0..circles {
            let k = r * circles + a;
            let p = pts[a];
            let norm = state.norms[k];
            let gm = grad_m[a];
            // d(m̂/|m̂|)/dm̂ = (I − m mᵀ)/|m̂|
            let radial = gm[0] * p.m0 + gm[1] * p.m1;
            out[[r, 2 * a]] = (gm[0] - radial * p.m0) / norm;
            out[[r, 2 * a + 1]] = (gm[1] - radial * p.m1) / norm;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    fn arch(input: usize) -> Architecture {
        Architecture {
            input_dim: input,
            encoder_hidden: vec![8],
            decoder_hidden: vec![8],
        }
    }

    fn batch(n: usize, d: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_simple_fn((n, d), || rand::Rng::random_range(&mut rng, -0.9..0.9))
    }

    fn noise(n: usize, g: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_simple_fn((n, g), || StandardNormal.sample(&mut rng))
    }

    #[test]
    fn zero_head_gives_standard_posterior() {
        let mut vae = Vae::new(LatentMode::Torus { circles: 3 }, &arch(5), 1).unwrap();
        let last = vae.encoder.layers_mut().last_mut().unwrap();
        last.weights.fill(0.0);
        last.bias.fill(0.0);
        let enc = vae.encode(batch(4, 5, 2).view()).unwrap();
        assert!(enc.mu.iter().all(|&m| m == 0.0));
        assert!(enc.sigma().iter().all(|&s| s == 1.0));
        let p = enc.pair_params(0).unwrap();
        assert_eq!(geometry::gaussian_kl(&p).unwrap(), 0.0);
    }

    #[test]
    fn raw_layout_torus() {
        let mode = LatentMode::Torus { circles: 2 };
        let raw = Array2::from_shape_vec((1, 8), (0..8).map(f64::from).collect()).unwrap();
        let e = split_raw(mode, &raw);
        assert_eq!(e.mu.row(0).to_vec(), vec![0.0, 1.0, 4.0, 5.0]);
        assert_eq!(e.logvar.row(0).to_vec(), vec![2.0, 3.0, 6.0, 7.0]);
        let mode = LatentMode::Euclidean { dim: 2 };
        let raw = Array2::from_shape_vec((1, 4), (0..4).map(f64::from).collect()).unwrap();
        let e = split_raw(mode, &raw);
        assert_eq!(e.mu.row(0).to_vec(), vec![0.0, 1.0]);
        assert_eq!(e.logvar.row(0).to_vec(), vec![2.0, 3.0]);
    }

    #[test]
    fn decoder_output_bounded() {
        let vae = Vae::new(LatentMode::Torus { circles: 3 }, &arch(6), 4).unwrap();
        let latent = batch(50, 11, 5).mapv(|v| v * 40.0);
        let out = vae.decode(latent.view()).unwrap();
        assert!(out.iter().all(|v| (-1.0..=1.0).contains(v)));
        assert!(vae.decode(batch(2, 10, 1).view()).is_err());
    }

    #[test]
    fn loss_splits_into_reconstruction_and_kl() {
        for mode in [LatentMode::Torus { circles: 2 }, LatentMode::Euclidean { dim: 3 }] {
            let vae = Vae::new(mode, &arch(4), 7).unwrap();
            let x = batch(3, 4, 8);
            let eps = noise(3, mode.gaussian_dim(), 9);
            let l0 = vae.elbo_loss(x.view(), 0.0, eps.view()).unwrap();
            let l3 = vae.elbo_loss(x.view(), 3.0, eps.view()).unwrap();
            assert_eq!(l0.loss, l0.reconstruction);
            assert_eq!(l3.loss, l0.loss + 3.0 * l3.kl);
        }
    }

    #[test]
    fn elbo_rejects_bad_noise_shape() {
        let vae = Vae::new(LatentMode::Torus { circles: 2 }, &arch(4), 7).unwrap();
        let x = batch(3, 4, 8);
        assert!(vae.elbo_loss(x.view(), 1.0, noise(3, 3, 1).view()).is_err());
    }

    #[test]
    fn generate_is_periodic() {
        let vae = Vae::new(LatentMode::Torus { circles: 2 }, &arch(4), 7).unwrap();
        let a = vae.generate(&AngleVector::new(vec![0.3, 1.0]).unwrap()).unwrap();
        let b = vae
            .generate(&AngleVector::new(vec![0.3 + std::f64::consts::TAU, 1.0]).unwrap())
            .unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        let e = Vae::new(LatentMode::Euclidean { dim: 2 }, &arch(4), 7).unwrap();
        assert!(e.generate(&AngleVector::new(vec![0.3, 1.0]).unwrap()).is_err());
        assert!(vae.generate(&AngleVector::new(vec![0.3]).unwrap()).is_err());
    }

    #[test]
    fn torus_codes_are_angles_of_means() {
        let vae = Vae::new(LatentMode::Torus { circles: 3 }, &arch(5), 11).unwrap();
        let x = batch(6, 5, 12);
        let codes = vae.codes(x.view()).unwrap();
        let enc = vae.encode(x.view()).unwrap();
        for r in 0..6 {
            for a in 0..3 {
                let want = geometry::canonical_angle(enc.mu[[r, 2 * a + 1]].atan2(enc.mu[[r, 2 * a]]));
                assert!(geometry::circular_distance(codes[[r, a]], want) < 1e-9);
            }
        }
    }

    #[test]
    fn params_round_trip() {
        let vae = Vae::new(LatentMode::Euclidean { dim: 3 }, &arch(5), 1).unwrap();
        let flat = vae.flatten_params();
        let mut other = Vae::new(LatentMode::Euclidean { dim: 3 }, &arch(5), 2).unwrap();
        other.load_params(&flat).unwrap();
        assert_eq!(other, vae);
        assert!(other.load_params(&flat[1..]).is_err());
    }
}
