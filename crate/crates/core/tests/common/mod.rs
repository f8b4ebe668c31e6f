//! Oracles shared by the integration tests and the acceptance runner.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};
use torus_vae::geometry::{circular_distance, embed_angles, recover_angles, sample_circle, AngleVector};
use torus_vae::vae::{Architecture, LatentMode, TrainConfig, Vae};

/// One-sample Kolmogorov–Smirnov statistic against `U[0, 2π)`.
pub fn ks_uniform(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = x / TAU;
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Angles of `n` circle draws with `μ = 0`, `σ = 1`.
pub fn standard_circle_angles(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let eps = [StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)];
            sample_circle([0.0, 0.0], [1.0, 1.0], eps).unwrap().angle()
        })
        .collect()
}

/// Random angle vectors of length `d`; every fifth has its angles snapped to
/// multiples of π/2 so the zero-sine and zero-cosine branches are covered.
pub fn angle_vectors(d: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            (0..d)
                .map(|_| {
                    if i % 5 == 4 {
                        f64::from(rng.random_range(0..4u8)) * TAU / 4.0
                    } else {
                        rng.random_range(0.0..TAU)
                    }
                })
                .collect()
        })
        .collect()
}

/// Largest circular error of `recover_angles(embed(θ))` over the inputs.
pub fn max_round_trip_error(inputs: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for theta in inputs {
        let v = AngleVector::new(theta.clone()).unwrap();
        let back = recover_angles(&embed_angles(&v).unwrap()).unwrap();
        for (a, b) in back.as_slice().iter().zip(v.as_slice()) {
            worst = worst.max(circular_distance(*a, *b));
        }
    }
    worst
}

/// Exact lasso minimizer by enumerating sign patterns `s ∈ {-1, 0, 1}^p`
/// and solving the KKT system of each active set; returns the lowest
/// objective among KKT-consistent candidates.
pub fn lasso_kkt_oracle(x: ArrayView2<f64>, y: ArrayView1<f64>, alpha: f64) -> (Vec<f64>, f64) {
    let n = x.nrows() as f64;
    let p = x.ncols();
    let gram = x.t().dot(&x) / n;
    let xty = x.t().dot(&y) / n;
    let mut best: Option<(Vec<f64>, f64)> = None;
    for code in 0..3usize.pow(p as u32) {
        let mut signs = vec![0i32; p];
        let mut c = code;
        for s in signs.iter_mut() {
            *s = (c % 3) as i32 - 1;
            c /= 3;
        }
        let active: Vec<usize> = (0..p).filter(|&j| signs[j] != 0).collect();
        let mut w = vec![0.0; p];
        if !active.is_empty() {
            let k = active.len();
            let a = Array2::from_shape_fn((k, k), |(i, j)| gram[[active[i], active[j]]]);
            let b = Array1::from_shape_fn(k, |i| xty[active[i]] - alpha * f64::from(signs[active[i]]));
            let Some(sol) = solve(a, b) else { continue };
            if active.iter().zip(&sol).any(|(&j, &v)| v * f64::from(signs[j]) <= 0.0) {
                continue;
            }
            for (&j, v) in active.iter().zip(sol) {
                w[j] = v;
            }
        }
        // inactive coordinates: |x_jᵀ r / N| ≤ α
        let grad = &xty - &gram.dot(&Array1::from(w.clone()));
        if (0..p).any(|j| signs[j] == 0 && grad[j].abs() > alpha * (1.0 + 1e-10)) {
            continue;
        }
        let obj = torus_vae::metrics::lasso_objective(x, y, &w, alpha);
        if best.as_ref().is_none_or(|(_, o)| obj < *o) {
            best = Some((w, obj));
        }
    }
    best.expect("a KKT point always exists")
}

/// Gaussian elimination with partial pivoting.
fn solve(mut a: Array2<f64>, mut b: Array1<f64>) -> Option<Vec<f64>> {
    let k = b.len();
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| a[[i, col]].abs().total_cmp(&a[[j, col]].abs()))?;
        if a[[piv, col]].abs() < 1e-14 {
            return None;
        }
        for j in 0..k {
            a.swap([col, j], [piv, j]);
        }
        b.swap(col, piv);
        for r in col + 1..k {
            let f = a[[r, col]] / a[[col, col]];
            for j in col..k {
                a[[r, j]] -= f * a[[col, j]];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; k];
    for r in (0..k).rev() {
        let s: f64 = (r + 1..k).map(|j| a[[r, j]] * x[j]).sum();
        x[r] = (b[r] - s) / a[[r, r]];
    }
    Some(x)
}

/// A random `n × p` standard-normal design and target.
pub fn random_lasso_instance(n: usize, p: usize, seed: u64) -> (Array2<f64>, Array1<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Array2<f64> = Array2::from_shape_simple_fn((n, p), || StandardNormal.sample(&mut rng));
    let w = Array1::from_shape_simple_fn(p, || rng.random_range(-1.0..1.0));
    let noise = Array1::from_shape_simple_fn(n, || {
        let e: f64 = StandardNormal.sample(&mut rng);
        0.3 * e
    });
    let y = x.dot(&w) + noise;
    (x, y)
}

/// Desk-scale optimizer settings used by the training-based checks: Adam at
/// 3e-3 for 100 epochs with the default batch size and widths.
pub fn desk_config(latent: LatentMode, beta: f64, seed: u64) -> TrainConfig {
    let mut c = TrainConfig::new(latent, beta, seed);
    c.learning_rate = 3e-3;
    c.epochs = 100;
    c
}

pub const STEP: f64 = 1e-5;
/// Denominator floor so parameters with near-zero gradient are compared
/// absolutely rather than amplified.
pub const FLOOR: f64 = 1e-3;

/// Worst relative error between analytic and central-difference gradients
/// of the loss over every parameter of a tiny model, and the parameter count.
pub fn max_relative_error(mode: LatentMode, beta: f64, seed: u64) -> (f64, usize) {
    let arch = Architecture {
        input_dim: 6,
        encoder_hidden: vec![8],
        decoder_hidden: vec![8],
    };
    let mut model = Vae::new(mode, &arch, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
    let x = Array2::from_shape_simple_fn((3, 6), || rng.random_range(-0.9..0.9));
    let noise = Array2::from_shape_simple_fn((3, mode.gaussian_dim()), || StandardNormal.sample(&mut rng));
    // nonzero biases so no relu sits exactly at its kink
    let mut params = model.flatten_params();
    for p in params.iter_mut() {
        *p += rng.random_range(-0.05..0.05);
    }
    model.load_params(&params).unwrap();

    let analytic = model.elbo_loss(x.view(), beta, noise.view()).unwrap().grads.flatten();
    assert_eq!(analytic.len(), params.len());
    let mut worst = 0.0f64;
    for i in 0..params.len() {
        let mut p = params.clone();
        p[i] = params[i] + STEP;
        model.load_params(&p).unwrap();
        let up = model.elbo_loss(x.view(), beta, noise.view()).unwrap().loss;
        p[i] = params[i] - STEP;
        model.load_params(&p).unwrap();
        let down = model.elbo_loss(x.view(), beta, noise.view()).unwrap().loss;
        let numeric = (up - down) / (2.0 * STEP);
        let denom = analytic[i].abs().max(numeric.abs()).max(FLOOR);
        worst = worst.max((analytic[i] - numeric).abs() / denom);
    }
    (worst, params.len())
}

/// SHA-256 of every file under `dir`, keyed by relative path.
pub fn tree_hashes(dir: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let digest = Sha256::digest(std::fs::read(&p).unwrap());
                let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
                out.insert(p.strip_prefix(dir).unwrap().display().to_string(), hex);
            }
        }
    }
    out
}
