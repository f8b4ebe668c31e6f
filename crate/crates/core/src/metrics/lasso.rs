//! Lasso regression by cyclic coordinate descent, with k-fold
//! cross-validation over a fixed regularization grid.
//!
//! Objective: `(1/2N)·||y − Xw||² + α·||w||₁`, no intercept (inputs are
//! standardized).

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 10_000;
pub const COORDINATE_TOLERANCE: f64 = 1e-8;

/// Regularization strengths searched by cross-validation.
pub const ALPHA_GRID: [f64; 10] = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.1, 0.2, 0.4, 0.8, 1.0];
pub const CV_FOLDS: usize = 10;

pub fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

pub fn lasso_objective(x: ArrayView2<f64>, y: ArrayView1<f64>, w: &[f64], alpha: f64) -> f64 {
    let n = x.nrows() as f64;
    let pred = x.dot(&ArrayView1::from(w));
    let rss = pred.iter().zip(y).map(|(p, t)| (t - p) * (t - p)).sum::<f64>();
    rss / (2.0 * n) + alpha * w.iter().map(|v| v.abs()).sum::<f64>()
}

/// Smallest `α` whose lasso solution is all zeros: `max_j |x_jᵀ y| / N`.
pub fn alpha_max(x: ArrayView2<f64>, y: ArrayView1<f64>) -> f64 {
    let n = x.nrows() as f64;
    x.columns().into_iter().map(|c| (c.dot(&y) / n).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub weights: Vec<f64>,
    pub sweeps: usize,
    /// False when the sweep budget ran out first; `weights` is then the
    /// last iterate.
    pub converged: bool,
    /// Largest coordinate change in the final sweep.
    pub max_change: f64,
    pub residual_norm: f64,
}

impl LassoFit {
    /// [`Error::Convergence`] with the residual diagnostics if the fit
    /// stopped on the sweep budget.
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::Convergence {
                sweeps: self.sweeps,
                max_change: self.max_change,
                residual_norm: self.residual_norm,
            })
        }
    }
}

/// Cyclic coordinate descent from zero until the largest coordinate change in
/// a sweep drops below [`COORDINATE_TOLERANCE`] or [`MAX_SWEEPS`] sweeps have
/// run. Hitting the budget is not an error; see [`LassoFit::converged`].
pub fn lasso_fit(x: ArrayView2<f64>, y: ArrayView1<f64>, alpha: f64) -> Result<LassoFit> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::Config(format!("alpha must be >= 0, got {alpha}")));
    }
    if x.nrows() != y.len() {
        return Err(Error::Shape {
            context: "lasso targets",
            expected: x.nrows(),
            got: y.len(),
        });
    }
    if x.nrows() == 0 {
        return Err(Error::Config("lasso needs at least one sample".into()));
    }
    let n = x.nrows() as f64;
    let p = x.ncols();
    if alpha >= alpha_max(x, y) {
        return Ok(LassoFit {
            weights: vec![0.0; p],
            sweeps: 0,
            converged: true,
            max_change: 0.0,
            residual_norm: y.dot(&y).sqrt(),
        });
    }
    // columns as contiguous rows
    let xt: Array2<f64> = x.t().as_standard_layout().into_owned();
    let col_sq: Vec<f64> = xt.rows().into_iter().map(|c| c.dot(&c) / n).collect();
    let mut w = vec![0.0; p];
    let mut resid: Array1<f64> = y.to_owned();

    for sweep in 1..=MAX_SWEEPS {
        let mut max_change = 0.0f64;
        for j in 0..p {
            if col_sq[j] == 0.0 {
                continue;
            }
            let col = xt.row(j);
            let rho = col.dot(&resid) / n + col_sq[j] * w[j];
            let updated = soft_threshold(rho, alpha) / col_sq[j];
            let delta = updated - w[j];
            if delta != 0.0 {
                resid.scaled_add(-delta, &col);
                w[j] = updated;
                max_change = max_change.max(delta.abs());
            }
        }
        let converged = max_change < COORDINATE_TOLERANCE;
        if converged || sweep == MAX_SWEEPS {
            let residual_norm = resid.dot(&resid).sqrt();
            if !converged {
                log::warn!(
                    "lasso (alpha {alpha}) stopped after {sweep} sweeps: max change {max_change:.3e}, residual norm {residual_norm:.6e}"
                );
            }
            return Ok(LassoFit {
                weights: w,
                sweeps: sweep,
                converged,
                max_change,
                residual_norm,
            });
        }
    }
    unreachable!("loop returns on the final sweep")
}

/// Outcome of cross-validated alpha selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoCv {
    pub alpha: f64,
    /// Weights refit on all rows at the selected alpha.
    pub weights: Vec<f64>,
    /// Mean held-out MSE per grid entry, in grid order.
    pub cv_mse: Vec<f64>,
    /// Fits (fold fits plus the final refit) that hit the sweep budget.
    pub unconverged: usize,
}

/// Fold id per row: seeded shuffle, then contiguous blocks.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = vec![0; n];
    for f in 0..folds {
        for &row in &order[f * n / folds..(f + 1) * n / folds] {
            fold[row] = f;
        }
    }
    fold
}

/// Picks the alpha with the lowest mean held-out MSE; ties go to the larger
/// (sparser) alpha.
pub fn lasso_cv(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    grid: &[f64],
    folds: usize,
    seed: u64,
) -> Result<LassoCv> {
    if grid.is_empty() {
        return Err(Error::Config("alpha grid is empty".into()));
    }
    if folds < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {folds}")));
    }
    let n = x.nrows();
    if n < folds {
        return Err(Error::Config(format!("{n} samples cannot fill {folds} folds")));
    }
    let fold = fold_assignment(n, folds, seed);
    let splits: Vec<(Vec<usize>, Vec<usize>)> = (0..folds)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| fold[i] == f);
            (train, test)
        })
        .collect();

    let mut cv_mse = Vec::with_capacity(grid.len());
    let mut unconverged = 0;
    for &alpha in grid {
        let mut total = 0.0;
        for (train, test) in &splits {
            let xtr = x.select(Axis(0), train);
            let ytr = y.select(Axis(0), train);
            let fit = lasso_fit(xtr.view(), ytr.view(), alpha)?;
            unconverged += usize::from(!fit.converged);
            let xte = x.select(Axis(0), test);
            let pred = xte.dot(&Array1::from(fit.weights));
            let mse = test
                .iter()
                .zip(&pred)
                .map(|(&i, p)| (y[i] - p) * (y[i] - p))
                .sum::<f64>()
                / test.len() as f64;
            total += mse;
        }
        cv_mse.push(total / folds as f64);
    }

    let mut best = 0;
    for k in 1..grid.len() {
        let scale = 1e-12 * cv_mse[best].abs().max(1e-300);
        let better = cv_mse[k] < cv_mse[best] - scale;
        let tie = (cv_mse[k] - cv_mse[best]).abs() <= scale;
        if better || (tie && grid[k] > grid[best]) {
            best = k;
        }
    }
    let alpha = grid[best];
    let fit = lasso_fit(x, y, alpha)?;
    unconverged += usize::from(!fit.converged);
    Ok(LassoCv {
        alpha,
        weights: fit.weights,
        cv_mse,
        unconverged,
    })
}
