//! Disentanglement, completeness, informativeness and the DC-score from an
//! importance matrix `R` (codes × factors).

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Relative singular-value cutoff for the numerical rank.
pub const RANK_TOLERANCE: f64 = 1e-8;

/// Nonnegative `D_codes × K` matrix, `R[a][i] = |W[i][a]|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceMatrix(Array2<f64>);

impl ImportanceMatrix {
    pub fn new(r: Array2<f64>) -> Result<Self> {
        if r.nrows() == 0 || r.ncols() == 0 {
            return Err(Error::Config("importance matrix must be non-empty".into()));
        }
        if let Some(v) = r.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::Domain(format!("importance entries must be finite and >= 0, got {v}")));
        }
        Ok(ImportanceMatrix(r))
    }

    /// From lasso weights laid out `K × D_codes` (one row per factor).
    pub fn from_weights(weights: &[Vec<f64>]) -> Result<Self> {
        let k = weights.len();
        let d = weights.first().map_or(0, Vec::len);
        if weights.iter().any(|w| w.len() != d) {
            return Err(Error::Config("ragged weight rows".into()));
        }
        Self::new(Array2::from_shape_fn((d, k), |(a, i)| weights[i][a].abs()))
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn num_codes(&self) -> usize {
        self.0.nrows()
    }

    pub fn num_factors(&self) -> usize {
        self.0.ncols()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.0.rows().into_iter().map(|r| r.to_vec()).collect()
    }
}

/// Singular values of `m` by one-sided (Hestenes) Jacobi rotations on its
/// columns, which implicitly diagonalizes `mᵀm`.
pub fn singular_values(m: ArrayView2<f64>) -> Vec<f64> {
    let mut a = m.to_owned();
    let n = a.ncols();
    for _ in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (cp, cq) = (a.column(p), a.column(q));
                let alpha = cp.dot(&cp);
                let beta = cq.dot(&cq);
                let gamma = cp.dot(&cq);
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..a.nrows() {
                    let (xp, xq) = (a[[r, p]], a[[r, q]]);
                    a[[r, p]] = c * xp - s * xq;
                    a[[r, q]] = s * xp + c * xq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = a.columns().into_iter().map(|c| c.dot(&c).sqrt()).collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Number of singular values above `RANK_TOLERANCE × σ_max`.
pub fn numerical_rank(m: ArrayView2<f64>) -> usize {
    let sv = singular_values(m);
    let max = sv.first().copied().unwrap_or(0.0);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOLERANCE * max).count()
}

/// `1 + Σ p log_base p` over a normalized profile, with `0 log 0 = 0`.
fn one_minus_entropy(row: impl Iterator<Item = f64> + Clone, base: usize) -> f64 {
    let total: f64 = row.clone().sum();
    if base <= 1 {
        return 1.0;
    }
    let ln_base = (base as f64).ln();
    let h: f64 = row
        .filter(|&v| v > 0.0)
        .map(|v| {
            let p = v / total;
            -p * p.ln() / ln_base
        })
        .sum();
    1.0 - h
}

#[derive(Debug, Clone, PartialEq)]
pub struct Disentanglement {
    /// `(rank(R)/K) · Σ_a ρ_a D_a`.
    pub score: f64,
    pub per_code: Vec<f64>,
    pub rho: Vec<f64>,
    pub rank: usize,
    /// `R` was entirely zero; the score is 0 by convention.
    pub all_zero: bool,
}

pub fn disentanglement(r: &ImportanceMatrix) -> Disentanglement {
    let m = r.view();
    let k = m.ncols();
    let total: f64 = m.sum();
    let rank = numerical_rank(m);
    if total == 0.0 {
        return Disentanglement {
            score: 0.0,
            per_code: vec![0.0; m.nrows()],
            rho: vec![0.0; m.nrows()],
            rank,
            all_zero: true,
        };
    }
    let mut per_code = Vec::with_capacity(m.nrows());
    let mut rho = Vec::with_capacity(m.nrows());
    for row in m.rows() {
        let s: f64 = row.sum();
        if s == 0.0 {
            per_code.push(0.0);
            rho.push(0.0);
        } else {
            per_code.push(one_minus_entropy(row.iter().copied(), k));
            rho.push(s / total);
        }
    }
    let weighted: f64 = per_code.iter().zip(&rho).map(|(d, p)| d * p).sum();
    Disentanglement {
        score: (rank as f64 / k as f64) * weighted,
        per_code,
        rho,
        rank,
        all_zero: false,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Completeness {
    /// Mean of `C_j` over factors.
    pub score: f64,
    pub per_factor: Vec<f64>,
    /// Factors no code predicts (all-zero columns); their `C_j` is 0.
    pub unexplained: Vec<usize>,
}

pub fn completeness(r: &ImportanceMatrix) -> Completeness {
    let m = r.view();
    let d = m.nrows();
    let mut per_factor = Vec::with_capacity(m.ncols());
    let mut unexplained = Vec::new();
    for (j, col) in m.columns().into_iter().enumerate() {
        if col.sum() == 0.0 {
            unexplained.push(j);
            per_factor.push(0.0);
        } else {
            per_factor.push(one_minus_entropy(col.iter().copied(), d));
        }
    }
    Completeness {
        score: per_factor.iter().sum::<f64>() / per_factor.len() as f64,
        per_factor,
        unexplained,
    }
}

/// Geometric mean of disentanglement and completeness.
pub fn dc_score(disentanglement: f64, completeness: f64) -> f64 {
    (disentanglement * completeness).max(0.0).sqrt()
}

/// Mean over factors of the squared prediction error of the linear
/// regressors `ẑ_j = c · w_j` on the given (standardized) rows.
pub fn informativeness(codes: ArrayView2<f64>, factors: ArrayView2<f64>, weights: &[Vec<f64>]) -> Result<f64> {
    if weights.len() != factors.ncols() {
        return Err(Error::Shape {
            context: "regressor count",
            expected: factors.ncols(),
            got: weights.len(),
        });
    }
    if codes.nrows() != factors.nrows() || codes.nrows() == 0 {
        return Err(Error::Config("informativeness needs aligned, non-empty rows".into()));
    }
    let mut total = 0.0;
    for (j, w) in weights.iter().enumerate() {
        if w.len() != codes.ncols() {
            return Err(Error::Shape {
                context: "regressor weights",
                expected: codes.ncols(),
                got: w.len(),
            });
        }
        let pred = codes.dot(&ndarray::ArrayView1::from(w.as_slice()));
        let err: f64 = pred
            .iter()
            .zip(factors.column(j))
            .map(|(p, z)| (z - p) * (z - p))
            .sum();
        total += err / codes.nrows() as f64;
    }
    Ok(total / weights.len() as f64)
}
