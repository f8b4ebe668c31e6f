use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dci::{completeness, dc_score, disentanglement, informativeness, ImportanceMatrix};
use super::lasso::{lasso_cv, LassoCv, ALPHA_GRID, CV_FOLDS};
use super::standardize::{standardize, CodeFactorTable};
use crate::error::{Error, Result};

fn default_grid() -> Vec<f64> {
    ALPHA_GRID.to_vec()
}

fn default_folds() -> usize {
    CV_FOLDS
}

fn default_holdout() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsConfig {
    #[serde(default = "default_grid")]
    pub alpha_grid: Vec<f64>,
    #[serde(default = "default_folds")]
    pub folds: usize,
    /// Seeds both the regressor/holdout split and the CV fold shuffle.
    pub split_seed: u64,
    /// Fraction of rows held out for informativeness.
    #[serde(default = "default_holdout")]
    pub holdout: f64,
}

impl MetricsConfig {
    pub fn new(split_seed: u64) -> Self {
        MetricsConfig {
            alpha_grid: default_grid(),
            folds: default_folds(),
            split_seed,
            holdout: default_holdout(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha_grid.is_empty() || self.alpha_grid.iter().any(|a| !(*a >= 0.0) || !a.is_finite()) {
            return Err(Error::Config("alpha grid must be non-empty and >= 0".into()));
        }
        if self.folds < 2 {
            return Err(Error::Config(format!("folds must be >= 2, got {}", self.folds)));
        }
        if !(0.0..1.0).contains(&self.holdout) {
            return Err(Error::Config(format!("holdout must be in [0, 1), got {}", self.holdout)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DciReport {
    pub disentanglement: f64,
    pub completeness: f64,
    pub informativeness: f64,
    pub dc_score: f64,
    pub per_code_disentanglement: Vec<f64>,
    pub per_factor_completeness: Vec<f64>,
    pub rho: Vec<f64>,
    pub rank: usize,
    /// Selected lasso alpha per factor.
    pub alphas: Vec<f64>,
    pub num_samples: usize,
    pub num_codes: usize,
    pub num_factors: usize,
    pub dead_codes: Vec<usize>,
    pub dead_factors: Vec<usize>,
    pub unexplained_factors: Vec<usize>,
    pub importance_all_zero: bool,
    /// Lasso fits across all factors that stopped on the sweep budget.
    pub unconverged_fits: usize,
}

impl DciReport {
    /// Internal consistency of a (possibly deserialized) report.
    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("inconsistent report: {m}")));
        if (self.dc_score - dc_score(self.disentanglement, self.completeness)).abs() > 1e-12 {
            return bad(format!("dc_score {} != sqrt(D*C)", self.dc_score));
        }
        for (name, v) in [
            ("disentanglement", self.disentanglement),
            ("completeness", self.completeness),
            ("dc_score", self.dc_score),
        ] {
            if !(-1e-12..=1.0 + 1e-12).contains(&v) {
                return bad(format!("{name} = {v} outside [0, 1]"));
            }
        }
        if !(self.informativeness >= 0.0) {
            return bad(format!("informativeness {} < 0", self.informativeness));
        }
        if self.per_code_disentanglement.len() != self.num_codes
            || self.rho.len() != self.num_codes
            || self.per_factor_completeness.len() != self.num_factors
            || self.alphas.len() != self.num_factors
        {
            return bad("array lengths disagree with num_codes/num_factors".into());
        }
        let rho_sum: f64 = self.rho.iter().sum();
        if !self.importance_all_zero && (rho_sum - 1.0).abs() > 1e-9 {
            return bad(format!("rho sums to {rho_sum}"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DciOutcome {
    pub report: DciReport,
    pub importance: ImportanceMatrix,
    pub regressors: Vec<LassoCv>,
    /// The standardized table the metrics were computed on.
    pub standardized: CodeFactorTable,
}

/// One cross-validated lasso per factor (run in parallel), giving
/// `R[a][i] = |W[i][a]|`. Expects standardized inputs.
pub fn importance_matrix(table: &CodeFactorTable, config: &MetricsConfig) -> Result<(ImportanceMatrix, Vec<LassoCv>)> {
    config.validate()?;
    if table.len() <= config.folds {
        return Err(Error::Config(format!(
            "{} samples is not more than {} folds",
            table.len(),
            config.folds
        )));
    }
    let fits: Vec<LassoCv> = (0..table.num_factors())
        .into_par_iter()
        .map(|j| {
            lasso_cv(
                table.codes.view(),
                table.factors.column(j),
                &config.alpha_grid,
                config.folds,
                config.split_seed,
            )
        })
        .collect::<Result<_>>()?;
    let weights: Vec<Vec<f64>> = fits.iter().map(|f| f.weights.clone()).collect();
    Ok((ImportanceMatrix::from_weights(&weights)?, fits))
}

/// Standardizes the table, fits regressors on a seeded `1 - holdout` share of
/// rows, scores D, C and DC on the importance matrix and I on the held-out rows.
pub fn evaluate_dci(table: &CodeFactorTable, config: &MetricsConfig) -> Result<DciOutcome> {
    config.validate()?;
    let codes = standardize(table.codes.view());
    let factors = standardize(table.factors.view());
    let standardized = CodeFactorTable::new(codes.values, factors.values)?;

    let n = table.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(config.split_seed));
    let n_test = (n as f64 * config.holdout).round() as usize;
    let (test, fit) = order.split_at(n_test);
    let (mut fit, mut test) = (fit.to_vec(), test.to_vec());
    fit.sort_unstable();
    test.sort_unstable();
    let pick = |rows: &[usize]| -> Result<CodeFactorTable> {
        CodeFactorTable::new(
            standardized.codes.select(Axis(0), rows),
            standardized.factors.select(Axis(0), rows),
        )
    };
    let fit_table = pick(&fit)?;
    let (importance, regressors) = importance_matrix(&fit_table, config)?;

    let eval_table = if test.is_empty() { fit_table } else { pick(&test)? };
    let weights: Vec<Vec<f64>> = regressors.iter().map(|r| r.weights.clone()).collect();
    let info = informativeness(eval_table.codes.view(), eval_table.factors.view(), &weights)?;

    let d = disentanglement(&importance);
    let c = completeness(&importance);
    if d.all_zero {
        log::warn!("importance matrix is all zero; disentanglement set to 0");
    }
    if !c.unexplained.is_empty() {
        log::warn!("factors {:?} are not predicted by any code", c.unexplained);
    }
    let report = DciReport {
        disentanglement: d.score,
        completeness: c.score,
        informativeness: info,
        dc_score: dc_score(d.score, c.score),
        per_code_disentanglement: d.per_code,
        per_factor_completeness: c.per_factor,
        rho: d.rho,
        rank: d.rank,
        alphas: regressors.iter().map(|r| r.alpha).collect(),
        num_samples: n,
        num_codes: table.num_codes(),
        num_factors: table.num_factors(),
        dead_codes: codes.dead_columns,
        dead_factors: factors.dead_columns,
        unexplained_factors: c.unexplained,
        importance_all_zero: d.all_zero,
        unconverged_fits: regressors.iter().map(|r| r.unconverged).sum(),
    };
    report.check()?;
    Ok(DciOutcome {
        report,
        importance,
        regressors,
        standardized,
    })
}

/// Convenience for callers holding raw code and factor arrays.
pub fn evaluate_codes(codes: Array2<f64>, factors: Array2<f64>, config: &MetricsConfig) -> Result<DciOutcome> {
    evaluate_dci(&CodeFactorTable::new(codes, factors)?, config)
}
