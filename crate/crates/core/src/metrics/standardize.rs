use std::f64::consts::{PI, TAU};

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Codes and ground-truth factors for the same `N` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeFactorTable {
    /// `N × D_codes`: angles for the torus model, posterior means otherwise.
    pub codes: Array2<f64>,
    /// `N × K`.
    pub factors: Array2<f64>,
}

impl CodeFactorTable {
    pub fn new(codes: Array2<f64>, factors: Array2<f64>) -> Result<Self> {
        if codes.nrows() != factors.nrows() {
            return Err(Error::Shape {
                context: "code/factor rows",
                expected: codes.nrows(),
                got: factors.nrows(),
            });
        }
        if codes.ncols() == 0 || factors.ncols() == 0 {
            return Err(Error::Config("need at least one code and one factor".into()));
        }
        if codes.iter().chain(factors.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Numeric("code/factor table has non-finite entries".into()));
        }
        Ok(CodeFactorTable { codes, factors })
    }

    pub fn len(&self) -> usize {
        self.codes.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_codes(&self) -> usize {
        self.codes.ncols()
    }

    pub fn num_factors(&self) -> usize {
        self.factors.ncols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Standardized {
    pub values: Array2<f64>,
    /// Constant columns, emitted as all zeros.
    pub dead_columns: Vec<usize>,
}

/// Zero mean, unit (population) variance per column.
pub fn standardize(x: ArrayView2<f64>) -> Standardized {
    let n = x.nrows().max(1) as f64;
    let mut values = x.to_owned();
    let mut dead_columns = Vec::new();
    for (j, mut col) in values.axis_iter_mut(Axis(1)).enumerate() {
        let mean = col.sum() / n;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let sd = var.sqrt();
        if !(sd > 1e-12 * (1.0 + mean.abs())) {
            log::warn!("column {j} is constant; treating it as a dead variable");
            dead_columns.push(j);
            col.fill(0.0);
        } else {
            col.mapv_inplace(|v| (v - mean) / sd);
        }
    }
    Standardized {
        values,
        dead_columns,
    }
}

/// Re-expresses each angle column relative to its circular mean, wrapped to
/// `[-π, π)`, so the branch cut sits opposite the bulk of the samples.
pub fn center_angles(angles: ArrayView2<f64>) -> Array2<f64> {
    let mut out = angles.to_owned();
    for mut col in out.axis_iter_mut(Axis(1)) {
        let (s, c) = col.iter().fold((0.0, 0.0), |(s, c), t| (s + t.sin(), c + t.cos()));
        let mean = if s == 0.0 && c == 0.0 { 0.0 } else { s.atan2(c) };
        col.mapv_inplace(|t| (t - mean + PI).rem_euclid(TAU) - PI);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn centering_moves_the_cut_away_from_an_arc() {
        // arc straddling zero
        let a = array![[6.1], [6.2], [0.05], [0.1], [0.2]];
        let c = center_angles(a.view());
        let (lo, hi) = c.iter().fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
        assert!(hi - lo < 0.5, "{c:?}");
        // order within the arc is preserved
        assert!(c[[0, 0]] < c[[1, 0]] && c[[1, 0]] < c[[2, 0]]);
        assert!(c.iter().all(|v| (-PI..PI).contains(v)));
    }

    #[test]
    fn simple_column() {
        let s = standardize(array![[1.0], [2.0], [3.0]].view());
        let k = 1.5f64.sqrt();
        assert!((s.values[[0, 0]] + k).abs() < 1e-12);
        assert!(s.values[[1, 0]].abs() < 1e-12);
        assert!((s.values[[2, 0]] - k).abs() < 1e-12);
        let col = s.values.column(0);
        assert!(col.sum().abs() < 1e-12);
        assert!((col.mapv(|v| v * v).sum() / 3.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn idempotent() {
        let x = array![[0.3, 10.0], [1.7, -4.0], [-2.0, 0.5], [0.1, 2.0]];
        let once = standardize(x.view()).values;
        let twice = standardize(once.view()).values;
        for (a, b) in once.iter().zip(&twice) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_column_is_dead() {
        let s = standardize(array![[5.0, 1.0], [5.0, 2.0], [5.0, 4.0]].view());
        assert_eq!(s.dead_columns, vec![0]);
        assert!(s.values.column(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn table_validation() {
        assert!(CodeFactorTable::new(Array2::zeros((3, 2)), Array2::zeros((4, 2))).is_err());
        assert!(CodeFactorTable::new(Array2::zeros((3, 0)), Array2::zeros((3, 2))).is_err());
        assert!(CodeFactorTable::new(array![[f64::NAN]], array![[1.0]]).is_err());
    }
}
