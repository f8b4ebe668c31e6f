//! Heatmap data: the importance matrix and code-vs-factor histograms as CSV.

use std::path::Path;

use ndarray::ArrayView1;

use super::dci::ImportanceMatrix;
use super::standardize::CodeFactorTable;
use crate::error::{Error, Result};

pub const HISTOGRAM_BINS: usize = 32;

/// Formats like C's `%.9g`.
pub fn fmt_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    // exponent after rounding to 9 significant digits
    let sci = format!("{:.8e}", v);
    let (mantissa, e) = sci.split_once('e').expect("scientific format");
    let e: i32 = e.parse().expect("exponent");
    if (-4..9).contains(&e) {
        let decimals = (8 - e) as usize;
        trim_zeros(format!("{:.*}", decimals, v))
    } else {
        let m = trim_zeros(mantissa.to_string());
        format!("{m}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// 2D histogram of `(c_a, z_j)` over each variable's observed range.
#[derive(Debug, Clone, PartialEq)]
pub struct PairHistogram {
    pub code: usize,
    pub factor: usize,
    pub code_range: (f64, f64),
    pub factor_range: (f64, f64),
    /// `counts[code_bin][factor_bin]`.
    pub counts: Vec<Vec<u64>>,
}

impl PairHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

fn bin(v: f64, (lo, hi): (f64, f64)) -> usize {
    if hi <= lo {
        return 0;
    }
    let b = ((v - lo) / (hi - lo) * HISTOGRAM_BINS as f64).floor() as isize;
    b.clamp(0, HISTOGRAM_BINS as isize - 1) as usize
}

fn range(col: ArrayView1<f64>) -> (f64, f64) {
    col.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

pub fn pair_histogram(table: &CodeFactorTable, code: usize, factor: usize) -> PairHistogram {
    let c = table.codes.column(code);
    let z = table.factors.column(factor);
    let code_range = range(c);
    let factor_range = range(z);
    let mut counts = vec![vec![0u64; HISTOGRAM_BINS]; HISTOGRAM_BINS];
    for (&cv, &zv) in c.iter().zip(z) {
        counts[bin(cv, code_range)][bin(zv, factor_range)] += 1;
    }
    PairHistogram {
        code,
        factor,
        code_range,
        factor_range,
        counts,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapBundle {
    pub importance_csv: String,
    pub histograms: Vec<PairHistogram>,
}

impl HeatmapBundle {
    /// `heatmap_c{a}_z{j}.csv` for each pair, relative to a directory.
    pub fn histogram_file_name(h: &PairHistogram) -> String {
        format!("heatmap_c{}_z{}.csv", h.code, h.factor)
    }

    pub fn write(&self, importance_path: &Path, heatmap_dir: &Path) -> Result<()> {
        crate::harness::write_atomic(importance_path, self.importance_csv.as_bytes())?;
        std::fs::create_dir_all(heatmap_dir).map_err(|e| Error::io(heatmap_dir, e))?;
        for h in &self.histograms {
            let path = heatmap_dir.join(Self::histogram_file_name(h));
            crate::harness::write_atomic(&path, histogram_csv(h)?.as_bytes())?;
        }
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Parse(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Header `code,<factor names…>`, one row per code.
pub fn importance_csv(r: &ImportanceMatrix, factor_names: &[String]) -> Result<String> {
    if factor_names.len() != r.num_factors() {
        return Err(Error::Shape {
            context: "factor names",
            expected: r.num_factors(),
            got: factor_names.len(),
        });
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["code".to_string()];
    header.extend(factor_names.iter().cloned());
    w.write_record(&header).map_err(csv_err)?;
    for (a, row) in r.rows().iter().enumerate() {
        let mut rec = vec![a.to_string()];
        rec.extend(row.iter().map(|&v| fmt_sig9(v)));
        w.write_record(&rec).map_err(csv_err)?;
    }
    finish(w)
}

/// Long format: one row per bin with its edges and count.
pub fn histogram_csv(h: &PairHistogram) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["code_bin", "factor_bin", "code_lo", "code_hi", "factor_lo", "factor_hi", "count"])
        .map_err(csv_err)?;
    let edge = |(lo, hi): (f64, f64), i: usize| lo + (hi - lo) * i as f64 / HISTOGRAM_BINS as f64;
    for (i, row) in h.counts.iter().enumerate() {
        for (j, &count) in row.iter().enumerate() {
            w.write_record([
                i.to_string(),
                j.to_string(),
                fmt_sig9(edge(h.code_range, i)),
                fmt_sig9(edge(h.code_range, i + 1)),
                fmt_sig9(edge(h.factor_range, j)),
                fmt_sig9(edge(h.factor_range, j + 1)),
                count.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    finish(w)
}

pub fn heatmap_export(table: &CodeFactorTable, r: &ImportanceMatrix, factor_names: &[String]) -> Result<HeatmapBundle> {
    if r.num_codes() != table.num_codes() || r.num_factors() != table.num_factors() {
        return Err(Error::Config(format!(
            "importance matrix is {}x{} but table has {} codes and {} factors",
            r.num_codes(),
            r.num_factors(),
            table.num_codes(),
            table.num_factors()
        )));
    }
    let mut histograms = Vec::with_capacity(table.num_codes() * table.num_factors());
    for a in 0..table.num_codes() {
        for j in 0..table.num_factors() {
            histograms.push(pair_histogram(table, a, j));
        }
    }
    Ok(HeatmapBundle {
        importance_csv: importance_csv(r, factor_names)?,
        histograms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn sig9_matches_printf() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (0.5, "0.5"),
            (-2.25, "-2.25"),
            (1.0 / 3.0, "0.333333333"),
            (123456789.0, "123456789"),
            (1234567890.0, "1.23456789e+09"),
            (1e-5, "1e-05"),
            (0.0001, "0.0001"),
            (std::f64::consts::PI * 1e-7, "3.14159265e-07"),
            (9.9999999995, "10"),
        ];
        for (v, want) in cases {
            assert_eq!(fmt_sig9(v), want, "{v}");
        }
    }

    #[test]
    fn sig9_round_trips_within_precision() {
        for v in [0.123456789123, -98765.4321, 6.02e23, 1.6e-19] {
            let back: f64 = fmt_sig9(v).parse().unwrap();
            assert!(((back - v) / v).abs() < 1e-8);
        }
    }

    fn diag_table(n: usize) -> CodeFactorTable {
        let c = Array2::from_shape_fn((n, 2), |(i, j)| ((i * (j + 3)) % n) as f64 / n as f64);
        CodeFactorTable::new(c.clone(), c).unwrap()
    }

    #[test]
    fn histogram_counts_sum_to_n() {
        let t = diag_table(500);
        let h = pair_histogram(&t, 0, 1);
        assert_eq!(h.total(), 500);
    }

    #[test]
    fn identity_pairs_are_diagonal() {
        let t = diag_table(640);
        let h = pair_histogram(&t, 1, 1);
        let diag: u64 = (0..HISTOGRAM_BINS).map(|i| h.counts[i][i]).sum();
        assert_eq!(diag, 640);
    }

    #[test]
    fn importance_csv_round_trips() {
        let r = ImportanceMatrix::new(array![[0.125, 1.0 / 3.0], [2.0, 0.0]]).unwrap();
        let names = vec!["a".to_string(), "b".to_string()];
        let text = importance_csv(&r, &names).unwrap();
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        assert_eq!(rd.headers().unwrap(), vec!["code", "a", "b"]);
        let rows: Vec<Vec<f64>> = rd
            .records()
            .map(|r| r.unwrap().iter().skip(1).map(|v| v.parse().unwrap()).collect())
            .collect();
        for (got, want) in rows.iter().zip(r.rows()) {
            for (g, w) in got.iter().zip(want) {
                assert!((g - w).abs() <= 1e-9 * w.abs());
            }
        }
        assert!(importance_csv(&r, &names[..1]).is_err());
    }

    #[test]
    fn histogram_csv_has_every_bin() {
        let t = diag_table(50);
        let text = histogram_csv(&pair_histogram(&t, 0, 0)).unwrap();
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let counts: Vec<u64> = rd.records().map(|r| r.unwrap()[6].parse().unwrap()).collect();
        assert_eq!(counts.len(), HISTOGRAM_BINS * HISTOGRAM_BINS);
        assert_eq!(counts.iter().sum::<u64>(), 50);
    }
}
