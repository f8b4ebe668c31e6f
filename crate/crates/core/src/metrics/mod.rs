//! DCI disentanglement metrics over a table of codes and ground-truth factors.

pub mod dci;
pub mod heatmap;
pub mod lasso;
pub mod report;
pub mod standardize;

pub use dci::{
    completeness, dc_score, disentanglement, informativeness, numerical_rank, singular_values, Completeness,
    Disentanglement, ImportanceMatrix, RANK_TOLERANCE,
};
pub use heatmap::{
    fmt_sig9, heatmap_export, histogram_csv, importance_csv, pair_histogram, HeatmapBundle, PairHistogram,
    HISTOGRAM_BINS,
};
pub use lasso::{
    alpha_max, fold_assignment, lasso_cv, lasso_fit, lasso_objective, soft_threshold, LassoCv, LassoFit, ALPHA_GRID,
    COORDINATE_TOLERANCE, CV_FOLDS, MAX_SWEEPS,
};
pub use report::{evaluate_codes, evaluate_dci, importance_matrix, DciOutcome, DciReport, MetricsConfig};
pub use standardize::{center_angles, standardize, CodeFactorTable, Standardized};
