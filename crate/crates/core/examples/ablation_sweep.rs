//! A small (beta, D) grid on K=5 synthetic data, printed as the sweep CSV.
//!
//! `cargo run --release --example ablation_sweep -- [epochs] [workers]`

use torus_vae::harness::{run_sweep, sweep_csv, DatasetConfig, ExperimentConfig, SweepConfig};
use torus_vae::metrics::MetricsConfig;
use torus_vae::vae::{LatentMode, TrainConfig};

fn main() -> torus_vae::Result<()> {
    let mut args = std::env::args().skip(1);
    let epochs = args.next().and_then(|s| s.parse().ok()).unwrap_or(20);
    let workers = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let mut model = TrainConfig::new(LatentMode::Torus { circles: 4 }, 1.0, 1);
    model.learning_rate = 3e-3;
    model.epochs = epochs;
    let mut cfg = ExperimentConfig::new(DatasetConfig::synthetic(2000, 5, 21), model, MetricsConfig::new(1));
    cfg.sweep = Some(SweepConfig {
        betas: vec![0.0, 1.0, 9.0],
        circles: vec![4, 6],
    });
    let ds = cfg.dataset.generate()?;
    let rows = run_sweep(&cfg, &ds, workers)?;
    print!("{}", sweep_csv(&rows)?);
    Ok(())
}
