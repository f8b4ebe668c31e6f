//! Train a torus VAE and a Euclidean baseline on periodic synthetic data and
//! compare their DCI scores.
//!
//! `cargo run --release --example train_torus_vae -- [epochs]`

use torus_vae::harness::{evaluation_table, train_on, DatasetConfig};
use torus_vae::metrics::{evaluate_dci, MetricsConfig};
use torus_vae::vae::{LatentMode, TrainConfig};

fn main() -> torus_vae::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let epochs = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(40);
    let ds = DatasetConfig::synthetic(4000, 3, 11).generate()?;
    for latent in [LatentMode::Torus { circles: 4 }, LatentMode::Euclidean { dim: 10 }] {
        let mut cfg = TrainConfig::new(latent, 1.0, 1);
        cfg.learning_rate = 3e-3;
        cfg.epochs = epochs;
        let report = train_on(&cfg, &ds)?;
        let table = evaluation_table(&report.model, &ds, cfg.seed)?;
        let dci = evaluate_dci(&table, &MetricsConfig::new(cfg.seed))?.report;
        println!(
            "{latent:?}: mse {:.4} -> {:.4} (epoch {}), D {:.3} C {:.3} I {:.3} DC {:.3}",
            report.initial_validation_mse,
            report.best_validation_mse,
            report.best_epoch,
            dci.disentanglement,
            dci.completeness,
            dci.informativeness,
            dci.dc_score
        );
    }
    Ok(())
}
