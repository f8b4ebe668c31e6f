mod common;

use std::f64::consts::TAU;
use std::time::Instant;

use ndarray::Array2;
use torus_vae::data::{model_to_unit, split_indices};
use torus_vae::geometry::{embed_angles, AngleVector};
use torus_vae::harness::{train_on, traverse_images, DatasetConfig};
use torus_vae::vae::{train, LatentMode, TrainingData};

#[test]
fn shapes_validation_error_halves() {
    let ds = DatasetConfig::shapes2d(2000, 16, 4).generate().unwrap();
    let mut cfg = common::desk_config(LatentMode::Torus { circles: 4 }, 1.0, 4);
    cfg.epochs = 30;
    let r = train_on(&cfg, &ds).unwrap();
    assert!(
        r.best_validation_mse <= 0.5 * r.initial_validation_mse,
        "{} -> {}",
        r.initial_validation_mse,
        r.best_validation_mse
    );
    let best = r.epochs.iter().map(|e| e.validation_mse).fold(f64::INFINITY, f64::min);
    assert_eq!(r.best_validation_mse, best);
}

#[test]
fn single_point_is_memorized() {
    let x = Array2::from_shape_fn((8, 6), |(_, j)| 0.2 * j as f64 - 0.5);
    let mut cfg = common::desk_config(LatentMode::Torus { circles: 2 }, 0.0, 1);
    cfg.encoder_hidden = vec![16];
    cfg.decoder_hidden = vec![16];
    cfg.batch_size = 8;
    cfg.epochs = 400;
    let r = train(
        &cfg,
        TrainingData {
            train: x.view(),
            validation: x.view(),
        },
    )
    .unwrap();
    assert!(r.best_validation_mse < 1e-3, "{}", r.best_validation_mse);
    assert!(r.best_validation_mse < 0.01 * r.initial_validation_mse);
}

/// Torus D=4 on K=3 synthetic data within the ten-minute budget. Checked at
/// β = 0: at β = 1 the 16-dimensional reconstruction term is too small
/// against the KL term and the posterior partially collapses.
#[test]
fn synthetic_budget_run() {
    let ds = DatasetConfig::synthetic(4000, 3, 11).generate().unwrap();
    let start = Instant::now();
    let r = train_on(&common::desk_config(LatentMode::Torus { circles: 4 }, 0.0, 1), &ds).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    assert!(r.best_validation_mse < 0.05, "{}", r.best_validation_mse);
    assert!(elapsed < 600.0, "{elapsed}s");

    // the Euclidean baseline runs under the same config shape
    let mut e = common::desk_config(LatentMode::Euclidean { dim: 10 }, 0.0, 1);
    e.epochs = 5;
    let r = train_on(&e, &ds).unwrap();
    assert_eq!(r.epochs.len(), 5);
}

#[test]
fn traversal_matches_manual_decoding_and_is_periodic() {
    let ds = DatasetConfig::synthetic(400, 2, 3).generate().unwrap();
    let mut cfg = common::desk_config(LatentMode::Torus { circles: 3 }, 1.0, 2);
    cfg.epochs = 3;
    let model = train_on(&cfg, &ds).unwrap().model;
    let anchor = [0.5, 1.0, 4.0];
    let images = traverse_images(&model, 1, 8, &anchor).unwrap();
    assert_eq!(images.len(), 8);
    for (s, img) in images.iter().enumerate() {
        let theta = vec![0.5, TAU * s as f64 / 8.0, 4.0];
        let emb = embed_angles(&AngleVector::new(theta).unwrap()).unwrap().to_vec();
        let z = Array2::from_shape_vec((1, emb.len()), emb).unwrap();
        let manual: Vec<f32> = model.decode(z.view()).unwrap().iter().map(|&v| model_to_unit(v)).collect();
        assert_eq!(img, &manual);
    }
    let full_turn = traverse_images(&model, 1, 1, &[0.5, TAU, 4.0]).unwrap();
    assert_eq!(full_turn[0], images[0]);
    assert!(traverse_images(&model, 3, 8, &anchor).is_err());
}

#[test]
fn training_never_sees_factors() {
    // two datasets with identical samples but scrambled factors train identically
    let ds = DatasetConfig::synthetic(300, 2, 5).generate().unwrap();
    let mut other = ds.clone();
    other.factors.mapv_inplace(|v| (v * 7.0) % 1.0);
    let mut cfg = common::desk_config(LatentMode::Torus { circles: 2 }, 1.0, 6);
    cfg.epochs = 2;
    assert_eq!(train_on(&cfg, &ds).unwrap(), train_on(&cfg, &other).unwrap());
    assert_eq!(split_indices(300, 6).unwrap().validation.len(), 60);
}
