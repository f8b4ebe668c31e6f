//! Sparse recovery with coordinate-descent lasso and 10-fold cross-validation.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torus_vae::metrics::{alpha_max, lasso_cv, lasso_fit, standardize, ALPHA_GRID, CV_FOLDS};

fn main() -> torus_vae::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = Array2::from_shape_simple_fn((400, 6), || rng.random_range(-1.0..1.0));
    let x = standardize(x.view()).values;
    let truth = [1.5, 0.0, -0.8, 0.0, 0.0, 0.3];
    let y: Array1<f64> = x.dot(&Array1::from(truth.to_vec())) + Array1::from_shape_simple_fn(400, || rng.random_range(-0.1..0.1));

    let cv = lasso_cv(x.view(), y.view(), &ALPHA_GRID, CV_FOLDS, 7)?;
    println!("selected alpha {}", cv.alpha);
    for (a, mse) in ALPHA_GRID.iter().zip(&cv.cv_mse) {
        println!("  alpha {a:<8} cv mse {mse:.5}");
    }
    for (t, w) in truth.iter().zip(&cv.weights) {
        println!("true {t:+.2}  fitted {w:+.4}");
    }

    let amax = alpha_max(x.view(), y.view());
    let null = lasso_fit(x.view(), y.view(), amax)?;
    println!("alpha_max {amax:.4} gives weights {:?}", null.weights);
    Ok(())
}
