//! Score hand-built importance matrices, then a code table where two codes
//! each track one factor and a third mixes both.

use ndarray::{array, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torus_vae::metrics::{completeness, dc_score, disentanglement, evaluate_codes, ImportanceMatrix, MetricsConfig};

fn show(name: &str, r: Array2<f64>) -> torus_vae::Result<()> {
    let m = ImportanceMatrix::new(r)?;
    let d = disentanglement(&m);
    let c = completeness(&m);
    println!("{name:<10} D {:.4} (rank {}) C {:.4} DC {:.4}", d.score, d.rank, c.score, dc_score(d.score, c.score));
    Ok(())
}

fn main() -> torus_vae::Result<()> {
    show("identity", Array2::eye(3))?;
    show("uniform", Array2::from_elem((3, 3), 1.0))?;
    show("one row", array![[1.0, 0.0]])?;
    show("split", array![[2.0, 0.0], [0.0, 1.0], [0.0, 1.0]])?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let factors = Array2::from_shape_simple_fn((1500, 2), || rng.random_range(-1.0..1.0));
    let codes = Array2::from_shape_fn((1500, 3), |(i, a)| match a {
        0 => factors[[i, 0]],
        1 => factors[[i, 1]],
        _ => factors[[i, 0]] + factors[[i, 1]],
    });
    let out = evaluate_codes(codes, factors, &MetricsConfig::new(5))?;
    let r = &out.report;
    println!(
        "table      D {:.4} C {:.4} I {:.2e} DC {:.4}, alphas {:?}, unconverged lasso fits {}",
        r.disentanglement, r.completeness, r.informativeness, r.dc_score, r.alphas, r.unconverged_fits
    );
    for row in out.importance.rows() {
        println!("  {row:.3?}");
    }
    Ok(())
}
