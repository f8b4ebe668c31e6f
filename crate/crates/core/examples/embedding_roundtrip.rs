//! Embed a point of T^3, inspect the decoder input, recover the angles, and
//! draw one reparameterized sample with its KL.

use torus_vae::geometry::{
    circular_distance, embed_angles, embedding_len, gaussian_kl, recover_angles, sample_circle, AngleVector,
    GaussianPairParams,
};

fn main() -> torus_vae::Result<()> {
    let theta = AngleVector::new(vec![0.3, 2.0, 5.5])?;
    let emb = embed_angles(&theta)?;
    println!("D = 3, embedding length {} (2^3 + 3)", embedding_len(3));
    for (i, v) in emb.to_vec().iter().enumerate() {
        println!("  V[{i}] = {v:+.6}");
    }

    let back = recover_angles(&emb)?;
    for (a, b) in theta.as_slice().iter().zip(back.as_slice()) {
        println!("theta {a:.6} -> {b:.6} (error {:.1e})", circular_distance(*a, *b));
    }

    let params = GaussianPairParams::new(vec![[1.0, 0.5], [0.0, -2.0]], vec![[0.3, 0.3], [1.0, 0.5]])?;
    let point = sample_circle([1.0, 0.5], [0.3, 0.3], [0.2, -1.1])?;
    println!("sampled angle {:.4}, KL of the posterior {:.4} nats", point.angle(), gaussian_kl(&params)?);
    Ok(())
}
