//! Latent geometry of the torus `T^D = (S¹)^D`.
//!
//! A latent point is a list of unit 2-vectors `m_a = (cos θ_a, sin θ_a)`. The
//! decoder never sees the angles directly; it sees the embedding
//! `V(m) = [v_prod ; v_orient]` where `v_prod` is the flattened rank-1 tensor
//! `m_1 ⊗ … ⊗ m_D` (length `2^D`) and `v_orient = (m_1^0, …, m_D^0)`.
//!
//! `v_prod` alone cannot tell `m_a` from `-m_a` when another circle flips
//! with it; `v_orient` pins every cosine and breaks that symmetry.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Largest circle count supported by the embedding (`2^D` entries).
pub const MAX_CIRCLES: usize = 16;

/// Reduces an angle into `[0, 2π)`.
pub fn canonical_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Shortest distance between two angles on the circle.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// `D` canonical angles, one per circle. These are the latent codes.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleVector(Vec<f64>);

impl AngleVector {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::Domain("angle vector needs at least one angle".into()));
        }
        if let Some(bad) = angles.iter().find(|t| !t.is_finite()) {
            return Err(Error::Domain(format!("non-finite angle {bad}")));
        }
        Ok(AngleVector(angles.into_iter().map(canonical_angle).collect()))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn circle_points(&self) -> Vec<CircleTuple> {
        self.0.iter().map(|&t| CircleTuple::from_angle_unchecked(t)).collect()
    }
}

/// A point `(m0, m1)` on the unit circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleTuple {
    pub m0: f64,
    pub m1: f64,
}

impl CircleTuple {
    fn from_angle_unchecked(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        CircleTuple { m0: c, m1: s }
    }

    /// The angle of this point in `[0, 2π)`.
    pub fn angle(&self) -> f64 {
        canonical_angle(self.m1.atan2(self.m0))
    }

    pub fn norm(&self) -> f64 {
        self.m0.hypot(self.m1)
    }

    pub fn component(&self, alpha: usize) -> f64 {
        if alpha == 0 {
            self.m0
        } else {
            self.m1
        }
    }
}

impl std::ops::Neg for CircleTuple {
    type Output = CircleTuple;

    fn neg(self) -> CircleTuple {
        CircleTuple {
            m0: -self.m0,
            m1: -self.m1,
        }
    }
}

pub fn make_circle_point(theta: f64) -> Result<CircleTuple> {
    if !theta.is_finite() {
        return Err(Error::Domain(format!("circle angle must be finite, got {theta}")));
    }
    Ok(CircleTuple::from_angle_unchecked(canonical_angle(theta)))
}

/// Projects a nonzero 2-vector onto the unit circle.
///
/// The zero vector has no direction and is rejected.
pub fn normalize_pair(raw: [f64; 2]) -> Result<CircleTuple> {
    let norm = raw[0].hypot(raw[1]);
    if !norm.is_finite() {
        return Err(Error::Domain(format!("non-finite pair {raw:?}")));
    }
    if norm == 0.0 {
        return Err(Error::DegenerateInput(
            "cannot normalize the zero vector onto S¹".into(),
        ));
    }
    Ok(CircleTuple {
        m0: raw[0] / norm,
        m1: raw[1] / norm,
    })
}

fn check_circle_count(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::Domain("torus dimension must be at least 1".into()));
    }
    if d > MAX_CIRCLES {
        return Err(Error::Domain(format!(
            "torus dimension {d} exceeds supported maximum {MAX_CIRCLES}"
        )));
    }
    Ok(())
}

/// Flattened outer product `m_1 ⊗ … ⊗ m_D`.
///
/// Entry `(α_1, …, α_D)` sits at linear index `Σ_a α_a · 2^(D-a)`, so the
/// first circle is the most significant bit.
pub fn tensor_product(tuples: &[CircleTuple]) -> Result<Vec<f64>> {
    check_circle_count(tuples.len())?;
    let mut out = Vec::with_capacity(1 << tuples.len());
    out.push(1.0);
    for t in tuples {
        out = out.iter().flat_map(|&e| [e * t.m0, e * t.m1]).collect();
    }
    Ok(out)
}

/// The decoder input `V(m) = [v_prod ; v_orient]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentEmbedding {
    pub v_prod: Vec<f64>,
    pub v_orient: Vec<f64>,
}

impl LatentEmbedding {
    /// Number of circles `D`.
    pub fn circles(&self) -> usize {
        self.v_orient.len()
    }

    /// Total length `2^D + D`.
    pub fn len(&self) -> usize {
        self.v_prod.len() + self.v_orient.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v_orient.is_empty()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.len());
        v.extend_from_slice(&self.v_prod);
        v.extend_from_slice(&self.v_orient);
        v
    }

    /// Splits a flat `2^D + D` vector back into its two blocks.
    pub fn from_flat(circles: usize, flat: &[f64]) -> Result<Self> {
        check_circle_count(circles)?;
        let expected = embedding_len(circles);
        if flat.len() != expected {
            return Err(Error::Shape {
                context: "latent embedding",
                expected,
                got: flat.len(),
            });
        }
        let split = 1 << circles;
        Ok(LatentEmbedding {
            v_prod: flat[..split].to_vec(),
            v_orient: flat[split..].to_vec(),
        })
    }
}

/// `2^D + D`.
pub fn embedding_len(circles: usize) -> usize {
    (1usize << circles) + circles
}

pub fn embed(tuples: &[CircleTuple]) -> Result<LatentEmbedding> {
    let v_prod = tensor_product(tuples)?;
    Ok(LatentEmbedding {
        v_prod,
        v_orient: tuples.iter().map(|t| t.m0).collect(),
    })
}

/// Embedding of an angle vector: `V(cos θ, sin θ)`.
pub fn embed_angles(angles: &AngleVector) -> Result<LatentEmbedding> {
    embed(&angles.circle_points())
}

const STRUCTURE_TOL: f64 = 1e-6;

/// Inverts [`embed`].
///
/// Cosines are read from `v_orient`. For circle `a`, view `v_prod` as a
/// `2 × 2^(D-1)` matrix with mode `a` as rows: row 0 is `m_a^0 · w` and
/// row 1 is `m_a^1 · w` for a unit vector `w`. The magnitude `|sin θ_a|` is
/// the norm of row 1, and `⟨row0, row1⟩ = m_a^0 m_a^1`, so its sign relative
/// to the (known) cosine sign fixes the sine sign. Circles whose cosine is
/// zero, or too small for that product to be trusted, are resolved together
/// from the `v_prod` entry that selects their sine components, with the
/// remaining circles anchored at their resolved signs. If several circles
/// have zero cosine only the product of their sine signs is observable; the
/// convention then takes every such sine positive except the last one.
pub fn recover_angles(emb: &LatentEmbedding) -> Result<AngleVector> {
    let d = emb.circles();
    check_circle_count(d)?;
    if emb.v_prod.len() != 1 << d {
        return Err(Error::Shape {
            context: "v_prod",
            expected: 1 << d,
            got: emb.v_prod.len(),
        });
    }
    if emb.v_prod.iter().chain(&emb.v_orient).any(|x| !x.is_finite()) {
        return Err(Error::Reconstruction("embedding has non-finite entries".into()));
    }
    let prod_norm = emb.v_prod.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (prod_norm - 1.0).abs() > STRUCTURE_TOL {
        return Err(Error::Reconstruction(format!(
            "v_prod norm {prod_norm} is not 1"
        )));
    }
    if let Some(c) = emb.v_orient.iter().find(|c| c.abs() > 1.0 + STRUCTURE_TOL) {
        return Err(Error::Reconstruction(format!("v_orient entry {c} outside [-1, 1]")));
    }

    let size = emb.v_prod.len();
    let mut cos = Vec::with_capacity(d);
    let mut sin_mag = Vec::with_capacity(d);
    let mut sin_sign: Vec<Option<f64>> = vec![None; d];
    for a in 0..d {
        let bit = 1usize << (d - 1 - a);
        let (mut r0, mut r1, mut cross) = (0.0, 0.0, 0.0);
        for i in (0..size).filter(|i| i & bit == 0) {
            let (u, v) = (emb.v_prod[i], emb.v_prod[i | bit]);
            r0 += u * u;
            r1 += v * v;
            cross += u * v;
        }
        let c = emb.v_orient[a].clamp(-1.0, 1.0);
        if (r0.sqrt() - c.abs()).abs() > STRUCTURE_TOL {
            return Err(Error::Reconstruction(format!(
                "circle {a}: |cos| from v_prod ({}) disagrees with v_orient ({c})",
                r0.sqrt()
            )));
        }
        let s = r1.sqrt();
        // in exact arithmetic cross == c * m1 * |w|², so it is trustworthy
        // when its magnitude matches |c| * |s|
        let expected = c.abs() * s;
        if s == 0.0 {
            sin_sign[a] = Some(1.0);
        } else if c != 0.0 && cross != 0.0 && (cross.abs() - expected).abs() <= 0.5 * expected {
            sin_sign[a] = Some(cross.signum() * c.signum());
        }
        cos.push(c);
        sin_mag.push(s);
    }

    let unresolved: Vec<usize> = (0..d).filter(|&a| sin_sign[a].is_none()).collect();
    if !unresolved.is_empty() {
        // pick the entry with α = 1 on every unresolved circle and the
        // larger-magnitude component on every resolved one
        let mut index = 0usize;
        let mut known_sign = 1.0;
        for a in 0..d {
            let bit = 1usize << (d - 1 - a);
            match sin_sign[a] {
                None => index |= bit,
                Some(sg) => {
                    if sin_mag[a] > cos[a].abs() {
                        index |= bit;
                        known_sign *= sg;
                    } else {
                        known_sign *= cos[a].signum();
                    }
                }
            }
        }
        let entry = emb.v_prod[index];
        let product_sign = if entry == 0.0 { 1.0 } else { entry.signum() * known_sign };
        let last = *unresolved.last().expect("non-empty");
        for &a in &unresolved {
            sin_sign[a] = Some(if a == last { product_sign } else { 1.0 });
        }
    }

    let angles: Vec<f64> = (0..d)
        .map(|a| {
            let s = sin_sign[a].expect("all signs resolved") * sin_mag[a];
            canonical_angle(s.atan2(cos[a]))
        })
        .collect();
    let recovered = AngleVector(angles);

    let check = embed_angles(&recovered)?;
    let err = check
        .v_prod
        .iter()
        .zip(&emb.v_prod)
        .chain(check.v_orient.iter().zip(&emb.v_orient))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    if err > STRUCTURE_TOL {
        return Err(Error::Reconstruction(format!(
            "embedding is not a rank-1 product of unit circles (residual {err:.3e})"
        )));
    }
    Ok(recovered)
}

/// Gaussian parameters of the pre-normalization pairs `m̂_a`, one
/// `(μ_a^0, μ_a^1)` and `(σ_a^0, σ_a^1)` per circle.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPairParams {
    pub mu: Vec<[f64; 2]>,
    pub sigma: Vec<[f64; 2]>,
}

impl GaussianPairParams {
    pub fn new(mu: Vec<[f64; 2]>, sigma: Vec<[f64; 2]>) -> Result<Self> {
        if mu.len() != sigma.len() {
            return Err(Error::Shape {
                context: "gaussian pair params",
                expected: mu.len(),
                got: sigma.len(),
            });
        }
        check_sigma(sigma.iter().flatten())?;
        Ok(GaussianPairParams { mu, sigma })
    }

    pub fn circles(&self) -> usize {
        self.mu.len()
    }
}

fn check_sigma<'a>(sigma: impl IntoIterator<Item = &'a f64>) -> Result<()> {
    for &s in sigma {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::Domain(format!("sigma must be positive and finite, got {s}")));
        }
    }
    Ok(())
}

/// Reparameterized draw on one circle: `normalize(μ + σ ⊙ ε)`.
pub fn sample_circle(mu: [f64; 2], sigma: [f64; 2], noise: [f64; 2]) -> Result<CircleTuple> {
    check_sigma(&sigma)?;
    normalize_pair([mu[0] + sigma[0] * noise[0], mu[1] + sigma[1] * noise[1]])
}

/// KL divergence of the `2D` independent Gaussians against `N(0, 1)`:
/// `Σ ½(σ² + μ² − 1 − ln σ²)`.
pub fn gaussian_kl(params: &GaussianPairParams) -> Result<f64> {
    check_sigma(params.sigma.iter().flatten())?;
    Ok(params
        .mu
        .iter()
        .flatten()
        .zip(params.sigma.iter().flatten())
        .map(|(&m, &s)| kl_component(m, s))
        .sum())
}

pub(crate) fn kl_component(mu: f64, sigma: f64) -> f64 {
    let var = sigma * sigma;
    0.5 * (var + mu * mu - 1.0 - var.ln())
}
