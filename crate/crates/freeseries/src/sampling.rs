//! Seeded random generation of the matrix tuples used for evaluation-based
//! checks: small-norm tuples inside the evaluation domain, skew-Hermitian
//! tuples (the non-commutative line), unitary tuples (the non-commutative
//! circle), right-halfplane points, and strict contractions.
//!
//! Every generator takes the RNG explicitly so callers control seeding and
//! parallel runs stay reproducible.

use crate::linalg::{cplx, spectral_norm, CMat};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

/// Deterministic RNG from a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> ChaCha12Rng {
    use rand::SeedableRng;
    ChaCha12Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian entry (real and imaginary parts each
/// `N(0, 1/2)`, so `E|z|² = 1`).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let scale = 0.5f64.sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * scale, im * scale)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Rescales `m` to the given spectral norm (zero matrices stay zero).
fn with_spectral_norm(m: CMat, target: f64) -> CMat {
    let norm = spectral_norm(&m);
    if norm == 0.0 {
        m
    } else {
        m * cplx(target / norm, 0.0)
    }
}

/// An `N`-tuple of `n×n` matrices with `‖Z_k‖ = 0.5·eps`, comfortably inside
/// the evaluation domain `{‖Z_k‖ < eps}`.
pub fn tuple_in_domain<R: Rng + ?Sized>(
    rng: &mut R,
    n_vars: usize,
    n: usize,
    eps: f64,
) -> Vec<CMat> {
    (0..n_vars)
        .map(|_| with_spectral_norm(ginibre(rng, n, n), 0.5 * eps))
        .collect()
}

/// Random skew-Hermitian matrix `i·(G+G*)/2` rescaled to `‖Z‖ = 0.5·eps`.
pub fn skew_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize, eps: f64) -> CMat {
    let g = ginibre(rng, n, n);
    let herm = (&g + g.adjoint()) * cplx(0.5, 0.0);
    with_spectral_norm(herm * Complex64::i(), 0.5 * eps)
}

/// An `N`-tuple of skew-Hermitian `n×n` matrices inside the evaluation
/// domain of radius `eps`.
pub fn skew_hermitian_tuple<R: Rng + ?Sized>(
    rng: &mut R,
    n_vars: usize,
    n: usize,
    eps: f64,
) -> Vec<CMat> {
    (0..n_vars).map(|_| skew_hermitian(rng, n, eps)).collect()
}

/// Right-halfplane point `Z = S + 0.1·I` with `S` skew-Hermitian of norm
/// `0.5·eps`, so `Z + Z* = 0.2·I ≻ 0`.
pub fn halfplane_tuple<R: Rng + ?Sized>(
    rng: &mut R,
    n_vars: usize,
    n: usize,
    eps: f64,
) -> Vec<CMat> {
    (0..n_vars)
        .map(|_| skew_hermitian(rng, n, eps) + CMat::identity(n, n) * cplx(0.1, 0.0))
        .collect()
}

/// Haar-distributed unitary via QR of a Ginibre matrix with the phases of
/// the `R` diagonal folded into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let g = ginibre(rng, n, n);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let phases = CMat::from_fn(n, n, |i, j| {
        if i != j {
            Complex64::new(0.0, 0.0)
        } else {
            let d = r[(i, i)];
            if d.norm() == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                d / d.norm()
            }
        }
    });
    q * phases
}

/// An `N`-tuple of Haar unitaries.
pub fn unitary_tuple<R: Rng + ?Sized>(rng: &mut R, n_vars: usize, n: usize) -> Vec<CMat> {
    (0..n_vars).map(|_| haar_unitary(rng, n)).collect()
}

/// An `N`-tuple of strict contractions: each `‖W_k‖ = bound·u_k` with
/// `u_k` uniform in `[0.2, 1)`, so `‖W_k‖ ≤ bound < 1` for `bound < 1`.
pub fn strict_contraction_tuple<R: Rng + ?Sized>(
    rng: &mut R,
    n_vars: usize,
    n: usize,
    bound: f64,
) -> Vec<CMat> {
    (0..n_vars)
        .map(|_| {
            let u: f64 = rng.random_range(0.2..1.0);
            with_spectral_norm(ginibre(rng, n, n), bound * u)
        })
        .collect()
}

/// Uniform point on the unit circle.
pub fn random_unimodular<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    Complex64::new(theta.cos(), theta.sin())
}
