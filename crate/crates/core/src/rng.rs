//! Seeded sampling used by every random ensemble in the crate.
//!
//! The bit source is ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded through
//! `SeedableRng::seed_from_u64`. Uniforms on the open interval (0, 1) are
//! `((x >> 11) + 0.5) · 2⁻⁵³` for each raw 64-bit draw `x`, and Gaussians come
//! from the Box–Muller transform applied to consecutive uniform pairs
//! `(u1, u2)`, producing `r cos θ` first and `r sin θ` second with
//! `r = √(−2 ln u1)`, `θ = 2π u2`. A complex Gaussian is one real draw followed
//! by one imaginary draw. Trial seeds are derived with [`derive_seed`].

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::ComplexMatrix;

/// Mixes `(master, index)` into an independent 64-bit seed (SplitMix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic source of uniforms and Gaussians.
pub struct GaussianSource {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianSource {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform on (0, 1), never exactly 0 or 1.
    pub fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn complex(&mut self) -> Complex64 {
        let re = self.gaussian();
        let im = self.gaussian();
        Complex64::new(re, im)
    }

    /// Uniform integer in `0..n` by rejection sampling.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0);
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let x = self.rng.next_u64();
            if x < zone {
                return (x % n) as usize;
            }
        }
    }

    /// Uniform random permutation of `0..n` (Fisher–Yates).
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.below(i + 1);
            p.swap(i, j);
        }
        p
    }

    /// Normalized complex Gaussian vector.
    pub fn unit_vector(&mut self, d: usize) -> Vec<Complex64> {
        let v: Vec<Complex64> = (0..d).map(|_| self.complex()).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.into_iter().map(|z| z / norm).collect()
    }
}

/// Haar-random unitary: Gram–Schmidt on the columns of a Ginibre matrix.
pub fn random_unitary(d: usize, src: &mut GaussianSource) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| src.complex());
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut v = g.column(j);
        // two passes keep the columns orthonormal to working precision
        for _ in 0..2 {
            for u in &cols {
                let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= proj * y;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|z| z / norm).collect());
    }
    ComplexMatrix::from_fn(d, d, |i, j| cols[j][i])
}
