//! Brute-force oracles and helpers shared by the integration tests. Nothing
//! here calls the library's optimizers or closed forms.

#![allow(dead_code)]

use hellinger_core::correlations::{measured_affinity, ProductBasis};
use hellinger_core::linalg::{hellinger_distance, tensor, ComplexMatrix};
use hellinger_core::rng::{random_unitary, GaussianSource};
use hellinger_core::states::DensityMatrix;
use num_complex::Complex64;

/// `min_δ Tr(√ρ − √δ)²` by pairwise mass-transfer descent over the simplex,
/// started from the uniform point and from every vertex-biased point.
pub fn oracle_c_h(rho: &DensityMatrix) -> f64 {
    let d = rho.dim();
    let eval = |w: &[f64]| {
        let delta = DensityMatrix::diagonal(w, rho.dims().to_vec()).unwrap();
        hellinger_distance(rho, &delta).unwrap()
    };
    let mut starts = vec![vec![1.0 / d as f64; d]];
    for k in 0..d {
        let mut w = vec![0.5 / d as f64; d];
        w[k] += 0.5;
        starts.push(w);
    }
    starts
        .into_iter()
        .map(|mut w| {
            let mut best = eval(&w);
            let mut step: f64 = 0.25;
            while step > 1e-10 {
                let mut improved = false;
                for i in 0..d {
                    for j in 0..d {
                        if i == j {
                            continue;
                        }
                        let moved = step.min(w[i]);
                        if moved <= 0.0 {
                            continue;
                        }
                        let mut trial = w.clone();
                        trial[i] -= moved;
                        trial[j] += moved;
                        let v = eval(&trial);
                        if v < best {
                            best = v;
                            w = trial;
                            improved = true;
                        }
                    }
                }
                if !improved {
                    step *= 0.5;
                }
            }
            best
        })
        .fold(f64::INFINITY, f64::min)
}

/// Qubit basis with first ket at Bloch angles `(θ, φ)`.
pub fn bloch_basis(theta: f64, phi: f64) -> ComplexMatrix {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let e = Complex64::from_polar(1.0, phi);
    ComplexMatrix::from_vec(
        2,
        2,
        vec![Complex64::new(c, 0.0), -e.conj() * s, e * s, Complex64::new(c, 0.0)],
    )
    .unwrap()
}

/// `max S` over qubit A bases: a Bloch-sphere grid, then pattern refinement
/// of the best grid points.
pub fn oracle_qubit_s(rho: &DensityMatrix) -> f64 {
    let s = |theta: f64, phi: f64| {
        let basis = ProductBasis::new(bloch_basis(theta, phi), None).unwrap();
        measured_affinity(rho, &basis).unwrap()
    };
    let (nt, np) = (24, 48);
    let mut grid = Vec::new();
    for i in 0..=nt {
        for j in 0..np {
            let theta = std::f64::consts::PI * i as f64 / nt as f64;
            let phi = 2.0 * std::f64::consts::PI * j as f64 / np as f64;
            grid.push((s(theta, phi), theta, phi));
        }
    }
    grid.sort_by(|a, b| b.0.total_cmp(&a.0));
    grid.iter()
        .take(4)
        .map(|&(mut best, mut theta, mut phi)| {
            let mut step: f64 = 0.1;
            while step > 1e-9 {
                let mut moved = false;
                for (dt, dp) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
                    let v = s(theta + dt, phi + dp);
                    if v > best {
                        best = v;
                        theta += dt;
                        phi += dp;
                        moved = true;
                    }
                }
                if !moved {
                    step *= 0.5;
                }
            }
            best
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// State vector of a pure density matrix (its dominant column, normalized).
pub fn state_vector(psi: &DensityMatrix) -> Vec<Complex64> {
    let m = psi.matrix();
    let n = psi.dim();
    let k = (0..n)
        .max_by(|&a, &b| m[(a, a)].re.total_cmp(&m[(b, b)].re))
        .unwrap();
    let col = m.column(k);
    let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    col.into_iter().map(|z| z / norm).collect()
}

/// Concurrence `2|ad − bc|` of a two-qubit pure state.
pub fn concurrence(psi: &DensityMatrix) -> f64 {
    let v = state_vector(psi);
    2.0 * (v[0] * v[3] - v[1] * v[2]).norm()
}

/// `(U_A ⊗ U_B) ρ (U_A ⊗ U_B)†` with Haar-random local unitaries.
pub fn random_local_rotation(rho: &DensityMatrix, seed: u64) -> DensityMatrix {
    let (d_a, d_b) = rho.bipartite_dims().unwrap();
    let mut src = GaussianSource::new(seed);
    let u = tensor(&random_unitary(d_a, &mut src), &random_unitary(d_b, &mut src));
    rho.evolve(&u).unwrap()
}

/// `(I ⊗ Ψ_B)(ρ)` for a random channel on B with `n` Kraus operators cut
/// from a Haar-random unitary on `n·d_B` dimensions.
pub fn random_channel_on_b(rho: &DensityMatrix, n: usize, seed: u64) -> DensityMatrix {
    let (d_a, d_b) = rho.bipartite_dims().unwrap();
    let mut src = GaussianSource::new(seed);
    let v = random_unitary(n * d_b, &mut src);
    let id = ComplexMatrix::identity(d_a);
    let dim = d_a * d_b;
    let mut sum = ComplexMatrix::zeros(dim, dim);
    for i in 0..n {
        let k = ComplexMatrix::from_fn(d_b, d_b, |r, c| v[(i * d_b + r, c)]);
        let full = tensor(&id, &k);
        let term = full.matmul(rho.matrix()).unwrap().matmul(&full.adjoint()).unwrap();
        sum = &sum + &term;
    }
    let herm = ComplexMatrix::from_fn(dim, dim, |r, c| (sum[(r, c)] + sum[(c, r)].conj()) * 0.5);
    hellinger_core::states::validate(herm, vec![d_a, d_b]).unwrap()
}
