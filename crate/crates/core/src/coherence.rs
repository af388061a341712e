//! Coherence measures in the fixed computational basis.
//!
//! The Hellinger coherence `C_H(ρ) = min_δ Tr(√ρ − √δ)²` over diagonal δ has
//! the closed form `2(1 − M)` with `M = √(Σ_k ⟨k|√ρ|k⟩²)`, attained at
//! `δ₀ ∝ diag(⟨k|√ρ|k⟩²)`. [`c_h_oracle`] recomputes the same minimum by
//! direct search and shares nothing with the closed form beyond `sqrt_psd`.
//! To measure in another basis, conjugate the state first.

use crate::error::{Error, Result};
use crate::linalg::{herm_eig, sqrt_psd, ComplexMatrix};
use crate::optimize::{maximize_on_simplex, SimplexOptions};
use crate::states::DensityMatrix;

/// Largest dimension handled by the search-based measures.
pub const MAX_SEARCH_DIM: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoherenceMeasure {
    Hellinger,
    HellingerOracle,
    Geometric,
}

impl CoherenceMeasure {
    pub fn id(self) -> &'static str {
        match self {
            Self::Hellinger => "c_h",
            Self::HellingerOracle => "c_h_oracle",
            Self::Geometric => "c_g",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CoherenceResult {
    pub value: f64,
    /// Closest incoherent state, when the measure produces one.
    pub optimal_incoherent: Option<DensityMatrix>,
    pub measure: CoherenceMeasure,
    /// False when a numerical search hit its iteration cap.
    pub converged: bool,
}

/// Diagonal of `√ρ`.
pub fn sqrt_diagonal(rho: &DensityMatrix) -> Result<Vec<f64>> {
    Ok(sqrt_psd(rho.matrix())?.real_diagonal())
}

/// `M = max_δ Tr(√ρ √δ) = √(Σ_k ⟨k|√ρ|k⟩²)`, i.e. `1 − C_H/2`.
pub fn max_incoherent_affinity(rho: &DensityMatrix) -> Result<f64> {
    let diag = sqrt_diagonal(rho)?;
    Ok(diag.iter().map(|x| x * x).sum::<f64>().sqrt())
}

/// Skew-information coherence `1 − Σ_k ⟨k|√ρ|k⟩²`; `C_H = 2(1 − √(1 − C))`.
pub fn skew_information_coherence(rho: &DensityMatrix) -> Result<f64> {
    let diag = sqrt_diagonal(rho)?;
    Ok(1.0 - diag.iter().map(|x| x * x).sum::<f64>())
}

/// Hellinger coherence in closed form, with its optimal incoherent state.
pub fn c_h(rho: &DensityMatrix) -> Result<CoherenceResult> {
    let diag = sqrt_diagonal(rho)?;
    // ⟨k|√ρ|k⟩ ≥ 0 for PSD √ρ; clip rounding noise
    let sq: Vec<f64> = diag.iter().map(|&x| x.max(0.0).powi(2)).collect();
    let total: f64 = sq.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidParameter(
            "√ρ has a vanishing diagonal".into(),
        ));
    }
    let m = total.sqrt();
    let weights: Vec<f64> = sq.iter().map(|x| x / total).collect();
    let delta = DensityMatrix::diagonal(&weights, rho.dims().to_vec())?;
    Ok(CoherenceResult {
        value: (2.0 * (1.0 - m)).max(0.0),
        optimal_incoherent: Some(delta),
        measure: CoherenceMeasure::Hellinger,
        converged: true,
    })
}

fn check_search_dim(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() > MAX_SEARCH_DIM {
        return Err(Error::InvalidParameter(format!(
            "search-based measures support d <= {MAX_SEARCH_DIM}, got {}",
            rho.dim()
        )));
    }
    Ok(())
}

/// `Tr(√ρ − √δ)²` for diagonal δ, evaluated as a Frobenius norm.
fn hellinger_to_diagonal(sqrt_rho: &ComplexMatrix, delta: &[f64]) -> f64 {
    let sqrt_delta = ComplexMatrix::from_real_diagonal(
        &delta.iter().map(|x| x.sqrt()).collect::<Vec<_>>(),
    );
    (sqrt_rho - &sqrt_delta).frobenius_norm().powi(2)
}

/// Hellinger coherence by direct minimization over the simplex.
pub fn c_h_oracle(rho: &DensityMatrix) -> Result<CoherenceResult> {
    c_h_oracle_with(rho, &SimplexOptions::default())
}

pub fn c_h_oracle_with(rho: &DensityMatrix, opts: &SimplexOptions) -> Result<CoherenceResult> {
    check_search_dim(rho)?;
    let s = sqrt_psd(rho.matrix())?;
    let outcome = maximize_on_simplex(rho.dim(), |w| -hellinger_to_diagonal(&s, w), opts);
    Ok(CoherenceResult {
        value: (-outcome.value).max(0.0),
        optimal_incoherent: Some(DensityMatrix::diagonal(&outcome.weights, rho.dims().to_vec())?),
        measure: CoherenceMeasure::HellingerOracle,
        converged: outcome.converged,
    })
}

/// `F(ρ, δ)` for diagonal δ, as `Tr √(√δ ρ √δ)` (one eigendecomposition).
fn fidelity_to_diagonal(rho: &ComplexMatrix, delta: &[f64]) -> f64 {
    let sd: Vec<f64> = delta.iter().map(|x| x.sqrt()).collect();
    let n = rho.rows();
    let m = ComplexMatrix::from_fn(n, n, |i, j| rho[(i, j)] * (sd[i] * sd[j]));
    match herm_eig(&m) {
        Ok(eig) => eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).sum(),
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Geometric coherence `1 − max_δ F(ρ, δ)` with the root fidelity.
///
/// Pure states use the exact maximum `max_δ √⟨ψ|δ|ψ⟩ = √(max_k |ψ_k|²)`;
/// mixed states are maximized numerically over the simplex.
pub fn c_g(rho: &DensityMatrix) -> Result<CoherenceResult> {
    c_g_with(rho, &SimplexOptions::default())
}

pub fn c_g_with(rho: &DensityMatrix, opts: &SimplexOptions) -> Result<CoherenceResult> {
    check_search_dim(rho)?;
    if rho.is_pure(1e-12) {
        let diag = rho.matrix().real_diagonal();
        let (k, &pk) = diag
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .expect("non-empty state");
        let mut weights = vec![0.0; diag.len()];
        weights[k] = 1.0;
        return Ok(CoherenceResult {
            value: (1.0 - pk.max(0.0).sqrt()).clamp(0.0, 1.0),
            optimal_incoherent: Some(DensityMatrix::diagonal(&weights, rho.dims().to_vec())?),
            measure: CoherenceMeasure::Geometric,
            converged: true,
        });
    }
    let outcome = maximize_on_simplex(rho.dim(), |w| fidelity_to_diagonal(rho.matrix(), w), opts);
    Ok(CoherenceResult {
        value: (1.0 - outcome.value).clamp(0.0, 1.0),
        optimal_incoherent: Some(DensityMatrix::diagonal(&outcome.weights, rho.dims().to_vec())?),
        measure: CoherenceMeasure::Geometric,
        converged: outcome.converged,
    })
}

/// `Σ_{i≠j} |ρ_ij|^order` for order 1 (l₁ norm) or 2 (squared l₂ norm).
pub fn c_offdiag(rho: &DensityMatrix, order: u32) -> Result<f64> {
    if order != 1 && order != 2 {
        return Err(Error::InvalidParameter(format!(
            "off-diagonal order must be 1 or 2, got {order}"
        )));
    }
    let m = rho.matrix();
    let n = rho.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let a = m[(i, j)].norm();
                s += if order == 1 { a } else { a * a };
            }
        }
    }
    Ok(s)
}
