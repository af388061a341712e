//! Incoherent operations given by Kraus sets.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::rng::GaussianSource;
use crate::states::DensityMatrix;

/// Tolerance on `Σ K†K = I`.
pub const COMPLETENESS_TOL: f64 = 1e-10;
/// Outcomes below this probability are left out of the ensemble.
pub const MIN_OUTCOME_PROBABILITY: f64 = 1e-12;
/// Magnitude below which a Kraus entry counts as zero.
const ZERO_ENTRY: f64 = 1e-12;

/// Kraus set whose operators each map diagonal states to diagonal states.
#[derive(Debug, Clone, PartialEq)]
pub struct IncoherentChannel {
    kraus: Vec<ComplexMatrix>,
    dims: Vec<usize>,
    label: String,
}

impl IncoherentChannel {
    /// Checks shape, completeness and the one-nonzero-per-column rule.
    pub fn new(kraus: Vec<ComplexMatrix>, dims: Vec<usize>, label: impl Into<String>) -> Result<Self> {
        let d: usize = dims.iter().product();
        if kraus.is_empty() || dims.is_empty() {
            return Err(Error::InvalidChannel("empty Kraus set or dims".into()));
        }
        let mut sum = ComplexMatrix::zeros(d, d);
        for (i, k) in kraus.iter().enumerate() {
            if k.rows() != d || k.cols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: if k.rows() != d { k.rows() } else { k.cols() },
                });
            }
            k.check_finite()?;
            for col in 0..d {
                let nonzero = (0..d).filter(|&r| k[(r, col)].norm() > ZERO_ENTRY).count();
                if nonzero > 1 {
                    return Err(Error::InvalidChannel(format!(
                        "Kraus operator {i} has {nonzero} nonzero entries in column {col}"
                    )));
                }
            }
            sum = &sum + &k.adjoint().mul_unchecked(k);
        }
        let dev = (&sum - &ComplexMatrix::identity(d)).max_abs();
        if dev > COMPLETENESS_TOL {
            return Err(Error::InvalidChannel(format!(
                "Kraus operators are not complete: max |ΣK†K − I| = {dev:e}"
            )));
        }
        Ok(Self {
            kraus,
            dims,
            label: label.into(),
        })
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Re-tags the subsystem structure the channel acts on.
    pub fn with_dims(self, dims: Vec<usize>) -> Result<Self> {
        let product: usize = dims.iter().product();
        if dims.is_empty() || product != self.dim() {
            return Err(Error::DimsMismatch {
                dims,
                product,
                dim: self.dim(),
            });
        }
        Ok(Self { dims, ..self })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// The single Kraus operator of a unitary channel.
    pub fn as_unitary(&self) -> Option<&ComplexMatrix> {
        match self.kraus.as_slice() {
            [u] => Some(u),
            _ => None,
        }
    }

    fn check_input(&self, rho: &DensityMatrix) -> Result<()> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: rho.dim(),
            });
        }
        Ok(())
    }
}

/// Completely dephasing channel `{|i⟩⟨i|}`.
pub fn dephasing(d: usize) -> Result<IncoherentChannel> {
    let kraus = (0..d)
        .map(|i| {
            let mut k = ComplexMatrix::zeros(d, d);
            k[(i, i)] = Complex64::new(1.0, 0.0);
            k
        })
        .collect();
    IncoherentChannel::new(kraus, vec![d], "dephasing")
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub probability: f64,
    pub state: DensityMatrix,
}

/// Selective application: `p_i = Tr K_i ρ K_i†`, `ρ_i = K_i ρ K_i† / p_i`.
/// Outcomes with `p_i` below [`MIN_OUTCOME_PROBABILITY`] are omitted without
/// renormalizing the rest.
pub fn apply_channel(rho: &DensityMatrix, ch: &IncoherentChannel) -> Result<Vec<Outcome>> {
    ch.check_input(rho)?;
    let mut out = Vec::with_capacity(ch.kraus.len());
    for k in &ch.kraus {
        let m = k.mul_unchecked(rho.matrix()).mul_unchecked(&k.adjoint());
        let p = m.trace().re;
        if p < MIN_OUTCOME_PROBABILITY {
            continue;
        }
        out.push(Outcome {
            probability: p,
            state: DensityMatrix::normalized(m, rho.dims().to_vec())?,
        });
    }
    Ok(out)
}

/// Non-selective application `Λ(ρ) = Σ_i K_i ρ K_i†`.
pub fn apply_map(rho: &DensityMatrix, ch: &IncoherentChannel) -> Result<DensityMatrix> {
    ch.check_input(rho)?;
    let d = rho.dim();
    let mut sum = ComplexMatrix::zeros(d, d);
    for k in &ch.kraus {
        sum = &sum + &k.mul_unchecked(rho.matrix()).mul_unchecked(&k.adjoint());
    }
    DensityMatrix::from_numerical(sum, rho.dims().to_vec())
}

/// `K_i = Σ_j c_ij |π_i(j)⟩⟨j|` with random permutations `π_i` and complex
/// Gaussian coefficients normalized so that `Σ_i |c_ij|² = 1` for every `j`.
/// All permutations are drawn first, then the coefficients row by row.
pub fn random_incoherent_kraus(d: usize, n: usize, seed: u64) -> Result<IncoherentChannel> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameter(format!(
            "need d >= 1 and n >= 1, got d = {d}, n = {n}"
        )));
    }
    let mut src = GaussianSource::new(seed);
    let perms: Vec<Vec<usize>> = (0..n).map(|_| src.permutation(d)).collect();
    let mut c: Vec<Vec<Complex64>> = (0..n)
        .map(|_| (0..d).map(|_| src.complex()).collect())
        .collect();
    for j in 0..d {
        let norm = (0..n).map(|i| c[i][j].norm_sqr()).sum::<f64>().sqrt();
        for row in c.iter_mut() {
            row[j] /= norm;
        }
    }
    let kraus = (0..n)
        .map(|i| {
            let mut k = ComplexMatrix::zeros(d, d);
            for j in 0..d {
                k[(perms[i][j], j)] = c[i][j];
            }
            k
        })
        .collect();
    IncoherentChannel::new(kraus, vec![d], format!("random_incoherent(d={d},n={n},seed={seed})"))
}

/// Permutation unitary `|i, j⟩ → |i, (i mod d_B) ⊕ j⟩` with `⊕` addition mod `d_B`.
pub fn embedding_unitary(d_a: usize, d_b: usize) -> Result<IncoherentChannel> {
    if d_a == 0 || d_b == 0 {
        return Err(Error::InvalidParameter("dimensions must be positive".into()));
    }
    let n = d_a * d_b;
    let mut u = ComplexMatrix::zeros(n, n);
    for i in 0..d_a {
        for j in 0..d_b {
            u[(i * d_b + (i % d_b + j) % d_b, i * d_b + j)] = Complex64::new(1.0, 0.0);
        }
    }
    IncoherentChannel::new(vec![u], vec![d_a, d_b], format!("embedding({d_a},{d_b})"))
}

/// `I₂ ⊕ iσ_y` on two qubits.
pub fn direct_sum_example() -> IncoherentChannel {
    let one = Complex64::new(1.0, 0.0);
    let mut u = ComplexMatrix::zeros(4, 4);
    u[(0, 0)] = one;
    u[(1, 1)] = one;
    u[(2, 3)] = one;
    u[(3, 2)] = -one;
    IncoherentChannel::new(vec![u], vec![2, 2], "identity_plus_i_sigma_y")
        .expect("fixed permutation unitary is a valid channel")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherence::c_h;
    use crate::states::{plus_state, random_density};

    #[test]
    fn dephasing_plus_state() {
        let out = apply_channel(&plus_state(), &dephasing(2).unwrap()).unwrap();
        assert_eq!(out.len(), 2);
        for (i, o) in out.iter().enumerate() {
            assert!((o.probability - 0.5).abs() < 1e-15);
            assert!((o.state.matrix()[(i, i)].re - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn unitary_channel_single_outcome() {
        let ch = random_incoherent_kraus(3, 1, 4).unwrap();
        assert!(ch.as_unitary().unwrap().unitarity_deviation() < 1e-14);
        let out = apply_channel(&random_density(3, 2, 1).unwrap(), &ch).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out[0].probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_kraus_is_reproducible_and_valid() {
        let a = random_incoherent_kraus(4, 3, 77).unwrap();
        let b = random_incoherent_kraus(4, 3, 77).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_incoherent_kraus(4, 3, 78).unwrap());
        assert!(random_incoherent_kraus(3, 0, 1).is_err());
    }

    #[test]
    fn incoherent_inputs_stay_incoherent() {
        let rho = DensityMatrix::diagonal(&[0.1, 0.2, 0.3, 0.4], vec![4]).unwrap();
        for seed in 0..10 {
            let ch = random_incoherent_kraus(4, 3, seed).unwrap();
            for o in apply_channel(&rho, &ch).unwrap() {
                assert!(c_h(&o.state).unwrap().value <= 1e-9);
            }
        }
    }

    #[test]
    fn rejects_invalid_kraus_sets() {
        let h = ComplexMatrix::from_real_rows(&[vec![1.0, 1.0], vec![1.0, -1.0]])
            .unwrap()
            .scale_real(0.5f64.sqrt());
        assert!(matches!(
            IncoherentChannel::new(vec![h], vec![2], "hadamard"),
            Err(Error::InvalidChannel(_))
        ));
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(IncoherentChannel::new(vec![half], vec![2], "x").is_err());
        let ch = dephasing(2).unwrap();
        assert!(matches!(
            apply_channel(&random_density(3, 3, 0).unwrap(), &ch),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn embedding_is_cnot_for_qubits() {
        let ch = embedding_unitary(2, 2).unwrap();
        let u = ch.as_unitary().unwrap();
        let expect = [(0, 0), (1, 1), (3, 2), (2, 3)];
        for &(r, c) in &expect {
            assert_eq!(u[(r, c)], Complex64::new(1.0, 0.0));
        }
        assert!((u.frobenius_norm().powi(2) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn embedding_is_permutation_for_unequal_dims() {
        for (da, db) in [(2, 3), (3, 2), (3, 4), (4, 4)] {
            let u = embedding_unitary(da, db).unwrap().as_unitary().unwrap().clone();
            let n = da * db;
            for r in 0..n {
                let ones = (0..n).filter(|&c| u[(r, c)].norm() > 0.5).count();
                assert_eq!(ones, 1);
            }
            assert!(u.unitarity_deviation() < 1e-15);
        }
    }

    #[test]
    fn direct_sum_on_plus_plus() {
        let ch = direct_sum_example();
        let u = ch.as_unitary().unwrap();
        let h = 0.5;
        let v = u.apply(&[Complex64::new(h, 0.0); 4]).unwrap();
        let expect = [h, h, h, -h];
        for (z, e) in v.iter().zip(expect) {
            assert!((z - Complex64::new(e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn map_equals_weighted_outcomes() {
        let rho = random_density(3, 3, 8).unwrap();
        let ch = random_incoherent_kraus(3, 2, 5).unwrap();
        let mapped = apply_map(&rho, &ch).unwrap();
        let mut sum = ComplexMatrix::zeros(3, 3);
        for o in apply_channel(&rho, &ch).unwrap() {
            sum = &sum + &o.state.matrix().scale_real(o.probability);
        }
        assert!((&sum - mapped.matrix()).max_abs() < 1e-12);
    }
}
