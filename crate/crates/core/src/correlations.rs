//! Hellinger-distance correlations from local projective measurements.
//!
//! Every quantity derives from the measured affinity
//! `S = Σ_k Tr(√ρ Π_k √ρ Π_k)` maximized over measurement bases. Two
//! conventions are reported side by side: `d_value = 2(1 − s_max)` and
//! `d_sqrt_value = 2(1 − √s_max)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{herm_eig, sqrt_psd, tensor, ComplexMatrix};
use crate::optimize::{maximize_over_unitaries, UnitarySearchOptions};
use crate::states::DensityMatrix;

/// Largest local dimension accepted by the basis searches.
pub const MAX_LOCAL_DIM: usize = 4;
const BASIS_TOL: f64 = 1e-10;

/// Local measurement bases; columns are the measurement kets.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductBasis {
    basis_a: ComplexMatrix,
    basis_b: Option<ComplexMatrix>,
}

impl ProductBasis {
    pub fn new(basis_a: ComplexMatrix, basis_b: Option<ComplexMatrix>) -> Result<Self> {
        for (name, u) in std::iter::once(("A", &basis_a)).chain(basis_b.as_ref().map(|b| ("B", b))) {
            let dev = u.unitarity_deviation();
            if dev > BASIS_TOL {
                return Err(Error::InvalidParameter(format!(
                    "basis on {name} is not orthonormal (deviation {dev:e})"
                )));
            }
        }
        Ok(Self { basis_a, basis_b })
    }

    /// Computational basis on A, optionally also on B.
    pub fn computational(d_a: usize, d_b: Option<usize>) -> Self {
        Self {
            basis_a: ComplexMatrix::identity(d_a),
            basis_b: d_b.map(ComplexMatrix::identity),
        }
    }

    pub fn basis_a(&self) -> &ComplexMatrix {
        &self.basis_a
    }

    pub fn basis_b(&self) -> Option<&ComplexMatrix> {
        self.basis_b.as_ref()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Search,
}

impl Method {
    pub fn id(self) -> &'static str {
        match self {
            Self::ClosedForm => "closed_form",
            Self::Search => "search",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CorrelationResult {
    pub s_max: f64,
    /// `2(1 − s_max)`.
    pub d_value: f64,
    /// `2(1 − √s_max)`.
    pub d_sqrt_value: f64,
    pub optimal_basis: ProductBasis,
    pub method: Method,
    pub converged: bool,
}

impl CorrelationResult {
    fn from_s(s_max: f64, optimal_basis: ProductBasis, method: Method, converged: bool) -> Self {
        let s = s_max.clamp(0.0, 1.0);
        Self {
            s_max: s,
            d_value: 2.0 * (1.0 - s),
            d_sqrt_value: 2.0 * (1.0 - s.sqrt()),
            optimal_basis,
            method,
            converged,
        }
    }
}

fn projector(u: &ComplexMatrix, k: usize) -> ComplexMatrix {
    ComplexMatrix::outer(&u.column(k))
}

/// `S = Σ Tr(√ρ P √ρ P)` over the product projectors `P = Π_k ⊗ I` (or
/// `Π_k ⊗ Π_j` when a B basis is given).
pub fn measured_affinity(rho: &DensityMatrix, basis: &ProductBasis) -> Result<f64> {
    let (d_a, d_b) = rho.bipartite_dims()?;
    if basis.basis_a.rows() != d_a {
        return Err(Error::DimensionMismatch {
            expected: d_a,
            actual: basis.basis_a.rows(),
        });
    }
    if let Some(b) = &basis.basis_b {
        if b.rows() != d_b {
            return Err(Error::DimensionMismatch {
                expected: d_b,
                actual: b.rows(),
            });
        }
    }
    let s = sqrt_psd(rho.matrix())?;
    let b_projectors: Vec<ComplexMatrix> = match &basis.basis_b {
        Some(b) => (0..d_b).map(|j| projector(b, j)).collect(),
        None => vec![ComplexMatrix::identity(d_b)],
    };
    let mut total = 0.0;
    for k in 0..d_a {
        let pa = projector(&basis.basis_a, k);
        for pb in &b_projectors {
            let p = tensor(&pa, pb);
            let sp = s.mul_unchecked(&p);
            total += sp.trace_product_re(&sp);
        }
    }
    Ok(total)
}

/// Block evaluation of the one-sided `S`: squared Frobenius norms of the
/// diagonal `d_B × d_B` blocks of `(U⊗I)† √ρ (U⊗I)`.
fn one_sided_s(sqrt_rho: &ComplexMatrix, u: &ComplexMatrix, d_b: usize) -> f64 {
    let w = sqrt_rho.conjugate_by(&tensor(u, &ComplexMatrix::identity(d_b)));
    let d_a = u.rows();
    let mut s = 0.0;
    for k in 0..d_a {
        for r in 0..d_b {
            for c in 0..d_b {
                s += w[(k * d_b + r, k * d_b + c)].norm_sqr();
            }
        }
    }
    s
}

/// Product-basis `S = Σ_m |⟨m|(U_A⊗U_B)† √ρ (U_A⊗U_B)|m⟩|²`.
fn product_s(sqrt_rho: &ComplexMatrix, ua: &ComplexMatrix, ub: &ComplexMatrix) -> f64 {
    let u = tensor(ua, ub);
    let n = u.rows();
    // only the diagonal of U†AU is needed
    let au = sqrt_rho.mul_unchecked(&u);
    (0..n)
        .map(|m| {
            let z: Complex64 = (0..n).map(|i| u[(i, m)].conj() * au[(i, m)]).sum();
            z.norm_sqr()
        })
        .sum()
}

fn paulis() -> [ComplexMatrix; 3] {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    [
        ComplexMatrix::from_vec(2, 2, vec![z, one, one, z]).expect("2x2"),
        ComplexMatrix::from_vec(2, 2, vec![z, -i, i, z]).expect("2x2"),
        ComplexMatrix::from_vec(2, 2, vec![one, z, z, -one]).expect("2x2"),
    ]
}

/// `T_ij = Tr(√ρ (σ_i⊗I) √ρ (σ_j⊗I))` for a qubit first subsystem.
pub fn t_matrix(rho: &DensityMatrix) -> Result<[[f64; 3]; 3]> {
    let (d_a, d_b) = rho.bipartite_dims()?;
    if d_a != 2 {
        return Err(Error::InvalidSubsystems(format!(
            "T matrix needs a qubit first subsystem, got d_A = {d_a}"
        )));
    }
    let s = sqrt_psd(rho.matrix())?;
    let id = ComplexMatrix::identity(d_b);
    let sx: Vec<ComplexMatrix> = paulis()
        .iter()
        .map(|p| s.mul_unchecked(&tensor(p, &id)))
        .collect();
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let v = sx[i].trace_product_re(&sx[j]);
            t[i][j] = v;
            t[j][i] = v;
        }
    }
    Ok(t)
}

/// Qubit basis whose first ket has Bloch vector `r`.
fn qubit_basis(r: [f64; 3]) -> ComplexMatrix {
    let theta = r[2].clamp(-1.0, 1.0).acos();
    let phi = r[1].atan2(r[0]);
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let e = Complex64::from_polar(1.0, phi);
    ComplexMatrix::from_vec(
        2,
        2,
        vec![Complex64::new(c, 0.0), -e.conj() * s, e * s, Complex64::new(c, 0.0)],
    )
    .expect("2x2")
}

fn check_search_dims(d_a: usize, d_b: usize) -> Result<()> {
    if d_a > MAX_LOCAL_DIM || d_b > MAX_LOCAL_DIM {
        return Err(Error::InvalidParameter(format!(
            "basis search supports local dimensions <= {MAX_LOCAL_DIM}, got {d_a}x{d_b}"
        )));
    }
    Ok(())
}

/// One-sided correlation: measurement on A only. Uses `1 − λ_max(T)` when A
/// is a qubit and a basis search otherwise.
pub fn d_one_sided(rho: &DensityMatrix) -> Result<CorrelationResult> {
    let (d_a, _) = rho.bipartite_dims()?;
    if d_a != 2 {
        return d_one_sided_search(rho, &UnitarySearchOptions::default());
    }
    let t = t_matrix(rho)?;
    let tm = ComplexMatrix::from_fn(3, 3, |i, j| Complex64::new(t[i][j], 0.0));
    let eig = herm_eig(&tm)?;
    let lambda = eig.max_eigenvalue();
    let v = eig.eigenvectors.column(2);
    // strip the arbitrary phase of the complex eigenvector
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .expect("three components");
    let phase = pivot / pivot.norm();
    let r: Vec<f64> = v.iter().map(|z| (z / phase).re).collect();
    let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    let basis = ProductBasis {
        basis_a: qubit_basis([r[0] / norm, r[1] / norm, r[2] / norm]),
        basis_b: None,
    };
    Ok(CorrelationResult::from_s(
        (1.0 + lambda) / 2.0,
        basis,
        Method::ClosedForm,
        true,
    ))
}

/// One-sided correlation by basis search, for any `d_A ≤ 4`.
pub fn d_one_sided_search(
    rho: &DensityMatrix,
    opts: &UnitarySearchOptions,
) -> Result<CorrelationResult> {
    let (d_a, d_b) = rho.bipartite_dims()?;
    check_search_dims(d_a, 1)?;
    let s = sqrt_psd(rho.matrix())?;
    let out = maximize_over_unitaries(&[d_a], |us| one_sided_s(&s, &us[0], d_b), opts);
    let basis = ProductBasis {
        basis_a: out.unitaries.into_iter().next().expect("one factor"),
        basis_b: None,
    };
    Ok(CorrelationResult::from_s(out.value, basis, Method::Search, out.converged))
}

/// Symmetric correlation: local bases on both sides. The headline value is
/// `d_sqrt_value`.
pub fn d_symmetric(rho: &DensityMatrix) -> Result<CorrelationResult> {
    d_symmetric_with(rho, &UnitarySearchOptions::default())
}

pub fn d_symmetric_with(
    rho: &DensityMatrix,
    opts: &UnitarySearchOptions,
) -> Result<CorrelationResult> {
    let (d_a, d_b) = rho.bipartite_dims()?;
    check_search_dims(d_a, d_b)?;
    let s = sqrt_psd(rho.matrix())?;
    let out = maximize_over_unitaries(&[d_a, d_b], |us| product_s(&s, &us[0], &us[1]), opts);
    let mut us = out.unitaries.into_iter();
    let basis = ProductBasis {
        basis_a: us.next().expect("A factor"),
        basis_b: us.next(),
    };
    Ok(CorrelationResult::from_s(out.value, basis, Method::Search, out.converged))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{bell, classical_quantum, plus_state, random_density};

    fn fast_opts() -> UnitarySearchOptions {
        UnitarySearchOptions {
            restarts: 8,
            ..Default::default()
        }
    }

    #[test]
    fn bell_affinities() {
        let b = bell();
        let s = measured_affinity(&b, &ProductBasis::computational(2, None)).unwrap();
        assert!((s - 0.5).abs() < 1e-12);
        let t = t_matrix(&b).unwrap();
        assert!(t.iter().flatten().all(|x| x.abs() < 1e-12));
        let r = d_one_sided(&b).unwrap();
        assert!((r.d_value - 1.0).abs() < 1e-9);
        assert!((r.d_sqrt_value - (2.0 - 2f64.sqrt())).abs() < 1e-9);
    }

    #[test]
    fn plus_plus_product_basis() {
        let pp = plus_state().tensor(&plus_state());
        let s = measured_affinity(&pp, &ProductBasis::computational(2, Some(2))).unwrap();
        assert!((s - 0.25).abs() < 1e-12);
        let r = d_symmetric_with(&pp, &fast_opts()).unwrap();
        assert!(r.d_sqrt_value < 1e-9);
    }

    #[test]
    fn maximally_mixed_t_is_identity() {
        let rho = DensityMatrix::diagonal(&[0.25; 4], vec![2, 2]).unwrap();
        let t = t_matrix(&rho).unwrap();
        for (i, row) in t.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                assert!((x - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        assert!(d_one_sided(&rho).unwrap().d_value.abs() < 1e-12);
    }

    #[test]
    fn closed_form_basis_attains_s_max() {
        let rho = random_density(4, 4, 23).unwrap().with_dims(vec![2, 2]).unwrap();
        let r = d_one_sided(&rho).unwrap();
        let s = measured_affinity(&rho, &r.optimal_basis).unwrap();
        assert!((s - r.s_max).abs() < 1e-10);
        let search = d_one_sided_search(&rho, &fast_opts()).unwrap();
        assert!((search.d_value - r.d_value).abs() < 1e-5);
    }

    #[test]
    fn search_value_matches_literal_affinity() {
        let rho = random_density(6, 3, 5).unwrap().with_dims(vec![3, 2]).unwrap();
        let r = d_one_sided(&rho).unwrap();
        assert_eq!(r.method, Method::Search);
        let s = measured_affinity(&rho, &r.optimal_basis).unwrap();
        assert!((s - r.s_max).abs() < 1e-10);
        let sym = d_symmetric_with(&rho, &fast_opts()).unwrap();
        let s2 = measured_affinity(&rho, &sym.optimal_basis).unwrap();
        assert!((s2 - sym.s_max).abs() < 1e-10);
    }

    #[test]
    fn classical_quantum_has_no_correlation() {
        let blocks = [random_density(2, 2, 1).unwrap(), random_density(2, 1, 2).unwrap()];
        let cq = classical_quantum(&[0.3, 0.7], &blocks).unwrap();
        assert!(d_one_sided(&cq).unwrap().d_value <= 1e-8);
    }

    #[test]
    fn rejects_bad_inputs() {
        let rho = random_density(3, 3, 0).unwrap();
        assert!(d_one_sided(&rho).is_err());
        let big = random_density(10, 2, 0).unwrap().with_dims(vec![5, 2]).unwrap();
        assert!(d_symmetric(&big).is_err());
        let twisted = ComplexMatrix::identity(2).scale_real(2.0);
        assert!(ProductBasis::new(twisted, None).is_err());
        assert!(t_matrix(&DensityMatrix::diagonal(&[0.5; 2], vec![1, 2]).unwrap()).is_err());
    }
}
