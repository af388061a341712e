//! Dense complex linear algebra for small Hermitian matrices.
//!
//! Everything here works on row-major [`ComplexMatrix`] values of modest size
//! (tens of rows at most). The Hermitian eigensolver is a cyclic complex Jacobi
//! iteration: it is deterministic, needs no external LAPACK, and delivers
//! eigenvectors that are orthonormal to working precision, which the matrix
//! square root relies on.
//!
//! Tensor products use left-factor-major ordering throughout the crate: the
//! basis index of `A ⊗ B` is `i * dim(B) + k`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::states::DensityMatrix;

/// Relative off-diagonal norm at which the Jacobi sweeps stop.
const JACOBI_TARGET: f64 = 1e-14;
/// Relative off-diagonal norm the solver must reach to report success.
const JACOBI_ACCEPT: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues below `-PSD_CLAMP * λ_max` mark a matrix as not PSD.
pub const PSD_CLAMP: f64 = 1e-10;

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        let m = Self { rows, cols, data };
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    actual: row.len(),
                });
            }
            data.extend(row.iter().map(|&x| Complex64::new(x, 0.0)));
        }
        Self::from_vec(n, cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(x, 0.0);
        }
        m
    }

    /// Outer product `|v⟩⟨v|`.
    pub fn outer(v: &[Complex64]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    /// Real parts of the diagonal.
    pub fn real_diagonal(&self) -> Vec<f64> {
        self.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn check_finite(&self) -> Result<()> {
        for (idx, z) in self.data.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite {
                    row: idx / self.cols.max(1),
                    col: idx % self.cols.max(1),
                });
            }
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        self.diagonal().into_iter().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from Hermiticity, `max |A_ij − conj(A_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// `(A + A†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: rhs.rows,
            });
        }
        Ok(self.mul_unchecked(rhs))
    }

    pub(crate) fn mul_unchecked(&self, rhs: &Self) -> Self {
        let (n, m, p) = (self.rows, self.cols, rhs.cols);
        let mut out = Self::zeros(n, p);
        for i in 0..n {
            for k in 0..m {
                let a = self.data[i * m + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &rhs.data[k * p..(k + 1) * p];
                let dst = &mut out.data[i * p..(i + 1) * p];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `U† A U` for square `A` and `U`.
    pub(crate) fn conjugate_by(&self, u: &Self) -> Self {
        u.adjoint().mul_unchecked(&self.mul_unchecked(u))
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// `‖U†U − I‖` measured entrywise.
    pub fn unitarity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let g = self.adjoint().mul_unchecked(self);
        let id = Self::identity(self.rows);
        (&g - &id).max_abs()
    }

    /// `Re Tr(A B)` without forming the product.
    pub(crate) fn trace_product_re(&self, rhs: &Self) -> f64 {
        let n = self.rows;
        let mut acc = 0.0;
        for i in 0..n {
            for k in 0..self.cols {
                acc += (self.data[i * self.cols + k] * rhs.data[k * rhs.cols + i]).re;
            }
        }
        acc
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        self.mul_unchecked(rhs)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Eigenvalues (ascending) and orthonormal eigenvectors (as columns).
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    /// `V f(Λ) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .filter(|&k| fl[k] != 0.0)
                .map(|k| v[(i, k)] * v[(j, k)].conj() * fl[k])
                .sum()
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|l| l)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// The input is symmetrized as `(H + H†)/2` before factoring, so small
/// asymmetries from upstream arithmetic are tolerated.
pub fn herm_eig(h: &ComplexMatrix) -> Result<SpectralDecomposition> {
    if !h.is_square() {
        return Err(Error::NotSquare {
            rows: h.rows,
            cols: h.cols,
        });
    }
    h.check_finite()?;
    let n = h.rows;
    let mut a = h.hermitian_part();
    for i in 0..n {
        a[(i, i)].im = 0.0;
    }
    let mut v = ComplexMatrix::identity(n);
    let norm = a.frobenius_norm();

    let mut off = off_diagonal_norm(&a);
    let mut sweeps = 0;
    while off > JACOBI_TARGET * norm && sweeps < JACOBI_MAX_SWEEPS {
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 || mag < f64::MIN_POSITIVE * 1e10 {
                    continue;
                }
                rotated = true;
                jacobi_rotate(&mut a, &mut v, p, q, apq, mag);
            }
        }
        off = off_diagonal_norm(&a);
        if !rotated {
            break;
        }
    }
    if off > JACOBI_ACCEPT * norm.max(f64::MIN_POSITIVE) && off > 0.0 {
        return Err(Error::NoConvergence { residual: off });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Annihilates `a[p][q]` with the unitary `G = diag(1, ē) · R(θ)` where
/// `e = a_pq / |a_pq|`, applying `a ← G† a G` and `v ← v G`.
fn jacobi_rotate(
    a: &mut ComplexMatrix,
    v: &mut ComplexMatrix,
    p: usize,
    q: usize,
    apq: Complex64,
    mag: f64,
) {
    let n = a.rows;
    let e = apq / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // G columns: g_pp = c, g_pq = s, g_qp = -s ē, g_qq = c ē
    let gpp = Complex64::new(c, 0.0);
    let gpq = Complex64::new(s, 0.0);
    let gqp = -e.conj() * s;
    let gqq = e.conj() * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * gpp + akq * gqp;
        a[(k, q)] = akp * gpq + akq * gqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = gpp.conj() * apk + gqp.conj() * aqk;
        a[(q, k)] = gpq.conj() * apk + gqq.conj() * aqk;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * gpp + vkq * gqp;
        v[(k, q)] = vkp * gpq + vkq * gqq;
    }
}

/// Eigenvalues at or below this fraction of `λ_max` are rounding noise from
/// the eigensolver and are treated as exact zeros by matrix functions.
pub(crate) fn noise_floor(n: usize, lambda_max: f64) -> f64 {
    16.0 * n as f64 * f64::EPSILON * lambda_max.max(0.0)
}

/// Clamps a PSD spectrum: small negatives and noise-level positives go to 0,
/// eigenvalues below `-PSD_CLAMP · λ_max` are an error.
pub(crate) fn clamp_psd_spectrum(eigenvalues: &[f64]) -> Result<Vec<f64>> {
    let n = eigenvalues.len();
    let lmax = eigenvalues.iter().copied().fold(0.0, f64::max);
    let floor = noise_floor(n, lmax);
    eigenvalues
        .iter()
        .map(|&l| {
            if l < -PSD_CLAMP * lmax.max(f64::MIN_POSITIVE) && l < -f64::EPSILON {
                Err(Error::NotPositive { eigenvalue: l })
            } else if l <= floor {
                Ok(0.0)
            } else {
                Ok(l)
            }
        })
        .collect()
}

/// Principal square root of a positive semidefinite matrix.
pub fn sqrt_psd(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = herm_eig(a)?;
    let clamped = clamp_psd_spectrum(&eig.eigenvalues)?;
    let clamped_eig = SpectralDecomposition {
        eigenvalues: clamped,
        eigenvectors: eig.eigenvectors,
    };
    Ok(clamped_eig.map(f64::sqrt))
}

/// Kronecker product `A ⊗ B`, left factor slowest.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac, br, bc) = (a.rows, a.cols, b.rows, b.cols);
    ComplexMatrix::from_fn(ar * br, ac * bc, |r, c| {
        a[(r / br, c / bc)] * b[(r % br, c % bc)]
    })
}

/// Splits a flat index into per-subsystem digits (left subsystem slowest).
pub(crate) fn unflatten(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; dims.len()];
    for (slot, &d) in digits.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    digits
}

pub(crate) fn flatten(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

/// Partial trace of a square matrix over every subsystem not listed in `keep`.
///
/// The kept subsystems appear in ascending index order in the result.
pub fn partial_trace_matrix(
    m: &ComplexMatrix,
    dims: &[usize],
    keep: &[usize],
) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.rows != total {
        return Err(Error::DimsMismatch {
            dims: dims.to_vec(),
            product: total,
            dim: m.rows,
        });
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() {
        return Err(Error::InvalidSubsystems(format!(
            "duplicate subsystem in {keep:?}"
        )));
    }
    if let Some(&bad) = keep_sorted.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::InvalidSubsystems(format!(
            "subsystem {bad} out of range for {} subsystems",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep_sorted.contains(i)).collect();
    let kept_dims: Vec<usize> = keep_sorted.iter().map(|&i| dims[i]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
    let nk: usize = kept_dims.iter().product();
    let nt: usize = traced_dims.iter().product();

    let compose = |kept_idx: usize, traced_idx: usize| -> usize {
        let kd = unflatten(kept_idx, &kept_dims);
        let td = unflatten(traced_idx, &traced_dims);
        let mut digits = vec![0; dims.len()];
        for (slot, &sub) in keep_sorted.iter().enumerate() {
            digits[sub] = kd[slot];
        }
        for (slot, &sub) in traced.iter().enumerate() {
            digits[sub] = td[slot];
        }
        flatten(&digits, dims)
    };

    let mut out = ComplexMatrix::zeros(nk, nk);
    for t in 0..nt {
        let full: Vec<usize> = (0..nk).map(|r| compose(r, t)).collect();
        for r in 0..nk {
            for c in 0..nk {
                out[(r, c)] += m[(full[r], full[c])];
            }
        }
    }
    Ok(out)
}

/// Partial trace of a density matrix, keeping the listed subsystems.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::InvalidSubsystems("keep set is empty".into()));
    }
    let reduced = partial_trace_matrix(rho.matrix(), rho.dims(), keep)?;
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    let dims = keep_sorted.iter().map(|&i| rho.dims()[i]).collect();
    DensityMatrix::from_numerical(reduced, dims)
}

fn check_same_dim(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            actual: sigma.dim(),
        });
    }
    Ok(())
}

/// Root fidelity `Tr √(√ρ σ √ρ)`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    let s = sqrt_psd(rho.matrix())?;
    let inner = s.mul_unchecked(&sigma.matrix().mul_unchecked(&s));
    let eig = herm_eig(&inner)?;
    let spec = clamp_psd_spectrum(&eig.eigenvalues)?;
    Ok(spec.iter().map(|l| l.sqrt()).sum::<f64>().clamp(0.0, 1.0))
}

/// Affinity `Tr(√ρ √σ)`, the quantum Bhattacharyya coefficient.
pub fn affinity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    let a = sqrt_psd(rho.matrix())?;
    let b = sqrt_psd(sigma.matrix())?;
    Ok(a.trace_product_re(&b).clamp(0.0, 1.0))
}

/// Hellinger distance `Tr(√ρ − √σ)²`.
pub fn hellinger_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    let diff = &sqrt_psd(rho.matrix())? - &sqrt_psd(sigma.matrix())?;
    // diff is Hermitian, so Tr(diff²) is its squared Frobenius norm
    Ok(diff.frobenius_norm().powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::GaussianSource;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
        let mut g = GaussianSource::new(seed);
        let m = ComplexMatrix::from_fn(n, n, |_, _| g.complex());
        m.hermitian_part()
    }

    #[test]
    fn diagonal_spectrum() {
        let eig = herm_eig(&ComplexMatrix::from_real_diagonal(&[2.0, 1.0])).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 2.0]);
        let v = &eig.eigenvectors;
        assert!((v[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((v[(0, 1)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let eig = herm_eig(&x).unwrap();
        assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-14);
        let minus = eig.eigenvectors.column(0);
        // (|0⟩ − |1⟩)/√2 up to a global phase
        let overlap = (minus[0] - minus[1]) / 2f64.sqrt();
        assert!((overlap.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reconstruction_random_hermitian() {
        let h = random_hermitian(5, 7);
        let eig = herm_eig(&h).unwrap();
        let err = (&eig.reconstruct() - &h).frobenius_norm();
        assert!(err <= 1e-10 * h.frobenius_norm(), "err = {err:e}");
        assert!(eig.eigenvectors.unitarity_deviation() < 1e-10);
        assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eig_rejects_bad_input() {
        assert!(matches!(
            herm_eig(&ComplexMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
        let mut m = ComplexMatrix::identity(2);
        m[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(herm_eig(&m), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn sqrt_of_identity_and_diagonal() {
        let id = ComplexMatrix::identity(3);
        assert!((&sqrt_psd(&id).unwrap() - &id).max_abs() < 1e-15);
        let d = ComplexMatrix::from_real_diagonal(&[4.0 / 13.0, 9.0 / 13.0]);
        let s = sqrt_psd(&d).unwrap();
        assert!((s[(0, 0)].re - 2.0 / 13f64.sqrt()).abs() < 1e-15);
        assert!((s[(1, 1)].re - 3.0 / 13f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sqrt_rejects_negative() {
        let m = ComplexMatrix::from_real_rows(&[vec![0.5, 0.6], vec![0.6, 0.5]]).unwrap();
        assert!(matches!(sqrt_psd(&m), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn sqrt_squares_back() {
        let rho = crate::states::random_density(4, 4, 11).unwrap();
        let b = sqrt_psd(rho.matrix()).unwrap();
        let err = (&(&b * &b) - rho.matrix()).frobenius_norm();
        assert!(err <= 1e-9, "err = {err:e}");
        assert!(b.hermitian_deviation() < 1e-14);
    }

    #[test]
    fn tensor_ordering() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(tensor(&i2, &i2), ComplexMatrix::identity(4));
        let p0 = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        let x = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let t = tensor(&p0, &x);
        let nonzero: Vec<(usize, usize)> = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .filter(|&(i, j)| t[(i, j)].norm() > 0.0)
            .collect();
        // |00⟩⟨01| and |01⟩⟨00|
        assert_eq!(nonzero, vec![(0, 1), (1, 0)]);
        assert_eq!(t[(0, 1)], c(1.0, 0.0));
    }

    #[test]
    fn partial_trace_checks_range() {
        let rho = crate::states::random_density(4, 2, 1)
            .unwrap()
            .with_dims(vec![2, 2])
            .unwrap();
        assert!(matches!(
            partial_trace(&rho, &[2]),
            Err(Error::InvalidSubsystems(_))
        ));
        assert!(partial_trace(&rho, &[0, 0]).is_err());
    }

    #[test]
    fn index_digits_roundtrip() {
        let dims = [2, 3, 4];
        for i in 0..24 {
            assert_eq!(flatten(&unflatten(i, &dims), &dims), i);
        }
    }
}
