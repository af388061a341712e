//! Density matrices: validation, named families, seeded random ensembles and
//! the JSON state-file format.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, herm_eig, tensor, ComplexMatrix};
use crate::rng::GaussianSource;

/// Shared noise floor for every state invariant.
pub const STATE_TOL: f64 = 1e-10;

/// A validated state: Hermitian, positive semidefinite, unit trace, with
/// subsystem dimensions whose product is the matrix dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
}

/// Checks every state invariant, reporting the first one violated.
pub fn validate(candidate: ComplexMatrix, dims: Vec<usize>) -> Result<DensityMatrix> {
    if !candidate.is_square() {
        return Err(Error::NotSquare {
            rows: candidate.rows(),
            cols: candidate.cols(),
        });
    }
    candidate.check_finite()?;
    let product: usize = dims.iter().product();
    if dims.is_empty() || dims.contains(&0) || product != candidate.rows() {
        return Err(Error::DimsMismatch {
            dims,
            product,
            dim: candidate.rows(),
        });
    }
    let deviation = candidate.hermitian_deviation();
    if deviation > STATE_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let trace = candidate.trace();
    if (trace.re - 1.0).abs() > STATE_TOL || trace.im.abs() > STATE_TOL {
        return Err(Error::TraceNotOne { trace: trace.re });
    }
    let eig = herm_eig(&candidate)?;
    let min = eig.eigenvalues.first().copied().unwrap_or(0.0);
    if min < -STATE_TOL {
        return Err(Error::NotPositive { eigenvalue: min });
    }
    Ok(DensityMatrix {
        matrix: candidate,
        dims,
    })
}

impl DensityMatrix {
    /// Validates the Hermitian part of a matrix produced by arithmetic.
    pub(crate) fn from_numerical(m: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        validate(m.hermitian_part(), dims)
    }

    /// Validates `m / Tr m`; used for post-measurement states.
    pub(crate) fn normalized(m: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        let tr = m.trace().re;
        if tr.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::TraceNotOne { trace: tr });
        }
        Self::from_numerical(m.scale_real(1.0 / tr), dims)
    }

    /// Pure state `|ψ⟩⟨ψ|`; the vector is normalized first.
    pub fn pure(psi: &[Complex64], dims: Vec<usize>) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParameter("state vector has zero norm".into()));
        }
        let v: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        Self::from_numerical(ComplexMatrix::outer(&v), dims)
    }

    /// Diagonal (incoherent) state from a probability vector.
    pub fn diagonal(probs: &[f64], dims: Vec<usize>) -> Result<Self> {
        validate(ComplexMatrix::from_real_diagonal(probs), dims)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Re-tags the subsystem structure.
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

    pub fn purity(&self) -> f64 {
        self.matrix.trace_product_re(&self.matrix)
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (self.purity() - 1.0).abs() <= tol
    }

    /// Whether the matrix is diagonal in the computational basis.
    pub fn is_incoherent(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.matrix[(i, j)].norm() <= tol))
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self {
            matrix: tensor(&self.matrix, &other.matrix),
            dims,
        }
    }

    /// `U ρ U†`.
    pub fn evolve(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.rows() != self.dim() || u.cols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: u.rows(),
            });
        }
        Self::from_numerical(self.matrix.conjugate_by(&u.adjoint()), self.dims.clone())
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        linalg::partial_trace(self, keep)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(herm_eig(&self.matrix)?.eigenvalues)
    }

    /// Bipartite view `(d_A, d_B)`; requires exactly two subsystems.
    pub fn bipartite_dims(&self) -> Result<(usize, usize)> {
        match self.dims.as_slice() {
            [a, b] => Ok((*a, *b)),
            other => Err(Error::InvalidSubsystems(format!(
                "expected a bipartite state, got dims {other:?}"
            ))),
        }
    }

    pub fn to_state_file(&self) -> StateFile {
        let n = self.dim();
        StateFile {
            dims: self.dims.clone(),
            matrix: (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let z = self.matrix[(i, j)];
                            [z.re, z.im]
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

/// On-disk state representation: `{"dims": [..], "matrix": [[[re, im], ..], ..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl StateFile {
    pub fn into_density(self) -> Result<DensityMatrix> {
        let n = self.matrix.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in self.matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Parse(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            data.extend(row.iter().map(|&[re, im]| Complex64::new(re, im)));
        }
        validate(ComplexMatrix::from_vec(n, n, data)?, self.dims)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

pub fn read_state(path: &Path) -> Result<DensityMatrix> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    StateFile::from_json(&text)?.into_density()
}

pub fn write_state(path: &Path, rho: &DensityMatrix) -> std::io::Result<()> {
    std::fs::write(path, rho.to_state_file().to_json() + "\n")
}

fn require_dim(d: usize, min: usize, what: &str) -> Result<()> {
    if d < min {
        return Err(Error::InvalidParameter(format!(
            "{what} must be at least {min}, got {d}"
        )));
    }
    Ok(())
}

/// `(1/d) Σ_ij |i⟩⟨j|`.
pub fn maximally_coherent(d: usize) -> Result<DensityMatrix> {
    require_dim(d, 2, "d")?;
    let x = Complex64::new(1.0 / d as f64, 0.0);
    validate(ComplexMatrix::from_fn(d, d, |_, _| x), vec![d])
}

/// Maximally coherent mixed state `p|ψ⟩⟨ψ| + (1−p) I/4` on a single 4-level system.
pub fn mcms(p: f64) -> Result<DensityMatrix> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "mcms weight p must lie in (0, 1], got {p}"
        )));
    }
    let m = ComplexMatrix::from_fn(4, 4, |i, j| {
        let mixed = if i == j { (1.0 - p) / 4.0 } else { 0.0 };
        Complex64::new(p / 4.0 + mixed, 0.0)
    });
    validate(m, vec![4])
}

/// `|Φ⁺⟩ = (|00⟩ + |11⟩)/√2`.
pub fn bell() -> DensityMatrix {
    let h = Complex64::new(0.5, 0.0);
    let z = Complex64::new(0.0, 0.0);
    let m = ComplexMatrix::from_vec(
        4,
        4,
        vec![h, z, z, h, z, z, z, z, z, z, z, z, h, z, z, h],
    )
    .expect("4x4");
    validate(m, vec![2, 2]).expect("Bell state is valid")
}

/// `|+⟩ = (|0⟩ + |1⟩)/√2`.
pub fn plus_state() -> DensityMatrix {
    maximally_coherent(2).expect("d = 2 is valid")
}

/// Computational basis state `|k⟩⟨k|`.
pub fn basis_pure(d: usize, k: usize) -> Result<DensityMatrix> {
    require_dim(d, 1, "d")?;
    if k >= d {
        return Err(Error::InvalidParameter(format!(
            "basis index {k} out of range for d = {d}"
        )));
    }
    let mut probs = vec![0.0; d];
    probs[k] = 1.0;
    DensityMatrix::diagonal(&probs, vec![d])
}

/// Uniform superposition over the product basis of `d_A ⊗ d_B`.
pub fn bipartite_max_coherent(d_a: usize, d_b: usize) -> Result<DensityMatrix> {
    require_dim(d_a, 2, "d_A")?;
    require_dim(d_b, 2, "d_B")?;
    let n = d_a * d_b;
    let x = Complex64::new(1.0 / n as f64, 0.0);
    validate(ComplexMatrix::from_fn(n, n, |_, _| x), vec![d_a, d_b])
}

/// Parameters accepted by [`make_named`]; unused fields are ignored.
#[derive(Debug, Clone, Default)]
pub struct NamedParams {
    pub p: Option<f64>,
    pub d: Option<usize>,
    pub d_b: Option<usize>,
    pub k: Option<usize>,
}

/// Named state by identifier: `maximally_coherent`, `mcms`, `bell`,
/// `plus_state`, `basis_pure`, `bipartite_max_coherent`.
pub fn make_named(kind: &str, params: &NamedParams) -> Result<DensityMatrix> {
    let need = |v: Option<usize>, name: &str| {
        v.ok_or_else(|| Error::InvalidParameter(format!("{kind} requires {name}")))
    };
    match kind {
        "maximally_coherent" => maximally_coherent(need(params.d, "d")?),
        "mcms" => mcms(
            params
                .p
                .ok_or_else(|| Error::InvalidParameter("mcms requires p".into()))?,
        ),
        "bell" => Ok(bell()),
        "plus_state" | "plus" => Ok(plus_state()),
        "basis_pure" => basis_pure(need(params.d, "d")?, params.k.unwrap_or(0)),
        "bipartite_max_coherent" => {
            bipartite_max_coherent(need(params.d, "d")?, need(params.d_b, "d_b")?)
        }
        other => Err(Error::Unknown {
            what: "state kind",
            name: other.to_string(),
        }),
    }
}

/// `G G† / Tr(G G†)` for a `d × rank` complex Ginibre matrix `G`, entries
/// drawn row-major from `seed`.
pub fn random_density(d: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    if rank == 0 || rank > d {
        return Err(Error::InvalidParameter(format!(
            "rank must satisfy 1 <= rank <= d = {d}, got {rank}"
        )));
    }
    let mut src = GaussianSource::new(seed);
    let g = ComplexMatrix::from_fn(d, rank, |_, _| src.complex());
    let w = &g * &g.adjoint();
    DensityMatrix::normalized(w, vec![d])
}

/// `|ψ⟩⟨ψ|` for a normalized complex Gaussian vector drawn from `seed`.
pub fn random_pure(d: usize, seed: u64) -> Result<DensityMatrix> {
    require_dim(d, 1, "d")?;
    let mut src = GaussianSource::new(seed);
    let psi = src.unit_vector(d);
    DensityMatrix::pure(&psi, vec![d])
}

/// `Σ_k λ_k |k⟩⟨k| ⊗ ρ_k`.
pub fn classical_quantum(weights: &[f64], blocks: &[DensityMatrix]) -> Result<DensityMatrix> {
    if weights.is_empty() || weights.len() != blocks.len() {
        return Err(Error::InvalidParameter(format!(
            "{} weights for {} blocks",
            weights.len(),
            blocks.len()
        )));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 || weights.iter().any(|&w| w.is_nan() || w < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "weights must be non-negative and sum to 1, got sum {total}"
        )));
    }
    let d_b = blocks[0].dim();
    if let Some(bad) = blocks.iter().find(|b| b.dim() != d_b) {
        return Err(Error::DimensionMismatch {
            expected: d_b,
            actual: bad.dim(),
        });
    }
    let d_a = weights.len();
    let mut m = ComplexMatrix::zeros(d_a * d_b, d_a * d_b);
    for (k, (w, block)) in weights.iter().zip(blocks).enumerate() {
        for i in 0..d_b {
            for j in 0..d_b {
                m[(k * d_b + i, k * d_b + j)] = block.matrix()[(i, j)] * *w;
            }
        }
    }
    DensityMatrix::from_numerical(m, vec![d_a, d_b])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(rows: &[Vec<f64>]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(rows).unwrap()
    }

    #[test]
    fn validate_distinguishes_failures() {
        assert!(validate(real(&[vec![0.3, 0.0], vec![0.0, 0.7]]), vec![2]).is_ok());
        assert!(matches!(
            validate(real(&[vec![0.5, 0.0], vec![0.0, 0.6]]), vec![2]),
            Err(Error::TraceNotOne { trace }) if (trace - 1.1).abs() < 1e-12
        ));
        match validate(real(&[vec![0.5, 0.6], vec![0.6, 0.5]]), vec![2]) {
            Err(Error::NotPositive { eigenvalue }) => assert!((eigenvalue + 0.1).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            validate(real(&[vec![0.5, 0.1], vec![0.0, 0.5]]), vec![2]),
            Err(Error::NotHermitian { .. })
        ));
        assert!(matches!(
            validate(real(&[vec![0.5, 0.0], vec![0.0, 0.5]]), vec![3]),
            Err(Error::DimsMismatch { .. })
        ));
        assert!(matches!(
            validate(ComplexMatrix::zeros(2, 3), vec![2]),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn named_families() {
        let m1 = mcms(1.0).unwrap();
        assert!(m1.matrix().as_slice().iter().all(|z| (z.re - 0.25).abs() < 1e-15));
        let mh = mcms(0.5).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 0.25 } else { 0.125 };
                assert!((mh.matrix()[(i, j)].re - expect).abs() < 1e-15);
            }
        }
        let mc = maximally_coherent(3).unwrap();
        assert_eq!(mc.dims(), &[3]);
        assert!(mc.matrix().as_slice().iter().all(|z| (z.re - 1.0 / 3.0).abs() < 1e-15));
        assert!(mcms(0.0).is_err());
        assert!(mcms(1.2).is_err());
        assert!(matches!(
            make_named("ghz", &NamedParams::default()),
            Err(Error::Unknown { .. })
        ));
        assert_eq!(bell().dims(), &[2, 2]);
        assert!(basis_pure(3, 3).is_err());
    }

    #[test]
    fn random_density_contract() {
        let r1 = random_density(4, 1, 3).unwrap();
        assert!((r1.purity() - 1.0).abs() < 1e-10);
        let full = random_density(5, 5, 17).unwrap();
        let eig = full.eigenvalues().unwrap();
        assert!(eig[0] > 1e-6);
        let again = random_density(5, 5, 17).unwrap();
        assert_eq!(full, again);
        assert!(random_density(3, 0, 1).is_err());
        assert!(random_density(3, 4, 1).is_err());
        // rank-2 state in d = 4 has exactly two non-negligible eigenvalues
        let r2 = random_density(4, 2, 8).unwrap().eigenvalues().unwrap();
        assert_eq!(r2.iter().filter(|&&l| l > 1e-10).count(), 2);
    }

    #[test]
    fn random_pure_reduced_spectra_match() {
        let psi = random_pure(6, 21).unwrap().with_dims(vec![2, 3]).unwrap();
        assert!((psi.purity() - 1.0).abs() < 1e-10);
        let a = psi.partial_trace(&[0]).unwrap().eigenvalues().unwrap();
        let b = psi.partial_trace(&[1]).unwrap().eigenvalues().unwrap();
        let nz_b: Vec<f64> = b.into_iter().filter(|&l| l > 1e-9).collect();
        assert_eq!(nz_b.len(), a.len());
        for (x, y) in a.iter().zip(&nz_b) {
            assert!((x - y).abs() < 1e-9);
        }
        assert_eq!(random_pure(4, 5).unwrap(), random_pure(4, 5).unwrap());
    }

    #[test]
    fn classical_quantum_blocks() {
        let r0 = random_density(2, 2, 1).unwrap();
        let r1 = random_density(2, 2, 2).unwrap();
        let cq = classical_quantum(&[1.0, 0.0], &[r0.clone(), r1.clone()]).unwrap();
        let expect = basis_pure(2, 0).unwrap().tensor(&r0);
        assert!((cq.matrix() - expect.matrix()).max_abs() < 1e-15);

        let half = DensityMatrix::diagonal(&[0.5, 0.5], vec![2]).unwrap();
        let mixed = classical_quantum(&[0.5, 0.5], &[half.clone(), half]).unwrap();
        assert!((mixed.matrix() - &ComplexMatrix::identity(4).scale_real(0.25)).max_abs() < 1e-15);

        assert!(classical_quantum(&[0.5, 0.4], &[r0.clone(), r1]).is_err());
        let r3 = random_density(3, 3, 4).unwrap();
        assert!(matches!(
            classical_quantum(&[0.5, 0.5], &[r0, r3]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn state_file_rejects_malformed() {
        let bad = StateFile {
            dims: vec![2],
            matrix: vec![vec![[0.5, 0.0], [0.0, 0.0]], vec![[0.0, 0.0], [0.6, 0.0]]],
        };
        assert!(matches!(bad.into_density(), Err(Error::TraceNotOne { .. })));
        assert!(StateFile::from_json(r#"{"dims":[2],"matrix":[],"extra":1}"#).is_err());
        let ragged = StateFile {
            dims: vec![2],
            matrix: vec![vec![[1.0, 0.0]], vec![[0.0, 0.0], [0.0, 0.0]]],
        };
        assert!(matches!(ragged.into_density(), Err(Error::Parse(_))));
    }
}
