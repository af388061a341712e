//! Inequality checks and seeded campaigns over random ensembles.
//!
//! Every check returns a [`CheckReport`] whose `margin` is positive when the
//! relation holds and whose `holds` flag is `margin >= -tolerance`. Checks
//! made of several sub-relations report the `lhs`/`rhs` of the tightest one
//! and list every sub-relation in the context.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{
    apply_channel, apply_map, embedding_unitary, random_incoherent_kraus, IncoherentChannel,
};
use crate::coherence::{c_g, c_h, c_h_oracle, c_offdiag, max_incoherent_affinity};
use crate::correlations::{d_one_sided, d_one_sided_search, d_symmetric, MAX_LOCAL_DIM};
use crate::error::{Error, Result};
use crate::linalg::{affinity, fidelity, herm_eig};
use crate::optimize::UnitarySearchOptions;
use crate::rng::{derive_seed, GaussianSource};
use crate::states::{basis_pure, random_density, random_pure, write_state, DensityMatrix};

/// Eigenvalues at or below this fraction of `λ_max` count as zero.
pub const NONZERO_EIGENVALUE: f64 = 1e-10;

pub const PROP_TOL: f64 = 1e-9;
pub const TRADEOFF_TOL: f64 = 1e-6;
pub const ATTAINABILITY_TOL: f64 = 1e-4;
pub const FIDELITY_TOL: f64 = 1e-10;
pub const PURE_EQUALITY_TOL: f64 = 1e-9;
pub const COHERENCE_ORDER_TOL: f64 = 1e-6;
pub const MONOTONICITY_TOL: f64 = 1e-9;
pub const QUBIT_CLOSED_FORM_TOL: f64 = 1e-5;
pub const ORACLE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ContextValue {
    Bool(bool),
    Int(i64),
    Real(f64),
    Reals(Vec<f64>),
    Text(String),
}

impl From<f64> for ContextValue {
    fn from(v: f64) -> Self {
        Self::Real(v)
    }
}

impl From<usize> for ContextValue {
    fn from(v: usize) -> Self {
        Self::Int(v as i64)
    }
}

impl From<bool> for ContextValue {
    fn from(v: bool) -> Self {
        Self::Bool(v)
    }
}

impl From<Vec<f64>> for ContextValue {
    fn from(v: Vec<f64>) -> Self {
        Self::Reals(v)
    }
}

impl From<String> for ContextValue {
    fn from(v: String) -> Self {
        Self::Text(v)
    }
}

impl From<&str> for ContextValue {
    fn from(v: &str) -> Self {
        Self::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
    pub tolerance: f64,
    pub seed: Option<u64>,
    pub trial: Option<usize>,
    pub context: BTreeMap<String, ContextValue>,
}

impl CheckReport {
    fn new(check_id: &str, lhs: f64, rhs: f64, margin: f64, tolerance: f64) -> Self {
        Self {
            check_id: check_id.to_string(),
            lhs,
            rhs,
            margin,
            holds: margin >= -tolerance,
            tolerance,
            seed: None,
            trial: None,
            context: BTreeMap::new(),
        }
    }

    /// Picks the sub-relation with the smallest margin; each entry is
    /// `(name, lhs, rhs, margin)`.
    fn tightest(check_id: &str, parts: &[(&str, f64, f64, f64)], tolerance: f64) -> Self {
        let (_, lhs, rhs, margin) = parts
            .iter()
            .copied()
            .min_by(|a, b| a.3.total_cmp(&b.3))
            .expect("at least one relation");
        let mut r = Self::new(check_id, lhs, rhs, margin, tolerance);
        for &(name, l, h, m) in parts {
            r.set(&format!("{name}.lhs"), l);
            r.set(&format!("{name}.rhs"), h);
            r.set(&format!("{name}.margin"), m);
        }
        r
    }

    fn set(&mut self, key: &str, value: impl Into<ContextValue>) {
        self.context.insert(key.to_string(), value.into());
    }

    fn context_int(&self, key: &str) -> Result<usize> {
        match self.context.get(key) {
            Some(ContextValue::Int(v)) if *v >= 0 => Ok(*v as usize),
            _ => Err(Error::InvalidParameter(format!("report lacks integer context '{key}'"))),
        }
    }

    fn context_text(&self, key: &str) -> Result<&str> {
        match self.context.get(key) {
            Some(ContextValue::Text(v)) => Ok(v),
            _ => Err(Error::InvalidParameter(format!("report lacks text context '{key}'"))),
        }
    }
}

/// Margin of an equality check; `+0.0` when both sides agree exactly.
fn equality_margin(lhs: f64, rhs: f64) -> f64 {
    0.0 - (lhs - rhs).abs()
}

/// `1 − ½C_H(ρ)`.
fn m_of(rho: &DensityMatrix) -> Result<f64> {
    max_incoherent_affinity(rho)
}

fn nonzero_spectrum(rho: &DensityMatrix) -> Result<(Vec<f64>, crate::linalg::ComplexMatrix)> {
    let eig = herm_eig(rho.matrix())?;
    let cut = NONZERO_EIGENVALUE * eig.max_eigenvalue();
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > cut)
        .collect();
    let vals = keep.iter().map(|&i| eig.eigenvalues[i]).collect();
    let n = rho.dim();
    let vecs = crate::linalg::ComplexMatrix::from_fn(n, keep.len(), |r, c| {
        eig.eigenvectors[(r, keep[c])]
    });
    Ok((vals, vecs))
}

/// `c_s = √(Σ_i M(ρ^i_A)² · Σ_i M(ρ^i_B)²)` over the eigenstates `ρ^i` with
/// nonzero eigenvalue, reduced to the subsystem sets `a` and `b`.
fn c_s(rho: &DensityMatrix, a: &[usize], b: &[usize]) -> Result<f64> {
    let (_, vecs) = nonzero_spectrum(rho)?;
    let (mut sa, mut sb) = (0.0, 0.0);
    for i in 0..vecs.cols() {
        let e = DensityMatrix::pure(&vecs.column(i), rho.dims().to_vec())?;
        sa += m_of(&e.partial_trace(a)?)?.powi(2);
        sb += m_of(&e.partial_trace(b)?)?.powi(2);
    }
    Ok((sa * sb).sqrt())
}

/// `1 − ½C_H(ψ_AB) ≤ (1 − ½C_H(ρ_A))(1 − ½C_H(ρ_B))` for pure bipartite states.
pub fn check_prop1(psi: &DensityMatrix) -> Result<CheckReport> {
    psi.bipartite_dims()?;
    let purity = psi.purity();
    if (purity - 1.0).abs() > 1e-9 {
        return Err(Error::NotPure { purity });
    }
    let lhs = 1.0 - 0.5 * c_h(psi)?.value;
    let ma = 1.0 - 0.5 * c_h(&psi.partial_trace(&[0])?)?.value;
    let mb = 1.0 - 0.5 * c_h(&psi.partial_trace(&[1])?)?.value;
    let rhs = ma * mb;
    let mut r = CheckReport::new("prop1", lhs, rhs, rhs - lhs, PROP_TOL);
    r.set("m_a", ma);
    r.set("m_b", mb);
    Ok(r)
}

/// The chain `(M_A M_B)² ≥ Tr ρ² − C_l2(ρ) ≥ λ_min M²` and the relation
/// `M_A M_B ≥ M²/c_s`, with `M = 1 − ½C_H`.
pub fn check_prop2(rho: &DensityMatrix) -> Result<CheckReport> {
    rho.bipartite_dims()?;
    let ma = m_of(&rho.partial_trace(&[0])?)?;
    let mb = m_of(&rho.partial_trace(&[1])?)?;
    let m = m_of(rho)?;
    let middle = rho.purity() - c_offdiag(rho, 2)?;
    let (vals, _) = nonzero_spectrum(rho)?;
    let lambda_min = vals.first().copied().unwrap_or(0.0);
    let cs = c_s(rho, &[0], &[1])?;
    let outer = (ma * mb).powi(2);
    let inner = lambda_min * m * m;
    let second = m * m / cs;
    let mut r = CheckReport::tightest(
        "prop2",
        &[
            ("upper", outer, middle, outer - middle),
            ("lower", middle, inner, middle - inner),
            ("c_s", ma * mb, second, ma * mb - second),
        ],
        PROP_TOL,
    );
    r.set("lambda_min", lambda_min);
    r.set("c_s", cs);
    r.set("rank", vals.len());
    Ok(r)
}

fn partition_text(partition: &[Vec<usize>]) -> String {
    partition
        .iter()
        .map(|p| p.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join("|")
}

/// Parses `"0|1,2"` into `[[0], [1, 2]]`.
pub fn parse_partition(text: &str) -> Result<Vec<Vec<usize>>> {
    text.split('|')
        .map(|part| {
            part.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<usize>()
                        .map_err(|e| Error::Parse(format!("partition entry '{x}': {e}")))
                })
                .collect()
        })
        .collect()
}

fn validate_partition(partition: &[Vec<usize>], n: usize) -> Result<()> {
    if partition.len() < 2 {
        return Err(Error::InvalidSubsystems("partition needs at least two parts".into()));
    }
    let mut seen = vec![false; n];
    for part in partition {
        if part.is_empty() {
            return Err(Error::InvalidSubsystems("empty part in partition".into()));
        }
        for &i in part {
            if i >= n || seen[i] {
                return Err(Error::InvalidSubsystems(format!(
                    "subsystem {i} is out of range or repeated in {partition:?}"
                )));
            }
            seen[i] = true;
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::InvalidSubsystems(format!(
            "partition {partition:?} does not cover all {n} subsystems"
        )));
    }
    Ok(())
}

/// Multipartite relations built by splitting off one part at a time in the
/// listed order:
/// `Π_i M_{α_i} ≥ √λ_M · M` with `λ_M` the product of the per-level `λ_min`,
/// and `Π_i M_{α_i}^{n_i} ≥ M²/c_sT` with `n = (1, 1/2, 1/4, …, 2^{2−L}, 2^{2−L})`
/// and `c_sT = Π_ℓ c_s,ℓ^{2^{−ℓ}}`.
pub fn check_prop3(rho: &DensityMatrix, partition: &[Vec<usize>]) -> Result<CheckReport> {
    let n = rho.dims().len();
    validate_partition(partition, n)?;
    let levels = partition.len() - 1;
    let m = m_of(rho)?;
    let part_m: Vec<f64> = partition
        .iter()
        .map(|p| m_of(&rho.partial_trace(p)?))
        .collect::<Result<_>>()?;

    let mut current = rho.clone();
    let mut remaining: Vec<usize> = (0..n).collect();
    let (mut lambdas, mut css) = (Vec::new(), Vec::new());
    for level in 0..levels {
        let mut rest: Vec<usize> = partition[level + 1..].iter().flatten().copied().collect();
        rest.sort_unstable();
        let pos = |set: &[usize]| -> Vec<usize> {
            set.iter()
                .map(|x| remaining.iter().position(|r| r == x).expect("subsystem present"))
                .collect()
        };
        let a_pos = pos(&partition[level]);
        let b_pos = pos(&rest);
        let (vals, _) = nonzero_spectrum(&current)?;
        lambdas.push(vals.first().copied().unwrap_or(0.0));
        css.push(c_s(&current, &a_pos, &b_pos)?);
        current = current.partial_trace(&b_pos)?;
        remaining = rest;
    }

    let exponents: Vec<f64> = (0..partition.len())
        .map(|i| 0.5f64.powi(i.min(levels - 1) as i32))
        .collect();
    let lambda_m: f64 = lambdas.iter().product();
    let cst: f64 = css
        .iter()
        .enumerate()
        .map(|(l, c)| c.powf(0.5f64.powi(l as i32)))
        .product();
    let prod: f64 = part_m.iter().product();
    let weighted: f64 = part_m.iter().zip(&exponents).map(|(x, e)| x.powf(*e)).product();
    let rhs_l = lambda_m.sqrt() * m;
    let rhs_c = m * m / cst;
    let mut r = CheckReport::tightest(
        "prop3",
        &[
            ("lambda", prod, rhs_l, prod - rhs_l),
            ("c_s", weighted, rhs_c, weighted - rhs_c),
        ],
        PROP_TOL,
    );
    r.set("partition", partition_text(partition));
    r.set("level_lambda_min", lambdas);
    r.set("level_c_s", css);
    r.set("exponents", exponents);
    r.set("lambda_m", lambda_m);
    r.set("c_st", cst);
    Ok(r)
}

/// `D_S(Λ[ρ_A⊗ρ_B]) ≤ 2(1 − (1 − ½C_H(ρ_A))(1 − ½C_H(ρ_B)))`, square-root
/// convention, with Λ applied non-selectively.
pub fn check_tradeoff(
    rho_a: &DensityMatrix,
    rho_b: &DensityMatrix,
    ch: &IncoherentChannel,
) -> Result<CheckReport> {
    let joint = rho_a.tensor(rho_b).with_dims(vec![rho_a.dim(), rho_b.dim()])?;
    if ch.dims() != joint.dims() {
        return Err(Error::DimensionMismatch {
            expected: joint.dim(),
            actual: ch.dim(),
        });
    }
    let out = apply_map(&joint, ch)?;
    let d = d_symmetric(&out)?;
    let ma = 1.0 - 0.5 * c_h(rho_a)?.value;
    let mb = 1.0 - 0.5 * c_h(rho_b)?.value;
    let rhs = 2.0 * (1.0 - ma * mb);
    let mut r = CheckReport::new("tradeoff", d.d_sqrt_value, rhs, rhs - d.d_sqrt_value, TRADEOFF_TOL);
    r.set("s_max", d.s_max);
    r.set("converged", d.converged);
    r.set("channel", ch.label());
    Ok(r)
}

/// `U_I (ρ_A ⊗ |k⟩⟨k|) U_I†` with the embedding unitary.
pub fn attainability_state(rho_a: &DensityMatrix, d_b: usize, k: usize) -> Result<DensityMatrix> {
    let d_a = rho_a.dim();
    if k >= d_b {
        return Err(Error::InvalidParameter(format!("k = {k} must be below d_B = {d_b}")));
    }
    if d_a > d_b || d_b > MAX_LOCAL_DIM {
        return Err(Error::InvalidParameter(format!(
            "need d_A <= d_B <= {MAX_LOCAL_DIM}, got d_A = {d_a}, d_B = {d_b}"
        )));
    }
    let start = rho_a.tensor(&basis_pure(d_b, k)?).with_dims(vec![d_a, d_b])?;
    apply_map(&start, &embedding_unitary(d_a, d_b)?)
}

/// `D_S(ρ_f) = C_H(ρ_A)` for `ρ_f` from [`attainability_state`].
pub fn check_attainability(rho_a: &DensityMatrix, d_b: usize, k: usize) -> Result<CheckReport> {
    let final_state = attainability_state(rho_a, d_b, k)?;
    let d = d_symmetric(&final_state)?;
    let rhs = c_h(rho_a)?.value;
    let lhs = d.d_sqrt_value;
    let mut r = CheckReport::new("attainability", lhs, rhs, equality_margin(lhs, rhs), ATTAINABILITY_TOL);
    r.set("d_b", d_b);
    r.set("k", k);
    r.set("s_max", d.s_max);
    r.set("converged", d.converged);
    Ok(r)
}

/// `f(ρ,σ) ≤ F(ρ,σ)`; when ρ is pure the relation checked is `F = f`.
pub fn check_fidelity_ordering(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<CheckReport> {
    let f = affinity(rho, sigma)?;
    let big_f = fidelity(rho, sigma)?;
    let pure = rho.is_pure(1e-9);
    let mut r = if pure {
        CheckReport::new("fidelity", f, big_f, equality_margin(big_f, f), PURE_EQUALITY_TOL)
    } else {
        CheckReport::new("fidelity", f, big_f, big_f - f, FIDELITY_TOL)
    };
    r.set("pure", pure);
    Ok(r)
}

/// `C_g(ρ) ≤ C_H(ρ)`.
pub fn check_coherence_ordering(rho: &DensityMatrix) -> Result<CheckReport> {
    let g = c_g(rho)?;
    let h = c_h(rho)?.value;
    let mut r = CheckReport::new("coherence_order", g.value, h, h - g.value, COHERENCE_ORDER_TOL);
    r.set("converged", g.converged);
    Ok(r)
}

/// `Σ_i p_i C_H(ρ_i) ≤ C_H(ρ)` over the selective outcomes of `ch`.
pub fn check_monotonicity(rho: &DensityMatrix, ch: &IncoherentChannel) -> Result<CheckReport> {
    let outcomes = apply_channel(rho, ch)?;
    let mut lhs = 0.0;
    let mut kept = 0.0;
    for o in &outcomes {
        lhs += o.probability * c_h(&o.state)?.value;
        kept += o.probability;
    }
    let rhs = c_h(rho)?.value;
    let mut r = CheckReport::new("monotonicity", lhs, rhs, rhs - lhs, MONOTONICITY_TOL);
    r.set("outcomes", outcomes.len());
    r.set("dropped_mass", 1.0 - kept);
    r.set("channel", ch.label());
    Ok(r)
}

/// Qubit closed form `1 − λ_max(T)` against `2(1 − S)` from a basis search.
pub fn check_qubit_closed_form(rho: &DensityMatrix) -> Result<CheckReport> {
    let closed = d_one_sided(rho)?;
    let search = d_one_sided_search(rho, &UnitarySearchOptions::default())?;
    let (lhs, rhs) = (closed.d_value, 2.0 * (1.0 - search.s_max));
    let mut r = CheckReport::new("d_oracle", lhs, rhs, equality_margin(lhs, rhs), QUBIT_CLOSED_FORM_TOL);
    r.set("converged", search.converged);
    Ok(r)
}

/// Closed-form `C_H` against direct minimization over incoherent states.
pub fn check_c_h_oracle(rho: &DensityMatrix) -> Result<CheckReport> {
    let closed = c_h(rho)?.value;
    let oracle = c_h_oracle(rho)?;
    let mut r = CheckReport::new("c_h_oracle", closed, oracle.value, equality_margin(closed, oracle.value), ORACLE_TOL);
    r.set("converged", oracle.converged);
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Prop1,
    Prop2,
    Prop3,
    Tradeoff,
    Attainability,
    Fidelity,
    Monotonicity,
    DOracle,
    CHOracle,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Prop1,
        Suite::Prop2,
        Suite::Prop3,
        Suite::Tradeoff,
        Suite::Attainability,
        Suite::Fidelity,
        Suite::Monotonicity,
        Suite::DOracle,
        Suite::CHOracle,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Suite::Prop1 => "prop1",
            Suite::Prop2 => "prop2",
            Suite::Prop3 => "prop3",
            Suite::Tradeoff => "tradeoff",
            Suite::Attainability => "attainability",
            Suite::Fidelity => "fidelity",
            Suite::Monotonicity => "monotonicity",
            Suite::DOracle => "d_oracle",
            Suite::CHOracle => "c_h_oracle",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.id() == s)
            .ok_or_else(|| Error::Unknown {
                what: "suite",
                name: s.to_string(),
            })
    }
}

/// Parses `"2x3"` (or `"2,3"`) into subsystem dimensions.
pub fn parse_dims(text: &str) -> Result<Vec<usize>> {
    let dims: Vec<usize> = text
        .split(['x', ',', '*'])
        .map(|x| {
            x.trim()
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("dimension '{x}': {e}")))
        })
        .collect::<Result<_>>()?;
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::Parse(format!("invalid dims '{text}'")));
    }
    Ok(dims)
}

/// One trial's report plus the inputs needed to reproduce it.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub report: CheckReport,
    pub states: Vec<(String, DensityMatrix)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub suite: String,
    pub trials: usize,
    pub master_seed: u64,
    pub dims: Option<Vec<usize>>,
    pub holds: usize,
    pub violations: usize,
    pub not_converged: usize,
    pub min_margin: f64,
    pub max_margin: f64,
    pub violation_seeds: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct Campaign {
    pub summary: CampaignSummary,
    pub records: Vec<TrialRecord>,
}

#[derive(Serialize)]
struct CampaignFile<'a> {
    summary: &'a CampaignSummary,
    reports: Vec<&'a CheckReport>,
}

impl Campaign {
    pub fn reports(&self) -> impl Iterator<Item = &CheckReport> {
        self.records.iter().map(|r| &r.report)
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary).expect("summary serializes")
    }

    /// Summary block followed by every per-trial report.
    pub fn to_json(&self) -> String {
        let file = CampaignFile {
            summary: &self.summary,
            reports: self.reports().collect(),
        };
        serde_json::to_string_pretty(&file).expect("campaign serializes")
    }

    /// Writes each violating trial's inputs as state files named
    /// `trial<index>_<role>.json`; returns the paths written.
    pub fn write_violation_dumps(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        for rec in self.records.iter().filter(|r| !r.report.holds) {
            std::fs::create_dir_all(dir)?;
            let trial = rec.report.trial.unwrap_or(0);
            for (role, state) in &rec.states {
                let path = dir.join(format!("trial{trial}_{role}.json"));
                write_state(&path, state)?;
                written.push(path);
            }
            let path = dir.join(format!("trial{trial}_report.json"));
            std::fs::write(
                &path,
                serde_json::to_string_pretty(&rec.report).expect("report serializes") + "\n",
            )?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Per-trial random choices: index 0 feeds discrete draws, higher indices
/// seed the states and channels.
struct TrialRng {
    seed: u64,
    src: GaussianSource,
    next: u64,
}

impl TrialRng {
    fn new(seed: u64) -> Self {
        Self {
            seed,
            src: GaussianSource::new(derive_seed(seed, 0)),
            next: 1,
        }
    }

    fn pick(&mut self, options: &[usize]) -> usize {
        options[self.src.below(options.len())]
    }

    fn sub_seed(&mut self) -> u64 {
        let s = derive_seed(self.seed, self.next);
        self.next += 1;
        s
    }

    fn density(&mut self, d: usize) -> Result<DensityMatrix> {
        let rank = 1 + self.src.below(d);
        random_density(d, rank, self.sub_seed())
    }
}

fn expect_len(dims: &[usize], allowed: &[usize], suite: Suite) -> Result<()> {
    if !allowed.contains(&dims.len()) {
        return Err(Error::InvalidParameter(format!(
            "suite {suite} takes {allowed:?} dimensions, got {dims:?}"
        )));
    }
    Ok(())
}

/// Validates a dims override for a suite before any trial runs.
pub fn check_suite_dims(suite: Suite, dims: &[usize]) -> Result<()> {
    match suite {
        Suite::Prop1 | Suite::Prop2 | Suite::Tradeoff => expect_len(dims, &[2], suite)?,
        Suite::DOracle => {
            expect_len(dims, &[2], suite)?;
            if dims[0] != 2 {
                return Err(Error::InvalidParameter("d_oracle needs a qubit first subsystem".into()));
            }
        }
        Suite::Prop3 => {
            if dims.len() < 2 {
                return Err(Error::InvalidParameter("prop3 needs at least two subsystems".into()));
            }
        }
        Suite::Attainability => {
            expect_len(dims, &[1, 2], suite)?;
            let (a, b) = (dims[0], *dims.last().expect("non-empty"));
            if a > b || b > MAX_LOCAL_DIM {
                return Err(Error::InvalidParameter(format!(
                    "attainability needs d_A <= d_B <= {MAX_LOCAL_DIM}, got {dims:?}"
                )));
            }
        }
        Suite::Fidelity | Suite::Monotonicity | Suite::CHOracle => expect_len(dims, &[1], suite)?,
    }
    if matches!(suite, Suite::Tradeoff) && dims.iter().any(|&d| d > MAX_LOCAL_DIM) {
        return Err(Error::InvalidParameter(format!(
            "tradeoff needs local dimensions <= {MAX_LOCAL_DIM}"
        )));
    }
    Ok(())
}

fn run_trial(suite: Suite, dims: Option<&[usize]>, seed: u64) -> Result<TrialRecord> {
    let mut t = TrialRng::new(seed);
    let pair = |t: &mut TrialRng, a: &[usize], b: &[usize]| -> (usize, usize) {
        match dims {
            Some(d) => (d[0], d[1]),
            None => (t.pick(a), t.pick(b)),
        }
    };
    let single = |t: &mut TrialRng, options: &[usize]| -> usize {
        match dims {
            Some(d) => d[0],
            None => t.pick(options),
        }
    };
    let (report, states) = match suite {
        Suite::Prop1 => {
            let (a, b) = pair(&mut t, &[2, 3], &[2, 3]);
            let psi = random_pure(a * b, t.sub_seed())?.with_dims(vec![a, b])?;
            (check_prop1(&psi)?, vec![("state".to_string(), psi)])
        }
        Suite::Prop2 => {
            let (a, b) = pair(&mut t, &[2], &[2]);
            let rho = t.density(a * b)?.with_dims(vec![a, b])?;
            (check_prop2(&rho)?, vec![("state".to_string(), rho)])
        }
        Suite::Prop3 => {
            let sub = dims.map(<[usize]>::to_vec).unwrap_or_else(|| vec![2, 2, 2]);
            let d: usize = sub.iter().product();
            let partition: Vec<Vec<usize>> = (0..sub.len()).map(|i| vec![i]).collect();
            let psi = random_pure(d, t.sub_seed())?.with_dims(sub)?;
            (check_prop3(&psi, &partition)?, vec![("state".to_string(), psi)])
        }
        Suite::Tradeoff => {
            let (a, b) = pair(&mut t, &[2], &[2]);
            let rho_a = t.density(a)?;
            let rho_b = t.density(b)?;
            let ch_seed = t.sub_seed();
            let ch = random_incoherent_kraus(a * b, 1, ch_seed)?.with_dims(vec![a, b])?;
            let mut r = check_tradeoff(&rho_a, &rho_b, &ch)?;
            r.set("channel_seed", ContextValue::Text(ch_seed.to_string()));
            r.set("channel_kraus", 1usize);
            (r, vec![("rho_a".to_string(), rho_a), ("rho_b".to_string(), rho_b)])
        }
        Suite::Attainability => {
            let (a, b) = match dims {
                Some(d) => (d[0], *d.last().expect("non-empty")),
                None => {
                    let a = t.pick(&[2, 3]);
                    (a, a)
                }
            };
            let rho_a = t.density(a)?;
            (check_attainability(&rho_a, b, 0)?, vec![("rho_a".to_string(), rho_a)])
        }
        Suite::Fidelity => {
            let d = single(&mut t, &[2, 3, 4]);
            let rho = random_density(d, d, t.sub_seed())?;
            let sigma = random_density(d, d, t.sub_seed())?;
            (
                check_fidelity_ordering(&rho, &sigma)?,
                vec![("rho".to_string(), rho), ("sigma".to_string(), sigma)],
            )
        }
        Suite::Monotonicity => {
            let d = single(&mut t, &[2, 3, 4]);
            let n = t.pick(&[1, 2, 3, 4]);
            let rho = t.density(d)?;
            let ch_seed = t.sub_seed();
            let ch = random_incoherent_kraus(d, n, ch_seed)?;
            let mut r = check_monotonicity(&rho, &ch)?;
            r.set("channel_seed", ContextValue::Text(ch_seed.to_string()));
            r.set("channel_kraus", n);
            (r, vec![("state".to_string(), rho)])
        }
        Suite::DOracle => {
            let (a, b) = pair(&mut t, &[2], &[2, 3]);
            let rho = t.density(a * b)?.with_dims(vec![a, b])?;
            (check_qubit_closed_form(&rho)?, vec![("state".to_string(), rho)])
        }
        Suite::CHOracle => {
            let d = single(&mut t, &[2, 3, 4]);
            let rho = t.density(d)?;
            (check_c_h_oracle(&rho)?, vec![("state".to_string(), rho)])
        }
    };
    let mut report = report;
    report.seed = Some(seed);
    Ok(TrialRecord { report, states })
}

/// Runs `trials` seeded trials of a suite; trial `i` uses
/// `derive_seed(master_seed, i)`. `dims` overrides the suite's default
/// sampling of dimensions.
pub fn run_campaign(
    suite: Suite,
    trials: usize,
    dims: Option<&[usize]>,
    master_seed: u64,
) -> Result<Campaign> {
    if let Some(d) = dims {
        check_suite_dims(suite, d)?;
    }
    let records: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rec = run_trial(suite, dims, derive_seed(master_seed, i as u64))?;
            rec.report.trial = Some(i);
            Ok(rec)
        })
        .collect::<Result<_>>()?;

    let margins: Vec<f64> = records.iter().map(|r| r.report.margin).collect();
    let violations: Vec<&CheckReport> =
        records.iter().map(|r| &r.report).filter(|r| !r.holds).collect();
    let not_converged = records
        .iter()
        .filter(|r| matches!(r.report.context.get("converged"), Some(ContextValue::Bool(false))))
        .count();
    let summary = CampaignSummary {
        suite: suite.id().to_string(),
        trials,
        master_seed,
        dims: dims.map(<[usize]>::to_vec),
        holds: trials - violations.len(),
        violations: violations.len(),
        not_converged,
        min_margin: margins.iter().copied().fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.min(x)))).unwrap_or(0.0),
        max_margin: margins.iter().copied().fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x)))).unwrap_or(0.0),
        violation_seeds: violations.iter().filter_map(|r| r.seed).collect(),
    };
    Ok(Campaign { summary, records })
}

/// Re-evaluates a campaign report from its reloaded input states, in the
/// order they were dumped.
pub fn recheck(report: &CheckReport, states: &[DensityMatrix]) -> Result<CheckReport> {
    let need = |n: usize| -> Result<()> {
        if states.len() < n {
            return Err(Error::InvalidParameter(format!(
                "{} needs {n} states, got {}",
                report.check_id,
                states.len()
            )));
        }
        Ok(())
    };
    let channel = |d: usize| -> Result<IncoherentChannel> {
        let seed = report
            .context_text("channel_seed")?
            .parse::<u64>()
            .map_err(|e| Error::Parse(e.to_string()))?;
        random_incoherent_kraus(d, report.context_int("channel_kraus")?, seed)
    };
    need(1)?;
    let mut r = match report.check_id.as_str() {
        "prop1" => check_prop1(&states[0])?,
        "prop2" => check_prop2(&states[0])?,
        "prop3" => check_prop3(&states[0], &parse_partition(report.context_text("partition")?)?)?,
        "tradeoff" => {
            need(2)?;
            let (a, b) = (states[0].dim(), states[1].dim());
            let ch = channel(a * b)?.with_dims(vec![a, b])?;
            check_tradeoff(&states[0], &states[1], &ch)?
        }
        "attainability" => check_attainability(&states[0], report.context_int("d_b")?, report.context_int("k")?)?,
        "fidelity" => {
            need(2)?;
            check_fidelity_ordering(&states[0], &states[1])?
        }
        "monotonicity" => check_monotonicity(&states[0], &channel(states[0].dim())?)?,
        "d_oracle" => check_qubit_closed_form(&states[0])?,
        "c_h_oracle" => check_c_h_oracle(&states[0])?,
        other => {
            return Err(Error::Unknown {
                what: "check",
                name: other.to_string(),
            })
        }
    };
    for key in ["channel_seed", "channel_kraus"] {
        if let Some(v) = report.context.get(key) {
            r.context.insert(key.to_string(), v.clone());
        }
    }
    r.seed = report.seed;
    r.trial = report.trial;
    Ok(r)
}
