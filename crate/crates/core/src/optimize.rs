//! Derivative-free maximizers shared by the numerical measures.
//!
//! Two searches live here: one over the probability simplex (incoherent
//! states) and one over tuples of unitaries (local measurement bases). Both
//! run a fixed number of deterministic restarts, optionally in parallel, and
//! keep the best value with ties going to the lowest restart index.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::linalg::ComplexMatrix;
use crate::rng::{derive_seed, random_unitary, GaussianSource};

const SIMPLEX_SEED: u64 = 0x5EED_0001_C0DE_0001;
const UNITARY_SEED: u64 = 0x5EED_0002_C0DE_0002;

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub restarts: usize,
    /// Stop once every coordinate step is below this.
    pub step_tol: f64,
    pub max_sweeps: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            step_tol: 1e-7,
            max_sweeps: 20_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexOutcome {
    pub weights: Vec<f64>,
    pub value: f64,
    pub converged: bool,
}

fn softmax(x: &[f64]) -> Vec<f64> {
    let m = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = x.iter().map(|&v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Adaptive compass search: per-direction steps double after a successful
/// move and halve after a failed one.
struct Compass {
    steps: Vec<f64>,
    step_tol: f64,
    max_step: f64,
}

impl Compass {
    fn new(n: usize, initial: f64, max_step: f64, step_tol: f64) -> Self {
        Self {
            steps: vec![initial; n],
            step_tol,
            max_step,
        }
    }

    fn done(&self) -> bool {
        self.steps.iter().all(|&s| s < self.step_tol)
    }

    /// One Gauss–Seidel sweep: each direction is tried from the point left
    /// by the previous one. `eval` scores a tentative move, `apply` commits it.
    fn sweep<S>(
        &mut self,
        best: &mut f64,
        state: &mut S,
        mut eval: impl FnMut(&S, usize, f64) -> f64,
        apply: impl Fn(&mut S, usize, f64),
    ) {
        for dir in 0..self.steps.len() {
            let s = self.steps[dir];
            if s < self.step_tol {
                continue;
            }
            let mut moved = false;
            for delta in [s, -s] {
                let v = eval(state, dir, delta);
                if v > *best {
                    *best = v;
                    apply(state, dir, delta);
                    moved = true;
                    break;
                }
            }
            self.steps[dir] = if moved {
                (s * 2.0).min(self.max_step)
            } else {
                s * 0.5
            };
        }
    }
}

/// Maximizes `objective(δ)` over probability vectors of length `d`, using a
/// softmax parameterization. Restart 0 starts from the uniform distribution.
pub fn maximize_on_simplex<F>(d: usize, objective: F, opts: &SimplexOptions) -> SimplexOutcome
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let run = |restart: usize| -> SimplexOutcome {
        let mut x = vec![0.0; d];
        if restart > 0 {
            let mut src = GaussianSource::new(derive_seed(SIMPLEX_SEED, restart as u64));
            for v in &mut x {
                *v = 1.5 * src.gaussian();
            }
        }
        let mut best = objective(&softmax(&x));
        let mut compass = Compass::new(d, 0.5, 8.0, opts.step_tol);
        let mut sweeps = 0;
        let mut scratch = x.clone();
        while !compass.done() && sweeps < opts.max_sweeps {
            sweeps += 1;
            compass.sweep(
                &mut best,
                &mut x,
                |x, dir, delta| {
                    scratch.copy_from_slice(x);
                    scratch[dir] += delta;
                    objective(&softmax(&scratch))
                },
                |x, dir, delta| x[dir] += delta,
            );
        }
        SimplexOutcome {
            weights: softmax(&x),
            value: best,
            converged: compass.done(),
        }
    };
    best_of((0..opts.restarts.max(1)).into_par_iter().map(run).collect(), |o| o.value)
}

#[derive(Debug, Clone, Copy)]
pub struct UnitarySearchOptions {
    pub restarts: usize,
    pub step_tol: f64,
    pub max_sweeps: usize,
}

impl Default for UnitarySearchOptions {
    fn default() -> Self {
        Self {
            restarts: 40,
            step_tol: 1e-6,
            max_sweeps: 2000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct UnitaryOutcome {
    pub unitaries: Vec<ComplexMatrix>,
    pub value: f64,
    pub converged: bool,
}

#[derive(Clone, Copy)]
struct Givens {
    factor: usize,
    p: usize,
    q: usize,
    imaginary: bool,
}

fn givens_directions(dims: &[usize]) -> Vec<Givens> {
    let mut dirs = Vec::new();
    for (factor, &d) in dims.iter().enumerate() {
        for p in 0..d {
            for q in (p + 1)..d {
                for imaginary in [false, true] {
                    dirs.push(Givens {
                        factor,
                        p,
                        q,
                        imaginary,
                    });
                }
            }
        }
    }
    dirs
}

/// `U ← U · G(θ)` acting on columns `p`, `q`.
fn rotate_columns(u: &mut ComplexMatrix, g: Givens, theta: f64) {
    let (c, s) = (theta.cos(), theta.sin());
    let (a, b) = if g.imaginary {
        (Complex64::new(0.0, s), Complex64::new(0.0, s))
    } else {
        (Complex64::new(s, 0.0), Complex64::new(-s, 0.0))
    };
    for k in 0..u.rows() {
        let up = u[(k, g.p)];
        let uq = u[(k, g.q)];
        u[(k, g.p)] = up * c + uq * a;
        u[(k, g.q)] = up * b + uq * c;
    }
}

/// Maximizes `objective(&[U_1, U_2, ..])` over unitaries of the given sizes.
/// Restart 0 starts from identities; the rest from Haar-random unitaries.
pub fn maximize_over_unitaries<F>(
    dims: &[usize],
    objective: F,
    opts: &UnitarySearchOptions,
) -> UnitaryOutcome
where
    F: Fn(&[ComplexMatrix]) -> f64 + Sync,
{
    let dirs = givens_directions(dims);
    let run = |restart: usize| -> UnitaryOutcome {
        let mut us: Vec<ComplexMatrix> = if restart == 0 {
            dims.iter().map(|&d| ComplexMatrix::identity(d)).collect()
        } else {
            let mut src = GaussianSource::new(derive_seed(UNITARY_SEED, restart as u64));
            dims.iter().map(|&d| random_unitary(d, &mut src)).collect()
        };
        let mut best = objective(&us);
        let mut compass = Compass::new(dirs.len(), 0.3, 1.0, opts.step_tol);
        let mut sweeps = 0;
        while !compass.done() && sweeps < opts.max_sweeps && !dirs.is_empty() {
            sweeps += 1;
            compass.sweep(
                &mut best,
                &mut us,
                |us, dir, delta| {
                    let g = dirs[dir];
                    let mut trial = us.to_vec();
                    rotate_columns(&mut trial[g.factor], g, delta);
                    objective(&trial)
                },
                |us, dir, delta| {
                    let g = dirs[dir];
                    rotate_columns(&mut us[g.factor], g, delta);
                },
            );
        }
        UnitaryOutcome {
            unitaries: us,
            value: best,
            converged: compass.done() || dirs.is_empty(),
        }
    };
    best_of(
        (0..opts.restarts.max(1)).into_par_iter().map(run).collect(),
        |o| o.value,
    )
}

/// Highest value wins; ties go to the earliest entry.
fn best_of<T>(items: Vec<T>, value: impl Fn(&T) -> f64) -> T {
    let mut iter = items.into_iter();
    let mut best = iter.next().expect("at least one restart");
    for item in iter {
        if value(&item) > value(&best) {
            best = item;
        }
    }
    best
}
