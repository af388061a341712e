use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hellinger_core::coherence::{c_g, c_h, c_offdiag, max_incoherent_affinity};
use hellinger_core::correlations::{d_one_sided, d_symmetric};
use hellinger_core::rng::derive_seed;
use hellinger_core::states::{
    classical_quantum, make_named, mcms, random_density, random_pure, read_state, write_state,
    NamedParams,
};
use hellinger_core::verify::{attainability_state, parse_dims, run_campaign, ATTAINABILITY_TOL};
use hellinger_core::{DensityMatrix, Error, Suite};

/// Hellinger-distance coherence and correlation toolkit.
#[derive(Parser)]
#[command(name = "hellinger", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate measures on a state file.
    Measure {
        #[arg(long)]
        state: PathBuf,
        /// Comma-separated subset of ch, cg, cl1, cl2, d, d_sqrt, ds.
        #[arg(long, default_value = "ch", value_delimiter = ',')]
        measures: Vec<String>,
    },
    /// Write the mixed maximally coherent state sweep as CSV.
    SweepMcms {
        #[arg(long, default_value_t = 0.01)]
        pmin: f64,
        #[arg(long, default_value_t = 1.0)]
        pmax: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a seeded verification campaign.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Subsystem dimensions such as 2x3; defaults depend on the suite.
        #[arg(long)]
        dims: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report file; violation dumps go to `<out>.violations/`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a state file.
    Gen {
        /// Named kind, or random, random_pure, cq.
        #[arg(long)]
        kind: String,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        db: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Classical weights for kind=cq.
        #[arg(long, value_delimiter = ',')]
        weights: Vec<f64>,
        /// Re-tag the subsystem dimensions, e.g. 2x2.
        #[arg(long)]
        dims: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Embed a single-system state into a bipartite correlated state.
    Convert {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        db: usize,
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Input(String),
    Violation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

/// Six significant digits for terminal output.
fn short(x: f64) -> String {
    format!("{x:.5e}")
}

/// Round-trip precision for files.
fn full(x: f64) -> String {
    format!("{x:.16e}")
}

fn join_short(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|&x| short(x)).collect();
    format!("[{}]", parts.join(","))
}

fn measure(state: &Path, measures: &[String]) -> Result<String, Failure> {
    let rho = read_state(state)?;
    let mut out = String::new();
    for m in measures {
        let line = match m.as_str() {
            "ch" => {
                let r = c_h(&rho)?;
                let delta = r.optimal_incoherent.expect("closed form returns a state");
                format!(
                    "measure=ch value={} optimal_incoherent={}",
                    short(r.value),
                    join_short(&delta.matrix().real_diagonal())
                )
            }
            "cg" => {
                let r = c_g(&rho)?;
                format!("measure=cg value={} converged={}", short(r.value), r.converged)
            }
            "cl1" | "cl2" => {
                let order = if m == "cl1" { 1 } else { 2 };
                format!("measure={m} value={}", short(c_offdiag(&rho, order)?))
            }
            "d" | "d_sqrt" => {
                let r = d_one_sided(&rho)?;
                let v = if m == "d" { r.d_value } else { r.d_sqrt_value };
                format!(
                    "measure={m} value={} s_max={} method={} converged={}",
                    short(v),
                    short(r.s_max),
                    r.method.id(),
                    r.converged
                )
            }
            "ds" => {
                let r = d_symmetric(&rho)?;
                format!(
                    "measure=ds value={} d_value={} s_max={} method={} converged={}",
                    short(r.d_sqrt_value),
                    short(r.d_value),
                    short(r.s_max),
                    r.method.id(),
                    r.converged
                )
            }
            other => return Err(Failure::Input(format!("unknown measure '{other}'"))),
        };
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

fn sweep_mcms(pmin: f64, pmax: f64, steps: usize, out: &Path) -> Result<String, Failure> {
    if !(pmin > 0.0 && pmin <= pmax && pmax <= 1.0) {
        return Err(Failure::Input(format!(
            "need 0 < pmin <= pmax <= 1, got pmin = {pmin}, pmax = {pmax}"
        )));
    }
    if steps < 2 {
        return Err(Failure::Input(format!("steps must be at least 2, got {steps}")));
    }
    let mut csv = String::from("p,ch_half,cg_analytic,cg_numeric,max_fidelity,ch\n");
    for i in 0..steps {
        let p = if i + 1 == steps {
            pmax
        } else {
            pmin + (pmax - pmin) * i as f64 / (steps - 1) as f64
        };
        let rho = mcms(p)?;
        let ch = c_h(&rho)?.value;
        let cg_analytic = 1.0 - 0.75 * (1.0 - p).sqrt() - 0.25 * (1.0 + 3.0 * p).sqrt();
        let cg_numeric = c_g(&rho)?.value;
        let row = [p, ch / 2.0, cg_analytic, cg_numeric, 1.0 - cg_analytic, ch];
        let cells: Vec<String> = row.iter().map(|&x| full(x)).collect();
        csv.push_str(&cells.join(","));
        csv.push('\n');
    }
    std::fs::write(out, csv).map_err(|e| io_err(out, e))?;
    Ok(format!("rows={steps} out={}\n", out.display()))
}

fn verify(
    suite: &str,
    trials: usize,
    dims: Option<&str>,
    seed: u64,
    out: Option<&Path>,
) -> Result<String, Failure> {
    let suite: Suite = suite.parse()?;
    let dims = dims.map(parse_dims).transpose()?;
    let campaign = run_campaign(suite, trials, dims.as_deref(), seed)?;
    let s = &campaign.summary;
    let mut text = String::new();
    let _ = writeln!(
        text,
        "suite={} trials={} seed={} holds={} violations={} not_converged={} min_margin={} max_margin={}",
        s.suite,
        s.trials,
        s.master_seed,
        s.holds,
        s.violations,
        s.not_converged,
        short(s.min_margin),
        short(s.max_margin)
    );
    if let Some(path) = out {
        std::fs::write(path, campaign.to_json() + "\n").map_err(|e| io_err(path, e))?;
        let _ = writeln!(text, "report={}", path.display());
        let mut dump_dir = path.as_os_str().to_owned();
        dump_dir.push(".violations");
        let dump_dir = PathBuf::from(dump_dir);
        let written = campaign
            .write_violation_dumps(&dump_dir)
            .map_err(|e| io_err(&dump_dir, e))?;
        if !written.is_empty() {
            let _ = writeln!(text, "violation_dumps={}", dump_dir.display());
        }
    }
    if s.violations > 0 {
        let seeds: Vec<String> = s.violation_seeds.iter().map(u64::to_string).collect();
        let _ = writeln!(text, "violation_seeds={}", seeds.join(","));
        return Err(Failure::Violation(text));
    }
    Ok(text)
}

struct GenArgs {
    kind: String,
    p: Option<f64>,
    d: Option<usize>,
    db: Option<usize>,
    k: Option<usize>,
    rank: Option<usize>,
    seed: u64,
    weights: Vec<f64>,
    dims: Option<String>,
}

fn generate(a: &GenArgs) -> Result<DensityMatrix, Failure> {
    let need_d = || a.d.ok_or_else(|| Failure::Input(format!("kind={} requires --d", a.kind)));
    let rho = match a.kind.as_str() {
        "random" => {
            let d = need_d()?;
            random_density(d, a.rank.unwrap_or(d), a.seed)?
        }
        "random_pure" => random_pure(need_d()?, a.seed)?,
        "cq" => {
            let d_b = a.db.unwrap_or(2);
            let blocks = (0..a.weights.len())
                .map(|i| random_density(d_b, d_b, derive_seed(a.seed, i as u64)))
                .collect::<Result<Vec<_>, _>>()?;
            classical_quantum(&a.weights, &blocks)?
        }
        kind => make_named(
            kind,
            &NamedParams {
                p: a.p,
                d: a.d,
                d_b: a.db,
                k: a.k,
            },
        )?,
    };
    Ok(match &a.dims {
        Some(text) => rho.with_dims(parse_dims(text)?)?,
        None => rho,
    })
}

fn convert(state: &Path, d_b: usize, k: usize, out: &Path) -> Result<String, Failure> {
    let rho_a = read_state(state)?;
    if rho_a.dims().len() != 1 {
        return Err(Failure::Input(format!(
            "expected a single-system state, got dims {:?}",
            rho_a.dims()
        )));
    }
    let final_state = attainability_state(&rho_a, d_b, k)?;
    let ch = c_h(&rho_a)?.value;
    // the ancilla |k⟩ is incoherent, so its factor in the trade-off bound is 1
    let rhs = 2.0 * (1.0 - max_incoherent_affinity(&rho_a)?);
    let ds = d_symmetric(&final_state)?;
    let margin = (ds.d_sqrt_value - ch).abs();
    write_state(out, &final_state).map_err(|e| io_err(out, e))?;
    let text = format!(
        "c_h={} tradeoff_rhs={} d_s={} attainability_margin={} converged={} out={}\n",
        short(ch),
        short(rhs),
        short(ds.d_sqrt_value),
        short(margin),
        ds.converged,
        out.display()
    );
    if margin > ATTAINABILITY_TOL {
        return Err(Failure::Violation(text));
    }
    Ok(text)
}

fn run(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Measure { state, measures } => measure(&state, &measures),
        Command::SweepMcms {
            pmin,
            pmax,
            steps,
            out,
        } => sweep_mcms(pmin, pmax, steps, &out),
        Command::Verify {
            suite,
            trials,
            dims,
            seed,
            out,
        } => verify(&suite, trials, dims.as_deref(), seed, out.as_deref()),
        Command::Gen {
            kind,
            p,
            d,
            db,
            k,
            rank,
            seed,
            weights,
            dims,
            out,
        } => {
            let rho = generate(&GenArgs {
                kind,
                p,
                d,
                db,
                k,
                rank,
                seed,
                weights,
                dims,
            })?;
            write_state(&out, &rho).map_err(|e| io_err(&out, e))?;
            let dims: Vec<String> = rho.dims().iter().map(usize::to_string).collect();
            Ok(format!("dims={} out={}\n", dims.join("x"), out.display()))
        }
        Command::Convert { state, db, k, out } => convert(&state, db, k, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Violation(text)) => {
            print!("{text}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
