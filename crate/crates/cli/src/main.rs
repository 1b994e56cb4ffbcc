use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use qmms_core::compactness::{frechet_certify, sobolev_exceptional_sets, FrechetOptions, FrechetOutcome};
use qmms_core::experiments::{run_experiment, EXPERIMENT_NAMES};
use qmms_core::generators::{generate, GeneratorSpec};
use qmms_core::geometry::{
    ahlfors_lower_fit, covering_profile, doubling_at_infinity, doubling_witness, h_profile, integrability_curve, Verdict,
};
use qmms_core::io::{gradient_csv, read_family, read_function, read_space, space_to_json, write_atomic};
use qmms_core::norms::bump::{bump, bump_norms};
use qmms_core::norms::{solve_norm, NormKind, NormProblem};
use qmms_core::regularize::{default_beta_grid, index_profile, DEFAULT_THRESHOLD};
use qmms_core::{Error, FiniteQMMSpace};

/// Diagnostics, Hajłasz-type norms and compactness certificates on finite
/// quasi-metric measure spaces.
#[derive(Parser, Debug)]
#[command(name = "qmms", version)]
struct Cli {
    /// Output directory for artifacts and the run manifest.
    #[arg(long, global = true, default_value = "qmms-out")]
    out: PathBuf,
    /// Seed for randomized steps.
    #[arg(long, global = true, env = "QMMS_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to available cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate or validate spaces.
    #[command(subcommand)]
    Space(SpaceCmd),
    /// Geometric and measure diagnostics.
    Diag(DiagArgs),
    /// Minimal-gradient norm of a function.
    Norm(NormArgs),
    /// Hölder bump separating two sets.
    Bump(BumpArgs),
    /// Fréchet certificate for a family of functions.
    Certify(CertifyArgs),
    /// Named experiment with its report bundle.
    Experiment(ExperimentArgs),
}

#[derive(Subcommand, Debug)]
enum SpaceCmd {
    /// Emit a generated space and its reference card.
    Gen {
        #[arg(long)]
        name: String,
        /// Comma-separated `key=value` pairs.
        #[arg(long, value_delimiter = ',')]
        params: Vec<String>,
    },
    /// Validate a space file and report its constants.
    Validate {
        #[arg(long)]
        space: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum DiagKind {
    Net,
    Doubling,
    H,
    Integrability,
    Ahlfors,
    Infinity,
    Index,
}

#[derive(Args, Debug)]
struct DiagArgs {
    kind: DiagKind,
    #[arg(long)]
    space: PathBuf,
    /// Scales for `net`.
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
    #[arg(long, default_value_t = 2.0)]
    c: f64,
    #[arg(long, value_delimiter = ',')]
    delta: Vec<f64>,
    /// Radii for `h`, `ahlfors`, `infinity`, or the single radius of `integrability`.
    #[arg(long, value_delimiter = ',')]
    r: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    truncations: Vec<f64>,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    #[arg(long, default_value_t = 0)]
    x0: usize,
    #[arg(long, value_delimiter = ',')]
    betas: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum KindArg {
    #[value(name = "M")]
    M,
    #[value(name = "TL")]
    Tl,
    #[value(name = "N")]
    N,
}

impl From<KindArg> for NormKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::M => NormKind::MSobolev,
            KindArg::Tl => NormKind::MTriebelLizorkin,
            KindArg::N => NormKind::NBesov,
        }
    }
}

#[derive(Args, Debug)]
struct NormArgs {
    #[arg(long)]
    space: PathBuf,
    /// Function file (JSON array or `{"values": [...]}`).
    #[arg(long)]
    u: PathBuf,
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long)]
    alpha: f64,
    /// `inf` is accepted.
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = f64::INFINITY)]
    q: f64,
}

#[derive(Args, Debug)]
struct BumpArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    e0: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    e1: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 2.0)]
    q: f64,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[arg(long)]
    space: PathBuf,
    /// Directory of function files (`*.json`, file-name order).
    #[arg(long)]
    family: PathBuf,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 64)]
    cell_budget: usize,
    /// Smoothness of the supplied gradients; enables the Sobolev route.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(EXPERIMENT_NAMES))]
    name: String,
}

/// Verdict of a successful run.
enum Outcome {
    Ok,
    Negative,
}

struct Run {
    out: PathBuf,
    artifacts: Vec<String>,
}

impl Run {
    fn write(&mut self, name: &str, contents: &str) -> Result<(), Error> {
        write_atomic(&self.out.join(name), contents)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Error> {
        let text = serde_json::to_string_pretty(value).map_err(|e| Error::Malformed(e.to_string()))?;
        self.write(name, &text)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global().expect("thread pool is configured once");
    }
    let start = Instant::now();
    let mut run = Run { out: cli.out.clone(), artifacts: Vec::new() };
    let result = dispatch(&cli, &mut run);
    let (code, status) = match &result {
        Ok(Outcome::Ok) => (0, "ok".to_string()),
        Ok(Outcome::Negative) => (1, "negative verdict".to_string()),
        Err(e @ Error::SolverDiverged { .. }) => (1, e.to_string()),
        Err(e) => (2, e.to_string()),
    };
    let manifest = json!({
        "command": std::env::args().skip(1).collect::<Vec<_>>(),
        "seed": cli.seed,
        "jobs": rayon::current_num_threads(),
        "version": env!("CARGO_PKG_VERSION"),
        "elapsed_ms": start.elapsed().as_secs_f64() * 1e3,
        "status": status,
        "exit_code": code,
        "artifacts": run.artifacts,
    });
    if let Err(e) = run.json("manifest.json", &manifest) {
        eprintln!("error: cannot write manifest: {e}");
    }
    if let Err(e) = result {
        eprintln!("error: {e}");
    }
    ExitCode::from(code)
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidParams(msg.into())
}

fn load(path: &Path) -> Result<FiniteQMMSpace, Error> {
    Ok(read_space(path)?.0)
}

fn dispatch(cli: &Cli, run: &mut Run) -> Result<Outcome, Error> {
    match &cli.command {
        Command::Space(SpaceCmd::Gen { name, params }) => {
            let mut spec = GeneratorSpec::new(name, &[]);
            for kv in params {
                let (k, v) = kv.split_once('=').ok_or_else(|| usage(format!("parameter {kv:?} is not key=value")))?;
                let v: f64 = v.trim().parse().map_err(|_| usage(format!("parameter {k} is not a number")))?;
                spec.params.insert(k.trim().to_string(), v);
            }
            if name == "random_euclidean" && !spec.params.contains_key("seed") {
                spec.params.insert("seed".into(), cli.seed as f64);
            }
            let g = generate(&spec)?;
            run.write("space.json", &space_to_json(&g.space))?;
            run.json("card.json", &g.card)?;
            println!("{}", serde_json::to_string_pretty(&g.card).unwrap());
            Ok(Outcome::Ok)
        }
        Command::Space(SpaceCmd::Validate { space }) => {
            let s = load(space)?;
            let (c_d, c_tilde) = s.quasi_constants();
            let v = json!({"points": s.len(), "c_d": c_d, "c_tilde": c_tilde, "total_mass": s.total_mass()});
            run.json("validate.json", &v)?;
            println!("{v}");
            Ok(Outcome::Ok)
        }
        Command::Diag(a) => diag(a, run),
        Command::Norm(a) => {
            let s = load(&a.space)?;
            let u = read_function(&a.u)?;
            if u.values().len() != s.len() {
                return Err(usage("function length does not match the space"));
            }
            let problem = NormProblem { alpha: a.alpha, p: a.p, q: a.q, kind: a.kind.into() };
            let r = solve_norm(&s, u.values(), &problem)?;
            run.json("norm.json", &r)?;
            run.write("gradient.csv", &gradient_csv(s.labels(), &r.optimal_g))?;
            println!("{}", json!({"seminorm": r.seminorm, "full_norm": r.full_norm, "status": r.solver.status}));
            Ok(Outcome::Ok)
        }
        Command::Bump(a) => {
            let s = load(&a.space)?;
            let b = bump(&s, &a.e0, &a.e1, a.beta)?;
            let norms = match a.alpha {
                Some(alpha) => Some(bump_norms(&s, &b, &a.e0, alpha, a.p, a.q)?),
                None => None,
            };
            let v = json!({"bump": b, "norms": norms});
            run.json("bump.json", &v)?;
            println!("{}", json!({"holder_constant": b.holder_constant, "holder_quotient": b.holder_quotient}));
            Ok(Outcome::Ok)
        }
        Command::Certify(a) => certify(a, run),
        Command::Experiment(a) => {
            let rep = run_experiment(&a.name, cli.seed)?;
            run.json(&format!("{}.json", a.name), &rep)?;
            run.write(&format!("{}.csv", a.name), &rep.table.to_csv())?;
            for c in &rep.claims {
                println!("{} {} (value {}, bound {})", if c.pass { "PASS" } else { "FAIL" }, c.statement, c.value, c.bound);
            }
            Ok(if rep.passed { Outcome::Ok } else { Outcome::Negative })
        }
    }
}

fn need(v: &[f64], flag: &str) -> Result<(), Error> {
    if v.is_empty() {
        Err(usage(format!("--{flag} is required for this diagnostic")))
    } else {
        Ok(())
    }
}

fn diag(a: &DiagArgs, run: &mut Run) -> Result<Outcome, Error> {
    let s = load(&a.space)?;
    let mut outcome = Outcome::Ok;
    let (name, v): (&str, Value) = match a.kind {
        DiagKind::Net => {
            need(&a.eps, "eps")?;
            ("net", json!(covering_profile(&s, &a.eps)?))
        }
        DiagKind::Doubling => {
            need(&a.delta, "delta")?;
            let rows = a
                .delta
                .iter()
                .map(|&d| doubling_witness(&s, a.c, d).map(|(x, m)| json!({"c": a.c, "delta": d, "value": m, "center": x})))
                .collect::<Result<Vec<_>, _>>()?;
            ("doubling", json!(rows))
        }
        DiagKind::H => {
            need(&a.r, "r")?;
            ("h", json!({"r": a.r, "h": h_profile(&s, &a.r)}))
        }
        DiagKind::Integrability => {
            need(&a.r, "r")?;
            need(&a.truncations, "truncations")?;
            let rep = integrability_curve(&s, a.r[0], &a.truncations, a.tol)?;
            if rep.verdict == Verdict::Divergent {
                outcome = Outcome::Negative;
            }
            ("integrability", json!(rep))
        }
        DiagKind::Ahlfors => {
            need(&a.r, "r")?;
            ("ahlfors", json!(ahlfors_lower_fit(&s, &a.r, a.s)?))
        }
        DiagKind::Infinity => {
            need(&a.r, "r")?;
            let rep = doubling_at_infinity(&s, a.x0, &a.r)?;
            if rep.divergent {
                outcome = Outcome::Negative;
            }
            ("infinity", json!(rep))
        }
        DiagKind::Index => {
            let betas = if a.betas.is_empty() { default_beta_grid() } else { a.betas.clone() };
            ("index", json!(index_profile(&s, &betas, a.threshold)?))
        }
    };
    run.json(&format!("diag-{name}.json"), &v)?;
    println!("{}", serde_json::to_string_pretty(&v).unwrap());
    Ok(outcome)
}

fn certify(a: &CertifyArgs, run: &mut Run) -> Result<Outcome, Error> {
    let s = load(&a.space)?;
    let files = read_family(&a.family)?;
    if files.is_empty() {
        return Err(usage(format!("no *.json functions in {}", a.family.display())));
    }
    let family: Vec<Vec<f64>> = files.iter().map(|(_, f)| f.values().to_vec()).collect();
    let mut opts = FrechetOptions::default();
    let mut sets = None;
    if let Some(alpha) = a.alpha {
        let grads: Vec<Option<Vec<f64>>> = files.iter().map(|(_, f)| f.gradient().map(<[f64]>::to_vec)).collect();
        // the Sobolev sets are calibrated to the certificate's working tolerance
        let working = a.eps / (1.0 + 2.0 * s.total_mass());
        let ss = sobolev_exceptional_sets(&s, &family, &grads, alpha, a.p, working, None)?;
        opts.scale = Some(ss.delta);
        opts.lambda = Some(ss.lambda);
        sets = Some(ss);
    }
    let outcome = frechet_certify(&s, &family, a.eps, a.cell_budget, &opts)?;
    let members: Vec<String> = files.iter().map(|(p, _)| p.display().to_string()).collect();
    let v = json!({"members": members, "sobolev_sets": sets, "result": outcome});
    match outcome {
        FrechetOutcome::Certificate(c) => {
            run.json("certificate.json", &v)?;
            println!("{}", json!({"outcome": "certificate", "cells": c.cells.len(), "verified": c.verified}));
            Ok(if c.verified { Outcome::Ok } else { Outcome::Negative })
        }
        FrechetOutcome::Refusal(r) => {
            run.json("refusal.json", &v)?;
            println!("{}", json!({"outcome": "refusal", "member": r.member, "cell": r.cell, "pair": r.pair}));
            Ok(Outcome::Negative)
        }
    }
}
