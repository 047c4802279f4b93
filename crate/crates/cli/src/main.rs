//! `holmgren`: evaluate F_A and the fundamental solutions, solve the mixed
//! problem on the quarter-ball and run the verification suites.
//!
//! Exit codes: 0 success, 2 invalid input (arguments, configuration, domain,
//! interior margin), 3 numerical failure or a failed check. The rayon pool
//! size comes from `HOLMGREN_THREADS` (default: all cores).

mod config;

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use holmgren::fundsol::{green_g_k, q_k, ProblemConfig};
use holmgren::hyperfun::{fa_with, gauss_2f1, FAParams, FaOptions};
use holmgren::solver::{BoundaryData, DataFamily, Levels, SolveOptions, Solver};
use holmgren::verify::{run_suite, SuiteReport, SUITES};
use holmgren::Execution;
use serde::Deserialize;

use config::RunConfig;

pub const THREADS_ENV: &str = "HOLMGREN_THREADS";

/// Invalid user input; maps to exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

/// A check or point failed without an input error; maps to exit code 3.
#[derive(Debug)]
struct Failed(String);

impl std::fmt::Display for Failed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Failed {}

#[derive(Parser)]
#[command(
    name = "holmgren",
    version,
    about = "Singular elliptic kernels and the quarter-ball mixed problem"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the Lauricella function F_A(a; b; c; z).
    FaEval(FaArgs),
    /// Evaluate the fundamental solution q_k and Green's function G_k.
    FundsolEval(FundsolArgs),
    /// Solve the mixed problem described by a JSON configuration.
    Solve {
        config: PathBuf,
        /// Overrides the configuration's `output`.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Run a verification suite (hypergeom, fundsol, green, solver or all).
    Verify {
        suite: String,
        /// CSV destination; stdout when absent.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Quick end-to-end sanity checks.
    Selftest,
}

#[derive(Args)]
struct FaArgs {
    /// JSON file with fields a, b, c, z and optional tol.
    #[arg(long, conflicts_with_all = ["a", "b", "c", "z"])]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    b: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    c: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    z: Vec<f64>,
    /// Relative shell tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FaFile {
    a: f64,
    b: Vec<f64>,
    c: Vec<f64>,
    z: Vec<f64>,
    tol: Option<f64>,
}

#[derive(Args)]
struct FundsolArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    /// Number of Dirichlet faces; defaults to n.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    alpha: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    x: Vec<f64>,
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    xi: Vec<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::FaEval(args) => fa_eval(args),
        Command::FundsolEval(args) => fundsol_eval(args),
        Command::Solve { config, output } => solve(config, output),
        Command::Verify { suite, output } => verify(&suite, output),
        Command::Selftest => selftest(),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<InputError>() {
            return 2;
        }
        if let Some(err) = cause.downcast_ref::<holmgren::Error>() {
            return if err.is_input_error() { 2 } else { 3 };
        }
    }
    3
}

fn input<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(InputError(msg.into()).into())
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = match raw.trim().parse() {
        Ok(t) if t > 0 => t,
        _ => return input(format!("{THREADS_ENV}={raw:?} is not a positive integer")),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring the thread pool")
}

fn open_output(path: Option<&PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(
            File::create(p)
                .map_err(|e| InputError(format!("cannot create {}: {e}", p.display())))?,
        ),
        None => Box::new(io::stdout().lock()),
    })
}

fn num(v: f64) -> String {
    // adding 0.0 turns −0 into +0
    format!("{:e}", v + 0.0)
}

fn fa_eval(args: FaArgs) -> anyhow::Result<()> {
    let (a, b, c, z, tol) = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
            let f: FaFile = serde_json::from_str(&text)
                .map_err(|e| InputError(format!("{}: {e}", path.display())))?;
            (f.a, f.b, f.c, f.z, f.tol)
        }
        None => match args.a {
            Some(a) => (a, args.b, args.c, args.z, args.tol),
            None => return input("either --config or --a/--b/--c/--z is required"),
        },
    };
    if b.len() != z.len() || c.len() != z.len() || z.is_empty() {
        return input(format!(
            "b, c and z need the same nonzero length (got {}, {}, {})",
            b.len(),
            c.len(),
            z.len()
        ));
    }
    let mut opts = FaOptions::kernel();
    if let Some(t) = tol {
        if !(t > 0.0 && t < 1.0) {
            return input(format!("tol {t} must lie in (0, 1)"));
        }
        opts.tol = t;
    }
    let r = fa_with(&FAParams { a, b, c }, &z, &opts)?;
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    w.write_record([
        "value",
        "strategy",
        "terms_used",
        "tail_estimate",
        "converged",
    ])?;
    w.write_record([
        num(r.value),
        r.strategy.to_string(),
        r.terms_used.to_string(),
        num(r.tail_estimate),
        r.converged.to_string(),
    ])?;
    w.flush()?;
    if !r.converged {
        return Err(Failed("series did not reach the tolerance".into()).into());
    }
    Ok(())
}

fn fundsol_eval(args: FundsolArgs) -> anyhow::Result<()> {
    let k = args.k.unwrap_or(args.n);
    let config = ProblemConfig::new(args.m, args.n, k, args.alpha, args.radius)?;
    for (name, v) in [("x", &args.x), ("xi", &args.xi)] {
        if v.len() != args.m {
            return input(format!(
                "--{name} needs {} coordinates, found {}",
                args.m,
                v.len()
            ));
        }
    }
    let q = q_k(&config, &args.x, &args.xi)?;
    let g = green_g_k(&config, &args.x, &args.xi)?;
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    w.write_record(["q", "green"])?;
    w.write_record([num(q), num(g)])?;
    w.flush()?;
    Ok(())
}

fn solve(path: PathBuf, output: Option<PathBuf>) -> anyhow::Result<()> {
    let prepared = RunConfig::load(&path)?.prepare(Execution::Parallel)?;
    let report = prepared.solver.solve_grid(&prepared.data, &prepared.points);
    let config = prepared.solver.config();
    let (m, n) = (config.m(), config.n());

    let mut header = vec!["index".to_string()];
    header.extend((1..=m).map(|j| format!("xi{j}")));
    header.push("u".into());
    header.extend((1..=n).map(|p| format!("face{p}")));
    header.push("sphere".into());

    // solve_grid keeps input order, so rows come out sorted by point index
    let mut w =
        csv::Writer::from_writer(open_output(output.as_ref().or(prepared.output.as_ref()))?);
    w.write_record(&header)?;
    for (i, (xi, sol)) in report.points.iter().zip(&report.solutions).enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(xi.iter().map(|&v| num(v)));
        match sol {
            Some(s) => {
                row.push(num(s.value));
                row.extend(s.faces.iter().map(|&v| num(v)));
                row.push(num(s.sphere));
            }
            None => row.extend(std::iter::repeat_n(String::new(), n + 2)),
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    if let Some((i, e)) = report.failures.first() {
        for (j, err) in &report.failures {
            eprintln!("point {j} {:?}: {err}", report.points[*j]);
        }
        let err = anyhow::Error::new(e.clone()).context(format!(
            "{} of {} points failed, first at index {i}",
            report.failures.len(),
            report.points.len()
        ));
        return Err(err);
    }
    Ok(())
}

fn verify(suite: &str, output: Option<PathBuf>) -> anyhow::Result<()> {
    let names: Vec<&str> = if suite == "all" {
        SUITES.to_vec()
    } else if SUITES.contains(&suite) {
        vec![suite]
    } else {
        return input(format!(
            "unknown suite {suite:?}; expected one of {SUITES:?} or \"all\""
        ));
    };
    let reports = names
        .iter()
        .map(|s| run_suite(s, Execution::Parallel))
        .collect::<holmgren::Result<Vec<SuiteReport>>>()?;
    let mut w = csv::Writer::from_writer(open_output(output.as_ref())?);
    w.write_record([
        "suite",
        "check",
        "case",
        "value",
        "tolerance",
        "passed",
        "detail",
    ])?;
    for r in reports.iter().flat_map(|s| &s.records) {
        w.write_record([
            r.suite.clone(),
            r.check.clone(),
            r.case.clone(),
            num(r.value),
            num(r.tolerance),
            r.passed.to_string(),
            r.detail.clone(),
        ])?;
    }
    w.flush()?;
    let mut failed = 0;
    for s in &reports {
        let f = s.failures().count();
        failed += f;
        eprintln!("{}: {} checks, {f} failed", s.suite, s.records.len());
    }
    if failed > 0 {
        return Err(Failed(format!("{failed} checks failed")).into());
    }
    Ok(())
}

fn selftest() -> anyhow::Result<()> {
    let mut checks: Vec<(&str, f64, f64)> = Vec::new();

    let one = fa_with(
        &FAParams {
            a: 0.7,
            b: vec![1.1],
            c: vec![2.3],
        },
        &[-0.4],
        &FaOptions::kernel(),
    )?;
    let gauss = gauss_2f1(0.7, 1.1, 2.3, -0.4)?;
    checks.push((
        "fa_one_variable_vs_gauss",
        (one.value - gauss.value).abs(),
        1e-13,
    ));

    let zero = fa_with(
        &FAParams {
            a: 1.3,
            b: vec![0.4, 0.9],
            c: vec![1.5, 2.5],
        },
        &[0.0, 0.0],
        &FaOptions::default(),
    )?;
    checks.push(("fa_at_origin", (zero.value - 1.0).abs(), 0.0));

    let config = ProblemConfig::new(3, 2, 1, vec![0.2, 0.35], 1.0)?;
    let (x, xi) = ([0.3, 0.5, -0.2], [0.4, 0.2, 0.3]);
    let (u, v) = (q_k(&config, &x, &xi)?, q_k(&config, &xi, &x)?);
    checks.push(("q_symmetry", ((u - v) / u).abs(), 1e-12));
    let s = [0.6, 0.48, 0.64];
    checks.push((
        "green_zero_on_sphere",
        green_g_k(&config, &s, &xi)?.abs(),
        1e-12,
    ));

    let c2 = ProblemConfig::new(2, 1, 1, vec![0.3], 1.0)?;
    let mut opts = SolveOptions::default_for(2);
    opts.levels = Levels::uniform(16);
    let solver = Solver::new(c2.clone(), opts)?;
    let data = BoundaryData::from_family(&c2, &DataFamily::Coordinate(1))?;
    let xi2 = [0.35, 0.25];
    checks.push((
        "solve_coordinate_data",
        (solver.solve(&data, &xi2)? - xi2[1]).abs(),
        1e-6,
    ));

    let mut w = csv::Writer::from_writer(io::stdout().lock());
    w.write_record(["check", "value", "tolerance", "passed"])?;
    let mut failed = 0;
    for (name, value, tol) in &checks {
        let ok = *value <= *tol;
        failed += usize::from(!ok);
        w.write_record([name.to_string(), num(*value), num(*tol), ok.to_string()])?;
    }
    w.flush()?;
    if failed > 0 {
        return Err(Failed(format!("{failed} selftest checks failed")).into());
    }
    Ok(())
}
