//! `alcc` command-line front end.
//!
//! Exit codes of `solve`: 0 converged, 2 outer iteration limit reached,
//! 3 numeric failure, 1 unreadable or invalid input. `check-bounds` exits 0
//! when every row passes, 4 when some bound fails and 1 on invalid input or a
//! trace that belongs to a different problem.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use alcc::audit::{audit_trace, AuditTolerances};
use alcc::format::ProblemFile;
use alcc::trace::{to_csv, TraceFile};
use alcc::{solve, ScheduleConfig, SolveStatus};
use clap::{Args, Parser, Subcommand};
use log::info;
use sha2::{Digest, Sha256};

#[derive(Parser)]
#[command(name = "alcc", version, about = "Inexact augmented Lagrangian solver for conic programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file.
    Solve(SolveArgs),
    /// Re-check the per-iterate bounds recorded in a JSON trace.
    CheckBounds {
        /// JSON trace written by `solve --json`.
        trace: PathBuf,
        /// The problem file the trace was produced from.
        problem: PathBuf,
    },
    /// Run the acceptance suite.
    Acceptance,
}

#[derive(Args)]
struct SolveArgs {
    problem: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, default_value_t = 0.5)]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha0: f64,
    #[arg(long, default_value_t = 1.0)]
    eta0: f64,
    #[arg(long, default_value_t = 1.0)]
    mu0: f64,
    /// Target for the KKT residuals (and the gap to a known optimum).
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long, default_value_t = 60)]
    max_outer: usize,
    /// Keep iterating after the target is met, up to --max-outer.
    #[arg(long)]
    no_early_stop: bool,
    /// Write the per-iterate CSV trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the full JSON trace here.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

const EXIT_INPUT: u8 = 1;
const EXIT_MAX_OUTER: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_BOUND_FAIL: u8 = 4;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ALCC_LOG", "warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Solve(args) => cmd_solve(&args),
        Command::CheckBounds { trace, problem } => cmd_check_bounds(&trace, &problem),
        Command::Acceptance => cmd_acceptance(),
    }
}

fn input_error(path: &Path, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {}: {msg}", path.display());
    ExitCode::from(EXIT_INPUT)
}

fn problem_hash(problem: &ProblemFile) -> String {
    Sha256::digest(problem.canonical_json().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn load_problem(path: &Path) -> Result<ProblemFile, ExitCode> {
    let text = fs::read_to_string(path).map_err(|e| input_error(path, e))?;
    ProblemFile::from_json(&text).map_err(|e| input_error(path, e))
}

/// Writes via a temporary file in the target directory and renames it into place.
fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn cmd_solve(args: &SolveArgs) -> ExitCode {
    let problem = match load_problem(&args.problem) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let program = match problem.to_program() {
        Ok(p) => p,
        Err(e) => return input_error(&args.problem, e),
    };
    let schedule = ScheduleConfig {
        alpha0: args.alpha0,
        eta0: args.eta0,
        mu0: args.mu0,
        beta: args.beta,
        c: args.c,
        max_outer: args.max_outer,
        target_eps: args.eps,
        stop_at_target: !args.no_early_stop,
        seed: args.seed,
    };
    let trace = match solve(&program, &schedule) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    };

    if let Some(path) = &args.trace {
        if let Err(e) = write_atomic(path, &to_csv(&trace)) {
            return input_error(path, e);
        }
        info!("wrote CSV trace to {}", path.display());
    }
    let status = trace.status;
    let summary = summarize(&problem, &trace);
    if let Some(path) = &args.json {
        let file = TraceFile::new(problem_hash(&problem), schedule, trace);
        if let Err(e) = write_atomic(path, &file.to_json()) {
            return input_error(path, e);
        }
        info!("wrote JSON trace to {}", path.display());
    }
    print!("{summary}");

    match status {
        SolveStatus::Converged => ExitCode::SUCCESS,
        SolveStatus::MaxOuterReached => ExitCode::from(EXIT_MAX_OUTER),
        SolveStatus::NumericFailure => ExitCode::from(EXIT_NUMERIC),
    }
}

fn summarize(problem: &ProblemFile, trace: &alcc::Trace) -> String {
    let status = match trace.status {
        SolveStatus::Converged => "converged",
        SolveStatus::MaxOuterReached => "max outer iterations reached",
        SolveStatus::NumericFailure => "numeric failure",
    };
    let mut out = format!("status: {status}\n");
    if let Some(reason) = &trace.failure {
        out += &format!("failure: {reason}\n");
    }
    out += &format!(
        "outer iterations: {} (inner {})\n",
        trace.iterates.len(),
        trace.total_inner_iters()
    );
    if let Some(last) = trace.last() {
        out += &format!("objective: {:.12e}\n", last.obj);
        out += &format!("infeasibility: {:.3e}\n", last.infeas);
        out += &format!("kkt residual: {:.3e}\n", last.certificate.absolute.max());
        if let Some(p) = problem.reference.as_ref().and_then(|r| r.p_star) {
            out += &format!("gap to reference: {:.3e}\n", (last.obj - p).abs());
        }
        let x: Vec<String> = last.x.iter().map(|v| format!("{v:.9}")).collect();
        out += &format!("x: [{}]\n", x.join(", "));
    }
    out
}

fn cmd_check_bounds(trace_path: &Path, problem_path: &Path) -> ExitCode {
    let problem = match load_problem(problem_path) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let text = match fs::read_to_string(trace_path) {
        Ok(t) => t,
        Err(e) => return input_error(trace_path, e),
    };
    let file = match TraceFile::from_json(&text) {
        Ok(f) => f,
        Err(e) => return input_error(trace_path, e),
    };
    let hash = problem_hash(&problem);
    if file.problem_sha256 != hash {
        return input_error(
            trace_path,
            format!(
                "trace was produced from a different problem (sha256 {} in trace, {hash} for {})",
                file.problem_sha256,
                problem_path.display()
            ),
        );
    }
    let program = match problem.to_program() {
        Ok(p) => p,
        Err(e) => return input_error(problem_path, e),
    };

    let rows = audit_trace(&program, &file.schedule, &file.trace, &AuditTolerances::default());
    let mut failed = 0usize;
    for r in &rows {
        let verdict = if r.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!r.pass);
        println!(
            "k={:<3} {:<13} {verdict}  lhs={:.6e}  rhs={:.6e}",
            r.k,
            r.kind.label(),
            r.lhs,
            r.rhs
        );
    }
    println!("{} rows, {failed} failed", rows.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_BOUND_FAIL)
    }
}

fn cmd_acceptance() -> ExitCode {
    let reports = alcc_bench::run_all();
    for r in &reports {
        println!("{r}");
    }
    if reports.iter().all(|r| r.passed()) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
