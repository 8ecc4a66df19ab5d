//! `anosovlab`: build surface group representations, run the diagnostic
//! suite on them, export chart-curve data and compare reports.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anosovlab::diagnostics::{chart_curve, cone_boundary, run_checks, CheckConfig};
use anosovlab::group::{enumerate_ball, Word};
use anosovlab::rep::{bend, direct_sum, fuchsian_genus2, sym_power_frame, sym_power_lift, Kind, Representation};
use anosovlab::tolerance::{self, Tolerances};
use anosovlab::Error;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

const CURVE_HELP: &str = "\
CSV columns (floats printed with 17 significant digits):
  block           `curve` for samples of q_{x,z}^y, `cone` for the boundary
                  of the semi-definite cone
  parameter       theta_y for curve rows; the angle a of the ray v v^T,
                  v = (cos a, sin a), for cone rows
  q11, q22,       coordinates (q11, q22, sqrt(2) q12) of the form in the
  sqrt2_q12       basis of x^2 carried by the Veronese flag
  min_eigenvalue  smallest eigenvalue of the form (0 on the cone)

Curve rows run counterclockwise from theta_x (inclusive) towards theta_z
(exclusive). Cone rays are scaled to the largest curve norm.";

#[derive(Parser)]
#[command(name = "anosovlab", version, about = "Anosov diagnostics for surface group representations")]
struct Cli {
    /// Tolerance override, repeatable (for example `--tol rank=1e-9`).
    #[arg(long = "tol", value_name = "NAME=VALUE", global = true)]
    tol: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BuildKind {
    /// The genus-2 Fuchsian representation into SL(2, R).
    Fuchsian,
    /// Its irreducible N-dimensional lift.
    SymPower,
    /// The sum of two copies of the Fuchsian representation in Sp(4, R).
    DirectSum,
    /// The symmetric power bent along a1 b1 A1 B1.
    Bent,
}

#[derive(Subcommand)]
enum Command {
    /// Build a representation and write it as JSON.
    Build {
        #[arg(long, value_enum)]
        kind: BuildKind,
        /// Target dimension for sym-power and bent.
        #[arg(long = "N", default_value_t = 4)]
        big_n: usize,
        #[arg(long, default_value_t = 2)]
        genus: usize,
        /// Bending parameter.
        #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
        t: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run gap profiles and the selected checks; exit 0 iff all pass.
    Check {
        rep: PathBuf,
        #[arg(long, default_value_t = 4)]
        radius: usize,
        #[arg(long, default_value_t = 500)]
        triples: usize,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Comma-separated check groups (default: all).
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
        /// Report path (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the chart curve theta_y -> q_{x,z}^y of a Sp(4, R) symmetric power.
    #[command(after_help = CURVE_HELP)]
    Curve {
        rep: PathBuf,
        #[arg(long = "theta-x", allow_negative_numbers = true)]
        theta_x: f64,
        #[arg(long = "theta-z", allow_negative_numbers = true)]
        theta_z: f64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// CSV path (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare two reports, ignoring timestamps; exit 0 iff identical.
    ReportDiff { a: PathBuf, b: PathBuf },
}

/// Outcome of a command that ran to completion.
enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            let obj = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            eprintln!("{obj}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<Outcome, Error> {
    configure_threads()?;
    let mut tol = Tolerances::default();
    for entry in &cli.tol {
        tol.apply_override(entry)?;
    }
    tolerance::install(tol);
    match cli.command {
        Command::Build { kind, big_n, genus, t, out } => build(kind, big_n, genus, t, &out),
        Command::Check {
            rep,
            radius,
            triples,
            samples,
            seed,
            checks,
            out,
        } => {
            let config = CheckConfig {
                radius,
                triples,
                samples,
                seed,
                checks,
                ..CheckConfig::default()
            };
            check(&rep, &config, out.as_deref())
        }
        Command::Curve {
            rep,
            theta_x,
            theta_z,
            samples,
            out,
        } => curve(&rep, theta_x, theta_z, samples, out.as_deref()),
        Command::ReportDiff { a, b } => report_diff(&a, &b),
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(value) = std::env::var("ANOSOVLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("ANOSOVLAB_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidArgument(format!("cannot size the worker pool: {e}")))
}

fn build(kind: BuildKind, big_n: usize, genus: usize, t: f64, out: &Path) -> Result<Outcome, Error> {
    if genus != 2 {
        return Err(Error::InvalidArgument(format!("only genus 2 is supported, got {genus}")));
    }
    let rho0 = fuchsian_genus2()?;
    let rep = match kind {
        BuildKind::Fuchsian => rho0,
        BuildKind::SymPower => sym_power_lift(&rho0, big_n)?,
        BuildKind::DirectSum => direct_sum(&rho0, &rho0)?,
        BuildKind::Bent => {
            let curve: Word = "a1 b1 A1 B1".parse()?;
            bend(&sym_power_lift(&rho0, big_n)?, &curve, t)?
        }
    };
    rep.save(out)?;
    emit(&serde_json::to_string_pretty(&certificate(&rep)?)?);
    Ok(Outcome::Pass)
}

/// Residuals of the generators, plus the symplectic residual over the
/// ball of radius 4 for symplectic representations.
fn certificate(rep: &Representation) -> Result<Value, Error> {
    let r = rep.residuals();
    let mut cert = json!({
        "kind": rep.kind(),
        "dim": rep.dim(),
        "genus": rep.genus(),
        "symplectic": rep.is_symplectic(),
        "relator_residual": r.relator,
        "determinant_residual": r.det,
        "symplectic_residual": r.symplectic,
    });
    if rep.is_symplectic() {
        let radius = 4;
        let ball = enumerate_ball(rep, radius)?;
        let mats: Vec<_> = ball.elements.iter().map(|e| e.matrix.clone()).collect();
        cert["ball_radius"] = json!(radius);
        cert["ball_elements"] = json!(ball.len());
        cert["ball_symplectic_residual"] = json!(Representation::relative_symplectic_residual(&mats));
    }
    Ok(cert)
}

fn check(rep_path: &Path, config: &CheckConfig, out: Option<&Path>) -> Result<Outcome, Error> {
    let rep = Representation::load(rep_path)?;
    let report = run_checks(&rep, config)?;
    let text = serde_json::to_string_pretty(&report)?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => emit(&text),
    }
    if report.pass {
        eprintln!("all {} checks pass", report.checks.len());
        Ok(Outcome::Pass)
    } else {
        eprintln!("failing checks: {}", report.failing().join(", "));
        Ok(Outcome::Fail)
    }
}

/// Writes a line to standard output; a closed pipe (as with `| head`) is
/// not an error.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn curve(rep_path: &Path, theta_x: f64, theta_z: f64, samples: usize, out: Option<&Path>) -> Result<Outcome, Error> {
    let rep = Representation::load(rep_path)?;
    if rep.kind() != Kind::SymPower || rep.dim() != 4 {
        return Err(Error::Precondition(format!(
            "curve needs the Sp(4, R) symmetric power (exact boundary flags), got {} of dimension {}",
            rep.kind(),
            rep.dim()
        )));
    }
    let frame = sym_power_frame(4)?;
    let rows = chart_curve(&frame, theta_x, theta_z, samples)?;
    let scale = rows
        .iter()
        .map(|r| r.coords.iter().map(|c| c * c).sum::<f64>().sqrt())
        .fold(1.0, f64::max);
    let mut csv = String::from("block,parameter,q11,q22,sqrt2_q12,min_eigenvalue\n");
    for r in &rows {
        let [a, b, c] = r.coords;
        let _ = writeln!(csv, "curve,{},{},{},{},{}", sci(r.theta_y), sci(a), sci(b), sci(c), sci(r.min_eigenvalue));
    }
    for r in cone_boundary(samples, scale) {
        let [a, b, c] = r.coords;
        let _ = writeln!(csv, "cone,{},{},{},{},{}", sci(r.angle), sci(a), sci(b), sci(c), sci(0.0));
    }
    match out {
        Some(path) => std::fs::write(path, csv)?,
        None => emit(csv.trim_end()),
    }
    Ok(Outcome::Pass)
}

fn read_report(path: &Path) -> Result<Value, Error> {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    match v.as_object_mut() {
        Some(obj) => {
            obj.remove("timestamp");
            Ok(v)
        }
        None => Err(Error::Format(format!("{} is not a report object", path.display()))),
    }
}

/// JSON pointers at which `a` and `b` differ.
fn differences(a: &Value, b: &Value, at: &str, out: &mut Vec<String>) {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            let keys: std::collections::BTreeSet<&String> = x.keys().chain(y.keys()).collect();
            for k in keys {
                let path = format!("{at}/{k}");
                match (x.get(k), y.get(k)) {
                    (Some(p), Some(q)) => differences(p, q, &path, out),
                    _ => out.push(path),
                }
            }
        }
        (Value::Array(x), Value::Array(y)) if x.len() == y.len() => {
            for (i, (p, q)) in x.iter().zip(y).enumerate() {
                differences(p, q, &format!("{at}/{i}"), out);
            }
        }
        _ if a != b => out.push(at.to_string()),
        _ => {}
    }
}

fn report_diff(a: &Path, b: &Path) -> Result<Outcome, Error> {
    let (x, y) = (read_report(a)?, read_report(b)?);
    let mut diffs = Vec::new();
    differences(&x, &y, "", &mut diffs);
    if diffs.is_empty() {
        emit("reports are identical apart from timestamps");
        Ok(Outcome::Pass)
    } else {
        emit(&diffs.join("\n"));
        Ok(Outcome::Fail)
    }
}
