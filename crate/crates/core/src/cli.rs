//! Command-line front end.
//!
//! Every command reads one or more JSON inputs (`--input`, repeatable) and
//! writes a JSON report to `--output` or stdout. With several inputs the
//! report is a JSON array in input order, and `--jobs` processes inputs on
//! that many threads.
//!
//! Exit codes: 0 success, 1 other failure, 2 parse error, 3 non-finite
//! input, 4 not embeddable, 5 verification failed, 6 bad parameter.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::carleman::{
    carleman_construct, carleman_linearize, carleman_verify, EmbeddingTransform, Flavor,
    PolynomialSystem, DEFAULT_LINEARIZE_CAP,
};
use crate::dynamics::{
    oscillator_carleman, oscillator_koopman, quad_embed, quad_embed_with_root,
    OscillatorNetwork, QuadraticHamiltonian,
};
use crate::embeddability::classify;
use crate::error::{Error, Result};
use crate::koopman::{fock_hamiltonian, koopman_construct, koopman_verify};
use crate::linalg::{Matrix, ToleranceConfig};
use crate::resources::{query_estimate, BlockEncodingParams};
use crate::simulate::{embedding_roundtrip, normalized, parse_time_grid, propagate_state};

#[derive(Debug, Parser)]
#[command(name = "ode2schrod", version, about = "Map linear ODEs onto Schrödinger equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Input JSON file (repeatable).
    #[arg(long, global = true)]
    pub input: Vec<PathBuf>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Relative tolerance for structural checks.
    #[arg(long, global = true, env = "ODE2SCHROD_TOL")]
    pub tol: Option<f64>,

    /// Worker threads for independent inputs.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether a real square matrix is pure imaginary diagonalizable.
    Classify,
    /// Build (or verify, with --transform) a transforming matrix for A.
    Embed {
        #[arg(long, default_value = "carleman")]
        flavor: Flavor,
        #[arg(long)]
        m_target: Option<usize>,
        /// Verify this B instead of constructing one.
        #[arg(long)]
        transform: Option<PathBuf>,
        /// Also export the Fock Hamiltonian of a Koopman generator.
        #[arg(long)]
        nmax: Option<usize>,
    },
    /// Evolve a transform bundle and report round-trip errors.
    Simulate {
        /// JSON array with the initial state x₀.
        #[arg(long)]
        x0: PathBuf,
        #[arg(long, default_value = "0:0.1:10")]
        times: String,
        /// Write ψ(t) as CSV here.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Query and qubit counts for block-encoding parameters.
    Estimate,
    /// Transforming matrices for a coupled-oscillator network.
    Oscillators {
        #[arg(long, default_value = "carleman")]
        flavor: Flavor,
        #[arg(long)]
        nmax: Option<usize>,
    },
    /// Koopman transform of a definite quadratic Hamiltonian.
    Quad {
        /// Verify this real root B (BᵀB = ±H̃) instead of the principal one.
        #[arg(long)]
        transform: Option<PathBuf>,
        #[arg(long)]
        nmax: Option<usize>,
    },
    /// Truncated Carleman linearization of a polynomial system.
    Linearize {
        #[arg(long)]
        truncation: usize,
        /// Cap on dense matrix entries.
        #[arg(long, default_value_t = DEFAULT_LINEARIZE_CAP)]
        cap: usize,
    },
}

/// Maps an error onto the process exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse(_) => 2,
        Error::NonFinite => 3,
        Error::NotEmbeddable(_) => 4,
        Error::VerificationFailed(_) => 5,
        Error::BadParameter(_) => 6,
        _ => 1,
    }
}

/// A command's JSON report and its exit code.
struct Outcome {
    report: Value,
    code: i32,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Outcome { report, code: 0 }
    }
}

fn failure(path: &Path, err: &Error) -> Outcome {
    Outcome {
        report: json!({
            "input": path.display().to_string(),
            "error": err.to_string(),
            "exit_code": exit_code(err),
        }),
        code: exit_code(err),
    }
}

/// Parses arguments, runs the command and returns the exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                2
            } else {
                0
            }
        }
    }
}

pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}

fn tolerance(cli: &Cli) -> Result<ToleranceConfig> {
    match cli.tol {
        None => Ok(ToleranceConfig::default()),
        Some(t) => ToleranceConfig::default().with_rel_tol(t),
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let tol = tolerance(cli)?;
    if cli.input.is_empty() {
        return Err(Error::BadParameter("at least one --input file is required".into()));
    }
    if cli.jobs == 0 {
        return Err(Error::BadParameter("--jobs must be at least 1".into()));
    }
    let outcomes = process_all(&cli.input, cli.jobs, |path| {
        match process_one(&cli.command, path, &tol) {
            Ok(outcome) => outcome,
            Err(err) => failure(path, &err),
        }
    });
    let code = outcomes.iter().map(|o| o.code).find(|&c| c != 0).unwrap_or(0);
    let report = if outcomes.len() == 1 {
        outcomes.into_iter().next().map(|o| o.report).unwrap_or(Value::Null)
    } else {
        Value::Array(outcomes.into_iter().map(|o| o.report).collect())
    };
    let text = serde_json::to_string_pretty(&report)?;
    match &cli.output {
        Some(path) => fs::write(path, text + "\n")?,
        None => {
            let mut out = std::io::stdout().lock();
            if let Err(e) = writeln!(out, "{text}") {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(e.into());
                }
            }
        }
    }
    Ok(code)
}

/// Applies `f` to every path, on up to `jobs` threads, keeping input order.
fn process_all<F>(paths: &[PathBuf], jobs: usize, f: F) -> Vec<Outcome>
where
    F: Fn(&Path) -> Outcome + Sync,
{
    if jobs <= 1 || paths.len() <= 1 {
        return paths.iter().map(|p| f(p)).collect();
    }
    let chunk = paths.len().div_ceil(jobs);
    std::thread::scope(|scope| {
        let handles: Vec<_> = paths
            .chunks(chunk)
            .map(|part| {
                let f = &f;
                scope.spawn(move || part.iter().map(|p| f(p)).collect::<Vec<_>>())
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker thread panicked"))
            .collect()
    })
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn parse_as<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let value = read_json(path)?;
    serde_json::from_value(value).map_err(|e| {
        let msg = e.to_string();
        // Invariant failures raised inside TryFrom surface as serde errors;
        // keep non-finite input distinguishable.
        if msg.contains("NaN or infinite") {
            Error::NonFinite
        } else {
            Error::Parse(format!("{}: {msg}", path.display()))
        }
    })
}

/// A matrix file holds either `{rows, cols, real, imag?}` or a nested array.
pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let value = read_json(path)?;
    let m = if value.is_array() {
        let rows: Vec<Vec<f64>> = serde_json::from_value(value)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Matrix::from_nested(&rows)?
    } else {
        serde_json::from_value(value)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
    };
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(m)
}

fn read_real_square(path: &Path) -> Result<Matrix> {
    let m = read_matrix(path)?;
    if !m.is_square() {
        return Err(Error::Parse(format!(
            "{}: expected a square matrix, got {}x{}",
            path.display(),
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_real() {
        return Err(Error::Parse(format!("{}: expected a real matrix", path.display())));
    }
    Ok(m)
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

/// Transform bundle written by `embed`, `oscillators` and `quad` and read by
/// `simulate`.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct Bundle {
    #[serde(flatten)]
    pub transform: EmbeddingTransform,
    /// `‖C B − I‖` (max-norm).
    pub left_inverse_residual: f64,
}

impl Bundle {
    pub fn new(transform: EmbeddingTransform) -> Self {
        let cb = &transform.c * &transform.b;
        let left_inverse_residual = cb.max_abs_diff(&Matrix::identity(transform.b.cols()));
        Bundle {
            transform,
            left_inverse_residual,
        }
    }
}

fn bundle_value(t: EmbeddingTransform, nmax: Option<usize>, tol: &ToleranceConfig) -> Result<Value> {
    let fock = match nmax {
        Some(n) if t.flavor == Flavor::Koopman => {
            Some(fock_hamiltonian(&t.generator.re(), n, tol)?.to_json()?)
        }
        Some(_) => {
            return Err(Error::BadParameter(
                "--nmax applies to Koopman transforms only".into(),
            ))
        }
        None => None,
    };
    let mut v = to_value(&Bundle::new(t))?;
    if let Some(f) = fock {
        v["fock"] = to_value(&f)?;
    }
    Ok(v)
}

fn process_one(cmd: &Command, path: &Path, tol: &ToleranceConfig) -> Result<Outcome> {
    match cmd {
        Command::Classify => {
            let a = read_real_square(path)?;
            let c = classify(&a, tol)?;
            let mut v = to_value(&c)?;
            if let Some(reason) = c.reason() {
                v["reason"] = json!(reason);
            }
            Ok(Outcome {
                report: v,
                code: if c.embeddable { 0 } else { 4 },
            })
        }
        Command::Embed {
            flavor,
            m_target,
            transform,
            nmax,
        } => {
            let a = read_real_square(path)?;
            let t = match transform {
                Some(bpath) => {
                    let b = read_matrix(bpath)?;
                    match flavor {
                        Flavor::Carleman => carleman_verify(&a, &b, tol),
                        Flavor::Koopman => koopman_verify(&a, &b, tol),
                    }
                    .map_err(|e| match e {
                        Error::NotAntiHermitian { .. }
                        | Error::NotAntiSymmetric { .. }
                        | Error::RealityViolation { .. }
                        | Error::RankDeficient { .. } => Error::VerificationFailed(e.to_string()),
                        other => other,
                    })?
                }
                None => match flavor {
                    Flavor::Carleman => carleman_construct(&a, *m_target, tol)?,
                    Flavor::Koopman => koopman_construct(&a, *m_target, tol)?,
                },
            };
            Ok(Outcome::ok(bundle_value(t, *nmax, tol)?))
        }
        Command::Simulate {
            x0,
            times,
            trajectory,
        } => {
            let bundle: Bundle = parse_as(path)?;
            let x0: Vec<f64> = parse_as(x0)?;
            let times = parse_time_grid(times)?;
            let t = bundle
                .transform
                .reverify(tol)
                .map_err(|e| Error::VerificationFailed(e.to_string()))?;
            let report = embedding_roundtrip(&t, &x0, &times, tol)?;
            if let Some(csv) = trajectory {
                let y0 = t.b.apply(&x0.iter().map(|&r| crate::linalg::Complex::new(r, 0.0)).collect::<Vec<_>>())?;
                let psi = propagate_state(&t.hamiltonian, &normalized(&y0)?, &times, tol)?;
                let mut file = fs::File::create(csv)?;
                psi.write_csv(&mut file)?;
            }
            let mut v = to_value(&report)?;
            v["structure_residual"] = json!(t.residual);
            v["passes"] = json!(report.passes());
            Ok(Outcome {
                report: v,
                code: if report.passes() { 0 } else { 5 },
            })
        }
        Command::Estimate => {
            let p: BlockEncodingParams = parse_as(path)?;
            Ok(Outcome::ok(to_value(&query_estimate(&p)?)?))
        }
        Command::Oscillators { flavor, nmax } => {
            let net: OscillatorNetwork = parse_as(path)?;
            match flavor {
                Flavor::Carleman => {
                    let b = oscillator_carleman(&net, tol)?;
                    let t = carleman_verify(&crate::dynamics::oscillator_system(&net), &b, tol)?;
                    Ok(Outcome::ok(bundle_value(t, *nmax, tol)?))
                }
                Flavor::Koopman => {
                    let k = oscillator_koopman(&net, tol)?;
                    let mut v = bundle_value(k.koopman, *nmax, tol)?;
                    v["unitary"] = to_value(&k.unitary)?;
                    v["carleman_hamiltonian"] = to_value(&k.carleman.hamiltonian)?;
                    v["unitary_residual"] = json!(k.residual);
                    Ok(Outcome::ok(v))
                }
            }
        }
        Command::Quad { transform, nmax } => {
            let m = read_matrix(path)?;
            let h = QuadraticHamiltonian::new(m, tol)?;
            let t = match transform {
                Some(bpath) => quad_embed_with_root(&h, &read_matrix(bpath)?, tol)?,
                None => quad_embed(&h, tol)?,
            };
            Ok(Outcome::ok(bundle_value(t, *nmax, tol)?))
        }
        Command::Linearize { truncation, cap } => {
            let sys: PolynomialSystem = parse_as(path)?;
            let m = carleman_linearize(&sys, *truncation, *cap)?;
            Ok(Outcome::ok(json!({
                "truncation": truncation,
                "dimension": m.rows(),
                "matrix": to_value(&m)?,
            })))
        }
    }
}
