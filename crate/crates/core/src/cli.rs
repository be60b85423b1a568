//! The `squatcalc` command-line front end.
//!
//! Every command prints one JSON document. Exit codes: 0 success, 1 a
//! verification residual out of contract, 2 malformed input, 3 solver
//! failure, 4 quadrature or contour failure, 5 no usable real resolvent
//! point.

use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::calculus::{
    f_of_t_auto, f_of_t_inverse_series, f_of_t_unbounded_with, CalcOptions, InverseSeriesOptions, QuadratureOptions,
    QUAD_TOL,
};
use crate::error::Error;
use crate::fixtures::Fixture;
use crate::linalg::QuatMatrix;
use crate::quat::{ImaginaryUnit, Quaternion};
use crate::resolvent::{resolvent_equation_residual, s_left_inverse, s_resolvent, ResolventValue};
use crate::slice_fn::SliceFunction;
use crate::spectrum::{in_resolvent_set, s_spectrum};
use crate::verify::{run_verify, VerifyOptions};

#[derive(Debug, Parser)]
#[command(name = "squatcalc", version, about = "Quaternionic S-functional calculus for matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Operator JSON file: {"n": N, "entries": [[[w,x,y,z], ...], ...]}
    #[arg(long, global = true, value_name = "FILE")]
    pub input: Option<PathBuf>,

    /// Built-in operator instead of --input, e.g. random:n=4,seed=1,norm=1
    #[arg(long, global = true, value_name = "SPEC")]
    pub fixture: Option<String>,

    /// Function spec as a JSON file or inline JSON
    #[arg(long, global = true, value_name = "FILE|JSON")]
    pub function: Option<String>,

    /// Quadrature convergence tolerance
    #[arg(long, global = true, default_value_t = QUAD_TOL)]
    pub tol: f64,

    /// Imaginary unit of the integration slice
    #[arg(long, global = true, value_name = "W,X,Y,Z", default_value = "0,1,0,0")]
    pub slice: String,

    /// Real point of the resolvent set for calc-unbounded
    #[arg(long, global = true)]
    pub k: Option<f64>,

    /// Seed for random fixtures and verify
    #[arg(long, global = true, env = "SQUATCALC_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Common radius for every contour circle
    #[arg(long, global = true)]
    pub radius: Option<f64>,

    /// Number of terms of the inverse-power series
    #[arg(long = "n-max", global = true, default_value_t = 40)]
    pub n_max: usize,

    /// Truncation of the imaginary axis for fn-series
    #[arg(long = "axis-R", global = true, default_value_t = 100.0)]
    pub axis_r: f64,

    /// Trapezoid intervals on the truncated axis for fn-series
    #[arg(long, global = true, default_value_t = 4096)]
    pub nodes: usize,

    /// Point s for resolve
    #[arg(long, global = true, value_name = "W,X,Y,Z")]
    pub point: Option<String>,

    /// Write the JSON result here instead of stdout
    #[arg(long, global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// S-spectrum as a list of spheres
    Spectrum,
    /// S-resolvent at --point
    Resolve,
    /// f(T) by contour quadrature
    Calc,
    /// f(T) through A = (T - kI)^{-1}, cross-checked against the direct formula
    CalcUnbounded,
    /// Inverse-power expansion of f(T) (diagnostic)
    FnSeries,
    /// Seeded identity checks
    Verify {
        #[arg(long, hide = true)]
        corrupt_resolvent_sign: bool,
    },
    /// Print a built-in operator
    Fixture {
        /// e.g. diag-i, real-scalar:t=2,n=3, random:n=4,norm=1, derivative:n=8,h=0.1
        spec: String,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(msg: impl Into<String>) -> Self {
        Self { code: 2, message: msg.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Input(_) | Error::Contract(_) | Error::Domain(_) | Error::DimensionMismatch { .. } => 2,
            Error::QuadratureFailure { .. } | Error::ContourInfeasible(_) => 4,
            Error::NoRealResolventPoint { .. } => 5,
            _ => 3,
        };
        Self { code, message: e.to_string() }
    }
}

/// Successful output plus the exit code (1 for a failed verification).
pub struct Outcome {
    pub json: String,
    pub code: i32,
}

fn parse_quaternion(s: &str) -> Result<Quaternion, CliError> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::input(format!("cannot parse quaternion '{s}'")))?;
    match parts[..] {
        [w, x, y, z] if parts.iter().all(|v| v.is_finite()) => Ok(Quaternion::new(w, x, y, z)),
        _ => Err(CliError::input(format!("expected four finite numbers w,x,y,z, got '{s}'"))),
    }
}

fn load_operator(cli: &Cli) -> Result<QuatMatrix, CliError> {
    match (&cli.input, &cli.fixture) {
        (Some(_), Some(_)) => Err(CliError::input("give either --input or --fixture, not both")),
        (None, None) => Err(CliError::input("missing operator: use --input FILE or --fixture SPEC")),
        (None, Some(spec)) => Ok(Fixture::parse(spec, cli.seed)?.build()),
        (Some(path), None) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            let m: QuatMatrix =
                serde_json::from_str(&text).map_err(|e| CliError::input(format!("malformed operator: {e}")))?;
            if m.n() == 0 {
                return Err(CliError::input("operator must be at least 1x1"));
            }
            Ok(m)
        }
    }
}

fn load_function(cli: &Cli) -> Result<SliceFunction, CliError> {
    let spec = cli.function.as_deref().ok_or_else(|| CliError::input("missing --function"))?;
    let text = if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else {
        fs::read_to_string(spec).map_err(|e| CliError::input(format!("{spec}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("malformed function: {e}")))
}

fn calc_options(cli: &Cli) -> Result<CalcOptions, CliError> {
    if !(cli.tol > 0.0) {
        return Err(CliError::input("--tol must be positive"));
    }
    if cli.radius.is_some_and(|r| !(r > 0.0)) {
        return Err(CliError::input("--radius must be positive"));
    }
    let slice = ImaginaryUnit::new(parse_quaternion(&cli.slice)?)?;
    Ok(CalcOptions {
        slice,
        quadrature: QuadratureOptions { tol: cli.tol, ..Default::default() },
        radius: cli.radius,
        ..Default::default()
    })
}

fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    serde_json::to_string(v).map_err(|e| CliError { code: 3, message: e.to_string() })
}

#[derive(Serialize)]
struct ResolveReport {
    #[serde(flatten)]
    resolvent: ResolventValue,
    resolvent_equation_residual: f64,
    left_inverse_residual: f64,
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let ok = |json| Ok(Outcome { json, code: 0 });
    match &cli.command {
        Command::Spectrum => ok(to_json(&s_spectrum(&load_operator(cli)?)?)?),
        Command::Resolve => {
            let t = load_operator(cli)?;
            let s = parse_quaternion(cli.point.as_deref().ok_or_else(|| CliError::input("missing --point"))?)?;
            let resolvent = s_resolvent(&t, s)?;
            let left = s_left_inverse(&t, s)?;
            let id = QuatMatrix::identity(t.n());
            ok(to_json(&ResolveReport {
                resolvent_equation_residual: resolvent_equation_residual(&t, s)?,
                left_inverse_residual: (&(&left * &resolvent.operator) - &id).op_norm(),
                resolvent,
            })?)
        }
        Command::Calc => {
            let t = load_operator(cli)?;
            let f = load_function(cli)?;
            ok(to_json(&f_of_t_auto(&t, &f, &calc_options(cli)?)?)?)
        }
        Command::CalcUnbounded => {
            let t = load_operator(cli)?;
            let f = load_function(cli)?;
            let opts = calc_options(cli)?;
            if let Some(k) = cli.k {
                if !in_resolvent_set(&t, Quaternion::real(k)).in_resolvent_set {
                    return Err(CliError { code: 5, message: format!("k = {k} lies in the S-spectrum") });
                }
            }
            ok(to_json(&f_of_t_unbounded_with(&t, &f, cli.k, &opts)?)?)
        }
        Command::FnSeries => {
            let t = load_operator(cli)?;
            let f = load_function(cli)?;
            if cli.nodes == 0 || !(cli.axis_r > 0.0) {
                return Err(CliError::input("--nodes and --axis-R must be positive"));
            }
            let opts = InverseSeriesOptions {
                n_max: cli.n_max,
                axis_r: cli.axis_r,
                nodes: cli.nodes,
                slice: calc_options(cli)?.slice,
            };
            ok(to_json(&f_of_t_inverse_series(&t, &f, &opts)?)?)
        }
        Command::Verify { corrupt_resolvent_sign } => {
            let report = run_verify(&VerifyOptions { seed: cli.seed, corrupt_resolvent_sign: *corrupt_resolvent_sign })?;
            Ok(Outcome { json: to_json(&report)?, code: if report.pass { 0 } else { 1 } })
        }
        Command::Fixture { spec } => ok(to_json(&Fixture::parse(spec, cli.seed)?.build())?),
    }
}

/// Runs the parsed command, writes the output and returns the exit code.
pub fn main_with(cli: Cli) -> i32 {
    match run(&cli) {
        Ok(out) => {
            let text = out.json + "\n";
            match &cli.output {
                Some(path) => {
                    if let Err(e) = fs::write(path, text) {
                        eprintln!("error: {}: {e}", path.display());
                        return 2;
                    }
                }
                None => print!("{text}"),
            }
            if out.code == 1 {
                eprintln!("error: verification residuals out of contract");
            }
            out.code
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
