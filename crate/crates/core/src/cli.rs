//! The `ellcauchy` command line. JSON in (file or stdin), JSON out on
//! stdout, diagnostics on stderr.
//!
//! Exit codes: 0 success, 1 parse or validation error, 2 singular or
//! non-evaluable input, 3 tolerance failure.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::Value;

use crate::document::{
    cx_vec, dense_rows, factor_rows, parse_json, parse_kernel, parse_problem, to_json, Cx,
    KernelDoc, ProblemDoc,
};
use crate::error::{Error, Result};
use crate::gauss_decomposition::{
    decompose_closed_form, decompose_ldu, decompose_peeling, determinant_closed_form, ldu_target,
    max_factor_difference, minor_frobenius, DecompositionResult, FactorOrder,
};
use crate::matrix_builder::{build_cauchy_like, build_frobenius_kernel, CauchyProblem};
use crate::oracle::{det_numeric, reconstruct_and_report, ResidualReport};
use crate::sampling::{random_quadruple, sample_point, seeded, DEFAULT_SEED, DEFAULT_SEPARATION};
use crate::special_functions::{three_term_residual, wp_sigma_residual, EvalOptions, SigmaKernel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_SINGULAR: i32 = 2;
pub const EXIT_TOLERANCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "ellcauchy",
    version,
    about = "Closed-form Gauss decomposition of elliptic Cauchy-like matrices"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the Cauchy-like matrix of a problem document
    Build {
        /// Problem document; standard input when omitted or "-"
        input: Option<PathBuf>,
        /// Emit the bare kernel matrix without prefactors
        #[arg(long)]
        bare: bool,
    },
    /// Gauss decomposition with reconstruction residuals
    Decompose {
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = MethodArg::Closed)]
        method: MethodArg,
        /// Run the closed form and the peeling recursion and compare them
        #[arg(long)]
        compare: bool,
    },
    /// Determinant or minor, closed form against the LU oracle
    Det {
        input: Option<PathBuf>,
        /// Comma-separated 1-based row indices
        #[arg(long, value_delimiter = ',', requires = "cols")]
        rows: Option<Vec<usize>>,
        /// Comma-separated 1-based column indices
        #[arg(long, value_delimiter = ',', requires = "rows")]
        cols: Option<Vec<usize>>,
    },
    /// Residuals of the sigma function identities at random arguments
    IdentityCheck {
        /// Kernel object or problem document
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
    /// Decompose by every method and check all residuals against a tolerance
    Verify {
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Closed,
    Peeling,
    Ldu,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) | Error::IndexSet(_) => EXIT_INPUT,
        _ => EXIT_SINGULAR,
    }
}

fn read_input(path: &Option<PathBuf>, stdin: &mut dyn Read) -> Result<Value> {
    let mut text = String::new();
    match path {
        Some(p) if p.as_os_str() != "-" => {
            text = std::fs::read_to_string(p)
                .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", p.display())))?;
        }
        _ => {
            stdin
                .read_to_string(&mut text)
                .map_err(|e| Error::InvalidArgument(format!("cannot read standard input: {e}")))?;
        }
    }
    parse_json(&text)
}

/// Outcome of a command: the JSON document and whether every tolerance held.
struct Output {
    json: String,
    passed: bool,
}

impl Output {
    fn ok<T: Serialize>(doc: &T) -> Result<Self> {
        Ok(Output {
            json: to_json(doc)?,
            passed: true,
        })
    }
}

/// Runs the command line with explicit streams and returns the exit code.
pub fn run<I, T>(
    args: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli.command, stdin, stderr) {
        Ok(out) => {
            if writeln!(stdout, "{}", out.json).is_err() {
                return EXIT_INPUT;
            }
            if out.passed {
                EXIT_OK
            } else {
                let _ = writeln!(stderr, "ellcauchy: tolerance check failed");
                EXIT_TOLERANCE
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "ellcauchy: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command, stdin: &mut dyn Read, stderr: &mut dyn Write) -> Result<Output> {
    match command {
        Command::Build { input, bare } => {
            cmd_build(&parse_problem(&read_input(&input, stdin)?)?, bare)
        }
        Command::Decompose {
            input,
            method,
            compare,
        } => {
            let problem = parse_problem(&read_input(&input, stdin)?)?;
            if compare {
                cmd_compare(&problem)
            } else {
                Output::ok(&decompose_document(&problem, method)?)
            }
        }
        Command::Det { input, rows, cols } => {
            let problem = parse_problem(&read_input(&input, stdin)?)?;
            cmd_det(&problem, rows, cols)
        }
        Command::IdentityCheck {
            input,
            trials,
            seed,
            tolerance,
        } => {
            let value = read_input(&input, stdin)?;
            let kernel = if value.get("variant").is_some() {
                parse_kernel(&value, "kernel")?
            } else {
                parse_problem(&value)?.kernel().clone()
            };
            cmd_identity_check(&kernel, trials, seed, tolerance)
        }
        Command::Verify { input, tolerance } => {
            let problem = parse_problem(&read_input(&input, stdin)?)?;
            cmd_verify(&problem, tolerance, stderr)
        }
    }
}

#[derive(Serialize)]
struct BuildDoc {
    problem: ProblemDoc,
    bare: bool,
    matrix: Vec<Vec<Cx>>,
}

fn cmd_build(problem: &CauchyProblem, bare: bool) -> Result<Output> {
    let matrix = if bare {
        build_frobenius_kernel(problem)?
    } else {
        build_cauchy_like(problem)?
    };
    Output::ok(&BuildDoc {
        problem: problem.into(),
        bare,
        matrix: dense_rows(&matrix),
    })
}

#[derive(Serialize)]
struct FactorsDoc {
    #[serde(rename = "U")]
    upper: Vec<Vec<Cx>>,
    #[serde(rename = "D")]
    diagonal: Vec<Vec<Cx>>,
    #[serde(rename = "L")]
    lower: Vec<Vec<Cx>>,
}

#[derive(Serialize)]
struct ResidualsDoc {
    #[serde(flatten)]
    report: ResidualReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    peeling_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ldu_target_deviation: Option<f64>,
}

#[derive(Serialize)]
struct DecomposeDoc {
    method: &'static str,
    order: &'static str,
    n: usize,
    factors: FactorsDoc,
    determinant: Cx,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_sequence: Option<Vec<Cx>>,
    residuals: ResidualsDoc,
    timing_ms: f64,
}

fn method_name(arg: MethodArg) -> &'static str {
    match arg {
        MethodArg::Closed => "closed",
        MethodArg::Peeling => "peeling",
        MethodArg::Ldu => "ldu",
    }
}

fn run_method(problem: &CauchyProblem, method: MethodArg) -> Result<(DecompositionResult, f64)> {
    let start = Instant::now();
    let result = match method {
        MethodArg::Closed => decompose_closed_form(problem)?,
        MethodArg::Peeling => decompose_peeling(problem)?,
        MethodArg::Ldu => decompose_ldu(problem)?,
    };
    Ok((result, start.elapsed().as_secs_f64() * 1e3))
}

fn decompose_document(problem: &CauchyProblem, method: MethodArg) -> Result<DecomposeDoc> {
    let (mut result, timing_ms) = run_method(problem, method)?;
    let target = match method {
        MethodArg::Ldu => ldu_target(problem)?,
        _ => build_cauchy_like(problem)?,
    };
    let report = reconstruct_and_report(&mut result, &target)?;
    Ok(DecomposeDoc {
        method: method_name(method),
        order: match result.order {
            FactorOrder::Udl => "UDL",
            FactorOrder::Ldu => "LDU",
        },
        n: result.n(),
        factors: FactorsDoc {
            upper: factor_rows(&result.upper),
            diagonal: factor_rows(&result.diagonal),
            lower: factor_rows(&result.lower),
        },
        determinant: Cx(result.determinant()),
        lambda_sequence: result.lambda_seq.as_ref().map(|c| cx_vec(c.descending())),
        residuals: ResidualsDoc {
            report,
            peeling_defect: result.peeling_defect,
            ldu_target_deviation: result.ldu_target_deviation,
        },
        timing_ms,
    })
}

#[derive(Serialize)]
struct CompareDoc {
    closed: DecomposeDoc,
    peeling: DecomposeDoc,
    max_relative_difference: f64,
}

fn cmd_compare(problem: &CauchyProblem) -> Result<Output> {
    let closed = decompose_closed_form(problem)?;
    let peeling = decompose_peeling(problem)?;
    let max_relative_difference = max_factor_difference(&closed, &peeling)?;
    Output::ok(&CompareDoc {
        closed: decompose_document(problem, MethodArg::Closed)?,
        peeling: decompose_document(problem, MethodArg::Peeling)?,
        max_relative_difference,
    })
}

#[derive(Serialize)]
struct DetDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    rows: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cols: Option<Vec<usize>>,
    determinant: Cx,
    oracle_determinant: Cx,
    relative_deviation: f64,
}

fn to_zero_based(indices: &[usize], name: &str) -> Result<Vec<usize>> {
    indices
        .iter()
        .map(|&i| {
            i.checked_sub(1)
                .ok_or_else(|| Error::IndexSet(format!("{name} indices are 1-based; got 0")))
        })
        .collect()
}

fn relative(value: Complex64, reference: Complex64) -> f64 {
    let scale = reference.norm();
    let diff = (value - reference).norm();
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

fn cmd_det(
    problem: &CauchyProblem,
    rows: Option<Vec<usize>>,
    cols: Option<Vec<usize>>,
) -> Result<Output> {
    let (closed, oracle) = match (&rows, &cols) {
        (Some(rows), Some(cols)) => {
            let (r0, c0) = (to_zero_based(rows, "row")?, to_zero_based(cols, "column")?);
            let closed = minor_frobenius(problem, &r0, &c0)?;
            let sub = build_cauchy_like(problem)?.submatrix(&r0, &c0)?;
            (closed, det_numeric(&sub)?)
        }
        _ => (
            determinant_closed_form(problem)?,
            det_numeric(&build_cauchy_like(problem)?)?,
        ),
    };
    Output::ok(&DetDoc {
        rows,
        cols,
        determinant: Cx(closed),
        oracle_determinant: Cx(oracle),
        relative_deviation: relative(closed, oracle),
    })
}

#[derive(Serialize)]
struct ResidualSummary {
    max_residual: f64,
    worst_trial: usize,
}

#[derive(Serialize)]
struct IdentityDoc {
    kernel: KernelDoc,
    trials: usize,
    seed: u64,
    tolerance: f64,
    three_term: ResidualSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    wp_sigma: Option<ResidualSummary>,
    pass: bool,
}

fn track(summary: &mut ResidualSummary, trial: usize, residual: f64) {
    if residual > summary.max_residual || residual.is_nan() {
        summary.max_residual = residual;
        summary.worst_trial = trial;
    }
}

/// Arguments `x, y` for the ℘–σ relation with `x`, `y`, `x ± y` away from
/// the lattice.
fn random_pair(
    rng: &mut crate::sampling::SeededRng,
    kernel: &SigmaKernel,
) -> (Complex64, Complex64) {
    loop {
        let (x, y) = (sample_point(rng, kernel), sample_point(rng, kernel));
        if [x, y, x + y, x - y]
            .iter()
            .all(|&w| kernel.nearest_zero_distance(w) >= DEFAULT_SEPARATION)
        {
            return (x, y);
        }
    }
}

fn cmd_identity_check(
    kernel: &SigmaKernel,
    trials: usize,
    seed: u64,
    tolerance: f64,
) -> Result<Output> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials: must be at least 1".into()));
    }
    if !(tolerance > 0.0) {
        return Err(Error::InvalidArgument("tolerance: must be positive".into()));
    }
    let opts = EvalOptions::default();
    let mut rng = seeded(seed);
    let mut three_term = ResidualSummary {
        max_residual: 0.0,
        worst_trial: 0,
    };
    for trial in 0..trials {
        let [z, a, b, c] = random_quadruple(&mut rng, kernel, DEFAULT_SEPARATION);
        track(
            &mut three_term,
            trial,
            three_term_residual(kernel, z, a, b, c, &opts)?,
        );
    }
    let wp_sigma = match kernel {
        SigmaKernel::Elliptic(_) => {
            let mut summary = ResidualSummary {
                max_residual: 0.0,
                worst_trial: 0,
            };
            for trial in 0..trials {
                let (x, y) = random_pair(&mut rng, kernel);
                track(&mut summary, trial, wp_sigma_residual(kernel, x, y, &opts)?);
            }
            Some(summary)
        }
        _ => None,
    };
    let pass = three_term.max_residual <= tolerance
        && wp_sigma
            .as_ref()
            .is_none_or(|s| s.max_residual <= tolerance);
    Ok(Output {
        json: to_json(&IdentityDoc {
            kernel: kernel.into(),
            trials,
            seed,
            tolerance,
            three_term,
            wp_sigma,
            pass,
        })?,
        passed: pass,
    })
}

#[derive(Serialize)]
struct Check {
    value: f64,
    pass: bool,
}

#[derive(Serialize)]
struct VerifyDoc {
    n: usize,
    kernel: &'static str,
    tolerance: f64,
    reconstruction: Check,
    #[serde(skip_serializing_if = "Option::is_none")]
    determinant: Option<Check>,
    dual_path: Check,
    ldu_reconstruction: Check,
    #[serde(skip_serializing_if = "Option::is_none")]
    condition_estimate: Option<f64>,
    pass: bool,
}

fn cmd_verify(problem: &CauchyProblem, tolerance: f64, stderr: &mut dyn Write) -> Result<Output> {
    if !(tolerance > 0.0) {
        return Err(Error::InvalidArgument("tolerance: must be positive".into()));
    }
    let check = |value: f64| Check {
        value,
        pass: value <= tolerance,
    };
    let matrix = build_cauchy_like(problem)?;
    let mut closed = decompose_closed_form(problem)?;
    let report = reconstruct_and_report(&mut closed, &matrix)?;
    let peeling = decompose_peeling(problem)?;
    let mut ldu = decompose_ldu(problem)?;
    let ldu_report = reconstruct_and_report(&mut ldu, &ldu_target(problem)?)?;
    if report.determinant_relative.is_none() {
        let _ = writeln!(stderr, "ellcauchy: oracle determinant unavailable; skipped");
    }
    let doc = VerifyDoc {
        n: problem.n(),
        kernel: problem.kernel().name(),
        tolerance,
        reconstruction: check(report.frobenius_relative),
        determinant: report.determinant_relative.map(check),
        dual_path: check(max_factor_difference(&closed, &peeling)?),
        ldu_reconstruction: check(ldu_report.frobenius_relative),
        condition_estimate: report.condition_estimate,
        pass: false,
    };
    let pass = doc.reconstruction.pass
        && doc.determinant.as_ref().is_none_or(|c| c.pass)
        && doc.dual_path.pass
        && doc.ldu_reconstruction.pass;
    let doc = VerifyDoc { pass, ..doc };
    Ok(Output {
        json: to_json(&doc)?,
        passed: pass,
    })
}

/// Entry point for the binary.
pub fn main_with_std() -> i32 {
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(
        std::env::args_os(),
        &mut stdin.lock(),
        &mut stdout.lock(),
        &mut stderr.lock(),
    )
}
