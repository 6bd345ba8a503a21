//! Command-line frontend: build -> verify -> simulate -> feasibility ->
//! subspace, with JSON artifacts and stable exit codes.
//!
//! Exit codes: 0 success, 2 verification failure, 3 infeasible request,
//! 4 validation error or malformed input. `MINPURITY_TOL` overrides the
//! default verification tolerance of 1e-9.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use minpurity::circuit::{
    build_even_scheme, build_odd_scheme, qubit_fixture, qutrit_fixture, verify_scheme,
    MeasurementScheme,
};
use minpurity::feasibility::{feasibility_report, FeasibilityReport, OptimizeOptions, Parity};
use minpurity::sim::{sample_shots, EstimateReport};
use minpurity::state::{random_density, random_pure, DensityOperator};
use minpurity::subspace::{subspace_report, SubspaceReport};

const DEFAULT_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(
    name = "minpurity",
    about = "Minimal purity/overlap measurement schemes: construction, verification, simulation and feasibility analysis",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a measurement scheme and write it as JSON
    Build {
        /// Hilbert-space dimension of one subsystem
        #[arg(long)]
        dim: usize,
        /// auto | fixture | odd-minimal | even-two-body
        #[arg(long, default_value = "auto")]
        variant: String,
        /// Require the single-system minimal scheme (same as --variant odd-minimal)
        #[arg(long)]
        minimal: bool,
        /// Output path for the scheme JSON
        #[arg(long, default_value = "scheme.json")]
        out: PathBuf,
    },
    /// Check the conjugation identity of a scheme file
    Verify {
        #[arg(long, default_value = "scheme.json")]
        scheme: PathBuf,
    },
    /// Exact probability plus finite-shot estimate for a state
    Simulate {
        #[arg(long, default_value = "scheme.json")]
        scheme: PathBuf,
        /// random | mixed | pure | <state.json>
        #[arg(long, default_value = "random")]
        state: String,
        /// Second state for overlap mode (matrix JSON file)
        #[arg(long)]
        sigma: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report JSON path; without it the report prints to stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank solutions, parity certificate and (optionally) the residual optimizer
    Feasibility {
        #[arg(long)]
        dim: usize,
        /// Restrict the rank search to single-system measurements (l = D)
        #[arg(long)]
        minimal: bool,
        /// Run the numerical residual minimization
        #[arg(long)]
        optimize: bool,
        #[arg(long, default_value_t = 20)]
        restarts: u64,
        #[arg(long, default_value_t = 500)]
        iters: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fixed swap coefficient for the optimizer: 0.5 or -0.5
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        x: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Symmetric/antisymmetric subspace dimensions and identity residuals
    Subspace {
        #[arg(long)]
        dim: usize,
        /// Random antisymmetric draws for the trace identities
        #[arg(long, default_value_t = 100)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum CliError {
    /// exit 2: a scheme exists but fails its verification tolerance
    Verification(String),
    /// exit 3: the request contradicts the dimension dichotomy
    Infeasible(String),
    /// exit 4: bad arguments, malformed JSON, invalid states
    Validation(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Validation(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Verification(m) | CliError::Infeasible(m) | CliError::Validation(m) => m,
        }
    }
}

fn validation(err: impl std::fmt::Display) -> CliError {
    CliError::Validation(err.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                return ExitCode::SUCCESS;
            }
            eprintln!("{err}");
            return ExitCode::from(4);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Build {
            dim,
            variant,
            minimal,
            out,
        } => run_build(dim, &variant, minimal, &out),
        Command::Verify { scheme } => run_verify(&scheme),
        Command::Simulate {
            scheme,
            state,
            sigma,
            shots,
            seed,
            out,
        } => run_simulate(&scheme, &state, sigma.as_deref(), shots, seed, out.as_deref()),
        Command::Feasibility {
            dim,
            minimal,
            optimize,
            restarts,
            iters,
            seed,
            x,
            out,
        } => run_feasibility(dim, minimal, optimize, restarts, iters, seed, x, out.as_deref()),
        Command::Subspace {
            dim,
            draws,
            seed,
            out,
        } => run_subspace(dim, draws, seed, out.as_deref()),
    }
}

fn verification_tolerance() -> Result<f64, CliError> {
    match std::env::var("MINPURITY_TOL") {
        Ok(text) => text
            .parse::<f64>()
            .map_err(|_| CliError::Validation(format!("MINPURITY_TOL is not a number: {text}"))),
        Err(_) => Ok(DEFAULT_TOL),
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(validation)?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))
}

fn emit<T: serde::Serialize>(
    value: &T,
    out: Option<&Path>,
    summary: impl FnOnce(),
) -> Result<(), CliError> {
    match out {
        Some(path) => {
            write_json(path, value)?;
            summary();
            Ok(())
        }
        None => {
            let mut text = serde_json::to_string_pretty(value).map_err(validation)?;
            text.push('\n');
            print!("{text}");
            Ok(())
        }
    }
}

fn load_scheme(path: &Path) -> Result<MeasurementScheme, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("malformed scheme {}: {e}", path.display())))
}

fn run_build(dim: usize, variant: &str, minimal: bool, out: &Path) -> Result<(), CliError> {
    if dim < 2 {
        return Err(CliError::Validation(format!(
            "dimension must be >= 2, got {dim}"
        )));
    }
    let requested = if minimal { "odd-minimal" } else { variant };
    let scheme = match requested {
        "auto" => {
            if dim % 2 == 1 {
                build_odd_scheme(dim)
            } else {
                build_even_scheme(dim)
            }
        }
        "odd-minimal" => {
            if dim % 2 == 0 {
                return Err(CliError::Infeasible(format!(
                    "no single-system minimal scheme exists in even dimension {dim}; \
                     use the even-two-body variant instead"
                )));
            }
            build_odd_scheme(dim)
        }
        "even-two-body" => {
            if dim % 2 == 1 {
                return Err(CliError::Infeasible(format!(
                    "the two-body construction is defined for even dimensions, got {dim}"
                )));
            }
            build_even_scheme(dim)
        }
        "fixture" => match dim {
            3 => Ok(qutrit_fixture()),
            2 => Ok(qubit_fixture()),
            _ => {
                return Err(CliError::Infeasible(format!(
                    "explicit fixtures exist for dimensions 2 and 3 only, got {dim}"
                )))
            }
        },
        other => {
            return Err(CliError::Validation(format!(
                "unknown variant '{other}' (expected auto, fixture, odd-minimal or even-two-body)"
            )))
        }
    }
    .map_err(validation)?;

    write_json(out, &scheme)?;
    print_scheme_summary(&scheme);
    println!("wrote {}", out.display());
    Ok(())
}

fn print_scheme_summary(scheme: &MeasurementScheme) {
    let residual = verify_scheme(scheme);
    println!("scheme: dim = {}, variant = {}", scheme.dim, scheme.variant);
    println!(
        "projector ranks: ({}, {}), readout: value = {} * Pr + {}",
        scheme.proj_first.rank(),
        scheme.proj_second.rank(),
        scheme.recover_a,
        scheme.recover_b
    );
    println!("residual = {residual:e}");
}

fn run_verify(path: &Path) -> Result<(), CliError> {
    let scheme = load_scheme(path)?;
    let tol = verification_tolerance()?;
    print_scheme_summary(&scheme);
    match scheme.validate(tol) {
        Ok(residual) => {
            println!("verification: PASS (residual {residual:e} < tolerance {tol:e})");
            Ok(())
        }
        Err(err) => Err(CliError::Verification(format!(
            "scheme fails verification at tolerance {tol:e}: {err}"
        ))),
    }
}

fn load_state(selector: &str, dim: usize, seed: u64) -> Result<DensityOperator, CliError> {
    match selector {
        "random" => Ok(random_density(dim, seed)),
        "mixed" => Ok(DensityOperator::maximally_mixed(dim)),
        "pure" => Ok(random_pure(dim, seed)),
        path => load_state_file(Path::new(path)),
    }
}

fn load_state_file(path: &Path) -> Result<DensityOperator, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("invalid state {}: {e}", path.display())))
}

fn run_simulate(
    scheme_path: &Path,
    state: &str,
    sigma: Option<&Path>,
    shots: u64,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if shots == 0 {
        return Err(CliError::Validation("shots must be >= 1".into()));
    }
    let scheme = load_scheme(scheme_path)?;
    let rho = load_state(state, scheme.dim, seed)?;
    let sigma_state = sigma.map(load_state_file).transpose()?;
    let report =
        sample_shots(&scheme, &rho, sigma_state.as_ref(), shots, seed).map_err(validation)?;
    let overlap_mode = sigma_state.is_some();
    emit(&report, out, || {
        print_estimate_summary(&scheme, &report, overlap_mode)
    })
}

fn print_estimate_summary(scheme: &MeasurementScheme, report: &EstimateReport, overlap: bool) {
    let quantity = if overlap { "overlap" } else { "purity" };
    println!(
        "simulate: dim = {}, variant = {}, shots = {}, seed = {}",
        scheme.dim, scheme.variant, report.shots, report.seed
    );
    println!("exact probability    = {}", report.exact_probability);
    println!(
        "estimate probability = {} ({} yes)",
        report.estimate_probability, report.yes_count
    );
    println!("recovered {quantity:<9} = {}", report.recovered_value);
    println!("standard error       = {}", report.standard_error);
}

#[allow(clippy::too_many_arguments)]
fn run_feasibility(
    dim: usize,
    minimal: bool,
    optimize: bool,
    restarts: u64,
    iters: u64,
    seed: u64,
    x: f64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if dim < 2 {
        return Err(CliError::Validation(format!(
            "dimension must be >= 2, got {dim}"
        )));
    }
    let options = optimize.then_some(OptimizeOptions {
        x,
        restarts,
        iters,
        seed,
    });
    let report = feasibility_report(dim, minimal, options).map_err(validation)?;
    emit(&report, out, || print_feasibility_summary(&report))
}

fn print_feasibility_summary(report: &FeasibilityReport) {
    let scope = if report.minimal {
        "single-system measurements (l = D)"
    } else {
        "all local two-body measurements"
    };
    println!(
        "feasibility: dim = {}, {} rank solutions among {}",
        report.dim,
        report.rank_solutions.len(),
        scope
    );
    if report.minimal && report.rank_solutions.is_empty() {
        println!("no minimal-model solution");
    }
    for s in &report.rank_solutions {
        println!("(k,l,x,y) = ({}, {}, {}, {})", s.k, s.l, s.x, s.y);
    }
    let verdict = match report.parity_certificate.implied_parity {
        Parity::Odd => "odd",
        Parity::Inconsistent => "inconsistent",
    };
    println!("parity certificate: {verdict}");
    if let Some(opt) = &report.optimizer {
        println!(
            "optimizer: best residual = {:e} over {} restarts x {} iterations (x = {})",
            opt.best_residual, opt.restarts, opt.iterations_per_restart, opt.x_fixed
        );
    }
}

fn run_subspace(dim: usize, draws: usize, seed: u64, out: Option<&Path>) -> Result<(), CliError> {
    if dim < 2 {
        return Err(CliError::Validation(format!(
            "dimension must be >= 2, got {dim}"
        )));
    }
    let report = subspace_report(dim, draws, seed);
    emit(&report, out, || print_subspace_summary(&report))
}

fn print_subspace_summary(report: &SubspaceReport) {
    println!(
        "subspace: dim = {}, sym_dim = {}, asym_dim = {}",
        report.dim, report.sym_dim, report.asym_dim
    );
    println!(
        "orthogonality residual = {:e}",
        report.orthogonality_residual
    );
    println!(
        "antisymmetric identities over {} draws: odd-power trace {:e}, tr(A^k S) {:e}, anticommutator {:e}",
        report.lemma3_residuals.draws,
        report.lemma3_residuals.max_odd_power_trace,
        report.lemma3_residuals.max_power_swap_trace,
        report.lemma3_residuals.max_anticommutator_norm
    );
}
