//! `symflux analyze`: modified equations and Lie point symmetries of the
//! difference schemes declared in a problem file.

pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use thiserror::Error;

use symflux_core::detsolve::{
    pde_dependencies, scheme_dependencies, solve_symmetries, DetsolveError, DEFAULT_ANSATZ_DEGREE,
};
use symflux_core::modeq::{differential_approximation, DifferentialApproximation, ModeqError};
use symflux_core::parser::{parse_problem, ParseError, Problem};
use symflux_core::prolong::ProlongError;

use report::{AnalysisReport, Document, Timing};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_VERIFICATION: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "symflux", version, about = "Lie point symmetries of finite difference schemes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Analyze every scheme of a problem file.
    Analyze(AnalyzeArgs),
}

#[derive(clap::Args, Debug, Clone)]
pub struct AnalyzeArgs {
    /// Problem file.
    pub file: PathBuf,
    /// Analyze the continuous equation only, ignoring the schemes.
    #[arg(long)]
    pub pde_only: bool,
    #[arg(long, value_enum, default_value_t = Emit::All)]
    pub emit: Emit,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Starting Taylor order of the grid-sample expansion.
    #[arg(long, value_name = "N")]
    pub taylor_order: Option<u32>,
    /// Degree of the polynomial ansatz for the infinitesimals.
    #[arg(long, value_name = "THETA")]
    pub ansatz_degree: Option<u32>,
    /// Analyze schemes concurrently on N threads.
    #[arg(long, value_name = "N", default_value_t = 1)]
    pub jobs: usize,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Add per-analysis timings (makes the output run-dependent).
    #[arg(long)]
    pub timing: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Emit {
    ModifiedEquation,
    Determining,
    Generators,
    All,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("{path}:{source}")]
    Parse { path: String, source: ParseError },
    #[error("scheme `{scheme}`: {source}")]
    Modeq { scheme: String, source: ModeqError },
    #[error("scheme `{scheme}`: {source}")]
    Detsolve { scheme: String, source: DetsolveError },
    #[error("--ansatz-degree must be at least 1")]
    AnsatzDegree,
    #[error("--jobs must be at least 1")]
    Jobs,
    #[error("{0}")]
    Threads(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Detsolve { source, .. } => match source {
                DetsolveError::ClosureFailure { .. }
                | DetsolveError::Nonlinear(_)
                | DetsolveError::UnknownCoefficient(_)
                | DetsolveError::Prolong(ProlongError::NonTermination(_) | ProlongError::MissingSigma(_)) => {
                    EXIT_VERIFICATION
                }
                _ => EXIT_INPUT,
            },
            CliError::Modeq { source: ModeqError::NonTermination, .. } => EXIT_VERIFICATION,
            _ => EXIT_INPUT,
        }
    }
}

struct Settings {
    taylor_order: Option<u32>,
    grading_degree: Option<u32>,
    ansatz_degree: u32,
    emit: Emit,
    timing: bool,
}

fn analyze_one(
    name: &str,
    da: Result<DifferentialApproximation, ModeqError>,
    deps: &symflux_core::detsolve::DependencySets,
    s: &Settings,
    started: Instant,
) -> Result<AnalysisReport, CliError> {
    let da = da.map_err(|source| CliError::Modeq { scheme: name.to_string(), source })?;
    let modeq_secs = started.elapsed().as_secs_f64();
    log::info!("{name}: modified equation with grading {}", da.grading);
    let mut r = AnalysisReport {
        scheme: name.to_string(),
        modified_equation: None,
        determining: None,
        generators: None,
        timing: None,
    };
    if matches!(s.emit, Emit::ModifiedEquation | Emit::All) {
        r.modified_equation = Some(report::modified_equation(&da));
    }
    let sym_start = Instant::now();
    if matches!(s.emit, Emit::Determining | Emit::Generators | Emit::All) {
        let sol = solve_symmetries(&da, deps, s.ansatz_degree)
            .map_err(|source| CliError::Detsolve { scheme: name.to_string(), source })?;
        log::info!("{name}: {} generators", sol.generators.len());
        if matches!(s.emit, Emit::Determining | Emit::All) {
            r.determining = Some(report::determining(&sol));
        }
        if matches!(s.emit, Emit::Generators | Emit::All) {
            r.generators = Some(
                sol.generators.iter().enumerate().map(|(i, g)| report::generator(format!("G{}", i + 1), g)).collect(),
            );
        }
    }
    if s.timing {
        r.timing = Some(Timing {
            approximation_order: da.max_x_order(),
            modified_equation_seconds: modeq_secs,
            symmetry_seconds: sym_start.elapsed().as_secs_f64(),
            total_seconds: started.elapsed().as_secs_f64(),
        });
    }
    Ok(r)
}

/// Runs the pipeline on a parsed problem.
pub fn analyze_problem(problem: &Problem, file: &str, args: &AnalyzeArgs) -> Result<Document, CliError> {
    let ansatz_degree = args.ansatz_degree.or(problem.options.ansatz_degree).unwrap_or(DEFAULT_ANSATZ_DEGREE);
    if ansatz_degree == 0 {
        return Err(CliError::AnsatzDegree);
    }
    if args.jobs == 0 {
        return Err(CliError::Jobs);
    }
    let settings = Settings {
        taylor_order: args.taylor_order.or(problem.options.taylor_order),
        grading_degree: problem.options.grading_degree,
        ansatz_degree,
        emit: args.emit,
        timing: args.timing,
    };
    let analyses = if args.pde_only {
        let deps = pde_dependencies(&problem.hints);
        let started = Instant::now();
        vec![analyze_one("pde", Ok(DifferentialApproximation::continuous(&problem.pde_rhs)), &deps, &settings, started)?]
    } else {
        let deps = scheme_dependencies(&problem.hints);
        let run = |scheme: &symflux_core::parser::Scheme| {
            let started = Instant::now();
            log::info!("{}: expanding", scheme.name);
            let da = differential_approximation(
                &scheme.expr,
                &problem.pde_rhs,
                settings.taylor_order,
                settings.grading_degree,
            );
            analyze_one(&scheme.name, da, &deps, &settings, started)
        };
        let results: Vec<Result<AnalysisReport, CliError>> = if args.jobs > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(args.jobs)
                .build()
                .map_err(|e| CliError::Threads(e.to_string()))?;
            pool.install(|| problem.schemes.par_iter().map(run).collect())
        } else {
            problem.schemes.iter().map(run).collect()
        };
        results.into_iter().collect::<Result<_, _>>()?
    };
    Ok(Document { file: file.to_string(), pde: problem.pde_rhs.to_string(), analyses })
}

fn execute(args: &AnalyzeArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let path = args.file.display().to_string();
    let text =
        std::fs::read_to_string(&args.file).map_err(|source| CliError::Read { path: path.clone(), source })?;
    let problem = parse_problem(&text).map_err(|source| CliError::Parse { path: path.clone(), source })?;
    let doc = analyze_problem(&problem, &path, args)?;
    let rendered = match args.format {
        Format::Text => doc.to_text(),
        Format::Json => doc.to_json(),
    };
    match &args.out {
        Some(out) => std::fs::write(out, rendered)
            .map_err(|source| CliError::Write { path: out.display().to_string(), source }),
        None => stdout
            .write_all(rendered.as_bytes())
            .map_err(|source| CliError::Write { path: "stdout".to_string(), source }),
    }
}

fn init_logging() {
    let env = env_logger::Env::new().filter("SYMFLUX_LOG");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

/// Parses `argv` (program name first), runs it and returns the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let Command::Analyze(args) = cli.command;
    match execute(&args, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
