//! Running registered solvers on registered problems and serializing traces.

mod io;
mod spec;
pub mod verify;

pub use io::{
    format_float, parse_csv_trace, relative_gap, write_compare_csv, write_csv_trace, write_json_trace, CSV_HEADER,
};
pub use spec::{OutputFormat, PartialSpec, ProblemSpec, RunSpec, SolverKind, SolverSpecifier, StartPoint};

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::objectives::{
    logistic_loss, long_step, parse_libsvm, random_quadratic, worst_function, CompositeObjective, L1Norm, Objective,
    ProxTerm,
};
use crate::solvers::{self, SolverConfig, SolverFailure, SolverOutput, SolverTrace, StopReason};

pub const EXIT_CONVERGED: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_MAX_ITERATIONS: i32 = 2;
pub const EXIT_SOLVER_ERROR: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_NO_INPUT: i32 = 66;
pub const EXIT_CANT_CREATE: i32 = 73;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),

    #[error("{}: {message}", path.display())]
    Input { path: PathBuf, message: String },

    #[error("{}: {source}", path.display())]
    Output { path: PathBuf, source: std::io::Error },

    #[error("solver failed: {0}")]
    Solver(Box<SolverFailure>),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => EXIT_USAGE,
            HarnessError::Input { .. } => EXIT_NO_INPUT,
            HarnessError::Output { .. } => EXIT_CANT_CREATE,
            HarnessError::Solver(_) => EXIT_SOLVER_ERROR,
        }
    }

    pub(crate) fn input(path: &Path, message: impl ToString) -> Self {
        HarnessError::Input {
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }

    pub(crate) fn output(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Output {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;

/// A built problem: the smooth part and an optional prox term.
#[derive(Clone)]
pub struct Problem {
    pub smooth: Arc<dyn Objective>,
    pub prox: Option<Arc<dyn ProxTerm>>,
}

impl Problem {
    pub fn composite(&self) -> CompositeObjective {
        match &self.prox {
            Some(h) => CompositeObjective::new(self.smooth.clone(), h.clone()),
            None => CompositeObjective::smooth_only(self.smooth.clone()),
        }
    }
}

/// Reads a LIBSVM file.
pub fn load_dataset(path: &Path) -> HarnessResult<crate::objectives::Dataset> {
    let file = fs::File::open(path).map_err(|e| HarnessError::input(path, e))?;
    parse_libsvm(std::io::BufReader::new(file)).map_err(|e| HarnessError::input(path, e))
}

/// Instantiates `spec`; `seed` is used by randomized instances without their own seed.
pub fn build_problem(spec: &ProblemSpec, seed: u64, l1: Option<f64>) -> HarnessResult<Problem> {
    let usage = |e: crate::Error| HarnessError::Usage(format!("problem {spec}: {e}"));
    let smooth: Arc<dyn Objective> = match spec {
        ProblemSpec::Worst { b, n } => Arc::new(worst_function(*b, *n).map_err(usage)?),
        ProblemSpec::Quadratic {
            n,
            alpha,
            beta,
            seed: own,
        } => Arc::new(random_quadratic(*n, *alpha, *beta, own.unwrap_or(seed)).map_err(usage)?),
        ProblemSpec::Logistic { path, alpha } => {
            let data = load_dataset(path)?;
            Arc::new(logistic_loss(data, *alpha).map_err(usage)?)
        }
    };
    let prox: Option<Arc<dyn ProxTerm>> = match l1 {
        None => None,
        Some(w) if w >= 0.0 && w.is_finite() => Some(Arc::new(L1Norm { weight: w })),
        Some(w) => return Err(HarnessError::Usage(format!("l1 weight must be nonnegative, got {w}"))),
    };
    Ok(Problem { smooth, prox })
}

/// Starting point of dimension `n`. The random start uses its own stream of
/// the run seed so it does not correlate with a randomized instance.
pub fn start_point(x0: StartPoint, n: usize, seed: u64) -> Vec<f64> {
    match x0 {
        StartPoint::Zero => vec![0.0; n],
        StartPoint::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(1);
            (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
        }
    }
}

/// Runs `solver` on a built problem.
pub fn execute(
    solver: SolverKind,
    problem: &Problem,
    x0: &[f64],
    cfg: &SolverConfig,
) -> HarnessResult<std::result::Result<SolverOutput, SolverFailure>> {
    let obj = &*problem.smooth;
    if problem.prox.is_some() && solver != SolverKind::ProxGeoSub {
        return Err(HarnessError::Usage(format!(
            "an l1 term is only supported by {}, not {solver}",
            SolverKind::ProxGeoSub
        )));
    }
    Ok(match solver {
        SolverKind::Oqa => solvers::oqa_run(obj, x0, cfg),
        SolverKind::OqaMem => solvers::oqa_memory_run(obj, x0, cfg),
        SolverKind::Geo => solvers::geometric_descent_run(obj, x0, cfg),
        SolverKind::GeoSub => solvers::suboptimal_geometric_descent_run(obj, x0, cfg),
        SolverKind::Nesterov => {
            if x0.len() != obj.dimension() {
                return Err(HarnessError::Usage(format!(
                    "starting point has dimension {}, problem has {}",
                    x0.len(),
                    obj.dimension()
                )));
            }
            solvers::nesterov_run(obj, x0, &long_step(obj, x0), obj.alpha(), cfg)
        }
        SolverKind::NesterovLs => solvers::nesterov_exact_ls_run(obj, x0, cfg),
        SolverKind::Gd => solvers::gradient_descent_run(obj, x0, cfg),
        SolverKind::ProxGeoSub => solvers::prox_suboptimal_geo_run(&problem.composite(), x0, cfg),
    })
}

/// Builds the problem and start point of `spec` and runs it.
pub fn run_spec(spec: &RunSpec) -> HarnessResult<std::result::Result<SolverOutput, SolverFailure>> {
    spec.config
        .validate()
        .map_err(|e| HarnessError::Usage(format!("config: {e}")))?;
    let problem = build_problem(&spec.problem, spec.seed, spec.l1)?;
    let x0 = start_point(spec.x0, problem.smooth.dimension(), spec.seed);
    execute(spec.solver, &problem, &x0, &spec.config)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub problem: String,
    pub solver: String,
    pub config: SolverConfig,
    pub seed: u64,
    pub x0: StartPoint,
    pub iterations: usize,
    pub final_gap: Option<f64>,
    pub stop_reason: String,
    pub trace_path: Option<String>,
}

impl RunSummary {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("summary serializes")
    }
}

/// Exit code for a finished run.
pub fn exit_code_for(stop: Option<StopReason>) -> i32 {
    match stop {
        Some(StopReason::MaxIterations) => EXIT_MAX_ITERATIONS,
        Some(_) => EXIT_CONVERGED,
        None => EXIT_SOLVER_ERROR,
    }
}

fn render_trace(trace: &SolverTrace, format: OutputFormat) -> Vec<u8> {
    let mut buf = Vec::new();
    match format {
        OutputFormat::Csv => write_csv_trace(trace, &mut buf),
        OutputFormat::Json => write_json_trace(trace, &mut buf),
    }
    .expect("writing to memory");
    buf
}

/// Runs one spec and writes its trace. With an output path the summary goes
/// to `out`; otherwise the trace goes to `out` and the summary to `diag`.
pub fn cmd_run(spec: &RunSpec, out: &mut dyn Write, diag: &mut dyn Write) -> HarnessResult<i32> {
    let result = run_spec(spec)?;
    let (trace, error) = match result {
        Ok(o) => (o.trace, None),
        Err(f) => (f.partial, Some(f.error)),
    };
    let bytes = render_trace(&trace, spec.format);
    if let Some(path) = &spec.out {
        fs::write(path, &bytes).map_err(|e| HarnessError::output(path, e))?;
    } else {
        out.write_all(&bytes)
            .map_err(|e| HarnessError::output(Path::new("<stdout>"), e))?;
    }
    let summary = RunSummary {
        problem: spec.problem.to_string(),
        solver: spec.solver.to_string(),
        config: spec.config.clone(),
        seed: spec.seed,
        x0: spec.x0,
        iterations: trace.iterations(),
        final_gap: trace.final_gap(),
        stop_reason: match (&error, trace.stop_reason) {
            (Some(_), _) | (None, None) => "solver-error".to_string(),
            (None, Some(r)) => r.to_string(),
        },
        trace_path: spec.out.as_ref().map(|p| p.display().to_string()),
    };
    let sink: &mut dyn Write = if spec.out.is_some() { out } else { diag };
    let _ = writeln!(sink, "{}", summary.to_json_line());
    if let Some(e) = error {
        let _ = writeln!(diag, "error: {e}");
        return Ok(EXIT_SOLVER_ERROR);
    }
    Ok(exit_code_for(trace.stop_reason))
}

/// A compared run: its column label and final state.
pub struct ComparedRun {
    pub label: String,
    pub trace: SolverTrace,
    pub error: Option<crate::Error>,
}

/// Runs all specs concurrently on their common problem and writes the wide
/// comparison table.
pub fn cmd_compare(specs: &[(String, RunSpec)], out: &mut dyn Write, diag: &mut dyn Write) -> HarnessResult<i32> {
    let Some((_, first)) = specs.first() else {
        return Err(HarnessError::Usage("compare needs at least one solver".into()));
    };
    for (label, s) in specs {
        if s.problem != first.problem || s.x0 != first.x0 || s.seed != first.seed || s.l1 != first.l1 {
            return Err(HarnessError::Usage(format!(
                "{label}: all compared runs must share problem, start point, seed and l1 weight"
            )));
        }
        s.config
            .validate()
            .map_err(|e| HarnessError::Usage(format!("{label}: config: {e}")))?;
    }
    let problem = build_problem(&first.problem, first.seed, first.l1)?;
    let x0 = start_point(first.x0, problem.smooth.dimension(), first.seed);

    let results: Vec<HarnessResult<ComparedRun>> = std::thread::scope(|scope| {
        let handles: Vec<_> = specs
            .iter()
            .map(|(label, s)| {
                let (problem, x0) = (&problem, &x0);
                scope.spawn(move || {
                    let (trace, error) = match execute(s.solver, problem, x0, &s.config)? {
                        Ok(o) => (o.trace, None),
                        Err(f) => (f.partial, Some(f.error)),
                    };
                    Ok(ComparedRun {
                        label: label.clone(),
                        trace,
                        error,
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect()
    });
    let runs = results.into_iter().collect::<HarnessResult<Vec<_>>>()?;

    let mut table = Vec::new();
    write_compare_csv(&runs, &mut table).expect("writing to memory");
    match &first.out {
        Some(path) => fs::write(path, &table).map_err(|e| HarnessError::output(path, e))?,
        None => out
            .write_all(&table)
            .map_err(|e| HarnessError::output(Path::new("<stdout>"), e))?,
    }
    let mut code = EXIT_CONVERGED;
    for r in &runs {
        let _ = match &r.error {
            Some(e) => writeln!(diag, "{}: error: {e}", r.label),
            None => writeln!(
                diag,
                "{}: {} iterations, final gap {}, {}",
                r.label,
                r.trace.iterations(),
                r.trace.final_gap().map_or("-".into(), format_float),
                r.trace.stop_reason.map_or("solver-error".into(), |s| s.to_string())
            ),
        };
        let c = if r.error.is_some() {
            EXIT_SOLVER_ERROR
        } else {
            exit_code_for(r.trace.stop_reason)
        };
        code = code.max(c);
    }
    Ok(code)
}
