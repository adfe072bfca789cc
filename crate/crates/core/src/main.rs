use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use quadavg::harness::verify::{cmd_verify, default_data_dir, VerifyOptions};
use quadavg::harness::{
    cmd_compare, cmd_run, HarnessError, HarnessResult, OutputFormat, PartialSpec, ProblemSpec, RunSpec,
    SolverSpecifier, StartPoint, EXIT_USAGE,
};
use quadavg::objectives::{synthetic_dataset, to_libsvm_string};

#[derive(Parser)]
#[command(name = "quadavg", version, about = "First-order solvers with certified lower bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver and write its trace.
    Run(RunArgs),
    /// Run several solvers on one problem and write a wide gap table.
    Compare(CompareArgs),
    /// Run the acceptance checks and print one line per criterion.
    Verify(VerifyArgs),
    /// Write a synthetic LIBSVM dataset.
    Synth(SynthArgs),
}

#[derive(Args)]
struct Shared {
    /// Problem, e.g. worst:b=100,n=50 or logistic:path=FILE,alpha=1e-4.
    #[arg(long)]
    problem: Option<String>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    #[arg(long = "gap-tol")]
    gap_tol: Option<f64>,
    #[arg(long)]
    memory: Option<usize>,
    #[arg(long = "ls-tol")]
    ls_tol: Option<f64>,
    /// Drives the start point and randomized instances.
    #[arg(long)]
    seed: Option<u64>,
    /// zero or random.
    #[arg(long)]
    x0: Option<String>,
    /// Weight of an l1 term (prox-geo-sub only).
    #[arg(long)]
    l1: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Record wall-clock time in the trace.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run spec; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    solver: Option<String>,
    #[command(flatten)]
    shared: Shared,
}

#[derive(Args)]
struct CompareArgs {
    /// JSON run specs. Without --solver each file is one run.
    #[arg(long)]
    config: Vec<PathBuf>,
    /// Solver with optional overrides, e.g. oqa-mem:memory=5. Repeatable.
    #[arg(long)]
    solver: Vec<String>,
    #[command(flatten)]
    shared: Shared,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory holding the bundled datasets.
    #[arg(long = "data-dir")]
    data_dir: Option<PathBuf>,
    /// Directory to write the traces into.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    features: usize,
    #[arg(long, default_value_t = 0.3)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Shared {
    fn layer(&self) -> HarnessResult<PartialSpec> {
        Ok(PartialSpec {
            problem: self.problem.as_deref().map(str::parse::<ProblemSpec>).transpose()?,
            x0: self.x0.as_deref().map(str::parse::<StartPoint>).transpose()?,
            format: self.format.as_deref().map(str::parse::<OutputFormat>).transpose()?,
            seed: self.seed,
            l1: self.l1,
            out: self.out.clone(),
            ..PartialSpec::default()
        })
    }

    fn apply_config(&self, spec: &mut RunSpec) {
        let cfg = &mut spec.config;
        if let Some(v) = self.max_iter {
            cfg.max_iterations = v;
        }
        if let Some(v) = self.gap_tol {
            cfg.gap_tolerance = v;
        }
        if let Some(v) = self.memory {
            cfg.memory = v;
        }
        if let Some(v) = self.ls_tol {
            cfg.line_search_tol = v;
        }
        if self.timing {
            cfg.timing = true;
        }
    }
}

fn run(args: RunArgs) -> HarnessResult<i32> {
    let base = match &args.config {
        Some(path) => PartialSpec::read(path)?,
        None => PartialSpec::default(),
    };
    let mut flags = args.shared.layer()?;
    flags.solver = args.solver.as_deref().map(str::parse).transpose()?;
    let mut spec = base.overlay(flags).into_run_spec()?;
    args.shared.apply_config(&mut spec);
    let (stdout, stderr) = (io::stdout(), io::stderr());
    cmd_run(&spec, &mut stdout.lock(), &mut stderr.lock())
}

fn compare(args: CompareArgs) -> HarnessResult<i32> {
    let files = args
        .config
        .iter()
        .map(|p| PartialSpec::read(p))
        .collect::<HarnessResult<Vec<_>>>()?;
    let flags = args.shared.layer()?;
    let mut specs = Vec::new();
    if args.solver.is_empty() {
        if files.is_empty() {
            return Err(HarnessError::Usage("compare needs --solver or --config".into()));
        }
        for file in files {
            let mut spec = file.overlay(flags.clone()).into_run_spec()?;
            args.shared.apply_config(&mut spec);
            specs.push((spec.solver.to_string(), spec));
        }
    } else {
        let base = files.into_iter().next().unwrap_or_default();
        for text in &args.solver {
            let which: SolverSpecifier = text.parse()?;
            let layer = PartialSpec {
                solver: Some(which.kind),
                ..flags.clone()
            };
            let mut spec = base.clone().overlay(layer).into_run_spec()?;
            args.shared.apply_config(&mut spec);
            which.apply(&mut spec.config)?;
            specs.push((which.label().to_string(), spec));
        }
    }
    let mut seen = std::collections::HashSet::new();
    for (label, _) in specs.iter_mut() {
        let mut unique = label.clone();
        let mut i = 2;
        while !seen.insert(unique.clone()) {
            unique = format!("{label}#{i}");
            i += 1;
        }
        *label = unique;
    }
    let (stdout, stderr) = (io::stdout(), io::stderr());
    cmd_compare(&specs, &mut stdout.lock(), &mut stderr.lock())
}

fn verify(args: VerifyArgs) -> HarnessResult<i32> {
    let opts = VerifyOptions {
        seed: args.seed,
        data_dir: args.data_dir.unwrap_or_else(default_data_dir),
        trace_dir: args.out,
    };
    cmd_verify(&opts, &mut io::stdout().lock())
}

fn synth(args: SynthArgs) -> HarnessResult<i32> {
    if !(args.density > 0.0 && args.density <= 1.0) || args.rows == 0 || args.features == 0 {
        return Err(HarnessError::Usage(
            "synth needs rows, features >= 1 and density in (0, 1]".into(),
        ));
    }
    let text = to_libsvm_string(&synthetic_dataset(args.rows, args.features, args.density, args.seed));
    match &args.out {
        Some(path) => std::fs::write(path, text).map_err(|e| HarnessError::Output {
            path: path.clone(),
            source: e,
        })?,
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| HarnessError::Output {
                path: "<stdout>".into(),
                source: e,
            })?,
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Compare(a) => compare(a),
        Command::Verify(a) => verify(a),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("quadavg: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
