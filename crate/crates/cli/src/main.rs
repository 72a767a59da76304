use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use drsub::guess::solve_single;
use drsub::instance::{ObjectiveSpec, SampledSpec};
use drsub::oracle::{brute_force_matroid_opt, grid_fractional_opt, OracleResult, MAX_GRID_N};
use drsub::selftest::run_selftest;
use drsub::{
    normalize_packing, parse_instance, Constraint, ConstraintModel, Error, GuessConfig,
    InstanceFile, Objective, PackingInstance, PolymatroidInstance, SolveReport, Termination,
    REPORT_SCHEMA,
};

const EXIT_USAGE: u8 = 1;
const EXIT_REJECTED: u8 = 2;
const EXIT_VIOLATION: u8 = 3;
const EXIT_CAP: u8 = 4;

#[derive(Parser)]
#[command(
    name = "drsub",
    version,
    about = "Low-adaptivity DR-submodular maximization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximize subject to packing constraints `Ax ≤ 1`.
    SolvePacking(SolveArgs),
    /// Maximize over a polymatroid.
    SolveMatroid(SolveArgs),
    /// Solve, then compare against the brute-force or grid oracle.
    Verify(SolveArgs),
    /// Run the seeded property suite.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Monotone {
    Auto,
    True,
    False,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file (JSON).
    instance: PathBuf,
    /// Accuracy in (0, 0.05]; overrides the instance file.
    #[arg(long)]
    eps: Option<f64>,
    /// `auto` runs the whole guess ladder; a number runs that single guess.
    #[arg(long, default_value = "auto")]
    guess: String,
    /// Overrides the instance seed used by sampled objectives.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "auto")]
    monotone: Monotone,
    /// Caps the inner iterations of every guess.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Also write the report to this path.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Run guesses on a thread pool. Output is identical.
    #[arg(long)]
    wallclock_parallel: bool,
}

struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::AllGuessesRejected => EXIT_REJECTED,
            Error::Internal(_) | Error::StepLimit { .. } => EXIT_VIOLATION,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

enum Model {
    Packing(PackingInstance),
    Polymatroid(PolymatroidInstance),
}

impl Model {
    fn constraint(&self) -> Constraint<'_> {
        match self {
            Model::Packing(p) => Constraint::Packing(p),
            Model::Polymatroid(p) => Constraint::Polymatroid(p),
        }
    }
}

struct Prepared {
    file: InstanceFile,
    obj: Objective,
    model: Model,
    cfg: GuessConfig,
}

fn prepare(args: &SolveArgs, want_packing: Option<bool>) -> Result<Prepared, Failure> {
    let text = std::fs::read(&args.instance)
        .map_err(|e| usage(format!("cannot read {}: {e}", args.instance.display())))?;
    let mut file =
        parse_instance(&text).map_err(|e| usage(format!("{}: {e}", args.instance.display())))?;
    if let Some(eps) = args.eps {
        file.eps = eps;
    }
    if let Some(seed) = args.seed {
        file.seed = seed;
        if let ObjectiveSpec::Sampled(SampledSpec { seed, .. }) = &mut file.objective {
            *seed = None;
        }
    }
    let forced = match args.monotone {
        Monotone::Auto => None,
        Monotone::True => Some(true),
        Monotone::False => Some(false),
    };
    if let (Some(m), ObjectiveSpec::Sampled(s)) = (forced, &mut file.objective) {
        s.monotone = Some(m);
    }
    file.validate().map_err(|e| usage(e.to_string()))?;

    let obj = file.objective().map_err(|e| usage(e.to_string()))?;
    let monotone = forced.unwrap_or(obj.is_monotone());
    if monotone && !obj.is_monotone() {
        return Err(usage(format!(
            "objective kind `{}` is not monotone; use --monotone false",
            obj.kind_name()
        )));
    }
    let model = match (
        file.constraint().map_err(|e| usage(e.to_string()))?,
        want_packing,
    ) {
        (ConstraintModel::Packing(a), None | Some(true)) => {
            Model::Packing(normalize_packing(&a, file.eps, !monotone)?)
        }
        (ConstraintModel::Polymatroid(p), None | Some(false)) => Model::Polymatroid(p),
        (ConstraintModel::Packing(_), Some(false)) => {
            return Err(usage(
                "solve-matroid needs a polymatroid constraint; use solve-packing",
            ))
        }
        (ConstraintModel::Polymatroid(_), Some(true)) => {
            return Err(usage(
                "solve-packing needs a packing constraint; use solve-matroid",
            ))
        }
    };
    let mut cfg = GuessConfig::new(file.eps, monotone);
    cfg.max_iterations = args.max_iters;
    cfg.parallel = args.wallclock_parallel;
    Ok(Prepared {
        file,
        obj,
        model,
        cfg,
    })
}

fn solve(p: &Prepared, guess: &str) -> Result<SolveReport, Failure> {
    let constraint = p.model.constraint();
    if guess == "auto" {
        return drsub::solve_with_guessing(&p.obj, constraint, &p.cfg).map_err(Failure::from);
    }
    let g: f64 = guess
        .parse()
        .map_err(|_| usage(format!("--guess expects `auto` or a number, got `{guess}`")))?;
    if !(g.is_finite() && g > 0.0) {
        return Err(usage(format!("--guess must be positive, got {g}")));
    }
    Ok(solve_single(&p.obj, constraint, &p.cfg, g)?)
}

fn exit_code(report: &SolveReport) -> u8 {
    if report.diagnostics.hard_violations() > 0 || !report.feasible {
        return EXIT_VIOLATION;
    }
    match report.termination {
        Termination::Converged => 0,
        Termination::GuessRejected => EXIT_REJECTED,
        Termination::IterationCap => EXIT_CAP,
    }
}

fn emit(text: &str, path: Option<&PathBuf>) -> Result<(), Failure> {
    if let Err(e) = writeln!(std::io::stdout().lock(), "{text}") {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            return Err(usage(format!("cannot write to stdout: {e}")));
        }
    }
    if let Some(path) = path {
        std::fs::write(path, format!("{text}\n"))
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

/// Approximation factor the verify command holds a solution to.
fn reference_bound(model: &Model, monotone: bool, eps: f64) -> f64 {
    match (model, monotone) {
        (Model::Packing(_), true) => 1.0 - (-1.0 + 10.0 * eps).exp(),
        (Model::Packing(_), false) => (-1.0 - 10.0 * eps).exp(),
        (Model::Polymatroid(_), true) => 1.0 - (-1.0f64).exp() - 15.0 * eps,
        (Model::Polymatroid(_), false) => (-1.0f64).exp() - 15.0 * eps,
    }
}

fn oracle(p: &Prepared) -> Result<OracleResult, Failure> {
    match &p.model {
        Model::Polymatroid(pm) => Ok(brute_force_matroid_opt(&p.obj, pm)?),
        Model::Packing(inst) => {
            let n = inst.cols();
            if n > MAX_GRID_N {
                return Err(usage(format!(
                    "verify supports packing instances with n ≤ {MAX_GRID_N}"
                )));
            }
            let free = if p.obj.is_monotone() { n - 1 } else { n } as i32;
            let steps = if free == 0 {
                1000.0
            } else {
                (1e7f64.powf(1.0 / free as f64) - 1.0).floor().min(1000.0)
            };
            Ok(grid_fractional_opt(&p.obj, inst, 1.0 / steps)?)
        }
    }
}

fn verify(args: &SolveArgs) -> Result<u8, Failure> {
    let p = prepare(args, None)?;
    let report = solve(&p, &args.guess)?;
    let opt = oracle(&p)?;
    let value = p.obj.eval(&report.solution)?;
    let reference = p.file.known_opt.unwrap_or(opt.value + opt.error_bound);
    let ratio = if reference > 0.0 {
        value / reference
    } else {
        1.0
    };
    let bound = reference_bound(&p.model, p.cfg.monotone, p.file.eps);
    let meets = ratio >= bound - 1e-9;
    let code = match exit_code(&report) {
        0 if !meets => EXIT_VIOLATION,
        c => c,
    };
    let out = json!({
        "schema": REPORT_SCHEMA,
        "value": value,
        "oracle": {
            "method": opt.method,
            "value": opt.value,
            "error_bound": opt.error_bound,
            "argmax": opt.argmax,
        },
        "known_opt": p.file.known_opt,
        "reference_opt": reference,
        "ratio": ratio,
        "bound": bound,
        "meets_bound": meets,
        "report": report,
    });
    emit(
        &serde_json::to_string_pretty(&out).expect("plain data"),
        args.report.as_ref(),
    )?;
    Ok(code)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::SolvePacking(args) => {
            let p = prepare(&args, Some(true))?;
            let report = solve(&p, &args.guess)?;
            emit(&report.to_json(), args.report.as_ref())?;
            Ok(exit_code(&report))
        }
        Command::SolveMatroid(args) => {
            let p = prepare(&args, Some(false))?;
            let report = solve(&p, &args.guess)?;
            emit(&report.to_json(), args.report.as_ref())?;
            Ok(exit_code(&report))
        }
        Command::Verify(args) => verify(&args),
        Command::Selftest { seed, report } => {
            let rep = run_selftest(seed);
            emit(&rep.to_json(), report.as_ref())?;
            Ok(if rep.passed { 0 } else { EXIT_VIOLATION })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("drsub: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
