//! Command-line front end: `plan`, `pareto`, `validate` and `synth`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{ArgGroup, Args, Parser, Subcommand};

use crate::domain::{AccuracyComposition, LevelSet, PipelineProfile, QuantLevel};
use crate::error::Error;
use crate::ingest::{self, ReportFormat};
use crate::objective::{feasible_levels, objective_of};
use crate::solver::{self, SolveResult};
use crate::synth::{generate_profiles, SynthConfig};

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExitStatus(pub i32);

impl ExitStatus {
    pub const SUCCESS: ExitStatus = ExitStatus(0);
    /// The solver proved the problem has no solution.
    pub const INFEASIBLE: ExitStatus = ExitStatus(1);
    /// Bad flags, unreadable or invalid input.
    pub const INPUT: ExitStatus = ExitStatus(2);
    pub const INTERNAL: ExitStatus = ExitStatus(3);

    pub fn code(self) -> i32 {
        self.0
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hetquant",
    version,
    about = "Plan per-model quantization levels for inference pipelines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Choose one level per model and print the plan report.
    Plan(PlanArgs),
    /// Write the accuracy/latency Pareto front as CSV and optionally SVG.
    Pareto(ParetoArgs),
    /// Check that a profile document is valid.
    Validate {
        #[arg(long)]
        profile: PathBuf,
    },
    /// Generate a synthetic profile document.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["lambda", "budget_ms"])))]
struct PlanArgs {
    #[arg(long)]
    profile: PathBuf,
    /// Weight on latency in [0, 1]; 0 maximizes accuracy, 1 minimizes latency.
    #[arg(long)]
    lambda: Option<f64>,
    /// Pipeline latency budget in milliseconds.
    #[arg(long = "budget-ms")]
    budget_ms: Option<f64>,
    #[arg(long, value_parser = ["product", "min", "mean"])]
    composition: Option<String>,
    #[arg(long, value_parser = ["json", "text"], default_value = "text")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ParetoArgs {
    #[arg(long)]
    profile: PathBuf,
    /// CSV destination; `-` for standard output.
    #[arg(long)]
    csv: Option<String>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    models: usize,
    /// Comma-separated level names; custom levels as `name:bits`.
    #[arg(long)]
    levels: String,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Domain(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

impl Failure {
    fn status(&self) -> ExitStatus {
        match self {
            Failure::Domain(e) if e.is_infeasible() => ExitStatus::INFEASIBLE,
            Failure::Domain(Error::Internal(_)) => ExitStatus::INTERNAL,
            Failure::Domain(_) | Failure::Io(_) => ExitStatus::INPUT,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Domain(e) => e.to_string(),
            Failure::Io(m) => m.clone(),
        }
    }
}

/// Runs the CLI. `argv[0]` is the program name. Payload goes to `stdout`,
/// diagnostics to `stderr`.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    ExitStatus::SUCCESS
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    ExitStatus::INPUT
                }
            };
        }
    };
    let outcome = match cli.command {
        Command::Plan(args) => plan(args, stdout, stderr),
        Command::Pareto(args) => pareto(args, stdout, stderr),
        Command::Validate { profile } => validate(&profile, stdout),
        Command::Synth(args) => synth(args, stderr),
    };
    match outcome {
        Ok(()) => ExitStatus::SUCCESS,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            f.status()
        }
    }
}

fn read_profile(path: &Path) -> Result<PipelineProfile, Failure> {
    let bytes = std::fs::read(path)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    Ok(ingest::parse_profile(&bytes)?)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes)
        .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

fn write_stdout(stdout: &mut dyn Write, bytes: &[u8]) -> Result<(), Failure> {
    stdout
        .write_all(bytes)
        .and_then(|_| stdout.flush())
        .map_err(|e| Failure::Io(format!("cannot write to standard output: {e}")))
}

/// Re-checks a solver result against the pipeline before it is reported.
fn audit(result: &SolveResult, pipeline: &PipelineProfile) -> Result<(), Error> {
    let internal = |m: String| Error::Internal(m);
    pipeline
        .check_assignment(&result.assignment)
        .map_err(|e| internal(e.to_string()))?;
    for model in pipeline.models() {
        let level = result
            .assignment
            .level_of(&model.model_id)
            .unwrap_or_default();
        if !feasible_levels(model, pipeline.thresholds(&model.model_id)).contains(level) {
            return Err(internal(format!(
                "infeasible level chosen for {}",
                model.model_id
            )));
        }
    }
    let o = objective_of(&result.assignment, pipeline)?;
    if o != result.objective {
        return Err(internal("objective does not match assignment".into()));
    }
    Ok(())
}

fn plan(args: PlanArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    let mut pipeline = read_profile(&args.profile)?;
    if let Some(c) = &args.composition {
        pipeline = pipeline.with_composition(c.parse::<AccuracyComposition>()?);
    }
    let result = match (args.lambda, args.budget_ms) {
        (Some(lambda), _) => solver::solve_weighted(&pipeline, lambda)?,
        (None, Some(budget)) => solver::solve_budget(&pipeline, budget)?,
        (None, None) => unreachable!("clap enforces the mode group"),
    };
    audit(&result, &pipeline)?;
    let format: ReportFormat = args.format.parse()?;
    let bytes = ingest::emit_report(&result, &pipeline, format)?;
    match &args.out {
        Some(path) => {
            write_file(path, &bytes)?;
            let _ = writeln!(stderr, "wrote {}", path.display());
            Ok(())
        }
        None => write_stdout(stdout, &bytes),
    }
}

fn pareto(args: ParetoArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    let pipeline = read_profile(&args.profile)?;
    let front = solver::pareto_front_dp(&pipeline)?;
    let csv = ingest::emit_pareto_csv(&front, &pipeline)?;
    match args.csv.as_deref() {
        Some("-") => write_stdout(stdout, &csv)?,
        Some(path) => {
            write_file(Path::new(path), &csv)?;
            let _ = writeln!(stderr, "wrote {path} ({} front entries)", front.len());
        }
        None if args.svg.is_none() => write_stdout(stdout, &csv)?,
        None => {}
    }
    if let Some(path) = &args.svg {
        write_file(path, &ingest::emit_scatter_svg(&pipeline))?;
        let _ = writeln!(stderr, "wrote {}", path.display());
    }
    Ok(())
}

fn validate(path: &Path, stdout: &mut dyn Write) -> Result<(), Failure> {
    let p = read_profile(path)?;
    let line = format!(
        "ok: {} ({} models, {} levels)\n",
        p.name(),
        p.models().len(),
        p.level_set().len()
    );
    write_stdout(stdout, line.as_bytes())
}

/// Parses `fp-16,int-8,custom:3` into a level set.
pub fn parse_level_list(list: &str) -> Result<LevelSet, Error> {
    let levels = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| match item.split_once(':') {
            Some((name, bits)) => {
                let bits = bits
                    .parse::<u32>()
                    .map_err(|_| Error::invalid(format!("invalid bits in level {item}")))?;
                QuantLevel::new(name, bits)
            }
            None => QuantLevel::known(item)
                .ok_or_else(|| Error::invalid(format!("unknown level {item}; use name:bits"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    LevelSet::new(levels)
}

fn synth(args: SynthArgs, stderr: &mut dyn Write) -> Result<(), Failure> {
    let mut cfg = SynthConfig::new(args.models, parse_level_list(&args.levels)?, args.seed);
    cfg.noise_amplitude = args.noise;
    let pipeline = generate_profiles(&cfg)?;
    write_file(&args.out, &ingest::emit_profile(&pipeline))?;
    let _ = writeln!(stderr, "wrote {}", args.out.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (ExitStatus, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("hetquant").chain(args.iter().copied());
        let status = run(argv, &mut out, &mut err);
        (
            status,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn unknown_subcommand_and_flag() {
        let (status, out, err) = run_args(&["frobnicate"]);
        assert_eq!(status, ExitStatus::INPUT);
        assert!(out.is_empty());
        assert!(err.contains("Usage"), "{err}");
        let (status, _, _) = run_args(&["validate", "--profile", "x", "--bogus"]);
        assert_eq!(status, ExitStatus::INPUT);
    }

    #[test]
    fn plan_requires_exactly_one_mode() {
        let (status, _, _) = run_args(&["plan", "--profile", "x"]);
        assert_eq!(status, ExitStatus::INPUT);
        let (status, _, _) = run_args(&[
            "plan",
            "--profile",
            "x",
            "--lambda",
            "0.5",
            "--budget-ms",
            "3",
        ]);
        assert_eq!(status, ExitStatus::INPUT);
    }

    #[test]
    fn missing_file_is_input_error() {
        let (status, _, err) = run_args(&["validate", "--profile", "/nonexistent/profile.json"]);
        assert_eq!(status, ExitStatus::INPUT);
        assert!(err.starts_with("error: cannot read"), "{err}");
    }

    #[test]
    fn level_lists() {
        let set = parse_level_list("int-8, fp-16,tern:2").unwrap();
        assert_eq!(set.names().collect::<Vec<_>>(), ["fp-16", "int-8", "tern"]);
        assert!(parse_level_list("mystery").is_err());
        assert!(parse_level_list("x:0").is_err());
        assert!(parse_level_list("").is_err());
    }
}
