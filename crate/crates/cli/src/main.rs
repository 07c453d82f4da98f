use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ctxprob::io::{
    analyze, balance, parse_grid, reconstruct, run_sweep, simulate_file, to_canonical_json, AnalysisSettings,
    ExperimentFile, SweepSettings, SweepSpec,
};
use ctxprob::oracles::{ElementaryEvent, KolmogorovModel, ModelDescriptor, QubitModel, SyntheticModel};
use ctxprob::sampling::{SampleSizes, DEFAULT_REPLICATES};
use ctxprob::{DegeneracyPolicy, Error, LambdaPair, ProbabilityPair, Result, TransitionMatrix, EPS_CLASS_DEFAULT, TOL_EXACT};

/// Contextual probability analysis, simulation and parameter sweeps.
///
/// Exit codes: 0 success, 1 invalid input or flags, 2 degenerate statistics
/// or model, 3 infeasible or inconsistent data. Angles are in radians.
#[derive(Debug, Parser)]
#[command(name = "ctxprob", version)]
struct Cli {
    /// Tolerance for stochasticity, balance and phase checks.
    #[arg(long, global = true, default_value_t = TOL_EXACT)]
    tolerance: f64,
    /// Classification band around |lambda| = 0 and |lambda| = 1.
    #[arg(long, global = true)]
    eps_class: Option<f64>,
    #[arg(long, global = true, default_value_t = DEFAULT_REPLICATES)]
    bootstrap_replicates: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write to this path instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Reject 0/0 coefficients instead of setting them to zero.
    #[arg(long, global = true)]
    strict_degeneracy: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coefficients, classification, balance and amplitudes for an experiment file.
    Analyze { input: PathBuf },
    /// Simulate the three experiments on an oracle model and write an experiment file.
    Simulate(SimulateArgs),
    /// Tabulate exact (or sampled, with --n) statistics over a parameter grid as CSV.
    Sweep(SweepArgs),
    /// Lift an exact, trigonometric experiment file to complex amplitudes.
    Reconstruct { input: PathBuf },
    /// Row and column stochasticity checks only.
    Balance { input: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    Qubit,
    Classical,
    Synthetic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    /// Four points: prior (0.3, 0.7), rows (0.2, 0.8), (0.6, 0.4).
    E2,
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long, value_enum)]
    model: Family,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    phi: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    b_rotation: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    b_phase: f64,
    /// Named classical model.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Classical points as weight:a:b, comma separated (a, b in {1, 2}).
    #[arg(long)]
    points: Option<String>,
    /// First filtration probability p1 (synthetic).
    #[arg(long)]
    prior: Option<f64>,
    /// Transition matrix p11,p12,p21,p22 (synthetic).
    #[arg(long)]
    rows: Option<String>,
    /// lambda1[,lambda2]; lambda2 defaults to the normalizing companion (synthetic).
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Size of every ensemble unless overridden below.
    #[arg(long)]
    n: u64,
    #[arg(long)]
    n_context: Option<u64>,
    #[arg(long)]
    n_filtration: Option<u64>,
    #[arg(long)]
    n_filtered1: Option<u64>,
    #[arg(long)]
    n_filtered2: Option<u64>,
    #[arg(long)]
    note: Option<String>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    model: Family,
    /// Grids are v1,v2,... or start:stop:count.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    alpha: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    phi: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    b_rotation: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    b_phase: String,
    #[arg(long)]
    prior: Option<f64>,
    #[arg(long)]
    rows: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda1: Option<String>,
    /// Sample every grid point with ensembles of this size.
    #[arg(long)]
    n: Option<u64>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| invalid(format!("{what}: '{s}' {e}"))))
        .collect()
}

fn parse_rows(text: Option<&str>) -> Result<TransitionMatrix> {
    let text = text.ok_or_else(|| invalid("--rows is required"))?;
    match parse_list(text, "--rows")?[..] {
        [a, b, c, d] => TransitionMatrix::new([[a, b], [c, d]]),
        _ => Err(invalid("--rows takes four values p11,p12,p21,p22")),
    }
}

fn parse_prior(p: Option<f64>) -> Result<ProbabilityPair> {
    ProbabilityPair::from_first(p.ok_or_else(|| invalid("--prior is required"))?)
}

fn parse_points(text: &str) -> Result<KolmogorovModel> {
    let mut points = Vec::new();
    for item in text.split(',') {
        let parts: Vec<&str> = item.trim().split(':').collect();
        let [w, a, b] = parts[..] else {
            return Err(invalid(format!("point '{item}' is not weight:a:b")));
        };
        points.push(ElementaryEvent {
            weight: w.parse().map_err(|e| invalid(format!("weight '{w}' {e}")))?,
            a: a.parse().map_err(|e| invalid(format!("label '{a}' {e}")))?,
            b: b.parse().map_err(|e| invalid(format!("label '{b}' {e}")))?,
        });
    }
    KolmogorovModel::new(points)
}

fn build_model(args: &ModelArgs) -> Result<ModelDescriptor> {
    Ok(match args.model {
        Family::Qubit => ModelDescriptor::Qubit(QubitModel {
            alpha: args.alpha,
            phi: args.phi,
            b_rotation: args.b_rotation,
            b_phase: args.b_phase,
        }),
        Family::Classical => match (args.preset, &args.points) {
            (Some(Preset::E2), None) => ModelDescriptor::Classical(KolmogorovModel::preset_e2()),
            (None, Some(points)) => ModelDescriptor::Classical(parse_points(points)?),
            _ => return Err(invalid("classical model needs exactly one of --preset and --points")),
        },
        Family::Synthetic => {
            let prior = parse_prior(args.prior)?;
            let transition = parse_rows(args.rows.as_deref())?;
            let lambda = args.lambda.as_deref().ok_or_else(|| invalid("--lambda is required"))?;
            match parse_list(lambda, "--lambda")?[..] {
                [l1] => ModelDescriptor::Synthetic(SyntheticModel::with_companion(prior, transition, l1)?),
                [l1, l2] => ModelDescriptor::Synthetic(SyntheticModel {
                    prior,
                    transition,
                    target_lambda: LambdaPair::new(l1, l2)?,
                }),
                _ => return Err(invalid("--lambda takes one or two values")),
            }
        }
    })
}

fn read_experiment(path: &Path) -> Result<ExperimentFile> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    ExperimentFile::from_json(&text)
}

fn run(cli: &Cli) -> Result<String> {
    let policy = if cli.strict_degeneracy { DegeneracyPolicy::Reject } else { DegeneracyPolicy::ZeroLambda };
    match &cli.command {
        Command::Analyze { input } => {
            let settings = AnalysisSettings {
                tolerance: cli.tolerance,
                eps_class: cli.eps_class,
                bootstrap_replicates: cli.bootstrap_replicates,
                seed: cli.seed,
                policy,
            };
            to_canonical_json(&analyze(&read_experiment(input)?, &settings)?)
        }
        Command::Simulate(args) => {
            let model = build_model(&args.model)?;
            let sizes = SampleSizes {
                context: args.n_context.unwrap_or(args.n),
                filtration: args.n_filtration.unwrap_or(args.n),
                filtered: [args.n_filtered1.unwrap_or(args.n), args.n_filtered2.unwrap_or(args.n)],
            };
            let mut file = simulate_file(&model, sizes, cli.seed)?;
            file.note = args.note.clone();
            file.to_json()
        }
        Command::Sweep(args) => {
            let spec = match args.model {
                Family::Qubit => SweepSpec::Qubit {
                    alpha: parse_grid(&args.alpha)?,
                    phi: parse_grid(&args.phi)?,
                    b_rotation: parse_grid(&args.b_rotation)?,
                    b_phase: parse_grid(&args.b_phase)?,
                },
                Family::Synthetic => SweepSpec::Synthetic {
                    prior: parse_prior(args.prior)?,
                    transition: parse_rows(args.rows.as_deref())?,
                    lambda1: parse_grid(args.lambda1.as_deref().ok_or_else(|| invalid("--lambda1 is required"))?)?,
                },
                Family::Classical => return Err(invalid("sweep supports the qubit and synthetic families")),
            };
            let settings = SweepSettings {
                eps_class: cli.eps_class.unwrap_or(EPS_CLASS_DEFAULT),
                sample_size: args.n,
                seed: cli.seed,
            };
            run_sweep(&spec, &settings)
        }
        Command::Reconstruct { input } => to_canonical_json(&reconstruct(&read_experiment(input)?, policy)?),
        Command::Balance { input } => to_canonical_json(&balance(&read_experiment(input)?, cli.tolerance)?),
    }
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.output {
        Some(path) => std::fs::write(path, text).map_err(|e| invalid(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let result = match pool.build() {
        Ok(pool) => pool.install(|| run(&cli)).and_then(|text| emit(&cli, &text)),
        Err(e) => Err(invalid(format!("thread pool: {e}"))),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ctxprob: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
