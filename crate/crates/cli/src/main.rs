use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use monise_cli::config::DEFAULT_HV_SAMPLES;
use monise_cli::{
    compare_runs, evaluate_hypervolume, exit_code_for, run_experiment, Algorithm, CliError,
    ProblemSpec, RunConfig, RunReport,
};
use monise_core::metrics::reference_point;

#[derive(Parser)]
#[command(
    name = "monise",
    version,
    about = "Weighted-sum Pareto-front estimation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a problem instance as JSON.
    Generate {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run one experiment and emit its JSON report.
    Run(RunArgs),
    /// Shared-reference hypervolume table from several reports.
    Compare {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Hypervolume of a point file (JSON array of arrays, or headerless CSV).
    Hv {
        points: PathBuf,
        /// Comma-separated reference; defaults to the worst value per objective.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        reference: Option<Vec<f64>>,
        #[arg(long, default_value_t = DEFAULT_HV_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemKind {
    Knapsack,
    Multilabel,
    Quadratic,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Nise,
    Monise,
    RandomWeights,
}

#[derive(Args)]
struct ProblemArgs {
    #[arg(long, value_enum, required_unless_present = "instance")]
    problem: Option<ProblemKind>,
    /// Instance file written by `generate`; replaces the generator flags.
    #[arg(long, conflicts_with = "problem")]
    instance: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    coverage: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    labels: Option<usize>,
    #[arg(long = "instance-seed", default_value_t = 0)]
    instance_seed: u64,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum)]
    algorithm: AlgorithmArg,
    #[arg(long, default_value_t = 1e-3)]
    mu_stop: f64,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    solution_budget: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_nodes: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_HV_SAMPLES)]
    hv_samples: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn required<T>(value: Option<T>, flag: &str, kind: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("--{flag} is required for {kind}")))
}

impl ProblemArgs {
    fn spec(&self) -> Result<ProblemSpec, CliError> {
        if let Some(path) = &self.instance {
            return Ok(ProblemSpec::File { path: path.clone() });
        }
        let seed = self.instance_seed;
        Ok(
            match self.problem.expect("clap enforces problem or instance") {
                ProblemKind::Knapsack => ProblemSpec::Knapsack {
                    q: required(self.q, "q", "knapsack")?,
                    m: required(self.m, "m", "knapsack")?,
                    coverage: self.coverage.unwrap_or(0.5),
                    seed,
                },
                ProblemKind::Multilabel => ProblemSpec::Multilabel {
                    n: required(self.n, "n", "multilabel")?,
                    d: required(self.d, "d", "multilabel")?,
                    labels: required(self.labels, "labels", "multilabel")?,
                    seed,
                },
                ProblemKind::Quadratic => ProblemSpec::Quadratic {
                    m: required(self.m, "m", "quadratic")?,
                },
            },
        )
    }
}

fn write_or_print(text: &str, output: Option<&Path>) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_points(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if path.extension().is_some_and(|e| e == "csv") {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_path(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let mut points = Vec::new();
        for record in reader.deserialize() {
            points.push(record.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?);
        }
        return Ok(points);
    }
    let text = fs::read_to_string(path).map_err(io)?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Generate { problem, output } => {
            let instance = problem.spec()?.instance()?;
            let text = serde_json::to_string_pretty(&instance).expect("instances serialize") + "\n";
            write_or_print(&text, output.as_deref())?;
            Ok(0)
        }
        Command::Run(args) => {
            let algorithm = match args.algorithm {
                AlgorithmArg::Nise => Algorithm::Nise,
                AlgorithmArg::Monise => Algorithm::Monise,
                AlgorithmArg::RandomWeights => Algorithm::RandomWeights,
            };
            let config = RunConfig {
                problem: args.problem.spec()?,
                algorithm,
                mu_stop: args.mu_stop,
                max_iter: args.max_iter,
                solution_budget: args.solution_budget,
                seed: args.seed,
                max_nodes: args.max_nodes,
                hv_samples: args.hv_samples,
                output: args.output.clone(),
            };
            let report = run_experiment(&config)?;
            match &config.output {
                Some(path) => report.write(path)?,
                None => println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("reports serialize")
                ),
            }
            Ok(exit_code_for(&report))
        }
        Command::Compare { reports, output } => {
            let reports = reports
                .iter()
                .map(|p| RunReport::read(p))
                .collect::<Result<Vec<_>, _>>()?;
            let table = compare_runs(&reports)?;
            write_or_print(&table.to_csv(), output.as_deref())?;
            Ok(0)
        }
        Command::Hv {
            points,
            reference,
            samples,
            seed,
        } => {
            let pts = read_points(&points)?;
            let reference = match reference {
                Some(r) => r,
                None => {
                    reference_point(&[pts.clone()]).map_err(|e| CliError::Usage(e.to_string()))?
                }
            };
            let hv = evaluate_hypervolume(&pts, &reference, samples, seed)?;
            println!("{}", serde_json::to_string(&hv).expect("reports serialize"));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("monise: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
