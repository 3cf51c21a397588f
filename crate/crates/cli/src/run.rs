use std::time::Instant;

use monise_core::domain::{ObjectiveVector, OracleError, OracleOutput, WeightVector};
use monise_core::metrics::reference_point;
use monise_core::mip::BranchOptions;
use monise_core::monise::{run_monise_traced, MoniseConfig, MoniseError, SelectionOptions};
use monise_core::nise::{run_nise_traced, NiseConfig, NiseError};
use monise_core::problems::Instance;
use monise_core::{Frontier, WeightedOracle};

use crate::baseline::random_weights_baseline;
use crate::config::{Algorithm, RunConfig};
use crate::error::CliError;
use crate::report::{
    evaluate_hypervolume, instance_digest, ReportedSolution, RunReport, RunStatus, Timing,
};

/// Counts calls and time spent inside the wrapped oracle.
pub struct TimedOracle<'a> {
    inner: &'a mut dyn WeightedOracle,
    pub calls: usize,
    pub seconds: f64,
}

impl<'a> TimedOracle<'a> {
    pub fn new(inner: &'a mut dyn WeightedOracle) -> Self {
        TimedOracle {
            inner,
            calls: 0,
            seconds: 0.0,
        }
    }
}

impl WeightedOracle for TimedOracle<'_> {
    fn num_objectives(&self) -> usize {
        self.inner.num_objectives()
    }

    fn solve(&mut self, weight: &WeightVector) -> Result<OracleOutput, OracleError> {
        let clock = Instant::now();
        let out = self.inner.solve(weight);
        self.seconds += clock.elapsed().as_secs_f64();
        self.calls += 1;
        out
    }

    fn lower_bounds(&self) -> Option<ObjectiveVector> {
        self.inner.lower_bounds()
    }

    fn tolerance(&self) -> f64 {
        self.inner.tolerance()
    }
}

struct Outcome {
    frontier: Frontier,
    status: RunStatus,
    skipped: usize,
}

pub fn run_experiment(config: &RunConfig) -> Result<RunReport, CliError> {
    config.validate()?;
    let instance = config.problem.instance()?;
    run_on_instance(config, &instance)
}

/// Runs `config.algorithm` on an already loaded instance; `config.problem` is
/// only echoed.
pub fn run_on_instance(config: &RunConfig, instance: &Instance) -> Result<RunReport, CliError> {
    config.validate()?;
    let m = instance.num_objectives();
    let mut inner = instance.oracle();
    let mut oracle = TimedOracle::new(inner.as_mut());
    let clock = Instant::now();
    let outcome = match config.algorithm {
        Algorithm::Nise => run_nise_outcome(&mut oracle, config, m)?,
        Algorithm::Monise => run_monise_outcome(&mut oracle, config)?,
        Algorithm::RandomWeights => {
            let budget = config.solution_budget.unwrap_or(5 * m);
            let run = random_weights_baseline(&mut oracle, budget, config.seed)?;
            Outcome {
                frontier: run.frontier,
                status: RunStatus::Complete,
                skipped: run.skipped,
            }
        }
    };
    let total_seconds = clock.elapsed().as_secs_f64();

    let kept = outcome.frontier.nondominated();
    let solutions: Vec<ReportedSolution> = kept
        .iter()
        .map(|s| ReportedSolution {
            weight: s.weight.as_slice().to_vec(),
            objectives: s.objectives.as_slice().to_vec(),
        })
        .collect();
    let points: Vec<Vec<f64>> = solutions.iter().map(|s| s.objectives.clone()).collect();
    let reference =
        reference_point(&[points.clone()]).map_err(|e| CliError::Solver(e.to_string()))?;
    let hypervolume = evaluate_hypervolume(&points, &reference, config.hv_samples, config.seed)?;
    Ok(RunReport {
        config: config.clone(),
        instance_kind: instance.kind().to_string(),
        instance_sha256: instance_digest(instance),
        num_objectives: m,
        status: outcome.status,
        dominated_dropped: outcome.frontier.len() - solutions.len(),
        solutions,
        mu_history: outcome.frontier.mu_history.clone(),
        oracle_calls: oracle.calls,
        skipped: outcome.skipped,
        timing: Timing {
            oracle_seconds: oracle.seconds,
            selection_seconds: (total_seconds - oracle.seconds).max(0.0),
            total_seconds,
        },
        hypervolume,
    })
}

fn run_nise_outcome(
    oracle: &mut TimedOracle<'_>,
    config: &RunConfig,
    m: usize,
) -> Result<Outcome, CliError> {
    if m != 2 {
        return Err(CliError::Usage(format!(
            "algorithm nise requires m = 2, got m = {m}"
        )));
    }
    let nise = NiseConfig {
        mu_stop: config.mu_stop,
        max_iter: config.max_iter.unwrap_or(5 * m),
        ..NiseConfig::default()
    };
    match run_nise_traced(oracle, &nise) {
        Ok(run) => Ok(Outcome {
            frontier: run.frontier,
            status: RunStatus::Complete,
            skipped: 0,
        }),
        Err(e @ (NiseError::NotTwoObjectives(_) | NiseError::InvalidConfig(_))) => {
            Err(CliError::Usage(e.to_string()))
        }
        Err(e) => Err(CliError::Solver(e.to_string())),
    }
}

fn run_monise_outcome(
    oracle: &mut TimedOracle<'_>,
    config: &RunConfig,
) -> Result<Outcome, CliError> {
    let branch = BranchOptions {
        max_nodes: config
            .max_nodes
            .unwrap_or(BranchOptions::default().max_nodes),
        ..BranchOptions::default()
    };
    let monise = MoniseConfig {
        mu_stop: config.mu_stop,
        max_iter: config.max_iter,
        selection: SelectionOptions {
            branch,
            ..SelectionOptions::default()
        },
        ..MoniseConfig::default()
    };
    match run_monise_traced(oracle, &monise) {
        Ok(run) => Ok(Outcome {
            frontier: run.frontier,
            status: RunStatus::Complete,
            skipped: 0,
        }),
        Err(e) if e.is_timeout() => {
            let partial = e.partial().expect("timeouts carry the partial run");
            Ok(Outcome {
                frontier: partial.frontier.clone(),
                status: RunStatus::Timeout,
                skipped: 0,
            })
        }
        Err(e @ (MoniseError::TooFewObjectives(_) | MoniseError::InvalidConfig(_))) => {
            Err(CliError::Usage(e.to_string()))
        }
        Err(e) => Err(CliError::Solver(e.to_string())),
    }
}
