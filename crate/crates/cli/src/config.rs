use std::fmt;
use std::fs;
use std::path::PathBuf;

use monise_core::problems::{Instance, KnapsackInstance, MultilabelInstance, QuadraticSimplex};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Where the instance comes from: generator parameters or a file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ProblemSpec {
    Knapsack {
        q: usize,
        m: usize,
        coverage: f64,
        seed: u64,
    },
    Multilabel {
        n: usize,
        d: usize,
        labels: usize,
        seed: u64,
    },
    Quadratic {
        m: usize,
    },
    File {
        path: PathBuf,
    },
}

impl ProblemSpec {
    pub fn instance(&self) -> Result<Instance, CliError> {
        match *self {
            ProblemSpec::Knapsack {
                q,
                m,
                coverage,
                seed,
            } => {
                positive("q", q)?;
                at_least("m", m, 2)?;
                if !(coverage > 0.0 && coverage <= 1.0) {
                    return Err(CliError::Usage(format!(
                        "coverage must lie in (0, 1], got {coverage}"
                    )));
                }
                Ok(Instance::Knapsack(KnapsackInstance::generate(
                    q, m, coverage, seed,
                )))
            }
            ProblemSpec::Multilabel { n, d, labels, seed } => {
                positive("n", n)?;
                positive("d", d)?;
                positive("labels", labels)?;
                Ok(Instance::Multilabel(MultilabelInstance::generate(
                    n, d, labels, seed,
                )))
            }
            ProblemSpec::Quadratic { m } => {
                at_least("m", m, 2)?;
                Ok(Instance::Quadratic(QuadraticSimplex::new(m)))
            }
            ProblemSpec::File { ref path } => {
                let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
                serde_json::from_str(&text).map_err(|source| CliError::Parse {
                    path: path.clone(),
                    source,
                })
            }
        }
    }
}

fn positive(field: &str, value: usize) -> Result<(), CliError> {
    at_least(field, value, 1)
}

fn at_least(field: &str, value: usize, min: usize) -> Result<(), CliError> {
    if value < min {
        return Err(CliError::Usage(format!(
            "{field} must be at least {min}, got {value}"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Nise,
    Monise,
    RandomWeights,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Nise => "nise",
            Algorithm::Monise => "monise",
            Algorithm::RandomWeights => "random-weights",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub algorithm: Algorithm,
    pub mu_stop: f64,
    /// Weight selections after the individual minima; `None` means `5 m`.
    pub max_iter: Option<usize>,
    /// Samples for random-weights; `None` means `5 m`.
    pub solution_budget: Option<usize>,
    /// Seeds the baseline sampler and the Monte-Carlo hypervolume.
    pub seed: u64,
    /// Branch-and-bound node budget per weight selection.
    pub max_nodes: Option<usize>,
    /// Samples for the Monte-Carlo hypervolume above the exact limit.
    pub hv_samples: usize,
    pub output: Option<PathBuf>,
}

pub const DEFAULT_HV_SAMPLES: usize = 200_000;

impl RunConfig {
    pub fn new(problem: ProblemSpec, algorithm: Algorithm) -> Self {
        RunConfig {
            problem,
            algorithm,
            mu_stop: 1e-3,
            max_iter: None,
            solution_budget: None,
            seed: 0,
            max_nodes: None,
            hv_samples: DEFAULT_HV_SAMPLES,
            output: None,
        }
    }

    /// Checks the fields that do not depend on the instance.
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.mu_stop > 0.0) {
            return Err(CliError::Usage(format!(
                "mu_stop must be positive, got {}",
                self.mu_stop
            )));
        }
        if let Some(b) = self.solution_budget {
            positive("solution_budget", b)?;
        }
        if let Some(n) = self.max_nodes {
            positive("max_nodes", n)?;
        }
        positive("hv_samples", self.hv_samples)
    }
}
