use std::fs;
use std::path::Path;

use monise_core::metrics::{monte_carlo_hypervolume, HypervolumeQuery, EXACT_MAX_OBJECTIVES};
use monise_core::problems::Instance;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Complete,
    /// A weight selection ran out of nodes; the report holds the partial front.
    Timeout,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportedSolution {
    pub weight: Vec<f64>,
    pub objectives: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub oracle_seconds: f64,
    pub selection_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum HypervolumeMode {
    Exact,
    MonteCarlo {
        samples: usize,
        seed: u64,
        std_error: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypervolumeReport {
    pub value: f64,
    pub reference: Vec<f64>,
    /// Points dropped for exceeding the reference.
    pub clipped: usize,
    #[serde(flatten)]
    pub mode: HypervolumeMode,
}

/// Exact for up to [`EXACT_MAX_OBJECTIVES`] objectives, a seeded Monte-Carlo
/// estimate above.
pub fn evaluate_hypervolume(
    points: &[Vec<f64>],
    reference: &[f64],
    samples: usize,
    seed: u64,
) -> Result<HypervolumeReport, CliError> {
    let query =
        HypervolumeQuery::new(points, reference).map_err(|e| CliError::Usage(e.to_string()))?;
    let (value, mode) = if reference.len() <= EXACT_MAX_OBJECTIVES {
        (query.hypervolume(), HypervolumeMode::Exact)
    } else {
        let est = monte_carlo_hypervolume(query.points(), reference, samples, seed);
        let mode = HypervolumeMode::MonteCarlo {
            samples,
            seed,
            std_error: est.std_error,
        };
        (est.value, mode)
    };
    Ok(HypervolumeReport {
        value,
        reference: reference.to_vec(),
        clipped: query.clipped(),
        mode,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub instance_kind: String,
    /// SHA-256 of the instance's JSON form; `compare` refuses mixed digests.
    pub instance_sha256: String,
    pub num_objectives: usize,
    pub status: RunStatus,
    /// Mutually non-dominated solutions found by the run.
    pub solutions: Vec<ReportedSolution>,
    /// Distinct solutions left out because another one dominates them.
    pub dominated_dropped: usize,
    pub mu_history: Vec<f64>,
    pub oracle_calls: usize,
    /// Oracle calls that failed (random-weights only).
    pub skipped: usize,
    pub timing: Timing,
    /// Against the reference point of this front alone.
    pub hypervolume: HypervolumeReport,
}

impl RunReport {
    pub fn points(&self) -> Vec<Vec<f64>> {
        self.solutions
            .iter()
            .map(|s| s.objectives.clone())
            .collect()
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("reports serialize");
        fs::write(path, text + "\n").map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| CliError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }
}

pub fn instance_digest(instance: &Instance) -> String {
    let bytes = serde_json::to_vec(instance).expect("instances serialize");
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_mode_up_to_the_limit() {
        let pts = vec![vec![0.0, 0.5], vec![0.5, 0.0], vec![2.0, 0.0]];
        let hv = evaluate_hypervolume(&pts, &[1.0, 1.0], 10, 0).unwrap();
        assert_eq!(hv.value, 0.75);
        assert_eq!(hv.clipped, 1);
        assert_eq!(hv.mode, HypervolumeMode::Exact);
    }

    #[test]
    fn monte_carlo_above_the_limit() {
        let m = EXACT_MAX_OBJECTIVES + 1;
        let pts = vec![vec![0.5; m]];
        let hv = evaluate_hypervolume(&pts, &vec![1.0; m], 1000, 4).unwrap();
        assert!(matches!(
            hv.mode,
            HypervolumeMode::MonteCarlo {
                samples: 1000,
                seed: 4,
                ..
            }
        ));
        // A single box fills its own bounding box.
        assert!((hv.value - 0.5f64.powi(m as i32)).abs() < 1e-15);
        let text = serde_json::to_string(&hv).unwrap();
        assert!(text.contains("\"mode\":\"monte-carlo\""));
        assert_eq!(
            serde_json::from_str::<HypervolumeReport>(&text).unwrap(),
            hv
        );
    }

    #[test]
    fn digest_depends_on_contents() {
        use monise_core::problems::QuadraticSimplex;
        let a = instance_digest(&Instance::Quadratic(QuadraticSimplex::new(3)));
        let b = instance_digest(&Instance::Quadratic(QuadraticSimplex::new(4)));
        assert_eq!(a.len(), 64);
        assert_ne!(a, b);
    }
}
