//! Uniform random weights, the comparison stand-in for population-based
//! contenders.

use std::time::Instant;

use monise_core::domain::{componentwise_min, solve_weighted, ObjectiveVector, WeightVector};
use monise_core::{Frontier, WeightedOracle, WeightedSolution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::error::CliError;

#[derive(Clone, Debug)]
pub struct BaselineRun {
    /// Deduplicated solutions; its utopian point is the componentwise minimum
    /// of what was found.
    pub frontier: Frontier,
    /// Samples whose oracle call failed.
    pub skipped: usize,
    pub oracle_seconds: f64,
}

/// A Dirichlet(1, ..., 1) draw: normalized unit exponentials.
pub fn sample_simplex<R: Rng + ?Sized>(rng: &mut R, m: usize) -> WeightVector {
    let raw: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    WeightVector::from_direction(&raw).unwrap_or_else(|_| WeightVector::uniform(m))
}

pub fn random_weights_baseline(
    oracle: &mut dyn WeightedOracle,
    budget: usize,
    seed: u64,
) -> Result<BaselineRun, CliError> {
    if budget == 0 {
        return Err(CliError::Usage(
            "solution_budget must be at least 1, got 0".into(),
        ));
    }
    let m = oracle.num_objectives();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found: Vec<WeightedSolution> = Vec::new();
    let mut skipped = 0;
    let mut last_error = None;
    let clock = Instant::now();
    for _ in 0..budget {
        let w = sample_simplex(&mut rng, m);
        match solve_weighted(oracle, &w) {
            Ok(s) => found.push(s),
            Err(e) => {
                skipped += 1;
                last_error = Some(e);
            }
        }
    }
    let oracle_seconds = clock.elapsed().as_secs_f64();
    let points: Vec<&[f64]> = found.iter().map(|s| s.objectives.as_slice()).collect();
    let Some(low) = componentwise_min(&points) else {
        let reason = last_error.map(|e| e.to_string()).unwrap_or_default();
        return Err(CliError::Solver(format!(
            "every baseline sample failed: {reason}"
        )));
    };
    let utopian = ObjectiveVector::new(low).map_err(|e| CliError::Solver(e.to_string()))?;
    let mut frontier = Frontier::new(utopian);
    for s in found {
        frontier.push(s);
    }
    Ok(BaselineRun {
        frontier,
        skipped,
        oracle_seconds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use monise_core::domain::{OracleError, OracleOutput};
    use monise_core::problems::QuadraticSimplex;

    #[test]
    fn single_sample_is_reproducible() {
        let a = random_weights_baseline(&mut QuadraticSimplex::new(3), 1, 9).unwrap();
        let b = random_weights_baseline(&mut QuadraticSimplex::new(3), 1, 9).unwrap();
        assert_eq!(a.frontier.len(), 1);
        assert_eq!(a.frontier.solutions, b.frontier.solutions);
    }

    #[test]
    fn quadratic_samples_satisfy_closed_form_optimality() {
        let run = random_weights_baseline(&mut QuadraticSimplex::new(3), 50, 2).unwrap();
        assert_eq!(run.skipped, 0);
        for s in &run.frontier.solutions {
            // Stationarity on the simplex: w_i x_i equals a common multiplier.
            let x: Vec<f64> = s.objectives.as_slice().iter().map(|f| f.sqrt()).collect();
            let w = s.weight.as_slice();
            let lambda: Vec<f64> = (0..3).map(|i| w[i] * x[i]).collect();
            let spread = lambda.iter().cloned().fold(f64::MIN, f64::max)
                - lambda.iter().cloned().fold(f64::MAX, f64::min);
            assert!(spread < 1e-8, "{lambda:?}");
            assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn sampler_means_match_uniform_simplex() {
        let m = 4;
        let draws = 10_000;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let samples: Vec<WeightVector> = (0..draws).map(|_| sample_simplex(&mut rng, m)).collect();
        // Dirichlet(1,..,1) marginal variance: (m - 1) / (m^2 (m + 1)).
        let sd = ((m - 1) as f64 / ((m * m) as f64 * (m + 1) as f64)).sqrt();
        let se = sd / (draws as f64).sqrt();
        for k in 0..m {
            let mean = samples.iter().map(|w| w[k]).sum::<f64>() / draws as f64;
            assert!(
                (mean - 1.0 / m as f64).abs() < 3.0 * se,
                "component {k}: {mean}"
            );
        }
    }

    struct Flaky {
        calls: usize,
    }

    impl WeightedOracle for Flaky {
        fn num_objectives(&self) -> usize {
            2
        }

        fn solve(&mut self, w: &WeightVector) -> Result<OracleOutput, OracleError> {
            self.calls += 1;
            if self.calls % 2 == 0 {
                return Err(OracleError::Infeasible("every other call".into()));
            }
            Ok(OracleOutput {
                objectives: ObjectiveVector::new(vec![w[0], 1.0 - w[0]]).unwrap(),
                decision: vec![],
            })
        }
    }

    #[test]
    fn failures_are_skipped_and_counted() {
        let run = random_weights_baseline(&mut Flaky { calls: 0 }, 6, 1).unwrap();
        assert_eq!(run.skipped, 3);
        assert_eq!(run.frontier.len(), 3);
        assert!(random_weights_baseline(&mut Flaky { calls: 0 }, 0, 1).is_err());
    }
}
