//! Two-objective Non-Inferior Set Estimation.
//!
//! Starting from the two individual minima, NISE keeps a set of neighborhoods,
//! each a pair of adjacent efficient points. The weight normal to the segment
//! between them is solved next, and the triangle formed by the segment and the
//! two supporting lines bounds the unexplored part of the frontier. Its height
//! is the estimation error that decides which neighborhood is split next.

use thiserror::Error;

use crate::domain::{
    individual_minima, solve_weighted, utopian_from_minima, Frontier, IndividualMinimumError,
    OracleError, WeightVector, WeightedOracle, WeightedSolution, DEDUP_TOL,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DegenerateError {
    #[error("points coincide")]
    CoincidentPoints,
    #[error("segment is parallel to (1, 1); no normal on the simplex")]
    DiagonalSegment,
    #[error("one point dominates the other; the normal leaves the simplex")]
    NotMutuallyEfficient,
    #[error("supporting lines are parallel")]
    ParallelLines,
    #[error("expected two objectives, got {0}")]
    NotTwoDimensional(usize),
}

fn check_2d(v: &[f64]) -> Result<(), DegenerateError> {
    if v.len() == 2 {
        Ok(())
    } else {
        Err(DegenerateError::NotTwoDimensional(v.len()))
    }
}

/// The simplex weight `w` with `w · r1 = w · r2`.
pub fn nise_weight(r1: &[f64], r2: &[f64]) -> Result<WeightVector, DegenerateError> {
    check_2d(r1)?;
    check_2d(r2)?;
    let d1 = r1[0] - r2[0];
    let d2 = r1[1] - r2[1];
    let scale = d1.abs().max(d2.abs());
    if scale <= DEDUP_TOL {
        return Err(DegenerateError::CoincidentPoints);
    }
    let denom = d2 - d1;
    if denom.abs() <= 1e-12 * scale {
        return Err(DegenerateError::DiagonalSegment);
    }
    let w1 = d2 / denom;
    WeightVector::new(vec![w1, 1.0 - w1]).map_err(|_| DegenerateError::NotMutuallyEfficient)
}

/// The point `p` on both lines `w1 · p = w1 · r1` and `w2 · p = w2 · r2`.
pub fn intersection_point(
    w1: &[f64],
    r1: &[f64],
    w2: &[f64],
    r2: &[f64],
) -> Result<Vec<f64>, DegenerateError> {
    for v in [w1, r1, w2, r2] {
        check_2d(v)?;
    }
    let det = w1[0] * w2[1] - w1[1] * w2[0];
    if det.abs() < 1e-12 {
        return Err(DegenerateError::ParallelLines);
    }
    let b1 = w1[0] * r1[0] + w1[1] * r1[1];
    let b2 = w2[0] * r2[0] + w2[1] * r2[1];
    Ok(vec![
        (b1 * w2[1] - w1[1] * b2) / det,
        (w1[0] * b2 - b1 * w2[0]) / det,
    ])
}

/// Distance from `p` to the line through `r` with normal `w`.
pub fn estimation_error(w: &[f64], r: &[f64], p: &[f64]) -> f64 {
    let gap: f64 = w
        .iter()
        .zip(r.iter().zip(p))
        .map(|(wi, (ri, pi))| wi * (ri - pi))
        .sum();
    let norm2: f64 = w.iter().map(|x| x * x).sum();
    (gap * gap / norm2).sqrt()
}

/// Two adjacent archived solutions and the weight that separates them.
#[derive(Clone, Debug, PartialEq)]
pub struct Neighborhood {
    pub sol_a: WeightedSolution,
    pub sol_b: WeightedSolution,
    pub weight: WeightVector,
    pub intersection: Vec<f64>,
    pub mu: f64,
}

impl Neighborhood {
    pub fn new(sol_a: WeightedSolution, sol_b: WeightedSolution) -> Result<Self, DegenerateError> {
        let ra = sol_a.objectives.as_slice();
        let rb = sol_b.objectives.as_slice();
        let weight = nise_weight(ra, rb)?;
        let intersection =
            intersection_point(sol_a.weight.as_slice(), ra, sol_b.weight.as_slice(), rb)?;
        let mu = estimation_error(weight.as_slice(), ra, &intersection);
        debug_assert!(
            (mu - estimation_error(weight.as_slice(), rb, &intersection)).abs()
                <= 1e-8 * (1.0 + mu),
            "estimation error differs between the two endpoints"
        );
        Ok(Neighborhood {
            sol_a,
            sol_b,
            weight,
            intersection,
            mu,
        })
    }

    /// `w · (r_a − p)`: the gap measured along the simplex-normalized weight.
    pub fn weighted_gap(&self) -> f64 {
        let ra = self.sol_a.objectives.as_slice();
        self.weight.dot(ra) - self.weight.dot(&self.intersection)
    }
}

/// Which quantity orders the neighborhoods.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Priority {
    /// Euclidean distance from the intersection point to the segment.
    #[default]
    Distance,
    /// The same gap with the normal scaled to sum one instead of to unit length.
    WeightedGap,
}

/// How neighborhoods with equal priority are ordered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Oldest first.
    #[default]
    Fifo,
    /// Smallest first weight component first.
    LowestFirstWeight,
}

#[derive(Clone, Debug)]
pub struct NiseConfig {
    pub mu_stop: f64,
    pub max_iter: usize,
    pub priority: Priority,
    pub ties: TieBreak,
}

impl Default for NiseConfig {
    fn default() -> Self {
        NiseConfig {
            mu_stop: 1e-3,
            max_iter: 200,
            priority: Priority::Distance,
            ties: TieBreak::Fifo,
        }
    }
}

#[derive(Debug, Error)]
pub enum NiseError {
    #[error("NISE needs exactly two objectives, got {0}")]
    NotTwoObjectives(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{source}")]
    IndividualMinimum {
        #[source]
        source: IndividualMinimumError,
    },
    #[error("oracle failed after {} solutions: {source}", partial.len())]
    Oracle {
        #[source]
        source: OracleError,
        partial: Box<Frontier>,
    },
}

/// One split of a neighborhood, kept for inspection.
#[derive(Clone, Debug, PartialEq)]
pub struct NiseStep {
    pub parent: Neighborhood,
    pub result: WeightedSolution,
    /// Whether the result was new, as opposed to a repeat of a parent.
    pub split: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NiseRun {
    pub frontier: Frontier,
    pub steps: Vec<NiseStep>,
}

pub fn run_nise<O: WeightedOracle + ?Sized>(
    oracle: &mut O,
    config: &NiseConfig,
) -> Result<Frontier, NiseError> {
    run_nise_traced(oracle, config).map(|run| run.frontier)
}

/// [`run_nise`], also returning every split in order.
pub fn run_nise_traced<O: WeightedOracle + ?Sized>(
    oracle: &mut O,
    config: &NiseConfig,
) -> Result<NiseRun, NiseError> {
    let m = oracle.num_objectives();
    if m != 2 {
        return Err(NiseError::NotTwoObjectives(m));
    }
    if !(config.mu_stop > 0.0) {
        return Err(NiseError::InvalidConfig(format!(
            "mu_stop must be positive, got {}",
            config.mu_stop
        )));
    }
    let minima =
        individual_minima(oracle).map_err(|source| NiseError::IndividualMinimum { source })?;
    let mut frontier = Frontier::new(utopian_from_minima(&minima, 0.0));
    let mut steps = Vec::new();
    let [first, second]: [WeightedSolution; 2] = minima.try_into().expect("two minima");
    frontier.push(first.clone());
    let distinct = frontier.push(second.clone());

    let mut open: Vec<(usize, Neighborhood)> = Vec::new();
    let mut seq = 0usize;
    if distinct {
        if let Ok(nb) = Neighborhood::new(first, second) {
            open.push((seq, nb));
            seq += 1;
        }
    }

    for _ in 0..config.max_iter {
        let Some(pick) = select(&open, config) else {
            break;
        };
        let (_, nb) = open.swap_remove(pick);
        frontier.mu_history.push(nb.mu);
        if nb.mu <= config.mu_stop {
            break;
        }
        let result = match solve_weighted(oracle, &nb.weight) {
            Ok(s) => s,
            Err(source) => {
                return Err(NiseError::Oracle {
                    source,
                    partial: Box::new(frontier),
                })
            }
        };
        let repeats_parent = result.objectives.approx_eq(&nb.sol_a.objectives, DEDUP_TOL)
            || result.objectives.approx_eq(&nb.sol_b.objectives, DEDUP_TOL);
        if repeats_parent {
            // The segment is itself part of the frontier; nothing left to find.
            steps.push(NiseStep {
                parent: nb,
                result,
                split: false,
            });
            continue;
        }
        frontier.push(result.clone());
        for (a, b) in [
            (nb.sol_a.clone(), result.clone()),
            (result.clone(), nb.sol_b.clone()),
        ] {
            if let Ok(child) = Neighborhood::new(a, b) {
                open.push((seq, child));
                seq += 1;
            }
        }
        steps.push(NiseStep {
            parent: nb,
            result,
            split: true,
        });
    }
    Ok(NiseRun { frontier, steps })
}

fn select(open: &[(usize, Neighborhood)], config: &NiseConfig) -> Option<usize> {
    let key = |nb: &Neighborhood| match config.priority {
        Priority::Distance => nb.mu,
        Priority::WeightedGap => nb.weighted_gap(),
    };
    let mut best: Option<usize> = None;
    for (i, (seq, nb)) in open.iter().enumerate() {
        let Some(b) = best else {
            best = Some(i);
            continue;
        };
        let (bseq, bnb) = &open[b];
        let (k, bk) = (key(nb), key(bnb));
        let tol = 1e-9 * bk.abs().max(k.abs()).max(1e-300);
        let wins = if (k - bk).abs() <= tol {
            match config.ties {
                TieBreak::Fifo => seq < bseq,
                TieBreak::LowestFirstWeight => {
                    nb.weight[0] < bnb.weight[0] || (nb.weight[0] == bnb.weight[0] && seq < bseq)
                }
            }
        } else {
            k > bk
        };
        if wins {
            best = Some(i);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{KnapsackInstance, KnapsackOracle, PointSetOracle, QuadraticSimplex};
    use proptest::prelude::*;

    #[test]
    fn weight_examples() {
        assert_eq!(
            nise_weight(&[0.0, 1.0], &[1.0, 0.0]).unwrap().as_slice(),
            &[0.5, 0.5]
        );
        let w = nise_weight(&[0.0, 4.0], &[2.0, 0.0]).unwrap();
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-15 && (w[1] - 1.0 / 3.0).abs() < 1e-15);
        let (r1, r2) = ([0.0, 1.0], [0.25, 0.25]);
        let w = nise_weight(&r1, &r2).unwrap();
        assert!((w.dot(&r1) - w.dot(&r2)).abs() < 1e-15);
        assert_eq!(
            nise_weight(&[1.0, 1.0], &[1.0, 1.0]),
            Err(DegenerateError::CoincidentPoints)
        );
        assert_eq!(
            nise_weight(&[0.0, 0.0], &[1.0, 1.0]),
            Err(DegenerateError::DiagonalSegment)
        );
        assert_eq!(
            nise_weight(&[0.0, 0.0], &[1.0, 2.0]),
            Err(DegenerateError::NotMutuallyEfficient)
        );
    }

    #[test]
    fn intersection_examples() {
        let p = intersection_point(&[1.0, 0.0], &[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0]).unwrap();
        assert_eq!(p, vec![0.0, 0.0]);
        let (w1, r1, w2, r2) = ([0.5, 0.5], [0.0, 1.0], [0.25, 0.75], [1.0, 0.0]);
        let p = intersection_point(&w1, &r1, &w2, &r2).unwrap();
        let res1 = w1[0] * (p[0] - r1[0]) + w1[1] * (p[1] - r1[1]);
        let res2 = w2[0] * (p[0] - r2[0]) + w2[1] * (p[1] - r2[1]);
        assert!(res1.abs() < 1e-10 && res2.abs() < 1e-10);
        assert_eq!(
            intersection_point(&w1, &r1, &w1, &r2),
            Err(DegenerateError::ParallelLines)
        );
    }

    #[test]
    fn error_examples() {
        let mu = estimation_error(&[0.5, 0.5], &[1.0, 0.0], &[0.0, 0.0]);
        assert!((mu - 0.5 / 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(estimation_error(&[0.5, 0.5], &[0.3, 0.4], &[0.3, 0.4]), 0.0);
        let a = estimation_error(&[0.3, 0.7], &[1.0, 2.0], &[0.2, 0.1]);
        let b = estimation_error(&[0.3, 0.7], &[2.0, 4.0], &[0.4, 0.2]);
        assert!((b - 2.0 * a).abs() < 1e-12);
    }

    #[test]
    fn quadratic_first_iteration() {
        let mut q = QuadraticSimplex::new(2);
        let run = run_nise_traced(&mut q, &NiseConfig::default()).unwrap();
        let first = &run.steps[0];
        assert_eq!(first.parent.weight.as_slice(), &[0.5, 0.5]);
        assert_eq!(first.result.objectives.as_slice(), &[0.25, 0.25]);
        assert!((run.frontier.mu_history[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-5);
    }

    #[test]
    fn large_threshold_keeps_only_minima() {
        let mut q = QuadraticSimplex::new(2);
        let config = NiseConfig {
            mu_stop: 10.0,
            ..NiseConfig::default()
        };
        let f = run_nise(&mut q, &config).unwrap();
        assert_eq!(f.len(), 2);
    }

    #[test]
    fn rejects_wrong_dimension() {
        let mut q = QuadraticSimplex::new(3);
        assert!(matches!(
            run_nise(&mut q, &NiseConfig::default()),
            Err(NiseError::NotTwoObjectives(3))
        ));
    }

    #[test]
    fn knapsack_solutions_are_brute_force_optimal() {
        let inst = KnapsackInstance::generate(10, 2, 0.5, 21);
        let mut oracle = KnapsackOracle::new(inst.clone());
        let config = NiseConfig {
            mu_stop: 1e-9,
            ..NiseConfig::default()
        };
        let run = run_nise_traced(&mut oracle, &config).unwrap();
        let feasible: Vec<Vec<f64>> = (0u32..1 << 10)
            .map(|mask| (0..10).map(|i| mask >> i & 1 == 1).collect::<Vec<bool>>())
            .filter(|p| inst.total_size(p) <= inst.capacity())
            .map(|p| inst.objectives_of(&p))
            .collect();
        for step in &run.steps {
            let w = &step.parent.weight;
            let best = feasible
                .iter()
                .map(|r| w.dot(r))
                .fold(f64::INFINITY, f64::min);
            assert!((step.result.oracle_value - best).abs() < 1e-9);
        }
        // A discrete frontier is exhausted after finitely many splits.
        assert!(run.steps.len() < config.max_iter);
    }

    fn convex_2d_points() -> impl Strategy<Value = Vec<Vec<f64>>> {
        proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 3..40)
            .prop_map(|v| v.into_iter().map(|(a, b)| vec![a, b]).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(150))]

        /// Child weights are convex combinations of the parent weights, new
        /// points lie in the parents' bounding box, and child errors shrink.
        #[test]
        fn recursivity_locality_and_shrinking_error(points in convex_2d_points()) {
            let mut oracle = PointSetOracle::new(points);
            let config = NiseConfig { mu_stop: 1e-12, ..NiseConfig::default() };
            let run = run_nise_traced(&mut oracle, &config).unwrap();
            for step in &run.steps {
                let p = &step.parent;
                let (wa, wb) = (&p.sol_a.weight, &p.sol_b.weight);
                if wa.is_strictly_positive() && wb.is_strictly_positive() {
                    let denom = wa[0] - wb[0];
                    if denom.abs() > 1e-12 {
                        let t = (p.weight[0] - wb[0]) / denom;
                        prop_assert!((-1e-8..=1.0 + 1e-8).contains(&t));
                    }
                }
                let (ra, rb, r) = (&p.sol_a.objectives, &p.sol_b.objectives, &step.result.objectives);
                for k in 0..2 {
                    prop_assert!(r[k] >= ra[k].min(rb[k]) - 1e-8);
                    prop_assert!(r[k] <= ra[k].max(rb[k]) + 1e-8);
                }
                if step.split {
                    for (a, b) in [(&p.sol_a, &step.result), (&step.result, &p.sol_b)] {
                        if let Ok(child) = Neighborhood::new(a.clone(), b.clone()) {
                            prop_assert!(child.mu <= p.mu + 1e-9);
                        }
                    }
                }
            }
        }

        /// Sorting by the first weight orders the first objective the other way.
        #[test]
        fn sensitivity(points in convex_2d_points()) {
            let mut oracle = PointSetOracle::new(points);
            let config = NiseConfig { mu_stop: 1e-12, ..NiseConfig::default() };
            let f = run_nise(&mut oracle, &config).unwrap();
            let mut sols: Vec<_> = f.solutions.iter().collect();
            sols.sort_by(|a, b| a.weight[0].total_cmp(&b.weight[0]));
            for pair in sols.windows(2) {
                if pair[1].weight[0] > pair[0].weight[0] {
                    prop_assert!(pair[1].objectives[0] <= pair[0].objectives[0] + 1e-12);
                }
            }
        }

        /// Every archived solution is efficient within the archive.
        #[test]
        fn archive_is_mutually_nondominated(points in convex_2d_points()) {
            let mut oracle = PointSetOracle::new(points);
            let f = run_nise(&mut oracle, &NiseConfig { mu_stop: 1e-12, ..NiseConfig::default() }).unwrap();
            let pts = f.points();
            prop_assert_eq!(crate::domain::filter_nondominated(&pts).len(), pts.len());
        }
    }
}
