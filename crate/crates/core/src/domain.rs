//! Objective and weight vectors, dominance, and the weighted-sum oracle contract.

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Max-norm tolerance under which two objective vectors are the same point.
pub const DEDUP_TOL: f64 = 1e-9;
/// Allowed drift of a weight vector's sum from one before it is rescaled.
pub const SIMPLEX_TOL: f64 = 1e-9;
/// Largest drift that is still repaired by renormalization.
pub const RENORMALIZE_TOL: f64 = 1e-6;
/// Negative entries down to this value are treated as rounding noise and clamped.
const NEGATIVE_CLAMP: f64 = -1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("vector must have at least one entry")]
    Empty,
    #[error("entry {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("weight entry {index} is negative ({value})")]
    NegativeWeight { index: usize, value: f64 },
    #[error("weights sum to {sum}, not 1")]
    NotOnSimplex { sum: f64 },
    #[error("index {index} out of range for {len} objectives")]
    IndexOutOfRange { index: usize, len: usize },
}

/// A point in objective space. Every objective is minimized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ObjectiveVector(Vec<f64>);

impl ObjectiveVector {
    pub fn new(values: Vec<f64>) -> Result<Self, CoreError> {
        if values.is_empty() {
            return Err(CoreError::Empty);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(CoreError::NonFinite { index, value });
        }
        Ok(ObjectiveVector(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Largest absolute coordinate difference.
    pub fn max_distance(&self, other: &ObjectiveVector) -> f64 {
        max_distance(&self.0, &other.0)
    }

    pub fn approx_eq(&self, other: &ObjectiveVector, tol: f64) -> bool {
        self.len() == other.len() && self.max_distance(other) <= tol
    }
}

impl TryFrom<Vec<f64>> for ObjectiveVector {
    type Error = CoreError;
    fn try_from(values: Vec<f64>) -> Result<Self, CoreError> {
        ObjectiveVector::new(values)
    }
}

impl From<ObjectiveVector> for Vec<f64> {
    fn from(v: ObjectiveVector) -> Vec<f64> {
        v.0
    }
}

impl AsRef<[f64]> for ObjectiveVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for ObjectiveVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Display for ObjectiveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tuple(f, &self.0)
    }
}

/// A nonnegative vector on the unit simplex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// Validates `weights`. Tiny negative entries are clamped to zero and a sum
    /// within [`RENORMALIZE_TOL`] of one is rescaled; anything else is rejected.
    pub fn new(mut weights: Vec<f64>) -> Result<Self, CoreError> {
        if weights.is_empty() {
            return Err(CoreError::Empty);
        }
        for (index, w) in weights.iter_mut().enumerate() {
            if !w.is_finite() {
                return Err(CoreError::NonFinite { index, value: *w });
            }
            if *w < NEGATIVE_CLAMP {
                return Err(CoreError::NegativeWeight { index, value: *w });
            }
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > RENORMALIZE_TOL {
            return Err(CoreError::NotOnSimplex { sum });
        }
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            weights.iter_mut().for_each(|w| *w /= sum);
        }
        Ok(WeightVector(weights))
    }

    /// Scales an arbitrary nonnegative, not-all-zero vector onto the simplex.
    pub fn from_direction(direction: &[f64]) -> Result<Self, CoreError> {
        let sum: f64 = direction.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(CoreError::NotOnSimplex { sum });
        }
        WeightVector::new(direction.iter().map(|d| d / sum).collect())
    }

    pub fn uniform(m: usize) -> Self {
        WeightVector(vec![1.0 / m as f64; m])
    }

    /// The `k`-th unit vector.
    pub fn unit(m: usize, k: usize) -> Self {
        let mut w = vec![0.0; m];
        w[k] = 1.0;
        WeightVector(w)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, point: &[f64]) -> f64 {
        debug_assert_eq!(self.0.len(), point.len());
        self.0.iter().zip(point).map(|(w, p)| w * p).sum()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.0.iter().all(|&w| w > 0.0)
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = CoreError;
    fn try_from(values: Vec<f64>) -> Result<Self, CoreError> {
        WeightVector::new(values)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(v: WeightVector) -> Vec<f64> {
        v.0
    }
}

impl AsRef<[f64]> for WeightVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for WeightVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tuple(f, &self.0)
    }
}

fn write_tuple(f: &mut fmt::Formatter<'_>, values: &[f64]) -> fmt::Result {
    f.write_str("(")?;
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{v}")?;
    }
    f.write_str(")")
}

pub(crate) fn max_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// One oracle call: the weight, the objective vector at the returned optimum,
/// and the problem-specific decision encoding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedSolution {
    pub weight: WeightVector,
    pub objectives: ObjectiveVector,
    pub decision: Vec<f64>,
    /// `weight · objectives`.
    pub oracle_value: f64,
}

impl WeightedSolution {
    pub fn new(
        weight: WeightVector,
        objectives: ObjectiveVector,
        decision: Vec<f64>,
    ) -> Result<Self, CoreError> {
        if weight.len() != objectives.len() {
            return Err(CoreError::DimensionMismatch {
                left: weight.len(),
                right: objectives.len(),
            });
        }
        let oracle_value = weight.dot(objectives.as_slice());
        Ok(WeightedSolution {
            weight,
            objectives,
            decision,
            oracle_value,
        })
    }
}

/// `true` iff `a` is no worse than `b` everywhere and strictly better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool, CoreError> {
    if a.len() != b.len() {
        return Err(CoreError::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(dominates_unchecked(a, b))
}

/// [`dominates`] without the length check; extra trailing entries are ignored.
pub fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

/// Indices of the points not dominated by any other input point, ascending.
///
/// # Panics
/// If the points do not share one dimension.
pub fn nondominated_indices<P: AsRef<[f64]>>(points: &[P]) -> Vec<usize> {
    if points.is_empty() {
        return Vec::new();
    }
    let m = points[0].as_ref().len();
    assert!(
        points.iter().all(|p| p.as_ref().len() == m),
        "points must share one dimension"
    );
    // A dominator always precedes its victim in lexicographic order, and
    // dominance is transitive, so checking against survivors is enough.
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| lex_cmp(points[i].as_ref(), points[j].as_ref()));
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        let p = points[i].as_ref();
        if !kept
            .iter()
            .any(|&k| dominates_unchecked(points[k].as_ref(), p))
        {
            kept.push(i);
        }
    }
    kept.sort_unstable();
    kept
}

/// The non-dominated subset, in input order. Equal points are all kept.
pub fn filter_nondominated<P: AsRef<[f64]> + Clone>(points: &[P]) -> Vec<P> {
    nondominated_indices(points)
        .into_iter()
        .map(|i| points[i].clone())
        .collect()
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// The archive returned by NISE, MONISE and the random-weights baseline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frontier {
    pub solutions: Vec<WeightedSolution>,
    /// Estimation error recorded at each iteration.
    pub mu_history: Vec<f64>,
    pub utopian: ObjectiveVector,
}

impl Frontier {
    pub fn new(utopian: ObjectiveVector) -> Self {
        Frontier {
            solutions: Vec::new(),
            mu_history: Vec::new(),
            utopian,
        }
    }

    /// Appends `sol` unless an archived solution has the same objectives within
    /// [`DEDUP_TOL`]. Returns whether it was added.
    pub fn push(&mut self, sol: WeightedSolution) -> bool {
        if self.contains(&sol.objectives) {
            return false;
        }
        self.solutions.push(sol);
        true
    }

    pub fn contains(&self, objectives: &ObjectiveVector) -> bool {
        self.solutions
            .iter()
            .any(|s| s.objectives.approx_eq(objectives, DEDUP_TOL))
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        self.solutions
            .iter()
            .map(|s| s.objectives.as_slice().to_vec())
            .collect()
    }

    pub fn nondominated(&self) -> Vec<&WeightedSolution> {
        nondominated_indices(&self.points())
            .into_iter()
            .map(|i| &self.solutions[i])
            .collect()
    }
}

/// What an oracle returns for one weighted solve.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleOutput {
    pub objectives: ObjectiveVector,
    pub decision: Vec<f64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("weighted problem is infeasible: {0}")]
    Infeasible(String),
    #[error("weighted problem is unbounded: {0}")]
    Unbounded(String),
    #[error("solver did not converge after {iterations} iterations")]
    NonConvergent {
        iterations: usize,
        best: Option<Box<OracleOutput>>,
    },
    #[error("oracle contract violated: {0}")]
    Contract(String),
}

/// A single-objective solver for `min_x w · f(x)`.
///
/// Implementations must be deterministic: repeated calls with one weight
/// return objective vectors equal within [`WeightedOracle::tolerance`].
pub trait WeightedOracle {
    fn num_objectives(&self) -> usize;

    fn solve(&mut self, weight: &WeightVector) -> Result<OracleOutput, OracleError>;

    /// Known per-objective lower bounds, if any.
    fn lower_bounds(&self) -> Option<ObjectiveVector> {
        None
    }

    /// Optimality tolerance on the weighted objective.
    fn tolerance(&self) -> f64 {
        1e-9
    }
}

impl<T: WeightedOracle + ?Sized> WeightedOracle for Box<T> {
    fn num_objectives(&self) -> usize {
        (**self).num_objectives()
    }
    fn solve(&mut self, weight: &WeightVector) -> Result<OracleOutput, OracleError> {
        (**self).solve(weight)
    }
    fn lower_bounds(&self) -> Option<ObjectiveVector> {
        (**self).lower_bounds()
    }
    fn tolerance(&self) -> f64 {
        (**self).tolerance()
    }
}

/// Calls the oracle and records the result with its weight.
pub fn solve_weighted<O: WeightedOracle + ?Sized>(
    oracle: &mut O,
    weight: &WeightVector,
) -> Result<WeightedSolution, OracleError> {
    let m = oracle.num_objectives();
    if weight.len() != m {
        return Err(OracleError::Contract(format!(
            "weight has {} entries for {m} objectives",
            weight.len()
        )));
    }
    let out = oracle.solve(weight)?;
    if out.objectives.len() != m {
        return Err(OracleError::Contract(format!(
            "oracle returned {} objectives, expected {m}",
            out.objectives.len()
        )));
    }
    WeightedSolution::new(weight.clone(), out.objectives, out.decision)
        .map_err(|e| OracleError::Contract(e.to_string()))
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("individual minimum of objective {objective} failed: {source}")]
pub struct IndividualMinimumError {
    pub objective: usize,
    #[source]
    pub source: OracleError,
}

/// Solves with the unit weight `e_k`.
pub fn individual_minimum<O: WeightedOracle + ?Sized>(
    oracle: &mut O,
    k: usize,
) -> Result<WeightedSolution, IndividualMinimumError> {
    let m = oracle.num_objectives();
    if k >= m {
        return Err(IndividualMinimumError {
            objective: k,
            source: OracleError::Contract(
                CoreError::IndexOutOfRange { index: k, len: m }.to_string(),
            ),
        });
    }
    solve_weighted(oracle, &WeightVector::unit(m, k)).map_err(|source| IndividualMinimumError {
        objective: k,
        source,
    })
}

pub fn individual_minima<O: WeightedOracle + ?Sized>(
    oracle: &mut O,
) -> Result<Vec<WeightedSolution>, IndividualMinimumError> {
    (0..oracle.num_objectives())
        .map(|k| individual_minimum(oracle, k))
        .collect()
}

/// Utopian point from already computed individual minima, lowered by `offset`.
pub fn utopian_from_minima(minima: &[WeightedSolution], offset: f64) -> ObjectiveVector {
    let values = minima
        .iter()
        .enumerate()
        .map(|(k, s)| s.objectives[k] - offset)
        .collect();
    ObjectiveVector(values)
}

/// Per-objective individual minima, each lowered by `offset >= 0`.
pub fn utopian<O: WeightedOracle + ?Sized>(
    oracle: &mut O,
    offset: f64,
) -> Result<ObjectiveVector, IndividualMinimumError> {
    let minima = individual_minima(oracle)?;
    Ok(utopian_from_minima(&minima, offset))
}

/// Componentwise minimum over a nonempty set of points.
pub fn componentwise_min<P: AsRef<[f64]>>(points: &[P]) -> Option<Vec<f64>> {
    let first = points.first()?.as_ref().to_vec();
    Some(points.iter().skip(1).fold(first, |mut acc, p| {
        for (a, v) in acc.iter_mut().zip(p.as_ref()) {
            *a = a.min(*v);
        }
        acc
    }))
}

/// Componentwise maximum over a nonempty set of points.
pub fn componentwise_max<P: AsRef<[f64]>>(points: &[P]) -> Option<Vec<f64>> {
    let first = points.first()?.as_ref().to_vec();
    Some(points.iter().skip(1).fold(first, |mut acc, p| {
        for (a, v) in acc.iter_mut().zip(p.as_ref()) {
            *a = a.max(*v);
        }
        acc
    }))
}
