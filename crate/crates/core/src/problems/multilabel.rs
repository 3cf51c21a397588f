use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{ObjectiveVector, OracleError, OracleOutput, WeightVector, WeightedOracle};

/// Fraction of generated labels that are flipped.
pub const LABEL_NOISE: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MultilabelError {
    #[error("instance needs n, d, L >= 1")]
    Empty,
    #[error("row {row} of {matrix} has {got} columns, expected {expected}")]
    Ragged {
        matrix: &'static str,
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("label matrix entry ({row}, {col}) is {value}, not 0 or 1")]
    NonBinaryLabel { row: usize, col: usize, value: u8 },
    #[error("non-finite feature at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("declared {field} = {declared} does not match the data ({actual})")]
    CountMismatch {
        field: &'static str,
        declared: usize,
        actual: usize,
    },
}

/// Features `X` (n×d) and binary labels `Y` (n×L).
///
/// One parameter vector `θ ∈ R^{d+1}` is shared by every label; the feature map
/// appends a constant 1. Objectives are the `L` logistic losses followed by `‖θ‖₂`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MultilabelRecord", into = "MultilabelRecord")]
pub struct MultilabelInstance {
    x: Vec<Vec<f64>>,
    y: Vec<Vec<u8>>,
    seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct MultilabelRecord {
    n: usize,
    d: usize,
    #[serde(rename = "L")]
    labels: usize,
    #[serde(rename = "X")]
    x: Vec<Vec<f64>>,
    #[serde(rename = "Y")]
    y: Vec<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

impl TryFrom<MultilabelRecord> for MultilabelInstance {
    type Error = MultilabelError;
    fn try_from(r: MultilabelRecord) -> Result<Self, MultilabelError> {
        let inst = MultilabelInstance::new(r.x, r.y)?;
        for (field, declared, actual) in [
            ("n", r.n, inst.n()),
            ("d", r.d, inst.d()),
            ("L", r.labels, inst.num_labels()),
        ] {
            if declared != actual {
                return Err(MultilabelError::CountMismatch {
                    field,
                    declared,
                    actual,
                });
            }
        }
        Ok(MultilabelInstance {
            seed: r.seed,
            ..inst
        })
    }
}

impl From<MultilabelInstance> for MultilabelRecord {
    fn from(i: MultilabelInstance) -> Self {
        MultilabelRecord {
            n: i.n(),
            d: i.d(),
            labels: i.num_labels(),
            x: i.x,
            y: i.y,
            seed: i.seed,
        }
    }
}

fn check_rect<T>(matrix: &'static str, rows: &[Vec<T>]) -> Result<usize, MultilabelError> {
    let cols = rows.first().map_or(0, Vec::len);
    if cols == 0 {
        return Err(MultilabelError::Empty);
    }
    if let Some((row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(MultilabelError::Ragged {
            matrix,
            row,
            got: r.len(),
            expected: cols,
        });
    }
    Ok(cols)
}

impl MultilabelInstance {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<Vec<u8>>) -> Result<Self, MultilabelError> {
        check_rect("X", &x)?;
        check_rect("Y", &y)?;
        if x.len() != y.len() {
            return Err(MultilabelError::CountMismatch {
                field: "rows of Y",
                declared: y.len(),
                actual: x.len(),
            });
        }
        for (row, r) in x.iter().enumerate() {
            if let Some(col) = r.iter().position(|v| !v.is_finite()) {
                return Err(MultilabelError::NonFinite { row, col });
            }
        }
        for (row, r) in y.iter().enumerate() {
            if let Some(col) = r.iter().position(|&v| v > 1) {
                return Err(MultilabelError::NonBinaryLabel {
                    row,
                    col,
                    value: r[col],
                });
            }
        }
        Ok(MultilabelInstance { x, y, seed: None })
    }

    /// Standard-normal features; each label is the sign of its own random
    /// linear function of the features, flipped with probability [`LABEL_NOISE`].
    pub fn generate(n: usize, d: usize, labels: usize, seed: u64) -> Self {
        assert!(n >= 1 && d >= 1 && labels >= 1, "need n, d, L >= 1");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut normal = || -> f64 { rng.sample(StandardNormal) };
        let labelers: Vec<Vec<f64>> = (0..labels)
            .map(|_| (0..=d).map(|_| normal()).collect())
            .collect();
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| normal()).collect()).collect();
        let mut y = Vec::with_capacity(n);
        for row in &x {
            let phi = feature_map(row);
            let labels_row = labelers
                .iter()
                .map(|beta| {
                    let clean = dot(beta, &phi) > 0.0;
                    let flip = rng.random_bool(LABEL_NOISE);
                    u8::from(clean != flip)
                })
                .collect();
            y.push(labels_row);
        }
        MultilabelInstance {
            x,
            y,
            seed: Some(seed),
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn d(&self) -> usize {
        self.x[0].len()
    }

    pub fn num_labels(&self) -> usize {
        self.y[0].len()
    }

    /// `L + 1`.
    pub fn num_objectives(&self) -> usize {
        self.num_labels() + 1
    }

    /// Length of `θ`, i.e. `d + 1`.
    pub fn dim(&self) -> usize {
        self.d() + 1
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn labels(&self) -> &[Vec<u8>] {
        &self.y
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Cross-entropy loss of label `l` at `θ`.
    pub fn loss(&self, l: usize, theta: &[f64]) -> f64 {
        self.x
            .iter()
            .zip(&self.y)
            .map(|(row, ys)| {
                let z = dot(&theta[..self.d()], row) + theta[self.d()];
                softplus(z) - f64::from(ys[l]) * z
            })
            .sum()
    }

    /// Gradient of [`loss`](Self::loss) with respect to `θ`.
    pub fn loss_gradient(&self, l: usize, theta: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        for (row, ys) in self.x.iter().zip(&self.y) {
            let z = dot(&theta[..self.d()], row) + theta[self.d()];
            let r = sigmoid(z) - f64::from(ys[l]);
            for (gj, xj) in g.iter_mut().zip(row) {
                *gj += r * xj;
            }
            g[self.d()] += r;
        }
        g
    }

    /// All `L + 1` objectives at `θ`.
    pub fn objectives(&self, theta: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = (0..self.num_labels())
            .map(|l| self.loss(l, theta))
            .collect();
        out.push(norm(theta));
        out
    }

    /// Value and gradient of `sum_l w_l loss_l(θ)`.
    fn smooth_part(&self, weight: &[f64], theta: &[f64]) -> (f64, Vec<f64>) {
        let d = self.d();
        let mut value = 0.0;
        let mut g = vec![0.0; self.dim()];
        for (row, ys) in self.x.iter().zip(&self.y) {
            let z = dot(&theta[..d], row) + theta[d];
            let sp = softplus(z);
            let s = sigmoid(z);
            let mut coef = 0.0;
            for (l, &y) in ys.iter().enumerate() {
                let w = weight[l];
                if w == 0.0 {
                    continue;
                }
                let y = f64::from(y);
                value += w * (sp - y * z);
                coef += w * (s - y);
            }
            for (gj, xj) in g.iter_mut().zip(row) {
                *gj += coef * xj;
            }
            g[d] += coef;
        }
        (value, g)
    }

    /// `sum_l w_l loss_l(θ) + w_{L+1} ‖θ‖₂`.
    pub fn weighted_objective(&self, weight: &[f64], theta: &[f64]) -> f64 {
        self.smooth_part(weight, theta).0 + weight[self.num_labels()] * norm(theta)
    }
}

fn feature_map(row: &[f64]) -> Vec<f64> {
    let mut phi = row.to_vec();
    phi.push(1.0);
    phi
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Proximal-gradient solver for the weighted logistic problem.
#[derive(Clone, Debug)]
pub struct LogisticOracle {
    pub instance: MultilabelInstance,
    /// Stop when the proximal gradient mapping has at most this norm.
    pub tol: f64,
    pub max_iterations: usize,
}

impl LogisticOracle {
    pub fn new(instance: MultilabelInstance) -> Self {
        LogisticOracle {
            instance,
            tol: 1e-6,
            max_iterations: 10_000,
        }
    }

    /// Minimizes `sum_l w_l loss_l(θ) + w_{L+1} ‖θ‖₂` from `θ = 0`.
    ///
    /// Each step is `θ ← prox(θ − t ∇smooth)`, where the prox of the norm term
    /// shrinks the whole vector towards the origin. The step `t` starts from a
    /// Barzilai–Borwein estimate and is halved until the quadratic upper bound holds.
    pub fn minimize(&self, weight: &[f64]) -> Result<Vec<f64>, (usize, Vec<f64>)> {
        let inst = &self.instance;
        let lambda = weight[inst.num_labels()];
        let mut theta = vec![0.0; inst.dim()];
        let (mut f, mut g) = inst.smooth_part(weight, &theta);
        if norm(&g) <= lambda {
            return Ok(theta);
        }
        let prox = |v: &[f64], t: f64| -> Vec<f64> {
            let nv = norm(v);
            let shrink = if nv > 0.0 {
                (1.0 - t * lambda / nv).max(0.0)
            } else {
                0.0
            };
            v.iter().map(|x| x * shrink).collect()
        };
        let mut t = 1.0 / (1.0 + norm(&g));
        for iter in 0..self.max_iterations {
            let (next, f_next, g_next, step) = loop {
                let trial: Vec<f64> = theta.iter().zip(&g).map(|(x, gx)| x - t * gx).collect();
                let cand = prox(&trial, t);
                let diff: Vec<f64> = cand.iter().zip(&theta).map(|(a, b)| a - b).collect();
                let (fc, gc) = inst.smooth_part(weight, &cand);
                let bound = f + dot(&g, &diff) + dot(&diff, &diff) / (2.0 * t);
                if fc <= bound + 1e-12 * f.abs().max(1.0) || t < 1e-20 {
                    break (cand, fc, gc, diff);
                }
                t *= 0.5;
            };
            let mapping = norm(&step) / t;
            let s2 = dot(&step, &step);
            let dg: Vec<f64> = g_next.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy = dot(&step, &dg);
            theta = next;
            f = f_next;
            g = g_next;
            if mapping <= self.tol {
                return Ok(theta);
            }
            if t < 1e-20 {
                return Err((iter + 1, theta));
            }
            t = if sy > 0.0 {
                (s2 / sy).clamp(1e-10, 1e10)
            } else {
                t * 2.0
            };
        }
        Err((self.max_iterations, theta))
    }
}

impl WeightedOracle for LogisticOracle {
    fn num_objectives(&self) -> usize {
        self.instance.num_objectives()
    }

    fn solve(&mut self, weight: &WeightVector) -> Result<OracleOutput, OracleError> {
        let output = |theta: Vec<f64>| -> Result<OracleOutput, OracleError> {
            let objectives = ObjectiveVector::new(self.instance.objectives(&theta))
                .map_err(|e| OracleError::Contract(e.to_string()))?;
            Ok(OracleOutput {
                objectives,
                decision: theta,
            })
        };
        match self.minimize(weight.as_slice()) {
            Ok(theta) => output(theta),
            Err((iterations, theta)) => Err(OracleError::NonConvergent {
                iterations,
                best: output(theta).ok().map(Box::new),
            }),
        }
    }

    fn lower_bounds(&self) -> Option<ObjectiveVector> {
        ObjectiveVector::new(vec![0.0; self.num_objectives()]).ok()
    }

    fn tolerance(&self) -> f64 {
        self.tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::solve_weighted;

    fn central_difference(inst: &MultilabelInstance, l: usize, theta: &[f64]) -> Vec<f64> {
        let h = 1e-5;
        (0..theta.len())
            .map(|j| {
                let mut a = theta.to_vec();
                let mut b = theta.to_vec();
                a[j] += h;
                b[j] -= h;
                (inst.loss(l, &a) - inst.loss(l, &b)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for seed in 0..10 {
            let inst = MultilabelInstance::generate(15, 3, 2, seed);
            let theta: Vec<f64> = (0..inst.dim())
                .map(|_| rng.random_range(-2.0..2.0))
                .collect();
            for l in 0..2 {
                let g = inst.loss_gradient(l, &theta);
                let fd = central_difference(&inst, l, &theta);
                for (a, b) in g.iter().zip(&fd) {
                    assert!((a - b).abs() / a.abs().max(1.0) < 1e-4);
                }
            }
        }
    }

    #[test]
    fn all_weight_on_norm_gives_origin() {
        let inst = MultilabelInstance::generate(20, 2, 3, 5);
        let mut oracle = LogisticOracle::new(inst);
        let s = solve_weighted(&mut oracle, &WeightVector::unit(4, 3)).unwrap();
        assert!(s.decision.iter().all(|&v| v == 0.0));
        assert_eq!(s.objectives[3], 0.0);
    }

    #[test]
    fn generation_is_deterministic_with_binary_labels() {
        let a = MultilabelInstance::generate(50, 3, 2, 7);
        assert_eq!(a, MultilabelInstance::generate(50, 3, 2, 7));
        assert_eq!(a.labels().len(), 50);
        assert!(a
            .labels()
            .iter()
            .all(|r| r.len() == 2 && r.iter().all(|&v| v <= 1)));
    }

    #[test]
    fn solver_beats_zero_parameters() {
        let inst = MultilabelInstance::generate(50, 3, 2, 7);
        let w = [0.45, 0.45, 0.1];
        let oracle = LogisticOracle::new(inst.clone());
        let theta = oracle.minimize(&w).unwrap();
        let zero = vec![0.0; inst.dim()];
        assert!(inst.weighted_objective(&w, &theta) < inst.weighted_objective(&w, &zero));
    }

    #[test]
    fn matches_grid_search_on_tiny_instance() {
        let inst = MultilabelInstance::new(
            vec![vec![-1.0], vec![0.5], vec![1.5], vec![-0.3]],
            vec![vec![0, 1], vec![1, 0], vec![1, 1], vec![0, 0]],
        )
        .unwrap();
        let oracle = LogisticOracle::new(inst.clone());
        for w in [[0.3, 0.5, 0.2], [0.6, 0.1, 0.3]] {
            let theta = oracle.minimize(&w).unwrap();
            let found = inst.weighted_objective(&w, &theta);
            let mut grid_best = f64::INFINITY;
            let steps = 400;
            for a in 0..=steps {
                for b in 0..=steps {
                    let t = [
                        -5.0 + 10.0 * a as f64 / steps as f64,
                        -5.0 + 10.0 * b as f64 / steps as f64,
                    ];
                    grid_best = grid_best.min(inst.weighted_objective(&w, &t));
                }
            }
            assert!(found <= grid_best + 1e-9);
            assert!(grid_best - found < 1e-3);
        }
    }

    #[test]
    fn weighted_objective_is_midpoint_convex() {
        let inst = MultilabelInstance::generate(30, 3, 2, 11);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w = [0.3, 0.3, 0.4];
        for _ in 0..100 {
            let a: Vec<f64> = (0..inst.dim())
                .map(|_| rng.random_range(-3.0..3.0))
                .collect();
            let b: Vec<f64> = (0..inst.dim())
                .map(|_| rng.random_range(-3.0..3.0))
                .collect();
            let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
            let lhs = inst.weighted_objective(&w, &mid);
            let rhs = 0.5 * (inst.weighted_objective(&w, &a) + inst.weighted_objective(&w, &b));
            assert!(lhs <= rhs + 1e-9);
        }
    }

    #[test]
    fn json_uses_upper_case_matrix_names() {
        let inst = MultilabelInstance::generate(3, 2, 2, 1);
        let text = serde_json::to_string(&inst).unwrap();
        assert!(text.contains("\"X\"") && text.contains("\"Y\"") && text.contains("\"L\":2"));
        let back: MultilabelInstance = serde_json::from_str(&text).unwrap();
        assert_eq!(back, inst);
        let bad = r#"{"n":1,"d":1,"L":1,"X":[[0.0]],"Y":[[2]]}"#;
        assert!(serde_json::from_str::<MultilabelInstance>(bad).is_err());
    }
}
