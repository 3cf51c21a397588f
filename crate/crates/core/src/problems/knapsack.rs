use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{ObjectiveVector, OracleError, OracleOutput, WeightVector, WeightedOracle};

/// Largest size or value drawn by [`KnapsackInstance::generate`].
pub const MAX_GENERATED: u32 = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KnapsackError {
    #[error("knapsack needs at least one item and one objective")]
    Empty,
    #[error("item {item} has {got} values, expected {expected}")]
    RaggedValues {
        item: usize,
        got: usize,
        expected: usize,
    },
    #[error("declared {field} = {declared} does not match the data ({actual})")]
    CountMismatch {
        field: &'static str,
        declared: usize,
        actual: usize,
    },
}

/// Multi-objective 0/1 knapsack: pick items of integer size within an integer
/// capacity, maximizing `m` utilities at once.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KnapsackRecord", into = "KnapsackRecord")]
pub struct KnapsackInstance {
    sizes: Vec<u32>,
    /// `values[i][k]`: utility of item `i` for objective `k`.
    values: Vec<Vec<u32>>,
    capacity: u64,
    seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct KnapsackRecord {
    m: usize,
    q: usize,
    sizes: Vec<u32>,
    values: Vec<Vec<u32>>,
    capacity: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

impl TryFrom<KnapsackRecord> for KnapsackInstance {
    type Error = KnapsackError;
    fn try_from(r: KnapsackRecord) -> Result<Self, KnapsackError> {
        let inst = KnapsackInstance::new(r.sizes, r.values, r.capacity)?;
        if inst.num_items() != r.q {
            return Err(KnapsackError::CountMismatch {
                field: "q",
                declared: r.q,
                actual: inst.num_items(),
            });
        }
        if inst.num_objectives() != r.m {
            return Err(KnapsackError::CountMismatch {
                field: "m",
                declared: r.m,
                actual: inst.num_objectives(),
            });
        }
        Ok(KnapsackInstance {
            seed: r.seed,
            ..inst
        })
    }
}

impl From<KnapsackInstance> for KnapsackRecord {
    fn from(k: KnapsackInstance) -> Self {
        KnapsackRecord {
            m: k.num_objectives(),
            q: k.num_items(),
            sizes: k.sizes,
            values: k.values,
            capacity: k.capacity,
            seed: k.seed,
        }
    }
}

impl KnapsackInstance {
    pub fn new(
        sizes: Vec<u32>,
        values: Vec<Vec<u32>>,
        capacity: u64,
    ) -> Result<Self, KnapsackError> {
        if sizes.is_empty() || values.is_empty() || values[0].is_empty() {
            return Err(KnapsackError::Empty);
        }
        if values.len() != sizes.len() {
            return Err(KnapsackError::CountMismatch {
                field: "values rows",
                declared: values.len(),
                actual: sizes.len(),
            });
        }
        let m = values[0].len();
        if let Some((item, row)) = values.iter().enumerate().find(|(_, row)| row.len() != m) {
            return Err(KnapsackError::RaggedValues {
                item,
                got: row.len(),
                expected: m,
            });
        }
        Ok(KnapsackInstance {
            sizes,
            values,
            capacity,
            seed: None,
        })
    }

    /// `q` items with sizes and utilities uniform on `0..=1000` and capacity
    /// `round(500 q c)`. Deterministic in `seed`.
    pub fn generate(q: usize, m: usize, coverage: f64, seed: u64) -> Self {
        assert!(q >= 1 && m >= 1, "need q >= 1 and m >= 1");
        assert!(
            (0.0..=1.0).contains(&coverage),
            "coverage must lie in [0, 1]"
        );
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sizes = Vec::with_capacity(q);
        let mut values = Vec::with_capacity(q);
        for _ in 0..q {
            sizes.push(rng.random_range(0..=MAX_GENERATED));
            values.push(
                (0..m)
                    .map(|_| rng.random_range(0..=MAX_GENERATED))
                    .collect(),
            );
        }
        KnapsackInstance {
            sizes,
            values,
            capacity: capacity_for(q, coverage),
            seed: Some(seed),
        }
    }

    pub fn num_items(&self) -> usize {
        self.sizes.len()
    }

    pub fn num_objectives(&self) -> usize {
        self.values[0].len()
    }

    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    pub fn values(&self) -> &[Vec<u32>] {
        &self.values
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Negated utilities of a selection, so that every objective is minimized.
    pub fn objectives_of(&self, picked: &[bool]) -> Vec<f64> {
        let mut totals = vec![0u64; self.num_objectives()];
        for (i, _) in picked.iter().enumerate().filter(|(_, &p)| p) {
            for (t, &v) in totals.iter_mut().zip(&self.values[i]) {
                *t += u64::from(v);
            }
        }
        totals.iter().map(|&t| -(t as f64)).collect()
    }

    pub fn total_size(&self, picked: &[bool]) -> u64 {
        picked
            .iter()
            .zip(&self.sizes)
            .filter(|(&p, _)| p)
            .map(|(_, &s)| u64::from(s))
            .sum()
    }

    /// Exact maximizer of `sum_i (w · v_i) x_i` by dynamic programming over capacity.
    ///
    /// Ties on the weighted value are broken towards the larger total utility
    /// summed over all objectives, so a zero weight component never yields a
    /// dominated selection.
    pub fn best_selection(&self, weight: &[f64]) -> Vec<bool> {
        let q = self.num_items();
        let profit: Vec<f64> = self
            .values
            .iter()
            .map(|row| row.iter().zip(weight).map(|(&v, w)| f64::from(v) * w).sum())
            .collect();
        let total: Vec<u64> = self
            .values
            .iter()
            .map(|row| row.iter().map(|&v| u64::from(v)).sum())
            .collect();
        let tie = 1e-12 * (1.0 + profit.iter().sum::<f64>());

        let cap = self
            .capacity
            .min(self.sizes.iter().map(|&s| u64::from(s)).sum()) as usize;
        let mut best = vec![(0.0f64, 0u64); cap + 1];
        let mut take = vec![false; q * (cap + 1)];
        for i in 0..q {
            let s = self.sizes[i] as usize;
            if s > cap {
                continue;
            }
            for c in (s..=cap).rev() {
                let cand = (best[c - s].0 + profit[i], best[c - s].1 + total[i]);
                let cur = best[c];
                let better = cand.0 > cur.0 + tie || (cand.0 >= cur.0 - tie && cand.1 > cur.1);
                if better {
                    best[c] = cand;
                    take[i * (cap + 1) + c] = true;
                }
            }
        }
        let mut picked = vec![false; q];
        let mut c = cap;
        for i in (0..q).rev() {
            if take[i * (cap + 1) + c] {
                picked[i] = true;
                c -= self.sizes[i] as usize;
            }
        }
        picked
    }
}

/// `round(500 q c)`.
pub fn capacity_for(q: usize, coverage: f64) -> u64 {
    (500.0 * q as f64 * coverage).round() as u64
}

/// Weighted-sum oracle over a [`KnapsackInstance`].
#[derive(Clone, Debug)]
pub struct KnapsackOracle {
    pub instance: KnapsackInstance,
}

impl KnapsackOracle {
    pub fn new(instance: KnapsackInstance) -> Self {
        KnapsackOracle { instance }
    }
}

impl WeightedOracle for KnapsackOracle {
    fn num_objectives(&self) -> usize {
        self.instance.num_objectives()
    }

    fn solve(&mut self, weight: &WeightVector) -> Result<OracleOutput, OracleError> {
        let picked = self.instance.best_selection(weight.as_slice());
        let objectives = ObjectiveVector::new(self.instance.objectives_of(&picked))
            .map_err(|e| OracleError::Contract(e.to_string()))?;
        Ok(OracleOutput {
            objectives,
            decision: picked.iter().map(|&p| f64::from(u8::from(p))).collect(),
        })
    }

    fn lower_bounds(&self) -> Option<ObjectiveVector> {
        let m = self.instance.num_objectives();
        let mut lb = vec![0.0; m];
        for row in self.instance.values() {
            for (l, &v) in lb.iter_mut().zip(row) {
                *l -= f64::from(v);
            }
        }
        ObjectiveVector::new(lb).ok()
    }
}
