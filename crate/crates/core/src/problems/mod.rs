//! Benchmark problems exposed as weighted-sum oracles.

mod knapsack;
mod multilabel;
mod pointset;
mod quadratic;

use serde::{Deserialize, Serialize};

use crate::domain::WeightedOracle;

pub use knapsack::{capacity_for, KnapsackError, KnapsackInstance, KnapsackOracle, MAX_GENERATED};
pub use multilabel::{LogisticOracle, MultilabelError, MultilabelInstance, LABEL_NOISE};
pub use pointset::PointSetOracle;
pub use quadratic::QuadraticSimplex;

/// A serializable problem instance, tagged by `"type"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Instance {
    Knapsack(KnapsackInstance),
    Multilabel(MultilabelInstance),
    Quadratic(QuadraticSimplex),
}

impl Instance {
    pub fn num_objectives(&self) -> usize {
        match self {
            Instance::Knapsack(k) => k.num_objectives(),
            Instance::Multilabel(ml) => ml.num_objectives(),
            Instance::Quadratic(q) => q.m,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Knapsack(_) => "knapsack",
            Instance::Multilabel(_) => "multilabel",
            Instance::Quadratic(_) => "quadratic",
        }
    }

    pub fn oracle(&self) -> Box<dyn WeightedOracle> {
        match self {
            Instance::Knapsack(k) => Box::new(KnapsackOracle::new(k.clone())),
            Instance::Multilabel(ml) => Box::new(LogisticOracle::new(ml.clone())),
            Instance::Quadratic(q) => Box::new(*q),
        }
    }
}
