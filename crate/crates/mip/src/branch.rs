//! Best-bound branch-and-bound over binary variables.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::model::{LinearProgram, ModelError};
use crate::simplex::{solve_with_bounds, LpStatus, SimplexOptions};

/// A linear program in which some variables are restricted to `{0, 1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MilpModel {
    pub lp: LinearProgram,
    binaries: Vec<usize>,
}

impl MilpModel {
    pub fn new(lp: LinearProgram) -> Self {
        MilpModel {
            lp,
            binaries: Vec::new(),
        }
    }

    /// Marks `j` as binary and clamps its bounds to `[0, 1]`.
    pub fn add_binary(&mut self, j: usize) {
        if !self.binaries.contains(&j) {
            self.binaries.push(j);
            self.binaries.sort_unstable();
        }
        self.lp.set_bounds(j, 0.0, 1.0);
    }

    pub fn binaries(&self) -> &[usize] {
        &self.binaries
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.lp.validate()?;
        for &j in &self.binaries {
            if j >= self.lp.num_vars() {
                return Err(ModelError::UnknownVariable {
                    row: usize::MAX,
                    index: j,
                    num_vars: self.lp.num_vars(),
                });
            }
            if self.lp.lower()[j] < 0.0 || self.lp.upper()[j] > 1.0 {
                return Err(ModelError::BinaryBounds(j));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Node budget exhausted; `values` holds the best incumbent if any was found.
    IterationLimit,
}

#[derive(Clone, Debug)]
pub struct BranchOptions {
    pub max_nodes: usize,
    pub integrality_tol: f64,
    /// Nodes whose relaxation bound does not beat the incumbent by more than
    /// this (absolute) amount are pruned.
    pub prune_tol: f64,
    pub simplex: SimplexOptions,
}

impl Default for BranchOptions {
    fn default() -> Self {
        BranchOptions {
            max_nodes: 200_000,
            integrality_tol: 1e-6,
            prune_tol: 1e-9,
            simplex: SimplexOptions::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MilpResult {
    pub status: MilpStatus,
    pub values: Vec<f64>,
    pub objective_value: f64,
    pub node_count: usize,
    /// Objective of each successive incumbent, in discovery order.
    pub incumbent_trace: Vec<f64>,
}

impl MilpResult {
    pub fn has_incumbent(&self) -> bool {
        !self.incumbent_trace.is_empty()
    }
}

struct Node {
    /// Relaxation bound inherited from the parent, in maximization orientation.
    bound: f64,
    id: usize,
    fixings: Vec<(usize, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap on bound; older nodes first on ties.
        self.bound
            .total_cmp(&other.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

pub fn branch_and_bound(model: &MilpModel) -> MilpResult {
    branch_and_bound_with(model, &BranchOptions::default())
}

pub fn branch_and_bound_with(model: &MilpModel, opts: &BranchOptions) -> MilpResult {
    let lp = &model.lp;
    let n = lp.num_vars();
    let sign = lp.sense().sign();
    let base_lower = lp.lower().to_vec();
    let base_upper = lp.upper().to_vec();

    let mut heap = BinaryHeap::new();
    heap.push(Node {
        bound: f64::INFINITY,
        id: 0,
        fixings: Vec::new(),
    });
    let mut next_id = 1usize;
    let mut nodes = 0usize;
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut trace = Vec::new();
    let mut root_unbounded = false;

    let mut lower = base_lower.clone();
    let mut upper = base_upper.clone();

    while let Some(node) = heap.pop() {
        if let Some((best, _)) = &incumbent {
            if node.bound <= best + opts.prune_tol {
                continue;
            }
        }
        if nodes >= opts.max_nodes {
            heap.push(node);
            break;
        }
        nodes += 1;

        lower.copy_from_slice(&base_lower);
        upper.copy_from_slice(&base_upper);
        for &(j, v) in &node.fixings {
            lower[j] = v;
            upper[j] = v;
        }
        let res = solve_with_bounds(lp, &lower, &upper, &opts.simplex);
        match res.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                if node.id == 0 {
                    root_unbounded = true;
                    break;
                }
                continue;
            }
            LpStatus::IterationLimit => continue,
        }
        let value = sign * res.objective;
        if let Some((best, _)) = &incumbent {
            if value <= best + opts.prune_tol {
                continue;
            }
        }

        // Most fractional binary; lowest index on ties.
        let mut branch_var: Option<(usize, f64)> = None;
        for &j in model.binaries() {
            let x = res.values[j];
            let frac = (x - x.round()).abs();
            if frac > opts.integrality_tol {
                let closeness = (x - 0.5).abs();
                match branch_var {
                    Some((_, c)) if c <= closeness => {}
                    _ => branch_var = Some((j, closeness)),
                }
            }
        }

        match branch_var {
            None => {
                let candidate = polish(model, &res.values, &base_lower, &base_upper, opts)
                    .unwrap_or_else(|| {
                        let mut x = res.values.clone();
                        for &j in model.binaries() {
                            x[j] = x[j].round();
                        }
                        (value, x)
                    });
                let improves = incumbent
                    .as_ref()
                    .is_none_or(|(best, _)| candidate.0 > *best);
                if improves {
                    trace.push(sign * candidate.0);
                    incumbent = Some(candidate);
                }
            }
            Some((j, _)) => {
                for v in [0.0, 1.0] {
                    let mut fixings = node.fixings.clone();
                    fixings.push((j, v));
                    heap.push(Node {
                        bound: value,
                        id: next_id,
                        fixings,
                    });
                    next_id += 1;
                }
            }
        }
    }

    if root_unbounded {
        return MilpResult {
            status: MilpStatus::Unbounded,
            values: vec![0.0; n],
            objective_value: sign * f64::INFINITY,
            node_count: nodes,
            incumbent_trace: trace,
        };
    }
    let exhausted = heap.iter().any(|node| {
        incumbent
            .as_ref()
            .is_none_or(|(b, _)| node.bound > b + opts.prune_tol)
    });
    match incumbent {
        Some((value, x)) => MilpResult {
            status: if exhausted {
                MilpStatus::IterationLimit
            } else {
                MilpStatus::Optimal
            },
            values: x,
            objective_value: sign * value,
            node_count: nodes,
            incumbent_trace: trace,
        },
        None => MilpResult {
            status: if exhausted {
                MilpStatus::IterationLimit
            } else {
                MilpStatus::Infeasible
            },
            values: vec![0.0; n],
            objective_value: f64::NAN,
            node_count: nodes,
            incumbent_trace: trace,
        },
    }
}

/// Re-solves with every binary pinned to its rounded value so the reported
/// point satisfies the rows exactly rather than up to the integrality tolerance.
fn polish(
    model: &MilpModel,
    x: &[f64],
    base_lower: &[f64],
    base_upper: &[f64],
    opts: &BranchOptions,
) -> Option<(f64, Vec<f64>)> {
    let mut lower = base_lower.to_vec();
    let mut upper = base_upper.to_vec();
    for &j in model.binaries() {
        let v = x[j].round();
        lower[j] = v;
        upper[j] = v;
    }
    let res = solve_with_bounds(&model.lp, &lower, &upper, &opts.simplex);
    (res.status == LpStatus::Optimal).then(|| (model.lp.sense().sign() * res.objective, res.values))
}
