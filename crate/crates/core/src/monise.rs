//! Many-objective NISE.
//!
//! Every archived solution `r^i`, found with weight `w^i`, proves that no
//! feasible point lies strictly below its supporting hyperplane. The
//! intersection of those half-spaces (the relaxation) bounds the frontier from
//! below; the archive itself bounds it from above. The next weight is the one
//! along which the two bounds are furthest apart. That choice is a bilevel
//! problem; replacing the inner weight optimization by its KKT conditions, with
//! big-M constraints for complementarity, turns it into a MILP.
//!
//! All of this happens in normalized objective space, where the utopian point
//! is the origin and the archive spans `[0, 1]` in each objective.

use std::time::Instant;

use monise_mip::{
    branch_and_bound_with, BranchOptions, LinearProgram, MilpModel, MilpResult, MilpStatus,
    Relation, Sense,
};
use thiserror::Error;

use crate::domain::{
    individual_minima, solve_weighted, utopian_from_minima, CoreError, Frontier,
    IndividualMinimumError, ObjectiveVector, OracleError, WeightVector, WeightedOracle,
    WeightedSolution,
};

/// Smallest range used when normalizing an objective.
pub const RANGE_FLOOR: f64 = 1e-12;
/// How far an archive point may sit below the utopian point before it is rejected.
pub const UTOPIAN_SLACK: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelectionError {
    #[error("weight selection needs a nonempty archive")]
    EmptyArchive,
    #[error("archive point {index} lies below the utopian point in objective {objective}")]
    BelowUtopian { index: usize, objective: usize },
    #[error("archive entries disagree on the number of objectives")]
    DimensionMismatch,
    #[error("weight-selection MILP reported infeasible; the model is always feasible, so this is a solver fault")]
    Infeasible,
    #[error("weight-selection MILP reported unbounded")]
    Unbounded,
    #[error("node budget exhausted after {nodes} nodes")]
    Timeout {
        nodes: usize,
        incumbent: Option<Box<WeightSelectionResult>>,
    },
    #[error("returned weight is invalid: {0}")]
    InvalidWeight(#[from] CoreError),
}

/// Per-objective affine map `r ↦ (r − offset) / range`.
#[derive(Clone, Debug, PartialEq)]
pub struct Normalization {
    pub offset: Vec<f64>,
    pub range: Vec<f64>,
}

impl Normalization {
    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        r.iter()
            .zip(self.offset.iter().zip(&self.range))
            .map(|(v, (o, s))| (v - o) / s)
            .collect()
    }

    pub fn invert(&self, r: &[f64]) -> Vec<f64> {
        r.iter()
            .zip(self.offset.iter().zip(&self.range))
            .map(|(v, (o, s))| v * s + o)
            .collect()
    }

    /// The simplex weight that ranks normalized points as `w` ranks original ones.
    pub fn weight_to_normalized(&self, w: &[f64]) -> Vec<f64> {
        let scaled: Vec<f64> = w.iter().zip(&self.range).map(|(w, s)| w * s).collect();
        let sum: f64 = scaled.iter().sum();
        scaled.iter().map(|v| v / sum).collect()
    }

    /// Inverse of [`weight_to_normalized`](Self::weight_to_normalized).
    pub fn weight_from_normalized(&self, w: &[f64]) -> Vec<f64> {
        let scaled: Vec<f64> = w.iter().zip(&self.range).map(|(w, s)| w / s).collect();
        let sum: f64 = scaled.iter().sum();
        scaled.iter().map(|v| v / sum).collect()
    }
}

/// Maps the archive so the utopian point is the origin and each objective's
/// largest archived value is one.
pub fn normalize_archive<P: AsRef<[f64]>>(
    points: &[P],
    utopian: &[f64],
) -> Result<(Vec<Vec<f64>>, Normalization), SelectionError> {
    if points.is_empty() {
        return Err(SelectionError::EmptyArchive);
    }
    let m = utopian.len();
    let mut range = vec![RANGE_FLOOR; m];
    for (index, p) in points.iter().enumerate() {
        let p = p.as_ref();
        if p.len() != m {
            return Err(SelectionError::DimensionMismatch);
        }
        for (objective, (v, z)) in p.iter().zip(utopian).enumerate() {
            let shifted = v - z;
            if shifted < -UTOPIAN_SLACK * (1.0 + z.abs()) {
                return Err(SelectionError::BelowUtopian { index, objective });
            }
            range[objective] = range[objective].max(shifted);
        }
    }
    let norm = Normalization {
        offset: utopian.to_vec(),
        range,
    };
    let mapped = points
        .iter()
        .map(|p| {
            norm.apply(p.as_ref())
                .into_iter()
                .map(|v| v.max(0.0))
                .collect()
        })
        .collect();
    Ok((mapped, norm))
}

/// Complementarity bounds for the MILP, in normalized units.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum BigM {
    /// `m` for the approximation slack; for the objective multipliers, the
    /// largest coordinate any vertex of the relaxation can reach, plus one.
    #[default]
    Auto,
    Explicit {
        mu: f64,
        nu: f64,
    },
}

/// The data of one weight-selection problem.
#[derive(Clone, Debug)]
pub struct WeightSelectionModel {
    archive: Vec<WeightedSolution>,
    utopian: ObjectiveVector,
    normalization: Normalization,
    points: Vec<Vec<f64>>,
    weights: Vec<Vec<f64>>,
    pub big_m: BigM,
}

impl WeightSelectionModel {
    pub fn new(
        archive: Vec<WeightedSolution>,
        utopian: ObjectiveVector,
    ) -> Result<Self, SelectionError> {
        let (points, normalization) = normalize_archive(
            &archive
                .iter()
                .map(|s| s.objectives.as_slice())
                .collect::<Vec<_>>(),
            utopian.as_slice(),
        )?;
        let weights = archive
            .iter()
            .map(|s| normalization.weight_to_normalized(s.weight.as_slice()))
            .collect();
        Ok(WeightSelectionModel {
            archive,
            utopian,
            normalization,
            points,
            weights,
            big_m: BigM::Auto,
        })
    }

    pub fn with_big_m(mut self, big_m: BigM) -> Self {
        self.big_m = big_m;
        self
    }

    pub fn num_objectives(&self) -> usize {
        self.utopian.len()
    }

    pub fn archive(&self) -> &[WeightedSolution] {
        &self.archive
    }

    pub fn utopian(&self) -> &ObjectiveVector {
        &self.utopian
    }

    pub fn normalization(&self) -> &Normalization {
        &self.normalization
    }

    pub fn normalized_points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn normalized_weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// `(big_m_mu, big_m_nu)` after resolving [`BigM::Auto`].
    pub fn big_m_values(&self) -> (f64, f64) {
        match self.big_m {
            BigM::Explicit { mu, nu } => (mu, nu),
            BigM::Auto => {
                let m = self.num_objectives() as f64;
                // A relaxation vertex has r_j <= (w^i · r^i) / w^i_j for any i with w^i_j > 0.
                let mut reach: f64 = 1.0;
                for (w, r) in self.weights.iter().zip(&self.points) {
                    let level: f64 = w.iter().zip(r).map(|(a, b)| a * b).sum();
                    for &wj in w {
                        if wj > 0.0 {
                            reach = reach.max(level / wj);
                        }
                    }
                }
                (m, (2.0 * m).max(1.0 + reach))
            }
        }
    }

    /// Residuals of the KKT conditions that a selection must satisfy.
    pub fn kkt_residuals(&self, res: &WeightSelectionResult) -> KktResiduals {
        let m = self.num_objectives();
        let w = &res.normalized_weight;
        let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
        let multiplier_sum = (res.duals.mu.iter().sum::<f64>() - 1.0).abs();
        let mut stationarity: f64 = 0.0;
        for j in 0..m {
            let mix: f64 = res
                .duals
                .mu
                .iter()
                .zip(&self.points)
                .map(|(mu, r)| mu * r[j])
                .sum();
            let s = res.r_low[j] - mix - res.duals.nu[j] + res.duals.xi;
            stationarity = stationarity.max(s.abs());
        }
        let complementarity_mu = res
            .duals
            .mu
            .iter()
            .zip(&self.points)
            .map(|(mu, r)| (mu * (dot(w, r) - res.v)).abs())
            .fold(0.0, f64::max);
        let complementarity_nu = res
            .duals
            .nu
            .iter()
            .zip(w)
            .map(|(nu, wj)| (nu * wj).abs())
            .fold(0.0, f64::max);
        let gap_identity = (res.mu - (res.v - dot(w, &res.r_low))).abs();
        let xi_identity = (res.mu - res.duals.xi).abs();
        KktResiduals {
            multiplier_sum,
            stationarity,
            complementarity_mu,
            complementarity_nu,
            gap_identity,
            xi_identity,
        }
    }
}

/// Column positions of the weight-selection MILP.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MilpLayout {
    pub m: usize,
    pub l: usize,
}

impl MilpLayout {
    pub fn w(&self, j: usize) -> usize {
        j
    }
    pub fn r_low(&self, j: usize) -> usize {
        self.m + j
    }
    pub fn v(&self) -> usize {
        2 * self.m
    }
    pub fn mu(&self, i: usize) -> usize {
        2 * self.m + 1 + i
    }
    pub fn nu(&self, j: usize) -> usize {
        2 * self.m + 1 + self.l + j
    }
    pub fn xi(&self) -> usize {
        3 * self.m + 1 + self.l
    }
    pub fn mu_b(&self, i: usize) -> usize {
        self.num_continuous() + i
    }
    pub fn nu_b(&self, j: usize) -> usize {
        self.num_continuous() + self.l + j
    }
    pub fn num_continuous(&self) -> usize {
        3 * self.m + 2 + self.l
    }
    pub fn num_binaries(&self) -> usize {
        self.l + self.m
    }
    pub fn num_vars(&self) -> usize {
        self.num_continuous() + self.num_binaries()
    }
}

/// Builds the MILP whose optimum is the largest gap between relaxation and
/// approximation, and whose `w` columns hold the weight attaining it.
///
/// Rows, in order: stationarity (one per objective), multiplier sum,
/// relaxation (one per archive entry), approximation (one per entry), simplex,
/// then the big-M pairs for the archive entries and for the objectives.
pub fn build_weight_milp(model: &WeightSelectionModel) -> (MilpModel, MilpLayout) {
    let m = model.num_objectives();
    let l = model.points.len();
    let lay = MilpLayout { m, l };
    let (big_mu, big_nu) = model.big_m_values();
    let mut lp = LinearProgram::new(lay.num_vars());
    lp.set_objective(Sense::Maximize, &[(lay.xi(), 1.0)]);
    for j in 0..m {
        lp.set_name(lay.w(j), format!("w{j}"));
        lp.set_name(lay.r_low(j), format!("rlow{j}"));
        lp.set_name(lay.nu(j), format!("nu{j}"));
        lp.set_name(lay.nu_b(j), format!("nuB{j}"));
        lp.set_bounds(lay.w(j), 0.0, 1.0);
    }
    lp.set_name(lay.v(), "v");
    lp.set_name(lay.xi(), "xi");
    lp.set_bounds(lay.xi(), f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..l {
        lp.set_name(lay.mu(i), format!("mu{i}"));
        lp.set_name(lay.mu_b(i), format!("muB{i}"));
        lp.set_bounds(lay.mu(i), 0.0, 1.0);
    }

    for j in 0..m {
        let mut row = vec![(lay.r_low(j), 1.0), (lay.nu(j), -1.0), (lay.xi(), 1.0)];
        row.extend((0..l).map(|i| (lay.mu(i), -model.points[i][j])));
        lp.add_labeled_row(format!("stationarity{j}"), &row, Relation::Eq, 0.0);
    }
    let sum_mu: Vec<(usize, f64)> = (0..l).map(|i| (lay.mu(i), 1.0)).collect();
    lp.add_labeled_row("multipliers", &sum_mu, Relation::Eq, 1.0);
    for i in 0..l {
        let wi = &model.weights[i];
        let level: f64 = wi.iter().zip(&model.points[i]).map(|(a, b)| a * b).sum();
        let row: Vec<(usize, f64)> = (0..m).map(|j| (lay.r_low(j), wi[j])).collect();
        lp.add_labeled_row(format!("relaxation{i}"), &row, Relation::Ge, level);
    }
    for i in 0..l {
        let mut row: Vec<(usize, f64)> = (0..m).map(|j| (lay.w(j), model.points[i][j])).collect();
        row.push((lay.v(), -1.0));
        lp.add_labeled_row(format!("approximation{i}"), &row, Relation::Ge, 0.0);
    }
    let simplex: Vec<(usize, f64)> = (0..m).map(|j| (lay.w(j), 1.0)).collect();
    lp.add_labeled_row("simplex", &simplex, Relation::Eq, 1.0);
    for i in 0..l {
        let mut row: Vec<(usize, f64)> = (0..m).map(|j| (lay.w(j), model.points[i][j])).collect();
        row.push((lay.v(), -1.0));
        row.push((lay.mu_b(i), -big_mu));
        lp.add_labeled_row(format!("slack_on{i}"), &row, Relation::Le, 0.0);
        lp.add_labeled_row(
            format!("mult_off{i}"),
            &[(lay.mu(i), 1.0), (lay.mu_b(i), 1.0)],
            Relation::Le,
            1.0,
        );
    }
    for j in 0..m {
        lp.add_labeled_row(
            format!("weight_on{j}"),
            &[(lay.w(j), 1.0), (lay.nu_b(j), -1.0)],
            Relation::Le,
            0.0,
        );
        lp.add_labeled_row(
            format!("nu_off{j}"),
            &[(lay.nu(j), 1.0), (lay.nu_b(j), big_nu)],
            Relation::Le,
            big_nu,
        );
    }

    let mut milp = MilpModel::new(lp);
    for i in 0..l {
        milp.add_binary(lay.mu_b(i));
    }
    for j in 0..m {
        milp.add_binary(lay.nu_b(j));
    }
    (milp, lay)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionDuals {
    /// One per archive entry; a convex combination.
    pub mu: Vec<f64>,
    /// One per objective.
    pub nu: Vec<f64>,
    /// Multiplier of the simplex equality; equals the estimation error.
    pub xi: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionBinaries {
    pub mu_b: Vec<bool>,
    pub nu_b: Vec<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct KktResiduals {
    pub multiplier_sum: f64,
    pub stationarity: f64,
    pub complementarity_mu: f64,
    pub complementarity_nu: f64,
    pub gap_identity: f64,
    pub xi_identity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        [
            self.multiplier_sum,
            self.stationarity,
            self.complementarity_mu,
            self.complementarity_nu,
            self.gap_identity,
            self.xi_identity,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// The chosen weight and the certificate behind it. Everything except
/// `weight` is in normalized units.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSelectionResult {
    /// Weight in original objective units.
    pub weight: WeightVector,
    pub normalized_weight: Vec<f64>,
    /// Estimation error.
    pub mu: f64,
    /// Lowest point of the relaxation along the weight.
    pub r_low: Vec<f64>,
    /// Approximation level `min_i w · r^i`.
    pub v: f64,
    pub duals: SelectionDuals,
    pub binaries: SelectionBinaries,
    pub kkt: KktResiduals,
    pub node_count: usize,
}

/// How to choose among weights with the same optimal gap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SelectionTieBreak {
    /// Whatever optimal vertex branch-and-bound returns.
    #[default]
    AnyOptimal,
    /// Re-solve with the gap fixed at its optimum, minimizing the first weight.
    LowestFirstWeight,
}

#[derive(Clone, Debug, Default)]
pub struct SelectionOptions {
    pub branch: BranchOptions,
    pub tie_break: SelectionTieBreak,
}

/// Solves the weight-selection MILP.
pub fn next_weight(
    model: &WeightSelectionModel,
    opts: &SelectionOptions,
) -> Result<WeightSelectionResult, SelectionError> {
    let (milp, lay) = build_weight_milp(model);
    let res = branch_and_bound_with(&milp, &opts.branch);
    let first = interpret(model, &lay, &res)?;
    match opts.tie_break {
        SelectionTieBreak::AnyOptimal => Ok(first),
        SelectionTieBreak::LowestFirstWeight => {
            let mut milp = milp;
            let floor = first.mu - 1e-7 * (1.0 + first.mu.abs());
            milp.lp
                .add_labeled_row("gap_floor", &[(lay.xi(), 1.0)], Relation::Ge, floor);
            milp.lp.set_objective(Sense::Maximize, &[(lay.w(0), -1.0)]);
            let second = branch_and_bound_with(&milp, &opts.branch);
            match interpret(model, &lay, &second) {
                Ok(mut r) => {
                    r.node_count += first.node_count;
                    Ok(r)
                }
                Err(_) => Ok(first),
            }
        }
    }
}

fn interpret(
    model: &WeightSelectionModel,
    lay: &MilpLayout,
    res: &MilpResult,
) -> Result<WeightSelectionResult, SelectionError> {
    let extract = || -> Result<WeightSelectionResult, SelectionError> {
        let x = &res.values;
        let normalized_weight: Vec<f64> = (0..lay.m).map(|j| x[lay.w(j)].max(0.0)).collect();
        let weight = WeightVector::from_direction(
            &model
                .normalization
                .weight_from_normalized(&normalized_weight),
        )?;
        let mut out = WeightSelectionResult {
            weight,
            normalized_weight,
            mu: x[lay.xi()],
            r_low: (0..lay.m).map(|j| x[lay.r_low(j)]).collect(),
            v: x[lay.v()],
            duals: SelectionDuals {
                mu: (0..lay.l).map(|i| x[lay.mu(i)]).collect(),
                nu: (0..lay.m).map(|j| x[lay.nu(j)]).collect(),
                xi: x[lay.xi()],
            },
            binaries: SelectionBinaries {
                mu_b: (0..lay.l).map(|i| x[lay.mu_b(i)] > 0.5).collect(),
                nu_b: (0..lay.m).map(|j| x[lay.nu_b(j)] > 0.5).collect(),
            },
            kkt: KktResiduals::default(),
            node_count: res.node_count,
        };
        out.kkt = model.kkt_residuals(&out);
        Ok(out)
    };
    match res.status {
        MilpStatus::Optimal => extract(),
        MilpStatus::Infeasible => Err(SelectionError::Infeasible),
        MilpStatus::Unbounded => Err(SelectionError::Unbounded),
        MilpStatus::IterationLimit => Err(SelectionError::Timeout {
            nodes: res.node_count,
            incumbent: if res.has_incumbent() {
                extract().ok().map(Box::new)
            } else {
                None
            },
        }),
    }
}

#[derive(Clone, Debug)]
pub struct MoniseConfig {
    /// Stop once the estimation error (normalized units) is at most this.
    pub mu_stop: f64,
    /// Number of weight selections; `None` means `5 m`.
    pub max_iter: Option<usize>,
    /// Subtracted from every individual minimum to form the utopian point.
    pub utopian_offset: f64,
    pub big_m: BigM,
    pub selection: SelectionOptions,
}

impl Default for MoniseConfig {
    fn default() -> Self {
        MoniseConfig {
            mu_stop: 1e-3,
            max_iter: None,
            utopian_offset: 0.0,
            big_m: BigM::Auto,
            selection: SelectionOptions::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum MoniseError {
    #[error("MONISE needs at least two objectives, got {0}")]
    TooFewObjectives(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{source}")]
    IndividualMinimum {
        #[source]
        source: IndividualMinimumError,
    },
    #[error("oracle failed after {} solutions: {source}", partial.frontier.len())]
    Oracle {
        #[source]
        source: OracleError,
        partial: Box<MoniseRun>,
    },
    #[error("weight selection failed after {} solutions: {source}", partial.frontier.len())]
    Selection {
        #[source]
        source: SelectionError,
        partial: Box<MoniseRun>,
    },
}

impl MoniseError {
    /// The run as far as it got, when the failure happened inside the loop.
    pub fn partial(&self) -> Option<&MoniseRun> {
        match self {
            MoniseError::Oracle { partial, .. } | MoniseError::Selection { partial, .. } => {
                Some(partial)
            }
            _ => None,
        }
    }

    pub fn is_timeout(&self) -> bool {
        matches!(
            self,
            MoniseError::Selection {
                source: SelectionError::Timeout { .. },
                ..
            }
        )
    }
}

#[derive(Clone, Debug)]
pub struct MoniseRun {
    /// Deduplicated solutions and the per-iteration estimation errors.
    pub frontier: Frontier,
    /// Every oracle result in call order, repeats included.
    pub archive: Vec<WeightedSolution>,
    pub selections: Vec<WeightSelectionResult>,
    pub oracle_seconds: f64,
    pub selection_seconds: f64,
}

pub fn run_monise<O: WeightedOracle + ?Sized>(
    oracle: &mut O,
    config: &MoniseConfig,
) -> Result<Frontier, MoniseError> {
    run_monise_traced(oracle, config).map(|run| run.frontier)
}

/// Individual minima, then the uniform weight, then one MILP-selected weight
/// per iteration until the estimation error reaches `mu_stop`.
///
/// Repeated oracle results stay in the MILP archive: they carry a new
/// relaxation constraint even though they add no new point.
pub fn run_monise_traced<O: WeightedOracle + ?Sized>(
    oracle: &mut O,
    config: &MoniseConfig,
) -> Result<MoniseRun, MoniseError> {
    let m = oracle.num_objectives();
    if m < 2 {
        return Err(MoniseError::TooFewObjectives(m));
    }
    if !(config.mu_stop > 0.0) {
        return Err(MoniseError::InvalidConfig(format!(
            "mu_stop must be positive, got {}",
            config.mu_stop
        )));
    }
    if !(config.utopian_offset >= 0.0) {
        return Err(MoniseError::InvalidConfig(format!(
            "utopian_offset must be nonnegative, got {}",
            config.utopian_offset
        )));
    }
    let max_iter = config.max_iter.unwrap_or(5 * m);

    let clock = Instant::now();
    let minima =
        individual_minima(oracle).map_err(|source| MoniseError::IndividualMinimum { source })?;
    let utopian = utopian_from_minima(&minima, config.utopian_offset);
    let mut run = MoniseRun {
        frontier: Frontier::new(utopian.clone()),
        archive: Vec::new(),
        selections: Vec::new(),
        oracle_seconds: clock.elapsed().as_secs_f64(),
        selection_seconds: 0.0,
    };
    for s in minima {
        run.frontier.push(s.clone());
        run.archive.push(s);
    }

    let mut weight = WeightVector::uniform(m);
    for iteration in 0..=max_iter {
        let clock = Instant::now();
        let solved = solve_weighted(oracle, &weight);
        run.oracle_seconds += clock.elapsed().as_secs_f64();
        let sol = match solved {
            Ok(s) => s,
            Err(source) => {
                return Err(MoniseError::Oracle {
                    source,
                    partial: Box::new(run),
                })
            }
        };
        run.frontier.push(sol.clone());
        run.archive.push(sol);
        if iteration == max_iter {
            break;
        }

        let clock = Instant::now();
        let selected = WeightSelectionModel::new(run.archive.clone(), utopian.clone())
            .map(|model| model.with_big_m(config.big_m))
            .and_then(|model| next_weight(&model, &config.selection));
        run.selection_seconds += clock.elapsed().as_secs_f64();
        let selection = match selected {
            Ok(s) => s,
            Err(source) => {
                return Err(MoniseError::Selection {
                    source,
                    partial: Box::new(run),
                })
            }
        };
        run.frontier.mu_history.push(selection.mu);
        let done = selection.mu <= config.mu_stop;
        weight = selection.weight.clone();
        run.selections.push(selection);
        if done {
            break;
        }
    }
    Ok(run)
}
