//! Dense-tableau two-phase primal simplex.
//!
//! Variables are shifted, mirrored or split so that every standard-form column
//! is nonnegative; finite upper bounds become explicit rows. Fixed variables
//! (`lower == upper`) are substituted out, which is what branch-and-bound uses
//! to pin binaries.
//!
//! Pricing is Dantzig's largest reduced cost until a run of degenerate pivots
//! reaches [`SimplexOptions::degeneracy_streak`]; from then on Bland's rule is
//! used until a pivot makes progress again.

use crate::model::{LinearProgram, Relation};

#[derive(Clone, Debug)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    pub degeneracy_streak: usize,
    pub pivot_tol: f64,
    pub optimality_tol: f64,
    pub feasibility_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            max_iterations: 50_000,
            degeneracy_streak: 50,
            pivot_tol: 1e-9,
            optimality_tol: 1e-9,
            feasibility_tol: 1e-9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Debug)]
pub struct LpResult {
    pub status: LpStatus,
    /// Primal values in the caller's variable space. Meaningful only when optimal.
    pub values: Vec<f64>,
    pub objective: f64,
    /// Row multipliers `y` with `c = Aᵀy + d`, where `d` are the reduced costs
    /// of the variables (nonzero only at active bounds).
    pub duals: Vec<f64>,
    pub iterations: usize,
}

impl LpResult {
    fn with_status(status: LpStatus, n: usize, rows: usize, iterations: usize) -> Self {
        LpResult {
            status,
            values: vec![0.0; n],
            objective: f64::NAN,
            duals: vec![0.0; rows],
            iterations,
        }
    }
}

pub fn simplex_solve(lp: &LinearProgram) -> LpResult {
    simplex_solve_with(lp, &SimplexOptions::default())
}

pub fn simplex_solve_with(lp: &LinearProgram, opts: &SimplexOptions) -> LpResult {
    solve_with_bounds(lp, lp.lower(), lp.upper(), opts)
}

#[derive(Clone, Copy, Debug)]
enum ColMap {
    Fixed(f64),
    Shift { col: usize, offset: f64, sign: f64 },
    Split { pos: usize, neg: usize },
}

/// Solves `lp` with the variable bounds replaced by `lower`/`upper`.
pub(crate) fn solve_with_bounds(
    lp: &LinearProgram,
    lower: &[f64],
    upper: &[f64],
    opts: &SimplexOptions,
) -> LpResult {
    let n = lp.num_vars();
    let n_user_rows = lp.num_rows();

    if (0..n).any(|j| lower[j] > upper[j]) {
        return LpResult::with_status(LpStatus::Infeasible, n, n_user_rows, 0);
    }

    // Column mapping.
    let mut maps = Vec::with_capacity(n);
    let mut ns = 0usize;
    let mut ub_rows: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        let (lo, hi) = (lower[j], upper[j]);
        let map = if lo == hi {
            ColMap::Fixed(lo)
        } else if lo.is_finite() {
            let col = ns;
            ns += 1;
            if hi.is_finite() {
                ub_rows.push((col, hi - lo));
            }
            ColMap::Shift {
                col,
                offset: lo,
                sign: 1.0,
            }
        } else if hi.is_finite() {
            let col = ns;
            ns += 1;
            ColMap::Shift {
                col,
                offset: hi,
                sign: -1.0,
            }
        } else {
            let pos = ns;
            ns += 2;
            ColMap::Split { pos, neg: pos + 1 }
        };
        maps.push(map);
    }

    // Standard-form rows: dense coefficients over structural columns.
    let mut std_rows: Vec<(Vec<f64>, Relation, f64)> =
        Vec::with_capacity(n_user_rows + ub_rows.len());
    for row in lp.rows() {
        let mut a = vec![0.0; ns];
        let mut rhs = row.rhs;
        for &(j, c) in &row.coeffs {
            match maps[j] {
                ColMap::Fixed(v) => rhs -= c * v,
                ColMap::Shift { col, offset, sign } => {
                    a[col] += c * sign;
                    rhs -= c * offset;
                }
                ColMap::Split { pos, neg } => {
                    a[pos] += c;
                    a[neg] -= c;
                }
            }
        }
        std_rows.push((a, row.relation, rhs));
    }
    for &(col, cap) in &ub_rows {
        let mut a = vec![0.0; ns];
        a[col] = 1.0;
        std_rows.push((a, Relation::Le, cap));
    }

    // Make every rhs nonnegative.
    let mut row_sign = vec![1.0; std_rows.len()];
    for (i, (a, rel, rhs)) in std_rows.iter_mut().enumerate() {
        if *rhs < 0.0 {
            a.iter_mut().for_each(|v| *v = -*v);
            *rhs = -*rhs;
            *rel = match *rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
            row_sign[i] = -1.0;
        }
    }

    // Column layout: structural | slack/surplus | artificial.
    let m = std_rows.len();
    let n_slack = std_rows
        .iter()
        .filter(|(_, rel, _)| *rel != Relation::Eq)
        .count();
    let n_art = std_rows
        .iter()
        .filter(|(_, rel, _)| *rel != Relation::Le)
        .count();
    let ncols = ns + n_slack + n_art;
    let width = ncols + 1;
    let mut t = vec![0.0; m * width];
    let mut basis = vec![0usize; m];
    let mut identity_col = vec![0usize; m];
    let mut is_art = vec![false; ncols];
    let mut next_slack = ns;
    let mut next_art = ns + n_slack;
    for (i, (a, rel, rhs)) in std_rows.iter().enumerate() {
        let row = &mut t[i * width..(i + 1) * width];
        row[..ns].copy_from_slice(a);
        row[ncols] = *rhs;
        match rel {
            Relation::Le => {
                row[next_slack] = 1.0;
                basis[i] = next_slack;
                identity_col[i] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = -1.0;
                next_slack += 1;
                row[next_art] = 1.0;
                is_art[next_art] = true;
                basis[i] = next_art;
                identity_col[i] = next_art;
                next_art += 1;
            }
            Relation::Eq => {
                row[next_art] = 1.0;
                is_art[next_art] = true;
                basis[i] = next_art;
                identity_col[i] = next_art;
                next_art += 1;
            }
        }
    }

    let mut tab = Tableau {
        t,
        obj: vec![0.0; width],
        basis,
        m,
        width,
        iterations: 0,
    };

    // Phase 1: maximize -sum(artificials).
    if n_art > 0 {
        for j in 0..ncols {
            if is_art[j] {
                tab.obj[j] = -1.0;
            }
        }
        for i in 0..m {
            if is_art[tab.basis[i]] {
                for j in 0..width {
                    tab.obj[j] += tab.t[i * width + j];
                }
            }
        }
        match tab.run(opts, |_| true) {
            LpStatus::IterationLimit => {
                return LpResult::with_status(
                    LpStatus::IterationLimit,
                    n,
                    n_user_rows,
                    tab.iterations,
                )
            }
            LpStatus::Unbounded => {
                // Phase 1 is bounded above by zero; reaching here means numerical trouble.
                return LpResult::with_status(
                    LpStatus::IterationLimit,
                    n,
                    n_user_rows,
                    tab.iterations,
                );
            }
            _ => {}
        }
        let scale = std_rows.iter().map(|(_, _, b)| b.abs()).fold(1.0, f64::max);
        // obj[rhs] holds -z and z = -(sum of artificials).
        if tab.obj[ncols] > opts.feasibility_tol * scale * 10.0 {
            return LpResult::with_status(LpStatus::Infeasible, n, n_user_rows, tab.iterations);
        }
        // Drive zero-level artificials out of the basis where possible.
        for i in 0..m {
            if !is_art[tab.basis[i]] {
                continue;
            }
            let row = &tab.t[i * width..i * width + ncols];
            let best = (0..ncols)
                .filter(|&j| !is_art[j])
                .map(|j| (j, row[j].abs()))
                .filter(|&(_, a)| a > opts.pivot_tol)
                .max_by(|a, b| a.1.total_cmp(&b.1));
            if let Some((j, _)) = best {
                tab.pivot(i, j);
            }
            // Otherwise the row is redundant; its artificial stays basic at zero.
        }
    }

    // Phase 2.
    let sense = lp.sense().sign();
    let mut cost = vec![0.0; ncols];
    for (j, map) in maps.iter().enumerate() {
        let c = sense * lp.objective()[j];
        match *map {
            ColMap::Fixed(_) => {}
            ColMap::Shift { col, sign, .. } => cost[col] += c * sign,
            ColMap::Split { pos, neg } => {
                cost[pos] += c;
                cost[neg] -= c;
            }
        }
    }
    tab.obj.iter_mut().for_each(|v| *v = 0.0);
    tab.obj[..ncols].copy_from_slice(&cost);
    for i in 0..m {
        let cb = cost[tab.basis[i]];
        if cb != 0.0 {
            for j in 0..width {
                tab.obj[j] -= cb * tab.t[i * width + j];
            }
        }
    }
    let status = tab.run(opts, |j| !is_art[j]);
    if status != LpStatus::Optimal {
        return LpResult::with_status(status, n, n_user_rows, tab.iterations);
    }

    let mut xs = vec![0.0; ncols];
    for i in 0..m {
        xs[tab.basis[i]] = tab.t[i * width + ncols].max(0.0);
    }
    let values: Vec<f64> = maps
        .iter()
        .map(|map| match *map {
            ColMap::Fixed(v) => v,
            ColMap::Shift { col, offset, sign } => offset + sign * xs[col],
            ColMap::Split { pos, neg } => xs[pos] - xs[neg],
        })
        .collect();
    let duals = (0..n_user_rows)
        .map(|i| -sense * row_sign[i] * tab.obj[identity_col[i]])
        .collect();
    LpResult {
        status: LpStatus::Optimal,
        objective: lp.objective_value(&values),
        values,
        duals,
        iterations: tab.iterations,
    }
}

struct Tableau {
    t: Vec<f64>,
    /// Reduced profits `c_j - c_Bᵀ B⁻¹ A_j`; the last entry is `-z`.
    obj: Vec<f64>,
    basis: Vec<usize>,
    m: usize,
    width: usize,
    iterations: usize,
}

impl Tableau {
    fn run(&mut self, opts: &SimplexOptions, allowed: impl Fn(usize) -> bool) -> LpStatus {
        let ncols = self.width - 1;
        let mut streak = 0usize;
        loop {
            if self.iterations >= opts.max_iterations {
                return LpStatus::IterationLimit;
            }
            let bland = streak >= opts.degeneracy_streak;
            let entering = if bland {
                (0..ncols).find(|&j| allowed(j) && self.obj[j] > opts.optimality_tol)
            } else {
                (0..ncols)
                    .filter(|&j| allowed(j) && self.obj[j] > opts.optimality_tol)
                    .max_by(|&a, &b| self.obj[a].total_cmp(&self.obj[b]))
            };
            let Some(q) = entering else {
                return LpStatus::Optimal;
            };

            let mut leave: Option<(usize, f64, f64)> = None;
            for i in 0..self.m {
                let a = self.t[i * self.width + q];
                if a <= opts.pivot_tol {
                    continue;
                }
                let ratio = self.t[i * self.width + ncols].max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio, a)),
                    Some((p, best, pa)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * best.abs().max(1.0);
                        let better = if tie {
                            if bland {
                                self.basis[i] < self.basis[p]
                            } else {
                                a > pa
                            }
                        } else {
                            ratio < best
                        };
                        if better {
                            Some((i, ratio, a))
                        } else {
                            Some((p, best, pa))
                        }
                    }
                };
            }
            let Some((p, ratio, _)) = leave else {
                return LpStatus::Unbounded;
            };
            if ratio < 1e-12 {
                streak += 1;
            } else {
                streak = 0;
            }
            self.pivot(p, q);
        }
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let w = self.width;
        let piv = self.t[p * w + q];
        let inv = 1.0 / piv;
        for v in &mut self.t[p * w..(p + 1) * w] {
            *v *= inv;
        }
        self.t[p * w + q] = 1.0;
        let nz: Vec<usize> = (0..w).filter(|&j| self.t[p * w + j] != 0.0).collect();
        let prow: Vec<f64> = nz.iter().map(|&j| self.t[p * w + j]).collect();
        for i in 0..self.m {
            if i == p {
                continue;
            }
            let f = self.t[i * w + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * w..(i + 1) * w];
            for (&j, &pv) in nz.iter().zip(&prow) {
                let v = row[j] - f * pv;
                row[j] = if v.abs() < 1e-13 { 0.0 } else { v };
            }
            row[q] = 0.0;
        }
        let f = self.obj[q];
        if f != 0.0 {
            for (&j, &pv) in nz.iter().zip(&prow) {
                self.obj[j] -= f * pv;
            }
            self.obj[q] = 0.0;
        }
        self.basis[p] = q;
        self.iterations += 1;
    }
}
