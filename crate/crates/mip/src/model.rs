use std::fmt;

use thiserror::Error;

/// Relation between a row's activity and its right-hand side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Sense {
    #[default]
    Maximize,
    Minimize,
}

impl Sense {
    /// `+1` for maximization, `-1` for minimization.
    pub fn sign(self) -> f64 {
        match self {
            Sense::Maximize => 1.0,
            Sense::Minimize => -1.0,
        }
    }
}

/// A sparse constraint row: `sum(coeff * x[index]) (relation) rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
    pub label: Option<String>,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates this row (zero when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.relation {
            Relation::Le => (act - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - act).max(0.0),
            Relation::Eq => (act - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("row {row} references variable {index} but the program declares {num_vars}")]
    UnknownVariable {
        row: usize,
        index: usize,
        num_vars: usize,
    },
    #[error("non-finite coefficient in {0}")]
    NonFinite(String),
    #[error("variable {index} has lower bound {lower} above upper bound {upper}")]
    InvertedBounds {
        index: usize,
        lower: f64,
        upper: f64,
    },
    #[error("variable {0} is declared binary but its bounds are not within [0, 1]")]
    BinaryBounds(usize),
}

/// A linear program over `num_vars` continuous variables.
///
/// Variables default to bounds `[0, +inf)`; either side may be infinite.
/// The objective defaults to maximizing zero.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    sense: Sense,
    objective: Vec<f64>,
    rows: Vec<Row>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    names: Vec<String>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            sense: Sense::Maximize,
            objective: vec![0.0; num_vars],
            rows: Vec::new(),
            lower: vec![0.0; num_vars],
            upper: vec![f64::INFINITY; num_vars],
            names: (0..num_vars).map(|j| format!("x{j}")).collect(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn name(&self, j: usize) -> &str {
        &self.names[j]
    }

    pub fn set_objective(&mut self, sense: Sense, coeffs: &[(usize, f64)]) {
        self.sense = sense;
        self.objective.iter_mut().for_each(|c| *c = 0.0);
        for &(j, c) in coeffs {
            self.objective[j] += c;
        }
    }

    /// Adds a row given as `(index, coefficient)` pairs; repeated indices are summed.
    /// Returns the row index.
    pub fn add_row(&mut self, coeffs: &[(usize, f64)], relation: Relation, rhs: f64) -> usize {
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
        for &(j, a) in coeffs {
            match merged.iter_mut().find(|(k, _)| *k == j) {
                Some(slot) => slot.1 += a,
                None => merged.push((j, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        self.rows.push(Row {
            coeffs: merged,
            relation,
            rhs,
            label: None,
        });
        self.rows.len() - 1
    }

    pub fn add_labeled_row(
        &mut self,
        label: impl Into<String>,
        coeffs: &[(usize, f64)],
        relation: Relation,
        rhs: f64,
    ) -> usize {
        let r = self.add_row(coeffs, relation, rhs);
        self.rows[r].label = Some(label.into());
        r
    }

    /// Adds a dense row; zero coefficients are dropped.
    pub fn add_dense_row(&mut self, coeffs: &[f64], relation: Relation, rhs: f64) -> usize {
        let sparse: Vec<(usize, f64)> = coeffs
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != 0.0)
            .map(|(j, &a)| (j, a))
            .collect();
        self.add_row(&sparse, relation, rhs)
    }

    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lower[j] = lower;
        self.upper[j] = upper;
    }

    pub fn set_name(&mut self, j: usize, name: impl Into<String>) {
        self.names[j] = name.into();
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.num_vars();
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(ModelError::NonFinite("objective".into()));
        }
        for (r, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(ModelError::NonFinite(format!("rhs of row {r}")));
            }
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(ModelError::UnknownVariable {
                        row: r,
                        index: j,
                        num_vars: n,
                    });
                }
                if !a.is_finite() {
                    return Err(ModelError::NonFinite(format!("row {r}")));
                }
            }
        }
        for j in 0..n {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if lo.is_nan()
                || hi.is_nan()
                || lo > hi
                || lo == f64::INFINITY
                || hi == f64::NEG_INFINITY
            {
                return Err(ModelError::InvertedBounds {
                    index: j,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest row or bound violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.rows.iter().map(|r| r.violation(x)).fold(0.0, f64::max);
        let bounds = (0..self.num_vars())
            .map(|j| (self.lower[j] - x[j]).max(x[j] - self.upper[j]).max(0.0))
            .fold(0.0, f64::max);
        rows.max(bounds)
    }
}

/// Human-readable dump, one constraint per line. Not a stable format.
impl fmt::Display for LinearProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let term_list = |coeffs: &mut dyn Iterator<Item = (usize, f64)>| {
            let mut s = String::new();
            for (j, a) in coeffs {
                if s.is_empty() {
                    s.push_str(&format!("{a} {}", self.names[j]));
                } else if a < 0.0 {
                    s.push_str(&format!(" - {} {}", -a, self.names[j]));
                } else {
                    s.push_str(&format!(" + {a} {}", self.names[j]));
                }
            }
            if s.is_empty() {
                s.push('0');
            }
            s
        };
        let verb = match self.sense {
            Sense::Maximize => "maximize",
            Sense::Minimize => "minimize",
        };
        let mut obj = self
            .objective
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(j, &c)| (j, c));
        writeln!(f, "{verb} {}", term_list(&mut obj))?;
        writeln!(f, "subject to")?;
        for (r, row) in self.rows.iter().enumerate() {
            let label = row.label.clone().unwrap_or_else(|| format!("r{r}"));
            let mut it = row.coeffs.iter().copied();
            writeln!(
                f,
                "  {label}: {} {} {}",
                term_list(&mut it),
                row.relation,
                row.rhs
            )?;
        }
        writeln!(f, "bounds")?;
        for j in 0..self.num_vars() {
            writeln!(
                f,
                "  {} <= {} <= {}",
                self.lower[j], self.names[j], self.upper[j]
            )?;
        }
        Ok(())
    }
}
