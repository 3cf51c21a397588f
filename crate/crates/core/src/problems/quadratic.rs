use serde::{Deserialize, Serialize};

use crate::domain::{ObjectiveVector, OracleError, OracleOutput, WeightVector, WeightedOracle};

/// `min [x_1^2, ..., x_m^2]` subject to `sum(x) = 1`.
///
/// The efficient set is the whole simplex, and for `m >= 3` the weighted
/// method loses the locality and recursivity it has in two dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "QuadraticRecord")]
pub struct QuadraticSimplex {
    pub m: usize,
}

#[derive(Deserialize)]
struct QuadraticRecord {
    m: usize,
}

impl TryFrom<QuadraticRecord> for QuadraticSimplex {
    type Error = String;
    fn try_from(r: QuadraticRecord) -> Result<Self, String> {
        if r.m < 2 {
            return Err(format!(
                "quadratic simplex problem needs m >= 2, got {}",
                r.m
            ));
        }
        Ok(QuadraticSimplex { m: r.m })
    }
}

impl QuadraticSimplex {
    pub fn new(m: usize) -> Self {
        assert!(m >= 2, "quadratic simplex problem needs m >= 2");
        QuadraticSimplex { m }
    }

    /// Minimizer of `sum w_i x_i^2` on the simplex.
    ///
    /// With all weights positive this is `x_i ∝ 1/w_i`. When some weights are
    /// zero the minimizer is not unique; we take the limit of the positive case,
    /// which spreads `x` uniformly over the zero-weight coordinates.
    pub fn argmin(&self, weight: &[f64]) -> Vec<f64> {
        let zeros: Vec<usize> = (0..self.m).filter(|&i| weight[i] <= 0.0).collect();
        if !zeros.is_empty() {
            let mut x = vec![0.0; self.m];
            let share = 1.0 / zeros.len() as f64;
            for i in zeros {
                x[i] = share;
            }
            return x;
        }
        let inv: Vec<f64> = weight.iter().map(|w| 1.0 / w).collect();
        let total: f64 = inv.iter().sum();
        inv.iter().map(|v| v / total).collect()
    }

    pub fn objectives(x: &[f64]) -> Vec<f64> {
        x.iter().map(|v| v * v).collect()
    }
}

impl WeightedOracle for QuadraticSimplex {
    fn num_objectives(&self) -> usize {
        self.m
    }

    fn solve(&mut self, weight: &WeightVector) -> Result<OracleOutput, OracleError> {
        let x = self.argmin(weight.as_slice());
        let objectives = ObjectiveVector::new(Self::objectives(&x))
            .map_err(|e| OracleError::Contract(e.to_string()))?;
        Ok(OracleOutput {
            objectives,
            decision: x,
        })
    }

    fn lower_bounds(&self) -> Option<ObjectiveVector> {
        ObjectiveVector::new(vec![0.0; self.m]).ok()
    }

    fn tolerance(&self) -> f64 {
        1e-12
    }
}
