use crate::domain::{ObjectiveVector, OracleError, OracleOutput, WeightVector, WeightedOracle};

/// An oracle over an explicit finite set of objective vectors.
///
/// Exact by enumeration. Ties on the weighted value go to the point with the
/// smallest coordinate sum, then the lowest index, so zero weights still
/// return an efficient point. The decision is the point's index.
#[derive(Clone, Debug)]
pub struct PointSetOracle {
    points: Vec<Vec<f64>>,
}

impl PointSetOracle {
    /// # Panics
    /// If `points` is empty or the points differ in length.
    pub fn new(points: Vec<Vec<f64>>) -> Self {
        assert!(!points.is_empty(), "point set must be nonempty");
        let m = points[0].len();
        assert!(
            points.iter().all(|p| p.len() == m),
            "points must share one dimension"
        );
        PointSetOracle { points }
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn argmin(&self, weight: &[f64]) -> usize {
        let key = |p: &Vec<f64>| -> (f64, f64) {
            (
                p.iter().zip(weight).map(|(a, w)| a * w).sum(),
                p.iter().sum(),
            )
        };
        let mut best = 0;
        let mut best_key = key(&self.points[0]);
        for (i, p) in self.points.iter().enumerate().skip(1) {
            let k = key(p);
            let tie = 1e-12 * (1.0 + best_key.0.abs());
            if k.0 < best_key.0 - tie || (k.0 <= best_key.0 + tie && k.1 < best_key.1) {
                best = i;
                best_key = k;
            }
        }
        best
    }
}

impl WeightedOracle for PointSetOracle {
    fn num_objectives(&self) -> usize {
        self.points[0].len()
    }

    fn solve(&mut self, weight: &WeightVector) -> Result<OracleOutput, OracleError> {
        let i = self.argmin(weight.as_slice());
        let objectives = ObjectiveVector::new(self.points[i].clone())
            .map_err(|e| OracleError::Contract(e.to_string()))?;
        Ok(OracleOutput {
            objectives,
            decision: vec![i as f64],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weight_prefers_efficient_point() {
        let o = PointSetOracle::new(vec![vec![0.0, 2.0], vec![0.0, 1.0], vec![3.0, 0.0]]);
        assert_eq!(o.argmin(&[1.0, 0.0]), 1);
        assert_eq!(o.argmin(&[0.0, 1.0]), 2);
    }
}
