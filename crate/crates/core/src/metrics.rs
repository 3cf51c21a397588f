//! Hypervolume and the shared reference-point rule.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{componentwise_max, dominates_unchecked, filter_nondominated};

/// Largest objective count for which callers should use the exact algorithm.
pub const EXACT_MAX_OBJECTIVES: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("every front is empty")]
    NoPoints,
    #[error("point has {got} coordinates, reference has {expected}")]
    DimensionMismatch { got: usize, expected: usize },
}

/// Points (minimization) and a reference point. Points that exceed the
/// reference in any coordinate are dropped at construction and counted.
#[derive(Clone, Debug, PartialEq)]
pub struct HypervolumeQuery {
    points: Vec<Vec<f64>>,
    reference: Vec<f64>,
    clipped: usize,
}

impl HypervolumeQuery {
    pub fn new<P: AsRef<[f64]>>(points: &[P], reference: &[f64]) -> Result<Self, MetricsError> {
        let mut kept = Vec::with_capacity(points.len());
        let mut clipped = 0;
        for p in points {
            let p = p.as_ref();
            if p.len() != reference.len() {
                return Err(MetricsError::DimensionMismatch {
                    got: p.len(),
                    expected: reference.len(),
                });
            }
            if p.iter().zip(reference).all(|(a, r)| a <= r) {
                kept.push(p.to_vec());
            } else {
                clipped += 1;
            }
        }
        Ok(HypervolumeQuery {
            points: kept,
            reference: reference.to_vec(),
            clipped,
        })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn reference(&self) -> &[f64] {
        &self.reference
    }

    /// Number of input points dropped for exceeding the reference.
    pub fn clipped(&self) -> usize {
        self.clipped
    }

    /// Exact hypervolume by dimension sweep.
    pub fn hypervolume(&self) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        let front = filter_nondominated(&self.points);
        slice_volume(front, &self.reference)
    }
}

/// Exact hypervolume of `points` against `reference`; out-of-bounds points are ignored.
///
/// # Panics
/// If a point's length differs from the reference's.
pub fn hypervolume<P: AsRef<[f64]>>(points: &[P], reference: &[f64]) -> f64 {
    HypervolumeQuery::new(points, reference)
        .expect("points and reference must share one dimension")
        .hypervolume()
}

/// Sweep-line area for two objectives. Points must lie within the reference.
pub fn hypervolume_2d(points: &[Vec<f64>], reference: &[f64]) -> f64 {
    let mut sorted: Vec<&Vec<f64>> = points.iter().collect();
    sorted.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut area = 0.0;
    let mut ceiling = reference[1];
    for p in sorted {
        if p[1] < ceiling {
            area += (reference[0] - p[0]) * (ceiling - p[1]);
            ceiling = p[1];
        }
    }
    area
}

/// Slices along the last objective; each slab is the hypervolume, one
/// dimension lower, of the points that reach into it.
fn slice_volume(mut points: Vec<Vec<f64>>, reference: &[f64]) -> f64 {
    let m = reference.len();
    match m {
        0 => return 0.0,
        1 => {
            let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            return (reference[0] - lo).max(0.0);
        }
        2 => return hypervolume_2d(&points, reference),
        _ => {}
    }
    let last = m - 1;
    points.sort_by(|a, b| a[last].total_cmp(&b[last]));
    let mut volume = 0.0;
    let mut active: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    for i in 0..points.len() {
        let projected = points[i][..last].to_vec();
        if !active
            .iter()
            .any(|a| a.as_slice() == projected.as_slice() || dominates_unchecked(a, &projected))
        {
            active.retain(|a| !dominates_unchecked(&projected, a));
            active.push(projected);
        }
        let upper = points.get(i + 1).map_or(reference[last], |p| p[last]);
        let depth = upper - points[i][last];
        if depth > 0.0 {
            volume += depth * slice_volume(active.clone(), &reference[..last]);
        }
    }
    volume
}

/// Volume dominated by `point` alone and not by any archive member.
pub fn incremental_contribution<P: AsRef<[f64]>>(
    point: &[f64],
    archive: &[P],
    reference: &[f64],
) -> f64 {
    if point.iter().zip(reference).any(|(p, r)| p > r) {
        return 0.0;
    }
    let own: f64 = point.iter().zip(reference).map(|(p, r)| r - p).product();
    // Overlap of each archive box with the point's box is the box of max(a, p).
    let overlaps: Vec<Vec<f64>> = archive
        .iter()
        .map(|a| {
            a.as_ref()
                .iter()
                .zip(point)
                .map(|(x, y)| x.max(*y))
                .collect()
        })
        .collect();
    (own - hypervolume(&overlaps, reference)).max(0.0)
}

/// Componentwise worst value over the non-dominated members of every front.
///
/// Each front is filtered on its own before the maximum is taken, so a point
/// dominated inside its own front never stretches the reference.
pub fn reference_point(fronts: &[Vec<Vec<f64>>]) -> Result<Vec<f64>, MetricsError> {
    let mut pooled = Vec::new();
    for front in fronts {
        pooled.extend(filter_nondominated(front));
    }
    if let Some(first) = pooled.first() {
        let m = first.len();
        if let Some(bad) = pooled.iter().find(|p| p.len() != m) {
            return Err(MetricsError::DimensionMismatch {
                got: bad.len(),
                expected: m,
            });
        }
    }
    componentwise_max(&pooled).ok_or(MetricsError::NoPoints)
}

/// A Monte-Carlo hypervolume estimate, for objective counts beyond exact reach.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Samples uniformly in the box spanned by the componentwise minimum of the
/// points and the reference, and scales the dominated fraction by its volume.
pub fn monte_carlo_hypervolume<P: AsRef<[f64]>>(
    points: &[P],
    reference: &[f64],
    samples: usize,
    seed: u64,
) -> MonteCarloEstimate {
    let query = HypervolumeQuery::new(points, reference)
        .expect("points and reference must share one dimension");
    let front = filter_nondominated(query.points());
    let empty = MonteCarloEstimate {
        value: 0.0,
        std_error: 0.0,
        samples,
        seed,
    };
    let Some(lower) = crate::domain::componentwise_min(&front) else {
        return empty;
    };
    let box_volume: f64 = lower.iter().zip(reference).map(|(l, r)| r - l).product();
    if box_volume <= 0.0 || samples == 0 {
        return empty;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample = vec![0.0; reference.len()];
    let mut hits = 0usize;
    for _ in 0..samples {
        for (s, (l, r)) in sample.iter_mut().zip(lower.iter().zip(reference)) {
            *s = if r > l { rng.random_range(*l..*r) } else { *l };
        }
        if front
            .iter()
            .any(|p| p.iter().zip(&sample).all(|(a, s)| a <= s))
        {
            hits += 1;
        }
    }
    let frac = hits as f64 / samples as f64;
    MonteCarloEstimate {
        value: box_volume * frac,
        std_error: box_volume * (frac * (1.0 - frac) / samples as f64).sqrt(),
        samples,
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Union volume by inclusion–exclusion over all nonempty subsets.
    fn inclusion_exclusion(points: &[Vec<f64>], reference: &[f64]) -> f64 {
        let n = points.len();
        let mut total = 0.0;
        for mask in 1u32..(1 << n) {
            let mut corner = vec![f64::NEG_INFINITY; reference.len()];
            for (i, p) in points.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    for (c, v) in corner.iter_mut().zip(p) {
                        *c = c.max(*v);
                    }
                }
            }
            let vol: f64 = corner
                .iter()
                .zip(reference)
                .map(|(c, r)| (r - c).max(0.0))
                .product();
            total += if mask.count_ones() % 2 == 1 {
                vol
            } else {
                -vol
            };
        }
        total
    }

    #[test]
    fn two_point_square() {
        let pts = vec![vec![0.0, 0.5], vec![0.5, 0.0]];
        assert!((hypervolume(&pts, &[1.0, 1.0]) - 0.75).abs() < 1e-15);
        assert!((inclusion_exclusion(&pts, &[1.0, 1.0]) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn point_at_reference_has_no_volume() {
        assert_eq!(hypervolume(&[vec![1.0, 1.0, 1.0]], &[1.0, 1.0, 1.0]), 0.0);
        assert_eq!(hypervolume::<Vec<f64>>(&[], &[1.0, 1.0]), 0.0);
    }

    #[test]
    fn clipping_is_counted() {
        let q = HypervolumeQuery::new(&[vec![0.5, 0.5], vec![2.0, 0.0]], &[1.0, 1.0]).unwrap();
        assert_eq!(q.clipped(), 1);
        assert!((q.hypervolume() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn reference_point_examples() {
        let a = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let b = vec![vec![0.5, 0.5]];
        assert_eq!(reference_point(&[a.clone(), b]).unwrap(), vec![1.0, 1.0]);
        let mut with_outlier = a.clone();
        with_outlier.push(vec![10.0, 10.0]);
        assert_eq!(reference_point(&[with_outlier]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(
            reference_point(&[vec![], vec![]]),
            Err(MetricsError::NoPoints)
        );
    }

    #[test]
    fn contribution_examples() {
        let archive = vec![vec![0.2, 0.2]];
        assert_eq!(
            incremental_contribution(&[0.5, 0.5], &archive, &[1.0, 1.0]),
            0.0
        );
        let empty: Vec<Vec<f64>> = vec![];
        assert!((incremental_contribution(&[0.5, 0.0], &empty, &[1.0, 1.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn monte_carlo_is_close_to_exact() {
        let pts = vec![
            vec![0.1, 0.6, 0.3],
            vec![0.5, 0.2, 0.4],
            vec![0.3, 0.3, 0.1],
        ];
        let exact = hypervolume(&pts, &[1.0, 1.0, 1.0]);
        let est = monte_carlo_hypervolume(&pts, &[1.0, 1.0, 1.0], 200_000, 5);
        assert!((est.value - exact).abs() < 4.0 * est.std_error + 1e-12);
    }

    fn points(m: usize, max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, m), 1..=max_n)
    }

    proptest! {
        #[test]
        fn matches_inclusion_exclusion(pts in points(4, 6)) {
            let r = [1.0; 4];
            prop_assert!((hypervolume(&pts, &r) - inclusion_exclusion(&pts, &r)).abs() < 1e-9);
        }

        #[test]
        fn two_dimensional_paths_agree(pts in points(2, 12)) {
            let r = [1.0, 1.0];
            let sweep = hypervolume_2d(&pts, &r);
            // Lifting to a unit-depth third objective forces the slicing path.
            let lifted: Vec<Vec<f64>> = pts.iter().map(|p| vec![p[0], p[1], 0.0]).collect();
            let general = slice_volume(lifted, &[1.0, 1.0, 1.0]);
            prop_assert!((sweep - general).abs() < 1e-12);
        }

        #[test]
        fn adding_a_point_never_decreases(pts in points(3, 8), extra in proptest::collection::vec(0.0f64..1.0, 3)) {
            let r = [1.0; 3];
            let before = hypervolume(&pts, &r);
            let mut more = pts.clone();
            more.push(extra.clone());
            let after = hypervolume(&more, &r);
            prop_assert!(after >= before - 1e-12);
            let inc = incremental_contribution(&extra, &pts, &r);
            prop_assert!((after - before - inc).abs() < 1e-9);
        }

        #[test]
        fn dominated_points_do_not_matter(pts in points(3, 8)) {
            let r = [1.0; 3];
            let front = filter_nondominated(&pts);
            prop_assert!((hypervolume(&pts, &r) - hypervolume(&front, &r)).abs() < 1e-12);
        }
    }
}
