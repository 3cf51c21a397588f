use monise_core::domain::{
    individual_minima, solve_weighted, utopian_from_minima, WeightVector, WeightedOracle,
    WeightedSolution,
};
use monise_core::mip::{branch_and_bound, simplex_solve, LinearProgram, LpStatus, Relation};
use monise_core::monise::{
    build_weight_milp, next_weight, run_monise_traced, MilpLayout, MoniseConfig, SelectionOptions,
    SelectionTieBreak, WeightSelectionModel,
};
use monise_core::nise::{run_nise_traced, NiseConfig, Priority, TieBreak};
use monise_core::problems::{KnapsackInstance, KnapsackOracle, PointSetOracle, QuadraticSimplex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Individual minima plus `extra` random-weight solutions.
fn random_model(
    oracle: &mut dyn WeightedOracle,
    extra: usize,
    rng: &mut ChaCha8Rng,
) -> WeightSelectionModel {
    let m = oracle.num_objectives();
    let minima = individual_minima(oracle).unwrap();
    let z = utopian_from_minima(&minima, 0.0);
    let mut archive: Vec<WeightedSolution> = minima;
    for _ in 0..extra {
        let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
        let w = WeightVector::from_direction(&raw).unwrap();
        archive.push(solve_weighted(oracle, &w).unwrap());
    }
    WeightSelectionModel::new(archive, z).unwrap()
}

/// Best objective over all binary assignments of the MILP as built.
fn brute_force_fixings(model: &WeightSelectionModel) -> f64 {
    let (milp, _) = build_weight_milp(model);
    let bins = milp.binaries().to_vec();
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..1 << bins.len() {
        let mut lp = milp.lp.clone();
        for (k, &j) in bins.iter().enumerate() {
            let v = f64::from(mask >> k & 1);
            lp.set_bounds(j, v, v);
        }
        let res = simplex_solve(&lp);
        if res.status == LpStatus::Optimal {
            best = best.max(res.objective);
        }
    }
    best
}

/// Best objective over all complementarity patterns with the pairs enforced
/// exactly, i.e. without any big-M constant.
fn exact_complementarity(model: &WeightSelectionModel) -> f64 {
    let (milp, lay) = build_weight_milp(model);
    let big_m_rows = ["slack_on", "mult_off", "weight_on", "nu_off"];
    let base = &milp.lp;
    let n = lay.num_continuous();
    let MilpLayout { m, l } = lay;
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..1 << (l + m) {
        let mut lp = LinearProgram::new(n);
        let obj: Vec<(usize, f64)> = (0..n).map(|j| (j, base.objective()[j])).collect();
        lp.set_objective(base.sense(), &obj);
        for j in 0..n {
            lp.set_bounds(j, base.lower()[j], base.upper()[j]);
        }
        for row in base.rows() {
            let label = row.label.as_deref().unwrap_or("");
            if big_m_rows.iter().any(|p| label.starts_with(p)) {
                continue;
            }
            lp.add_row(&row.coeffs, row.relation, row.rhs);
        }
        let points = model.normalized_points();
        for i in 0..l {
            if mask >> i & 1 == 1 {
                lp.set_bounds(lay.mu(i), 0.0, 0.0);
            } else {
                let mut row: Vec<(usize, f64)> = (0..m).map(|j| (lay.w(j), points[i][j])).collect();
                row.push((lay.v(), -1.0));
                lp.add_row(&row, Relation::Eq, 0.0);
            }
        }
        for j in 0..m {
            if mask >> (l + j) & 1 == 1 {
                lp.set_bounds(lay.nu(j), 0.0, 0.0);
            } else {
                lp.set_bounds(lay.w(j), 0.0, 0.0);
            }
        }
        let res = simplex_solve(&lp);
        if res.status == LpStatus::Optimal {
            best = best.max(res.objective);
        }
    }
    best
}

#[test]
fn selection_matches_both_brute_forces() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    while checked < 40 {
        let m = rng.random_range(2..=4);
        let extra = rng.random_range(0..=(10 - 2 * m));
        let mut oracle: Box<dyn WeightedOracle> = match rng.random_range(0..3) {
            0 => Box::new(QuadraticSimplex::new(m)),
            1 => Box::new(KnapsackOracle::new(KnapsackInstance::generate(
                8,
                m,
                0.5,
                rng.random(),
            ))),
            _ => {
                let pts: Vec<Vec<f64>> = (0..15)
                    .map(|_| (0..m).map(|_| rng.random_range(0.0..1.0)).collect())
                    .collect();
                Box::new(PointSetOracle::new(pts))
            }
        };
        let model = random_model(oracle.as_mut(), extra, &mut rng);
        if model.archive().len() + m > 10 {
            continue;
        }
        let res = next_weight(&model, &SelectionOptions::default()).unwrap();
        let fixings = brute_force_fixings(&model);
        let exact = exact_complementarity(&model);
        assert!(
            (res.mu - fixings).abs() < 1e-6,
            "B&B {} vs fixings {fixings}",
            res.mu
        );
        assert!(
            (res.mu - exact).abs() < 1e-6,
            "B&B {} vs exact {exact}",
            res.mu
        );
        assert!(res.kkt.max() < 1e-6, "{:?}", res.kkt);
        let ws: f64 = res.weight.as_slice().iter().sum();
        assert!((ws - 1.0).abs() < 1e-9);
        checked += 1;
    }
}

#[test]
fn milp_rows_reference_declared_variables() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let model = random_model(&mut QuadraticSimplex::new(3), 3, &mut rng);
    let (milp, lay) = build_weight_milp(&model);
    assert!(milp.validate().is_ok());
    let relaxation_rows = milp
        .lp
        .rows()
        .iter()
        .filter(|r| {
            r.label
                .as_deref()
                .is_some_and(|s| s.starts_with("relaxation"))
        })
        .count();
    assert_eq!(relaxation_rows, model.archive().len());
    assert_eq!(lay.num_vars(), milp.lp.num_vars());
    // The same problem solved without the wrapper.
    let direct = branch_and_bound(&milp);
    let wrapped = next_weight(&model, &SelectionOptions::default()).unwrap();
    assert!((direct.objective_value - wrapped.mu).abs() < 1e-12);
}

#[test]
fn two_objective_weights_follow_nise() {
    let selection = SelectionOptions {
        tie_break: SelectionTieBreak::LowestFirstWeight,
        ..SelectionOptions::default()
    };
    let config = MoniseConfig {
        mu_stop: 1e-12,
        max_iter: Some(9),
        selection,
        ..MoniseConfig::default()
    };
    let run = run_monise_traced(&mut QuadraticSimplex::new(2), &config).unwrap();
    let monise: Vec<f64> = std::iter::once(0.5)
        .chain(run.selections.iter().map(|s| s.weight[0]))
        .collect();
    let nise_config = NiseConfig {
        mu_stop: 1e-12,
        priority: Priority::WeightedGap,
        ties: TieBreak::LowestFirstWeight,
        ..NiseConfig::default()
    };
    let nise = run_nise_traced(&mut QuadraticSimplex::new(2), &nise_config).unwrap();
    let nise: Vec<f64> = nise
        .steps
        .iter()
        .take(10)
        .map(|s| s.parent.weight[0])
        .collect();
    assert_eq!(monise.len(), 10);
    for (a, b) in monise.iter().zip(&nise) {
        assert!((a - b).abs() < 1e-6, "{monise:?} vs {nise:?}");
    }
}

#[test]
fn error_history_is_monotone_on_quadratics() {
    for m in 3..=5 {
        let config = MoniseConfig {
            mu_stop: 1e-9,
            max_iter: Some(15),
            ..MoniseConfig::default()
        };
        let run = run_monise_traced(&mut QuadraticSimplex::new(m), &config).unwrap();
        assert!(run
            .frontier
            .mu_history
            .windows(2)
            .all(|p| p[1] <= p[0] + 1e-8));
        assert!(run.selections.iter().all(|s| s.kkt.max() < 1e-6));
    }
}

/// On the three-objective quadratic, an issued weight's solution can leave the
/// box spanned by the archive, unlike in two dimensions.
#[test]
fn locality_fails_in_three_dimensions() {
    let mut q = QuadraticSimplex::new(3);
    let archive: Vec<Vec<f64>> = [[0.10, 0.10, 0.80], [0.08, 0.85, 0.07], [0.32, 0.28, 0.40]]
        .iter()
        .map(|w| solve_weighted(&mut q, &WeightVector::new(w.to_vec()).unwrap()).unwrap())
        .map(|s| s.objectives.into_inner())
        .collect();
    let r = solve_weighted(&mut q, &WeightVector::new(vec![0.16, 0.34, 0.50]).unwrap())
        .unwrap()
        .objectives;
    let expected = [0.311_895_1, 0.069_070_2, 0.031_938_1];
    for k in 0..3 {
        assert!((r[k] - expected[k]).abs() < 1e-6);
    }
    assert!(archive.iter().all(|a| r[0] > a[0]));
}

/// The plane through three quadratic solutions can have a negative normal
/// component, so the next weight leaves the cone of its parents.
#[test]
fn recursivity_fails_in_three_dimensions() {
    let mut q = QuadraticSimplex::new(3);
    let pts: Vec<Vec<f64>> = [[0.24, 0.68, 0.08], [0.23, 0.5, 0.27], [0.17, 0.38, 0.45]]
        .iter()
        .map(|w| solve_weighted(&mut q, &WeightVector::new(w.to_vec()).unwrap()).unwrap())
        .map(|s| s.objectives.into_inner())
        .collect();
    let normal = plane_normal(&pts);
    assert!(normal[0] < 0.0);
    assert!((normal.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

/// Unit-sum normal of the plane through three points.
fn plane_normal(p: &[Vec<f64>]) -> Vec<f64> {
    let u: Vec<f64> = (0..3).map(|k| p[1][k] - p[0][k]).collect();
    let v: Vec<f64> = (0..3).map(|k| p[2][k] - p[0][k]).collect();
    let n = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    let s: f64 = n.iter().sum();
    n.iter().map(|x| x / s).collect()
}
