//! Hand-computed expected values for the fuzzy c-means operations, plus an
//! independent brute-force check of the full fit on a tiny instance.

use fuzzyclust::fcm::{self, FcmConfig};
use fuzzyclust::{Dataset64, MembershipMatrix};
use ndarray::{array, Array2};

fn dataset(points: Array2<f64>) -> Dataset64 {
    let labels = (0..points.nrows()).map(|i| format!("w{i}")).collect();
    Dataset64::new(labels, points).unwrap()
}

#[test]
fn objective_matches_hand_sum() {
    // Points 0 and 2, centers at the points, memberships 0.8/0.2 crosswise,
    // m = 2: J = 0.04·4 + 0.04·4 = 0.32.
    let data = dataset(array![[0.0], [2.0]]);
    let centers = array![[0.0], [2.0]];
    let u = MembershipMatrix::new(array![[0.8, 0.2], [0.2, 0.8]]).unwrap();
    let j = fcm::objective(&data, &centers, &u, 2.0).unwrap();
    assert!((j - 0.32).abs() < 1e-12, "J = {j}");
}

#[test]
fn center_update_is_weighted_mean() {
    // Points 0 and 10 with column weights (0.8², 0.2²) = (0.64, 0.04):
    // v_0 = 0.4/0.68 = 10/17, and symmetrically v_1 = 6.4/0.68 = 160/17.
    let data = dataset(array![[0.0], [10.0]]);
    let u = MembershipMatrix::new(array![[0.8, 0.2], [0.2, 0.8]]).unwrap();
    let centers = fcm::update_centers(&data, &u, 2.0).unwrap();
    assert!((centers[[0, 0]] - 10.0 / 17.0).abs() < 1e-12);
    assert!((centers[[1, 0]] - 160.0 / 17.0).abs() < 1e-12);
}

#[test]
fn membership_update_at_distances_one_and_two() {
    // Squared distances 1 and 4, m = 2: μ = (0.8, 0.2) exactly.
    let data = dataset(array![[0.0]]);
    let centers = array![[1.0], [-2.0]];
    let u = fcm::update_memberships(&data, &centers, 2.0).unwrap();
    assert!((u.values()[[0, 0]] - 0.8).abs() < 1e-12);
    assert!((u.values()[[0, 1]] - 0.2).abs() < 1e-12);
}

#[test]
fn equidistant_point_gets_uniform_membership() {
    let data = dataset(array![[0.0]]);
    let centers = array![[1.0], [-1.0]];
    let u = fcm::update_memberships(&data, &centers, 2.0).unwrap();
    assert_eq!(u.values()[[0, 0]], 0.5);
    assert_eq!(u.values()[[0, 1]], 0.5);
}

/// With m = 2 and memberships optimal for fixed centers, the per-point cost
/// collapses to the harmonic form 1/Σ_j d_ij⁻², giving an objective that
/// depends on the centers alone — cheap enough to minimize by grid search.
fn optimal_objective_m2(points: &[f64], v1: f64, v2: f64) -> f64 {
    points
        .iter()
        .map(|&x| {
            let d1 = (x - v1) * (x - v1);
            let d2 = (x - v2) * (x - v2);
            if d1 == 0.0 || d2 == 0.0 {
                0.0
            } else {
                1.0 / (1.0 / d1 + 1.0 / d2)
            }
        })
        .sum()
}

#[test]
fn fit_reaches_the_grid_search_optimum() {
    let points = [0.0, 1.0, 9.0, 10.0];
    let mut best = (f64::INFINITY, 0.0, 0.0);
    let steps = (12.0f64 / 0.05) as usize;
    for i in 0..=steps {
        let v1 = -1.0 + 0.05 * i as f64;
        for j in i + 1..=steps {
            let v2 = -1.0 + 0.05 * j as f64;
            let obj = optimal_objective_m2(&points, v1, v2);
            if obj < best.0 {
                best = (obj, v1, v2);
            }
        }
    }
    let (grid_min, g1, g2) = best;
    assert!((g1 - 0.5).abs() < 0.051, "grid argmin {g1}");
    assert!((g2 - 9.5).abs() < 0.051, "grid argmin {g2}");

    let data = dataset(array![[0.0], [1.0], [9.0], [10.0]]);
    let mut cfg = FcmConfig::new(2);
    cfg.fuzzifier = 2.0;
    cfg.tolerance = 1e-10;
    for seed in 0..5 {
        cfg.seed = seed;
        let model = fcm::fit(&data, &cfg).unwrap();
        assert!(model.converged, "seed {seed} did not converge");
        let mut centers = [model.centers[[0, 0]], model.centers[[1, 0]]];
        centers.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(
            (centers[0] - 0.5).abs() < 0.05,
            "seed {seed}: centers {centers:?}"
        );
        assert!(
            (centers[1] - 9.5).abs() < 0.05,
            "seed {seed}: centers {centers:?}"
        );
        // The continuum optimum can only improve on the coarse grid.
        assert!(model.objective() <= grid_min + 1e-9);
    }
}

#[test]
fn fuzzifier_near_one_is_almost_crisp() {
    let data = dataset(array![[0.0], [1.0], [9.0], [10.0]]);
    let mut cfg = FcmConfig::new(2);
    cfg.fuzzifier = 1.01;
    let model = fcm::fit(&data, &cfg).unwrap();
    for row in model.memberships.values().rows() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(max > 0.999, "row {row:?}");
    }
}

#[test]
fn as_many_clusters_as_points_recovers_the_points() {
    let data = dataset(array![[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]]);
    let mut cfg = FcmConfig::new(3);
    cfg.tolerance = 1e-9;
    cfg.seed = 1;
    let model = fcm::fit(&data, &cfg).unwrap();
    assert!(model.converged);
    // Every point should own one cluster almost completely.
    let hard = model.harden();
    let mut owners: Vec<usize> = hard.assignments().to_vec();
    owners.sort_unstable();
    owners.dedup();
    assert_eq!(owners.len(), 3, "assignments {:?}", hard.assignments());
    for (i, row) in model.memberships.values().rows().into_iter().enumerate() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(max > 0.99, "row {i}: {row:?}");
        let center = model.centers.row(hard.cluster_of(i));
        let dx = center[0] - data.point(i)[0];
        let dy = center[1] - data.point(i)[1];
        assert!(dx * dx + dy * dy < 0.25, "center {center} for point {i}");
    }
}

#[test]
fn fixed_seed_reproduces_bitwise_results() {
    let data = dataset(array![[0.0], [1.2], [3.4], [9.0], [10.0], [11.5]]);
    let mut cfg = FcmConfig::new(2);
    cfg.seed = 42;
    let a = fcm::fit(&data, &cfg).unwrap();
    let b = fcm::fit(&data, &cfg).unwrap();
    assert_eq!(a.centers, b.centers);
    assert_eq!(a.memberships.values(), b.memberships.values());
    assert_eq!(a.objective_trace, b.objective_trace);
    assert_eq!(a.iterations, b.iterations);

    cfg.seed = 43;
    let c = fcm::fit(&data, &cfg).unwrap();
    assert_ne!(a.memberships.values(), c.memberships.values());
}

#[test]
fn relabeling_points_permutes_the_fit() {
    let points = array![[0.0, 0.5], [1.0, 0.2], [8.7, 3.0], [9.5, 2.4], [0.3, 0.1]];
    let data = dataset(points.clone());
    let perm = [2usize, 0, 4, 1, 3];
    let mut permuted_points = Array2::zeros((5, 2));
    for (i, &src) in perm.iter().enumerate() {
        permuted_points.row_mut(i).assign(&points.row(src));
    }
    let permuted_data = dataset(permuted_points);

    let mut cfg = FcmConfig::new(2);
    cfg.fuzzifier = 2.0;
    cfg.seed = 9;
    let init = fcm::random_memberships::<f64>(5, 2, cfg.seed);
    let mut permuted_init = Array2::zeros((5, 2));
    for (i, &src) in perm.iter().enumerate() {
        permuted_init.row_mut(i).assign(&init.values().row(src));
    }
    let permuted_init = MembershipMatrix::new(permuted_init).unwrap();

    let base = fcm::fit_with_init(&data, &cfg, init).unwrap();
    let shuffled = fcm::fit_with_init(&permuted_data, &cfg, permuted_init).unwrap();

    assert_eq!(base.iterations, shuffled.iterations);
    for (i, &src) in perm.iter().enumerate() {
        for j in 0..2 {
            let a = shuffled.memberships.values()[[i, j]];
            let b = base.memberships.values()[[src, j]];
            assert!((a - b).abs() < 1e-9, "row {i} cluster {j}: {a} vs {b}");
        }
        assert_eq!(
            shuffled.harden().cluster_of(i),
            base.harden().cluster_of(src)
        );
    }
    for j in 0..2 {
        for k in 0..2 {
            assert!((base.centers[[j, k]] - shuffled.centers[[j, k]]).abs() < 1e-9);
        }
    }
}

#[test]
fn trace_is_monotone_and_convergence_is_flagged() {
    let data = dataset(array![[0.0], [0.7], [1.1], [8.6], [9.2], [10.3]]);
    let mut cfg = FcmConfig::new(2);
    cfg.fuzzifier = 1.7;
    cfg.seed = 5;
    let model = fcm::fit(&data, &cfg).unwrap();
    assert!(model.converged);
    assert!(model.iterations <= cfg.max_iter);
    assert_eq!(model.objective_trace.len(), model.iterations);
    for pair in model.objective_trace.windows(2) {
        assert!(
            pair[1] <= pair[0] * (1.0 + 1e-9),
            "objective increased: {} -> {}",
            pair[0],
            pair[1]
        );
    }
}
