//! End-to-end checks of the adaptive-norm solver: a fully hand-computed
//! single iteration, recovery of elongated clusters the Euclidean solver
//! cannot separate, agreement with fuzzy c-means on spherical data, and
//! per-iteration invariants of the norm matrices.

use fuzzyclust::fcm::{self, FcmConfig};
use fuzzyclust::fgk::{self, FgkConfig};
use fuzzyclust::{Dataset64, MembershipMatrix};
use ndarray::{array, Array2};

fn dataset(points: Array2<f64>) -> Dataset64 {
    let labels = (0..points.nrows()).map(|i| format!("w{i}")).collect();
    Dataset64::new(labels, points).unwrap()
}

fn det2(a: &Array2<f64>) -> f64 {
    a[[0, 0]] * a[[1, 1]] - a[[0, 1]] * a[[1, 0]]
}

/// Two-cluster partitions compared up to swapping the cluster labels.
fn same_partition(a: &[usize], b: &[usize]) -> bool {
    let direct = a.iter().zip(b).all(|(x, y)| x == y);
    let swapped = a.iter().zip(b).all(|(&x, &y)| x == 1 - y);
    direct || swapped
}

#[test]
fn one_iteration_from_a_crisp_start_matches_hand_computation() {
    // Cluster 0: (0,0), (2,0), (1,1) — spans the plane, so its covariance is
    // invertible without regularization. Cluster 1: the lone point (5,5),
    // whose covariance is exactly zero and exercises the diagonal floor.
    let data = dataset(array![[0.0, 0.0], [2.0, 0.0], [1.0, 1.0], [5.0, 5.0]]);
    let init = MembershipMatrix::from_crisp(&[0, 0, 0, 1], 2);
    let mut cfg = FgkConfig::new(2);
    cfg.base.fuzzifier = 2.0;
    cfg.base.max_iter = 1;
    cfg.cov_reg = 0.0;
    let model = fgk::fit_with_init(&data, &cfg, init).unwrap();

    // Centers: crisp means (1, 1/3) and (5, 5).
    assert!((model.centers[[0, 0]] - 1.0).abs() < 1e-12);
    assert!((model.centers[[0, 1]] - 1.0 / 3.0).abs() < 1e-12);
    assert!((model.centers[[1, 0]] - 5.0).abs() < 1e-12);
    assert!((model.centers[[1, 1]] - 5.0).abs() < 1e-12);

    // Cluster 0 covariance is diag(2/3, 2/9), so with det = 4/27 the norm is
    // √(4/27)·diag(3/2, 9/2) = diag(1/√3, √3).
    let norms = model.norm_matrices.as_ref().unwrap();
    let a0 = &norms[0];
    assert!(
        (a0[[0, 0]] - 1.0 / 3.0f64.sqrt()).abs() < 1e-9,
        "a0 = {a0:?}"
    );
    assert!((a0[[1, 1]] - 3.0f64.sqrt()).abs() < 1e-9);
    assert!(a0[[0, 1]].abs() < 1e-9);
    assert!((det2(a0) - 1.0).abs() < 1e-9);

    // Cluster 1: zero covariance → 1e-9·I floor → unit-determinant identity.
    let a1 = &norms[1];
    assert!((a1[[0, 0]] - 1.0).abs() < 1e-9, "a1 = {a1:?}");
    assert!((a1[[1, 1]] - 1.0).abs() < 1e-9);
    assert!(a1[[0, 1]].abs() < 1e-9);
    assert_eq!(model.fallback_events, 0);

    // Memberships follow from the two squared distances per point
    // (adaptive norm to cluster 0, near-Euclidean to cluster 1), via the
    // m = 2 ratio rule computed here in its textbook reciprocal form.
    let centers = [(1.0, 1.0 / 3.0), (5.0, 5.0)];
    for (i, &(px, py)) in [(0.0, 0.0), (2.0, 0.0), (1.0, 1.0), (5.0, 5.0)]
        .iter()
        .enumerate()
    {
        let d0 = {
            let (dx, dy) = (px - centers[0].0, py - centers[0].1);
            a0[[0, 0]] * dx * dx + 2.0 * a0[[0, 1]] * dx * dy + a0[[1, 1]] * dy * dy
        };
        let d1 = {
            let (dx, dy) = (px - centers[1].0, py - centers[1].1);
            dx * dx + dy * dy
        };
        let expected = if d1 == 0.0 {
            [0.0, 1.0]
        } else {
            let (r0, r1) = (1.0 / d0, 1.0 / d1);
            [r0 / (r0 + r1), r1 / (r0 + r1)]
        };
        for (j, &want) in expected.iter().enumerate() {
            let got = model.memberships.values()[[i, j]];
            assert!(
                (got - want).abs() < 1e-9,
                "point {i} cluster {j}: {got} vs {want}"
            );
        }
    }
}

fn two_parallel_lines() -> (Dataset64, Vec<usize>) {
    let n_per_line = 20;
    let mut points = Array2::zeros((2 * n_per_line, 2));
    let mut line_of = Vec::with_capacity(2 * n_per_line);
    for i in 0..n_per_line {
        points[[i, 0]] = 0.5 * i as f64;
        points[[i, 1]] = 0.0;
        line_of.push(0);
    }
    for i in 0..n_per_line {
        points[[n_per_line + i, 0]] = 0.5 * i as f64;
        points[[n_per_line + i, 1]] = 1.6;
        line_of.push(1);
    }
    (dataset(points), line_of)
}

#[test]
fn adaptive_norms_recover_lines_the_euclidean_solver_splits() {
    let (data, lines) = two_parallel_lines();

    let mut fcm_cfg = FcmConfig::new(2);
    fcm_cfg.fuzzifier = 2.0;
    fcm_cfg.seed = 0;
    let fcm_model = fcm::fit(&data, &fcm_cfg).unwrap();
    assert!(fcm_model.converged);
    let fcm_hard = fcm_model.harden();
    // The lines are long relative to their separation, so the Euclidean
    // optimum cuts across both lines instead of between them.
    assert!(
        !same_partition(fcm_hard.assignments(), &lines),
        "euclidean solver unexpectedly recovered the lines: {:?}",
        fcm_hard.assignments()
    );

    let mut gk_cfg = FgkConfig::new(2);
    gk_cfg.base.fuzzifier = 2.0;
    gk_cfg.base.seed = 0;
    let gk_model = fgk::fit(&data, &gk_cfg).unwrap();
    assert!(gk_model.converged);
    let gk_hard = gk_model.harden();
    assert!(
        same_partition(gk_hard.assignments(), &lines),
        "adaptive solver failed to recover the lines: {:?}",
        gk_hard.assignments()
    );

    // The learned norms are stretched along x (cheap) and tight along y
    // (expensive), which is what makes the line partition optimal.
    for a in gk_model.norm_matrices.as_ref().unwrap() {
        assert!(a[[1, 1]] > a[[0, 0]], "norm not elongated along x: {a:?}");
    }
}

#[test]
fn both_solvers_agree_on_spherical_blobs() {
    let offsets = [
        (-0.3, -0.2),
        (0.4, -0.1),
        (-0.1, 0.3),
        (0.2, 0.2),
        (0.0, -0.4),
        (-0.4, 0.1),
        (0.3, 0.4),
        (-0.2, 0.0),
    ];
    let mut points = Array2::zeros((16, 2));
    for (i, &(dx, dy)) in offsets.iter().enumerate() {
        points[[i, 0]] = dx;
        points[[i, 1]] = dy;
        points[[8 + i, 0]] = 10.0 + dx;
        points[[8 + i, 1]] = 10.0 + dy;
    }
    let expected: Vec<usize> = (0..16).map(|i| i / 8).collect();
    let data = dataset(points);

    let mut fcm_cfg = FcmConfig::new(2);
    fcm_cfg.fuzzifier = 2.0;
    fcm_cfg.seed = 3;
    let fcm_model = fcm::fit(&data, &fcm_cfg).unwrap();
    let mut gk_cfg = FgkConfig::new(2);
    gk_cfg.base.fuzzifier = 2.0;
    gk_cfg.base.seed = 3;
    let gk_model = fgk::fit(&data, &gk_cfg).unwrap();

    assert!(fcm_model.converged && gk_model.converged);
    assert!(same_partition(fcm_model.harden().assignments(), &expected));
    assert!(same_partition(
        gk_model.harden().assignments(),
        fcm_model.harden().assignments()
    ));
    for j in 0..2 {
        let c = gk_model.centers.row(j);
        let near_first = (c[0].powi(2) + c[1].powi(2)).sqrt() < 0.5;
        let near_second = ((c[0] - 10.0).powi(2) + (c[1] - 10.0).powi(2)).sqrt() < 0.5;
        assert!(near_first || near_second, "center {c} far from both blobs");
    }
}

#[test]
fn norm_determinants_track_requested_volumes_every_iteration() {
    let (data, _) = two_parallel_lines();
    let mut cfg = FgkConfig::new(2);
    cfg.base.fuzzifier = 2.0;
    cfg.base.seed = 11;
    cfg.volumes = Some(vec![2.0, 0.5]);
    let mut checked = 0;
    let model = fgk::fit_observed(&data, &cfg, |snapshot| {
        let norms = snapshot.norms.unwrap();
        let fallbacks = snapshot.fallbacks.unwrap();
        for (j, a) in norms.iter().enumerate() {
            if fallbacks[j] {
                continue;
            }
            let expected = [2.0, 0.5][j];
            let det = det2(a);
            assert!(
                ((det - expected) / expected).abs() < 1e-6,
                "iteration {}: det {det} for volume {expected}",
                snapshot.iteration
            );
            checked += 1;
        }
    })
    .unwrap();
    assert!(model.converged);
    assert!(checked >= 2, "observer saw no non-fallback iterations");
}

#[test]
fn fixed_seed_reproduces_bitwise_results() {
    let (data, _) = two_parallel_lines();
    let mut cfg = FgkConfig::new(2);
    cfg.base.fuzzifier = 2.0;
    cfg.base.seed = 7;
    let a = fgk::fit(&data, &cfg).unwrap();
    let b = fgk::fit(&data, &cfg).unwrap();
    assert_eq!(a.centers, b.centers);
    assert_eq!(a.memberships.values(), b.memberships.values());
    assert_eq!(a.objective_trace, b.objective_trace);
    assert_eq!(
        a.norm_matrices.as_ref().unwrap(),
        b.norm_matrices.as_ref().unwrap()
    );
}

#[test]
fn objective_trace_is_monotone() {
    let (data, _) = two_parallel_lines();
    let mut cfg = FgkConfig::new(2);
    cfg.base.fuzzifier = 2.0;
    cfg.base.seed = 1;
    let model = fgk::fit(&data, &cfg).unwrap();
    for pair in model.objective_trace.windows(2) {
        assert!(
            pair[1] <= pair[0] * (1.0 + 1e-9),
            "objective increased: {} -> {}",
            pair[0],
            pair[1]
        );
    }
}
