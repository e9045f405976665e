//! Statistical behavior of the evaluation helpers: power and false-positive
//! rate of the two-sample test under simulation, seed discipline of repeated
//! runs, and soft-membership reporting on a deliberately ambiguous word.

use fuzzyclust::eval::{repeated_models, repeated_runs, welch_t_test, word_report};
use fuzzyclust::fcm::{self, FcmConfig};
use fuzzyclust::{Dataset64, SolverConfig};
use ndarray::{array, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

#[test]
fn welch_test_detects_a_one_sigma_mean_shift() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let base = Normal::new(0.0, 1.0).unwrap();
    let shifted = Normal::new(1.0, 1.0).unwrap();
    let trials = 400;
    let mut detections = 0;
    for _ in 0..trials {
        let a: Vec<f64> = (0..30).map(|_| base.sample(&mut rng)).collect();
        let b: Vec<f64> = (0..30).map(|_| shifted.sample(&mut rng)).collect();
        if welch_t_test(&a, &b).unwrap().p < 0.01 {
            detections += 1;
        }
    }
    // Two samples of 30 a full standard deviation apart: power at the 1%
    // level is ~0.96, so 80% over 400 trials leaves wide slack.
    assert!(
        detections >= 320,
        "detected the shift in only {detections}/{trials} trials"
    );
}

#[test]
fn welch_test_keeps_false_positives_near_the_nominal_level() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let base = Normal::new(0.0, 1.0).unwrap();
    let trials = 400;
    let mut false_positives = 0;
    for _ in 0..trials {
        let a: Vec<f64> = (0..30).map(|_| base.sample(&mut rng)).collect();
        let b: Vec<f64> = (0..30).map(|_| base.sample(&mut rng)).collect();
        if welch_t_test(&a, &b).unwrap().p < 0.05 {
            false_positives += 1;
        }
    }
    // Expected 20 at the 5% level; 40 is a generous ceiling.
    assert!(
        false_positives <= 40,
        "{false_positives}/{trials} false positives at the 5% level"
    );
}

fn scattered_dataset() -> Dataset64 {
    let offsets = [-0.3, 0.4, -0.1, 0.2, 0.0, -0.4, 0.3, -0.2];
    let mut points = Array2::zeros((16, 2));
    for (i, &d) in offsets.iter().enumerate() {
        points[[i, 0]] = d;
        points[[i, 1]] = -d;
        points[[8 + i, 0]] = 6.0 + d;
        points[[8 + i, 1]] = 6.0 - d;
    }
    let labels = (0..16).map(|i| format!("w{i}")).collect();
    Dataset64::new(labels, points).unwrap()
}

#[test]
fn repeated_models_walk_consecutive_seeds_in_order() {
    let data = scattered_dataset();
    let config = SolverConfig::Fcm(FcmConfig::new(2));
    let models = repeated_models(&data, &config, 4, 100).unwrap();
    let seeds: Vec<u64> = models.iter().map(|m| m.seed).collect();
    assert_eq!(seeds, vec![100, 101, 102, 103]);
}

#[test]
fn repeated_models_match_individual_fits_bitwise() {
    let data = scattered_dataset();
    let config = SolverConfig::Fcm(FcmConfig::new(2));
    let models = repeated_models(&data, &config, 3, 40).unwrap();
    for (k, model) in models.iter().enumerate() {
        let mut single = FcmConfig::new(2);
        single.seed = 40 + k as u64;
        let expected = fcm::fit(&data, &single).unwrap();
        assert_eq!(model.centers, expected.centers, "seed {}", single.seed);
        assert_eq!(model.memberships.values(), expected.memberships.values());
        assert_eq!(model.objective_trace, expected.objective_trace);
    }
}

#[test]
fn repeated_runs_summarize_the_metric_over_the_same_models() {
    let data = scattered_dataset();
    let config = SolverConfig::Fcm(FcmConfig::new(2));
    let stats = repeated_runs(&data, &config, 5, 7, |m| m.objective()).unwrap();
    let models = repeated_models(&data, &config, 5, 7).unwrap();
    let values: Vec<f64> = models.iter().map(|m| m.objective()).collect();
    assert_eq!(stats.values(), values.as_slice());
    assert_eq!(stats.n_runs(), 5);

    let mean = values.iter().sum::<f64>() / 5.0;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 4.0;
    assert!((stats.mean() - mean).abs() < 1e-12);
    assert!((stats.std_dev() - var.sqrt()).abs() < 1e-12);
}

#[test]
fn word_report_splits_an_equidistant_word_between_both_clusters() {
    // Two tight word groups on a line with one word exactly midway.
    let points = array![[0.0], [0.2], [10.0], [10.2], [5.1]];
    let labels: Vec<String> = ["low_a", "low_b", "high_a", "high_b", "mid"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let data = Dataset64::new(labels.clone(), points).unwrap();
    let mut cfg = FcmConfig::new(2);
    cfg.fuzzifier = 2.0;
    cfg.seed = 5;
    let model = fcm::fit(&data, &cfg).unwrap();
    assert!(model.converged);

    let report = word_report(&model, &labels, "MID", 0.4).unwrap();
    assert_eq!(report.word, "mid");
    assert_eq!(report.degrees.len(), 2);
    assert!(report.degrees[0].1 >= report.degrees[1].1);
    assert!(
        (report.degrees[0].1 - 0.5).abs() < 0.05,
        "midway word should split evenly, got {:?}",
        report.degrees
    );

    assert_eq!(
        report.strong_clusters.len(),
        2,
        "both clusters clear the 0.4 floor"
    );
    let mut sides = Vec::new();
    for strong in &report.strong_clusters {
        assert!(strong.degree >= 0.4);
        let members = &strong.members;
        let low = members.contains(&"low_a".to_string()) && members.contains(&"low_b".to_string());
        let high =
            members.contains(&"high_a".to_string()) && members.contains(&"high_b".to_string());
        assert!(low ^ high, "cluster mixes the two groups: {members:?}");
        sides.push(low);
    }
    assert_ne!(
        sides[0], sides[1],
        "both strong clusters cover the same group"
    );

    let err = word_report(&model, &labels, "absent", 0.4).unwrap_err();
    assert!(err.to_string().contains("absent"));
}
