//! Evaluation of fitted partitions against human similarity judgments:
//! gold-pair extraction, co-clustering counts, membership-confidence
//! censuses, per-word soft membership reports, repeated seeded runs with
//! summary statistics, and a Welch two-sample t-test for comparing run
//! populations.

use std::collections::HashMap;

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::corpus::ScoredWordPair;
use crate::model::{ClusterModel, Dataset, HardAssignment, MembershipMatrix};
use crate::scalar::Scalar;
use crate::{SolverConfig, SolverError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("word {0:?} is not in the clustered vocabulary")]
    UnknownWord(String),
    #[error("run with seed {seed} failed")]
    SolverFailed {
        seed: u64,
        #[source]
        source: SolverError,
    },
    #[error("need at least one run")]
    NoRuns,
    #[error("welch test needs at least two samples per group, got {a} and {b}")]
    InsufficientSample { a: usize, b: usize },
    #[error("welch test is undefined when both groups have zero variance")]
    ZeroVariance,
}

/// Word pairs whose human similarity score reached a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldPairSet {
    pairs: Vec<ScoredWordPair>,
    threshold: f64,
}

impl GoldPairSet {
    pub fn pairs(&self) -> &[ScoredWordPair] {
        &self.pairs
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Keeps the pairs scoring at or above `threshold`, preserving input order.
pub fn extract_gold_pairs(pairs: &[ScoredWordPair], threshold: f64) -> GoldPairSet {
    GoldPairSet {
        pairs: pairs
            .iter()
            .filter(|p| p.score >= threshold)
            .cloned()
            .collect(),
        threshold,
    }
}

/// How many gold pairs landed in the same hard cluster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoclusterReport {
    /// Gold pairs whose two words share a cluster.
    pub co_clustered: usize,
    /// Per-cluster breakdown of those pairs; sums to `co_clustered`.
    pub per_cluster: Vec<usize>,
    /// Gold pairs skipped because at least one word is not in the clustering.
    pub excluded: usize,
}

/// Counts, for each gold pair present in the clustering, whether both words
/// share a hard cluster. `labels` names the points of `assignment` in order.
pub fn count_cocluster_pairs(
    assignment: &HardAssignment,
    labels: &[String],
    gold: &GoldPairSet,
) -> CoclusterReport {
    assert_eq!(
        labels.len(),
        assignment.len(),
        "labels must align with the assignment"
    );
    let cluster_of: HashMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_str(), assignment.cluster_of(i)))
        .collect();
    let mut per_cluster = vec![0usize; assignment.clusters()];
    let mut co_clustered = 0;
    let mut excluded = 0;
    for pair in gold.pairs() {
        match (
            cluster_of.get(pair.word_a.as_str()),
            cluster_of.get(pair.word_b.as_str()),
        ) {
            (Some(&a), Some(&b)) => {
                if a == b {
                    co_clustered += 1;
                    per_cluster[a] += 1;
                }
            }
            _ => excluded += 1,
        }
    }
    CoclusterReport {
        co_clustered,
        per_cluster,
        excluded,
    }
}

/// Words whose strongest membership reaches `threshold`, in label order.
pub fn membership_confidence_census<T: Scalar>(
    memberships: &MembershipMatrix<T>,
    labels: &[String],
    threshold: T,
) -> Vec<String> {
    assert_eq!(
        labels.len(),
        memberships.len(),
        "labels must align with the membership matrix"
    );
    memberships
        .values()
        .rows()
        .into_iter()
        .zip(labels)
        .filter(|(row, _)| {
            let max = row.iter().fold(T::neg_infinity(), |acc, &v| acc.max(v));
            max >= threshold
        })
        .map(|(_, label)| label.clone())
        .collect()
}

/// A cluster a reported word belongs to strongly, with its hardened members.
#[derive(Debug, Clone, PartialEq)]
pub struct StrongCluster<T> {
    pub cluster: usize,
    pub degree: T,
    pub members: Vec<String>,
}

/// Soft membership profile of a single word.
#[derive(Debug, Clone, PartialEq)]
pub struct WordReport<T> {
    pub word: String,
    /// (cluster, membership) for every cluster, strongest first.
    pub degrees: Vec<(usize, T)>,
    /// Clusters with membership at or above the requested floor, each with
    /// its hardened member words.
    pub strong_clusters: Vec<StrongCluster<T>>,
}

/// Reports every membership degree of `word` (descending) and, for clusters
/// where the degree reaches `min_degree`, the cluster's hardened member
/// words.
pub fn word_report<T: Scalar>(
    model: &ClusterModel<T>,
    labels: &[String],
    word: &str,
    min_degree: T,
) -> Result<WordReport<T>, EvalError> {
    assert_eq!(
        labels.len(),
        model.memberships.len(),
        "labels must align with the model"
    );
    let needle = word.to_lowercase();
    let row_index = labels
        .iter()
        .position(|l| *l == needle)
        .ok_or_else(|| EvalError::UnknownWord(word.to_string()))?;
    let row = model.memberships.values().row(row_index);
    let mut degrees: Vec<(usize, T)> = row.iter().copied().enumerate().collect();
    degrees.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let hard = model.harden();
    let strong_clusters = degrees
        .iter()
        .filter(|(_, degree)| *degree >= min_degree)
        .map(|&(cluster, degree)| StrongCluster {
            cluster,
            degree,
            members: hard
                .members_of(cluster)
                .into_iter()
                .map(|i| labels[i].clone())
                .collect(),
        })
        .collect();
    Ok(WordReport {
        word: needle,
        degrees,
        strong_clusters,
    })
}

/// Values of one metric across repeated runs, with mean and sample standard
/// deviation (0 for a single run).
#[derive(Debug, Clone, PartialEq)]
pub struct RunStats<T> {
    values: Vec<T>,
    mean: T,
    std_dev: T,
}

impl<T: Scalar> RunStats<T> {
    pub fn from_values(values: Vec<T>) -> Result<Self, EvalError> {
        if values.is_empty() {
            return Err(EvalError::NoRuns);
        }
        let n = T::from_count(values.len());
        let mean = values.iter().copied().sum::<T>() / n;
        let std_dev = if values.len() == 1 {
            T::zero()
        } else {
            let squares = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>();
            (squares / T::from_count(values.len() - 1)).sqrt()
        };
        Ok(Self {
            values,
            mean,
            std_dev,
        })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn mean(&self) -> T {
        self.mean
    }

    pub fn std_dev(&self) -> T {
        self.std_dev
    }

    pub fn n_runs(&self) -> usize {
        self.values.len()
    }
}

/// Fits `n_runs` models with seeds `seed_base`, `seed_base + 1`, …, in seed
/// order. Runs execute in parallel but the returned order and every result
/// are independent of scheduling.
pub fn repeated_models<T: Scalar>(
    data: &Dataset<T>,
    config: &SolverConfig<T>,
    n_runs: usize,
    seed_base: u64,
) -> Result<Vec<ClusterModel<T>>, EvalError> {
    if n_runs == 0 {
        return Err(EvalError::NoRuns);
    }
    (0..n_runs)
        .into_par_iter()
        .map(|k| {
            let seed = seed_base.wrapping_add(k as u64);
            let run = config.clone().with_seed(seed);
            crate::fit(data, &run).map_err(|source| EvalError::SolverFailed { seed, source })
        })
        .collect()
}

/// Fits repeated models and summarizes one metric of each.
pub fn repeated_runs<T, F>(
    data: &Dataset<T>,
    config: &SolverConfig<T>,
    n_runs: usize,
    seed_base: u64,
    metric: F,
) -> Result<RunStats<T>, EvalError>
where
    T: Scalar,
    F: Fn(&ClusterModel<T>) -> T + Sync,
{
    let models = repeated_models(data, config, n_runs, seed_base)?;
    RunStats::from_values(models.iter().map(metric).collect())
}

/// Welch's unequal-variance two-sample t-test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchTest {
    pub t: f64,
    pub df: f64,
    /// Two-sided p-value.
    pub p: f64,
}

/// Welch's t-test on two independent samples: the statistic, the
/// Welch-Satterthwaite degrees of freedom, and the two-sided p-value from the
/// Student-t distribution.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchTest, EvalError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(EvalError::InsufficientSample {
            a: a.len(),
            b: b.len(),
        });
    }
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let var = |s: &[f64], m: f64| {
        s.iter().map(|&v| (v - m) * (v - m)).sum::<f64>() / (s.len() - 1) as f64
    };
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (var(a, ma), var(b, mb));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let sa = va / na;
    let sb = vb / nb;
    let se2 = sa + sb;
    if se2 == 0.0 {
        return Err(EvalError::ZeroVariance);
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    let p = 2.0 * dist.cdf(-t.abs());
    Ok(WelchTest { t, df, p })
}
