//! Core data carriers: labeled datasets, row-stochastic membership matrices,
//! fitted models, and hard (crisp) assignments derived from them.

use std::collections::HashMap;

use ndarray::{Array2, ArrayView1};
use thiserror::Error;

use crate::scalar::Scalar;

/// Absolute tolerance for membership row sums: each row must sum to 1 within
/// this bound.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dataset is empty (need at least one point with at least one coordinate)")]
    EmptyDataset,
    #[error("{labels} labels provided for {points} points")]
    LabelCountMismatch { labels: usize, points: usize },
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("non-finite coordinate at point {row}, column {col}")]
    NonFiniteCoordinate { row: usize, col: usize },
}

/// Ways a membership matrix can fail validation. Validation reports the first
/// violation found rather than silently repairing the matrix.
#[derive(Debug, Error, PartialEq)]
pub enum MembershipViolation {
    #[error("membership matrix is empty")]
    Empty,
    #[error("membership {value} at row {row}, cluster {cluster} is outside [0, 1]")]
    OutOfRange {
        row: usize,
        cluster: usize,
        value: f64,
    },
    #[error("non-finite membership at row {row}, cluster {cluster}")]
    NonFinite { row: usize, cluster: usize },
    #[error("row {row} sums to {sum}, expected 1 within {ROW_SUM_TOLERANCE}")]
    RowSum { row: usize, sum: f64 },
}

/// A set of N points in R^d, each carrying a label (for embeddings: the word).
#[derive(Debug, Clone)]
pub struct Dataset<T> {
    labels: Vec<String>,
    points: Array2<T>,
    by_label: HashMap<String, usize>,
}

impl<T: Scalar> Dataset<T> {
    /// Builds a dataset from labels and an N×d coordinate matrix. Labels must
    /// be unique and coordinates finite.
    pub fn new(labels: Vec<String>, points: Array2<T>) -> Result<Self, ModelError> {
        if points.nrows() == 0 || points.ncols() == 0 {
            return Err(ModelError::EmptyDataset);
        }
        if labels.len() != points.nrows() {
            return Err(ModelError::LabelCountMismatch {
                labels: labels.len(),
                points: points.nrows(),
            });
        }
        for ((row, col), value) in points.indexed_iter() {
            if !value.is_finite() {
                return Err(ModelError::NonFiniteCoordinate { row, col });
            }
        }
        let mut by_label = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if by_label.insert(label.clone(), i).is_some() {
                return Err(ModelError::DuplicateLabel(label.clone()));
            }
        }
        Ok(Self {
            labels,
            points,
            by_label,
        })
    }

    /// Number of points N.
    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinate dimension d.
    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    /// The N×d coordinate matrix.
    pub fn points(&self) -> &Array2<T> {
        &self.points
    }

    pub fn point(&self, i: usize) -> ArrayView1<'_, T> {
        self.points.row(i)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    /// Index of the point carrying `label`, if present.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.by_label.get(label).copied()
    }
}

/// Checks that `values` is a valid membership matrix: entries in [0, 1], every
/// row summing to 1 within [`ROW_SUM_TOLERANCE`].
pub fn validate_membership<T: Scalar>(values: &Array2<T>) -> Result<(), MembershipViolation> {
    if values.nrows() == 0 || values.ncols() == 0 {
        return Err(MembershipViolation::Empty);
    }
    for (row, r) in values.rows().into_iter().enumerate() {
        let mut sum = T::zero();
        for (cluster, &value) in r.iter().enumerate() {
            if !value.is_finite() {
                return Err(MembershipViolation::NonFinite { row, cluster });
            }
            if value < T::zero() || value > T::one() {
                return Err(MembershipViolation::OutOfRange {
                    row,
                    cluster,
                    value: value.to_f64().unwrap_or(f64::NAN),
                });
            }
            sum += value;
        }
        let err = (sum - T::one()).abs();
        if err > T::constant(ROW_SUM_TOLERANCE) {
            return Err(MembershipViolation::RowSum {
                row,
                sum: sum.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(())
}

/// Row-stochastic N×c matrix: entry (i, j) is the degree to which point i
/// belongs to cluster j. Construction validates, so a held value is always
/// a legal fuzzy partition.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipMatrix<T> {
    values: Array2<T>,
}

impl<T: Scalar> MembershipMatrix<T> {
    pub fn new(values: Array2<T>) -> Result<Self, MembershipViolation> {
        validate_membership(&values)?;
        Ok(Self { values })
    }

    /// Crisp matrix with a single 1 per row, taken from `assignments`.
    pub fn from_crisp(assignments: &[usize], clusters: usize) -> Self {
        assert!(!assignments.is_empty() && clusters > 0);
        let mut values = Array2::zeros((assignments.len(), clusters));
        for (i, &j) in assignments.iter().enumerate() {
            assert!(
                j < clusters,
                "assignment {j} out of range for {clusters} clusters"
            );
            values[[i, j]] = T::one();
        }
        Self { values }
    }

    pub(crate) fn from_validated(values: Array2<T>) -> Self {
        debug_assert!(validate_membership(&values).is_ok());
        Self { values }
    }

    pub fn values(&self) -> &Array2<T> {
        &self.values
    }

    pub fn into_values(self) -> Array2<T> {
        self.values
    }

    /// Number of points N.
    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of clusters c.
    pub fn clusters(&self) -> usize {
        self.values.ncols()
    }
}

/// Crisp assignment: for each point the index of its strongest cluster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HardAssignment {
    cluster_of: Vec<usize>,
    clusters: usize,
}

impl HardAssignment {
    pub fn cluster_of(&self, point: usize) -> usize {
        self.cluster_of[point]
    }

    pub fn assignments(&self) -> &[usize] {
        &self.cluster_of
    }

    pub fn len(&self) -> usize {
        self.cluster_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cluster_of.is_empty()
    }

    pub fn clusters(&self) -> usize {
        self.clusters
    }

    /// Point indices assigned to `cluster`, in point order.
    pub fn members_of(&self, cluster: usize) -> Vec<usize> {
        self.cluster_of
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == cluster)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Collapses a fuzzy partition to its argmax per row. Ties go to the
/// lowest-index cluster, so the result is deterministic.
pub fn harden<T: Scalar>(memberships: &MembershipMatrix<T>) -> HardAssignment {
    let values = memberships.values();
    let cluster_of = values
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0usize;
            let mut best_value = row[0];
            for (j, &v) in row.iter().enumerate().skip(1) {
                if v > best_value {
                    best = j;
                    best_value = v;
                }
            }
            best
        })
        .collect();
    HardAssignment {
        cluster_of,
        clusters: memberships.clusters(),
    }
}

/// A fitted fuzzy partition: cluster centers, the membership matrix that
/// produced the final objective value, and per-run diagnostics.
#[derive(Debug, Clone)]
pub struct ClusterModel<T> {
    /// c×d matrix of cluster centers.
    pub centers: Array2<T>,
    /// Final N×c membership matrix.
    pub memberships: MembershipMatrix<T>,
    /// Per-cluster norm-inducing matrices (adaptive-norm solver only).
    pub norm_matrices: Option<Vec<Array2<T>>>,
    /// Objective value after each iteration, in order.
    pub objective_trace: Vec<T>,
    /// Iterations actually executed.
    pub iterations: usize,
    /// Whether the stopping tolerance was met before the iteration cap.
    pub converged: bool,
    /// Seed the run was initialized from.
    pub seed: u64,
    /// Fuzzifier m the model was fitted with.
    pub fuzzifier: T,
    /// Count of cluster-iterations that fell back to the identity norm.
    pub fallback_events: usize,
}

impl<T: Scalar> ClusterModel<T> {
    /// Final objective value.
    pub fn objective(&self) -> T {
        *self
            .objective_trace
            .last()
            .expect("fitted model has at least one iteration")
    }

    pub fn clusters(&self) -> usize {
        self.centers.nrows()
    }

    pub fn harden(&self) -> HardAssignment {
        harden(&self.memberships)
    }
}
