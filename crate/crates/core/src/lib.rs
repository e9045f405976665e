//! Fuzzy clustering of word embeddings.
//!
//! Two solvers share an alternating-optimization core: fuzzy c-means
//! ([`fcm`]) under the squared Euclidean norm, and fuzzy Gustafson-Kessel
//! clustering ([`fgk`]), which learns one norm-inducing matrix per cluster
//! from its fuzzy covariance and so adapts to elongated cluster shapes.
//! Around them sit validity indices for choosing the cluster count
//! ([`validity`]), loaders for text-format embedding tables and scored word
//! pairs ([`corpus`]), and evaluation utilities — gold-pair co-clustering
//! counts, membership censuses, per-word reports, repeated seeded runs, and
//! a Welch t-test ([`eval`]).
//!
//! Everything numeric is generic over the floating-point type through
//! [`Scalar`]; `f64` is the usual choice and the `*64` aliases at the crate
//! root spell it out.
//!
//! ```
//! use fuzzyclust::{fcm::FcmConfig, validity, Dataset64};
//! use ndarray::array;
//!
//! let data = Dataset64::new(
//!     vec!["a".into(), "b".into(), "c".into(), "d".into()],
//!     array![[0.0], [1.0], [9.0], [10.0]],
//! )?;
//! let mut config = FcmConfig::new(2);
//! config.seed = 7;
//! let model = fuzzyclust::fcm::fit(&data, &config)?;
//! assert!(model.converged);
//! let report = validity::report(&data, &model)?;
//! assert!(report.fpc > 0.9); // two well-separated pairs: nearly crisp
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod corpus;
pub mod eval;
pub mod fcm;
pub mod fgk;
mod linalg;
pub mod model;
mod scalar;
pub mod validity;

use ndarray::Array2;
use thiserror::Error;

pub use model::{
    harden, validate_membership, ClusterModel, Dataset, HardAssignment, MembershipMatrix,
    MembershipViolation, ModelError,
};
pub use scalar::Scalar;

/// Failures shared by the two solvers and their component operations.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{points} points cannot support {clusters} clusters")]
    TooFewPoints { points: usize, clusters: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("membership matrix is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    MembershipShape {
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error("cluster index {cluster} out of range for {clusters} clusters")]
    ClusterIndex { cluster: usize, clusters: usize },
    #[error("cluster {cluster} has no membership mass")]
    DegenerateCluster { cluster: usize },
    #[error("cluster {cluster} membership column sums to zero")]
    ZeroMembershipMass { cluster: usize },
    #[error("norm matrix rejected: {0}")]
    InvalidNorm(String),
    #[error("covariance is not positive definite even after regularization")]
    IllConditionedCovariance,
    #[error("objective became non-finite at iteration {iteration}")]
    NonFiniteObjective { iteration: usize },
    #[error(
        "all {clusters} clusters stayed on the identity-norm fallback for {consecutive} \
         consecutive iterations (gave up at iteration {iteration})"
    )]
    PersistentFallback {
        clusters: usize,
        consecutive: usize,
        iteration: usize,
    },
}

/// State handed to a fit observer once per iteration, after that iteration's
/// center and membership updates.
#[derive(Debug)]
pub struct IterationSnapshot<'a, T> {
    /// 1-based iteration number.
    pub iteration: usize,
    pub centers: &'a Array2<T>,
    pub memberships: &'a MembershipMatrix<T>,
    pub objective: T,
    /// Clusters whose centers were re-seeded this iteration for lack of
    /// membership mass.
    pub reseeded: &'a [usize],
    /// Per-cluster norm matrices (adaptive-norm solver only).
    pub norms: Option<&'a [Array2<T>]>,
    /// Which clusters fell back to the identity norm this iteration
    /// (adaptive-norm solver only).
    pub fallbacks: Option<&'a [bool]>,
}

/// Algorithm-tagged solver configuration, for call sites that choose the
/// algorithm at runtime.
#[derive(Debug, Clone, PartialEq)]
pub enum SolverConfig<T> {
    Fcm(fcm::FcmConfig<T>),
    Fgk(fgk::FgkConfig<T>),
}

impl<T: Scalar> SolverConfig<T> {
    pub fn clusters(&self) -> usize {
        match self {
            SolverConfig::Fcm(c) => c.clusters,
            SolverConfig::Fgk(c) => c.base.clusters,
        }
    }

    pub fn fuzzifier(&self) -> T {
        match self {
            SolverConfig::Fcm(c) => c.fuzzifier,
            SolverConfig::Fgk(c) => c.base.fuzzifier,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            SolverConfig::Fcm(c) => c.seed,
            SolverConfig::Fgk(c) => c.base.seed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        match &mut self {
            SolverConfig::Fcm(c) => c.seed = seed,
            SolverConfig::Fgk(c) => c.base.seed = seed,
        }
        self
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        match self {
            SolverConfig::Fcm(c) => c.validate(),
            SolverConfig::Fgk(c) => c.validate(),
        }
    }
}

/// Fits whichever solver the configuration selects.
pub fn fit<T: Scalar>(
    data: &Dataset<T>,
    config: &SolverConfig<T>,
) -> Result<ClusterModel<T>, SolverError> {
    match config {
        SolverConfig::Fcm(c) => fcm::fit(data, c),
        SolverConfig::Fgk(c) => fgk::fit(data, c),
    }
}

pub type Dataset32 = Dataset<f32>;
pub type Dataset64 = Dataset<f64>;
pub type Membership32 = MembershipMatrix<f32>;
pub type Membership64 = MembershipMatrix<f64>;
pub type Model32 = ClusterModel<f32>;
pub type Model64 = ClusterModel<f64>;
pub type FcmConfig32 = fcm::FcmConfig<f32>;
pub type FcmConfig64 = fcm::FcmConfig<f64>;
pub type FgkConfig32 = fgk::FgkConfig<f32>;
pub type FgkConfig64 = fgk::FgkConfig<f64>;
pub type EmbeddingTable32 = corpus::EmbeddingTable<f32>;
pub type EmbeddingTable64 = corpus::EmbeddingTable<f64>;
