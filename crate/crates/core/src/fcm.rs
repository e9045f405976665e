//! Fuzzy c-means: alternating optimization of cluster centers and a
//! row-stochastic membership matrix under the squared Euclidean norm.

use ndarray::{Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::model::{ClusterModel, Dataset, MembershipMatrix};
use crate::scalar::Scalar;
use crate::{IterationSnapshot, SolverError};

/// Membership mass below which a cluster column is treated as empty and its
/// center re-seeded.
pub(crate) const DEGENERATE_MASS: f64 = 1e-12;

/// Configuration for the fuzzy c-means solver.
#[derive(Debug, Clone, PartialEq)]
pub struct FcmConfig<T> {
    /// Number of clusters c (at least 2).
    pub clusters: usize,
    /// Fuzzifier m (> 1). Values near 1 give near-crisp partitions.
    pub fuzzifier: T,
    /// Relative stopping tolerance on the objective.
    pub tolerance: T,
    /// Iteration cap.
    pub max_iter: usize,
    /// Seed for the random membership initialization.
    pub seed: u64,
}

impl<T: Scalar> FcmConfig<T> {
    pub fn new(clusters: usize) -> Self {
        Self {
            clusters,
            fuzzifier: T::constant(1.1),
            tolerance: T::constant(1e-6),
            max_iter: 300,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.clusters < 2 {
            return Err(SolverError::InvalidConfig(format!(
                "need at least 2 clusters, got {}",
                self.clusters
            )));
        }
        if !self.fuzzifier.is_finite() || self.fuzzifier <= T::one() {
            return Err(SolverError::InvalidConfig(
                "fuzzifier must be finite and greater than 1".into(),
            ));
        }
        if !self.tolerance.is_finite() || self.tolerance <= T::zero() {
            return Err(SolverError::InvalidConfig(
                "tolerance must be finite and positive".into(),
            ));
        }
        if self.max_iter == 0 {
            return Err(SolverError::InvalidConfig(
                "max_iter must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Squared Euclidean distances from every point to every center (N×c).
pub(crate) fn euclid_sq_distances<T: Scalar>(data: &Dataset<T>, centers: &Array2<T>) -> Array2<T> {
    let n = data.len();
    let c = centers.nrows();
    let points = data.points();
    let rows: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = points.row(i);
            let xs = x.as_slice().expect("row-major point storage");
            (0..c)
                .map(|j| {
                    let vs = centers.row(j);
                    let vs = vs.as_slice().expect("row-major center storage");
                    let mut acc = T::zero();
                    for (&a, &b) in xs.iter().zip(vs) {
                        let diff = a - b;
                        acc += diff * diff;
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let mut out = Array2::zeros((n, c));
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            out[[i, j]] = v;
        }
    }
    out
}

/// Membership update from squared distances. Each row is computed in the
/// overflow-safe normalized form t_j = (d²_min / d²_j)^(1/(m−1)), μ = t/Σt,
/// which equals the textbook ratio form but keeps every power in (0, 1].
/// A point at squared distance exactly 0 from one or more centers splits its
/// membership equally among those centers.
pub(crate) fn memberships_from_sq<T: Scalar>(d2: &Array2<T>, fuzzifier: T) -> MembershipMatrix<T> {
    let (n, c) = d2.dim();
    let exponent = T::one() / (fuzzifier - T::one());
    let rows: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let row = d2.row(i);
            let mut out = vec![T::zero(); c];
            let coincident = row.iter().filter(|&&v| v == T::zero()).count();
            if coincident > 0 {
                let share = T::one() / T::from_count(coincident);
                for (o, &v) in out.iter_mut().zip(&row) {
                    if v == T::zero() {
                        *o = share;
                    }
                }
            } else {
                let d2_min = row.iter().fold(T::infinity(), |acc, &v| acc.min(v));
                let mut sum = T::zero();
                for (o, &v) in out.iter_mut().zip(&row) {
                    let t = (d2_min / v).powf(exponent);
                    *o = t;
                    sum += t;
                }
                for o in out.iter_mut() {
                    *o /= sum;
                }
            }
            out
        })
        .collect();
    let mut values = Array2::zeros((n, c));
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            values[[i, j]] = v;
        }
    }
    MembershipMatrix::from_validated(values)
}

/// Weighted center update from precomputed weights w = μ^m. Clusters whose
/// mass falls below [`DEGENERATE_MASS`] are re-seeded (in ascending index
/// order) to the point farthest, by minimum squared distance, from all centers
/// placed so far; their indices are returned alongside the centers.
pub(crate) fn centers_with_reseed<T: Scalar>(
    data: &Dataset<T>,
    weights: &Array2<T>,
    masses: &[T],
) -> (Array2<T>, Vec<usize>) {
    let (n, c) = weights.dim();
    let d = data.dim();
    let points = data.points();
    let threshold = T::constant(DEGENERATE_MASS);
    let computed: Vec<Option<Vec<T>>> = (0..c)
        .into_par_iter()
        .map(|j| {
            if masses[j] < threshold {
                return None;
            }
            let mut acc = vec![T::zero(); d];
            for i in 0..n {
                let w = weights[[i, j]];
                let xs = points.row(i);
                let xs = xs.as_slice().expect("row-major point storage");
                for (a, &x) in acc.iter_mut().zip(xs) {
                    *a += w * x;
                }
            }
            for a in acc.iter_mut() {
                *a /= masses[j];
            }
            Some(acc)
        })
        .collect();

    let mut centers = Array2::zeros((c, d));
    let mut placed = vec![false; c];
    let mut degenerate = Vec::new();
    for (j, row) in computed.into_iter().enumerate() {
        match row {
            Some(values) => {
                for (k, v) in values.into_iter().enumerate() {
                    centers[[j, k]] = v;
                }
                placed[j] = true;
            }
            None => degenerate.push(j),
        }
    }
    for &j in &degenerate {
        let mut best_point = 0;
        let mut best_score = T::neg_infinity();
        for i in 0..n {
            let mut nearest = T::infinity();
            for (k, &is_placed) in placed.iter().enumerate() {
                if !is_placed {
                    continue;
                }
                let xs = points.row(i);
                let xs = xs.as_slice().expect("row-major point storage");
                let vs = centers.row(k);
                let vs = vs.as_slice().expect("row-major center storage");
                let mut acc = T::zero();
                for (&a, &b) in xs.iter().zip(vs) {
                    let diff = a - b;
                    acc += diff * diff;
                }
                nearest = nearest.min(acc);
            }
            if nearest > best_score {
                best_score = nearest;
                best_point = i;
            }
        }
        centers.row_mut(j).assign(&points.row(best_point));
        placed[j] = true;
    }
    (centers, degenerate)
}

/// Objective Σ_i Σ_j w_ij · d²_ij from precomputed weights w = μ^m.
/// Summation runs in fixed row-major order so results are reproducible.
pub(crate) fn objective_from_weights<T: Scalar>(d2: &Array2<T>, weights: &Array2<T>) -> T {
    let mut acc = T::zero();
    ndarray::Zip::from(d2)
        .and(weights)
        .for_each(|&a, &b| acc += a * b);
    acc
}

/// Weighted-distance objective J(U, V) = Σ_i Σ_j μ_ij^m ‖x_i − v_j‖².
pub fn objective<T: Scalar>(
    data: &Dataset<T>,
    centers: &Array2<T>,
    memberships: &MembershipMatrix<T>,
    fuzzifier: T,
) -> Result<T, SolverError> {
    check_geometry(data, centers, memberships)?;
    let d2 = euclid_sq_distances(data, centers);
    let weights = memberships.values().mapv(|u| u.powf(fuzzifier));
    Ok(objective_from_weights(&d2, &weights))
}

/// Center update: each center is the membership-weighted mean
/// v_j = Σ_i μ_ij^m x_i / Σ_i μ_ij^m. A cluster with no membership mass has
/// no defined center and is reported as degenerate.
pub fn update_centers<T: Scalar>(
    data: &Dataset<T>,
    memberships: &MembershipMatrix<T>,
    fuzzifier: T,
) -> Result<Array2<T>, SolverError> {
    if memberships.len() != data.len() {
        return Err(SolverError::MembershipShape {
            rows: memberships.len(),
            cols: memberships.clusters(),
            expected_rows: data.len(),
            expected_cols: memberships.clusters(),
        });
    }
    let weights = memberships.values().mapv(|u| u.powf(fuzzifier));
    let masses: Vec<T> = weights.sum_axis(Axis(0)).to_vec();
    let threshold = T::constant(DEGENERATE_MASS);
    if let Some(cluster) = masses.iter().position(|&m| m < threshold) {
        return Err(SolverError::DegenerateCluster { cluster });
    }
    let (centers, reseeded) = centers_with_reseed(data, &weights, &masses);
    debug_assert!(reseeded.is_empty());
    Ok(centers)
}

/// Membership update against fixed centers. Coincident points (squared
/// distance exactly 0 to one or more centers) are handled by the equal-split
/// rule, never by raising an error; the only failure mode is a dimension
/// mismatch between the data and the centers.
pub fn update_memberships<T: Scalar>(
    data: &Dataset<T>,
    centers: &Array2<T>,
    fuzzifier: T,
) -> Result<MembershipMatrix<T>, SolverError> {
    if centers.ncols() != data.dim() {
        return Err(SolverError::DimensionMismatch {
            expected: data.dim(),
            got: centers.ncols(),
        });
    }
    Ok(memberships_from_sq(
        &euclid_sq_distances(data, centers),
        fuzzifier,
    ))
}

/// Seeded random membership matrix, each row drawn uniformly from the
/// probability simplex (normalized exponential draws). The draw stream is
/// fixed in `f64` so the same seed selects the same partition for every
/// scalar type.
pub fn random_memberships<T: Scalar>(
    points: usize,
    clusters: usize,
    seed: u64,
) -> MembershipMatrix<T> {
    assert!(
        points > 0 && clusters > 0,
        "membership matrix cannot be empty"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Array2::zeros((points, clusters));
    let mut draws = vec![0f64; clusters];
    for i in 0..points {
        let mut sum = 0f64;
        for draw in draws.iter_mut() {
            *draw = -(1.0 - rng.random::<f64>()).ln();
            sum += *draw;
        }
        if sum == 0.0 {
            let share = T::one() / T::from_count(clusters);
            for j in 0..clusters {
                values[[i, j]] = share;
            }
        } else {
            let mut row = vec![T::zero(); clusters];
            let mut row_sum = T::zero();
            for (r, &draw) in row.iter_mut().zip(&draws) {
                *r = T::constant(draw / sum);
                row_sum += *r;
            }
            for (j, &r) in row.iter().enumerate() {
                values[[i, j]] = r / row_sum;
            }
        }
    }
    MembershipMatrix::from_validated(values)
}

fn check_geometry<T: Scalar>(
    data: &Dataset<T>,
    centers: &Array2<T>,
    memberships: &MembershipMatrix<T>,
) -> Result<(), SolverError> {
    if centers.ncols() != data.dim() {
        return Err(SolverError::DimensionMismatch {
            expected: data.dim(),
            got: centers.ncols(),
        });
    }
    if memberships.len() != data.len() || memberships.clusters() != centers.nrows() {
        return Err(SolverError::MembershipShape {
            rows: memberships.len(),
            cols: memberships.clusters(),
            expected_rows: data.len(),
            expected_cols: centers.nrows(),
        });
    }
    Ok(())
}

pub(crate) fn fit_inner<T: Scalar>(
    data: &Dataset<T>,
    config: &FcmConfig<T>,
    init: Option<MembershipMatrix<T>>,
    mut observer: impl FnMut(&IterationSnapshot<'_, T>),
) -> Result<ClusterModel<T>, SolverError> {
    config.validate()?;
    let n = data.len();
    let c = config.clusters;
    if n < c {
        return Err(SolverError::TooFewPoints {
            points: n,
            clusters: c,
        });
    }
    let mut u = match init {
        Some(u0) => {
            if u0.len() != n || u0.clusters() != c {
                return Err(SolverError::MembershipShape {
                    rows: u0.len(),
                    cols: u0.clusters(),
                    expected_rows: n,
                    expected_cols: c,
                });
            }
            u0
        }
        None => random_memberships(n, c, config.seed),
    };
    let m = config.fuzzifier;
    let mut weights = u.values().mapv(|x| x.powf(m));
    let mut centers = Array2::zeros((c, data.dim()));
    let mut trace: Vec<T> = Vec::with_capacity(16);
    let mut converged = false;
    let mut iterations = 0;

    for t in 1..=config.max_iter {
        iterations = t;
        let masses: Vec<T> = weights.sum_axis(Axis(0)).to_vec();
        let (new_centers, reseeded) = centers_with_reseed(data, &weights, &masses);
        centers = new_centers;
        let d2 = euclid_sq_distances(data, &centers);
        u = memberships_from_sq(&d2, m);
        weights = u.values().mapv(|x| x.powf(m));
        let objective = objective_from_weights(&d2, &weights);
        if !objective.is_finite() {
            return Err(SolverError::NonFiniteObjective { iteration: t });
        }
        let previous = trace.last().copied();
        trace.push(objective);
        observer(&IterationSnapshot {
            iteration: t,
            centers: &centers,
            memberships: &u,
            objective,
            reseeded: &reseeded,
            norms: None,
            fallbacks: None,
        });
        if let Some(prev) = previous {
            if (prev - objective).abs() < config.tolerance * T::one().max(objective.abs()) {
                converged = true;
                break;
            }
        }
    }

    Ok(ClusterModel {
        centers,
        memberships: u,
        norm_matrices: None,
        objective_trace: trace,
        iterations,
        converged,
        seed: config.seed,
        fuzzifier: m,
        fallback_events: 0,
    })
}

/// Runs fuzzy c-means from a seeded random initialization until the relative
/// objective change drops below the tolerance or the iteration cap is hit.
pub fn fit<T: Scalar>(
    data: &Dataset<T>,
    config: &FcmConfig<T>,
) -> Result<ClusterModel<T>, SolverError> {
    fit_inner(data, config, None, |_| {})
}

/// Like [`fit`], but starting from a caller-supplied membership matrix
/// (which must be N×c for this dataset and configuration).
pub fn fit_with_init<T: Scalar>(
    data: &Dataset<T>,
    config: &FcmConfig<T>,
    init: MembershipMatrix<T>,
) -> Result<ClusterModel<T>, SolverError> {
    fit_inner(data, config, Some(init), |_| {})
}

/// Like [`fit`], invoking `observer` once per iteration with the freshly
/// updated centers, memberships, and objective value.
pub fn fit_observed<T: Scalar>(
    data: &Dataset<T>,
    config: &FcmConfig<T>,
    observer: impl FnMut(&IterationSnapshot<'_, T>),
) -> Result<ClusterModel<T>, SolverError> {
    fit_inner(data, config, None, observer)
}
