//! Fuzzy Gustafson-Kessel clustering: fuzzy c-means extended with one
//! adaptive norm-inducing matrix per cluster, derived from the cluster's
//! fuzzy covariance under a fixed-volume (determinant) constraint. Clusters
//! can therefore stretch along their own principal directions, which
//! recovers elongated shapes a single global Euclidean norm cannot.

use ndarray::{Array2, ArrayView1, Axis};
use rayon::prelude::*;

use crate::fcm::{
    centers_with_reseed, memberships_from_sq, objective_from_weights, FcmConfig, DEGENERATE_MASS,
};
use crate::linalg::{cholesky, log_det_from_factor, spd_inverse_from_factor};
use crate::model::{ClusterModel, Dataset, MembershipMatrix};
use crate::scalar::Scalar;
use crate::{IterationSnapshot, SolverError};

/// Absolute tolerance when checking that a norm matrix is symmetric.
const SYMMETRY_TOLERANCE: f64 = 1e-8;

/// Diagonal floor substituted for a covariance with no spread at all
/// (zero trace).
const ZERO_TRACE_FLOOR: f64 = 1e-9;

/// Consecutive all-cluster fallback iterations tolerated before the solver
/// gives up.
const MAX_FALLBACK_STREAK: usize = 10;

/// Configuration for the Gustafson-Kessel solver.
#[derive(Debug, Clone, PartialEq)]
pub struct FgkConfig<T> {
    /// Shared alternating-optimization parameters (clusters, fuzzifier,
    /// tolerance, iteration cap, seed).
    pub base: FcmConfig<T>,
    /// Per-cluster volume ρ_j constraining det(A_j) = ρ_j. `None` fixes every
    /// volume at 1.
    pub volumes: Option<Vec<T>>,
    /// Covariance shrinkage weight γ in [0, 1): each covariance becomes
    /// (1−γ)·C + γ·(tr C / d)·I before inversion.
    pub cov_reg: T,
}

impl<T: Scalar> FgkConfig<T> {
    pub fn new(clusters: usize) -> Self {
        Self {
            base: FcmConfig::new(clusters),
            volumes: None,
            cov_reg: T::constant(1e-4),
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        self.base.validate()?;
        if let Some(volumes) = &self.volumes {
            if volumes.len() != self.base.clusters {
                return Err(SolverError::InvalidConfig(format!(
                    "{} cluster volumes for {} clusters",
                    volumes.len(),
                    self.base.clusters
                )));
            }
            if volumes.iter().any(|v| !v.is_finite() || *v <= T::zero()) {
                return Err(SolverError::InvalidConfig(
                    "cluster volumes must be finite and positive".into(),
                ));
            }
        }
        if !self.cov_reg.is_finite() || self.cov_reg < T::zero() || self.cov_reg >= T::one() {
            return Err(SolverError::InvalidConfig(
                "covariance regularization must lie in [0, 1)".into(),
            ));
        }
        Ok(())
    }

    /// Volumes with the default of 1 filled in.
    pub fn resolved_volumes(&self) -> Vec<T> {
        match &self.volumes {
            Some(v) => v.clone(),
            None => vec![T::one(); self.base.clusters],
        }
    }
}

fn check_norm<T: Scalar>(norm: &Array2<T>, dim: usize) -> Result<(), SolverError> {
    if norm.nrows() != dim || norm.ncols() != dim {
        return Err(SolverError::DimensionMismatch {
            expected: dim,
            got: if norm.nrows() != dim {
                norm.nrows()
            } else {
                norm.ncols()
            },
        });
    }
    let tol = T::constant(SYMMETRY_TOLERANCE);
    for i in 0..dim {
        for j in 0..dim {
            let a = norm[[i, j]];
            if !a.is_finite() {
                return Err(SolverError::InvalidNorm(format!(
                    "non-finite entry at ({i}, {j})"
                )));
            }
            if j > i {
                let b = norm[[j, i]];
                let scale = T::one().max(a.abs()).max(b.abs());
                if (a - b).abs() > tol * scale {
                    return Err(SolverError::InvalidNorm(format!(
                        "asymmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Squared distance (x − v)ᵀ A (x − v) under the norm-inducing matrix A,
/// which must be symmetric and finite. Rounding for near-coincident points is
/// clamped so the result is never negative.
pub fn gk_distance_sq<T: Scalar>(
    x: ArrayView1<'_, T>,
    center: ArrayView1<'_, T>,
    norm: &Array2<T>,
) -> Result<T, SolverError> {
    if x.len() != center.len() {
        return Err(SolverError::DimensionMismatch {
            expected: x.len(),
            got: center.len(),
        });
    }
    check_norm(norm, x.len())?;
    let mut acc = T::zero();
    for i in 0..x.len() {
        let di = x[i] - center[i];
        for j in 0..x.len() {
            let dj = x[j] - center[j];
            acc += di * norm[[i, j]] * dj;
        }
    }
    Ok(acc.max(T::zero()))
}

fn covariance_from_weights<T: Scalar>(
    points: &Array2<T>,
    weight_col: ArrayView1<'_, T>,
    mass: T,
    center: ArrayView1<'_, T>,
) -> Array2<T> {
    let (n, d) = points.dim();
    let mut diffs = Array2::zeros((n, d));
    let mut weighted = Array2::zeros((n, d));
    for i in 0..n {
        let scale = weight_col[i] / mass;
        for k in 0..d {
            let diff = points[[i, k]] - center[k];
            diffs[[i, k]] = diff;
            weighted[[i, k]] = scale * diff;
        }
    }
    let raw = diffs.t().dot(&weighted);
    let half = T::constant(0.5);
    let mut sym = Array2::zeros((d, d));
    for i in 0..d {
        for j in 0..=i {
            let v = (raw[[i, j]] + raw[[j, i]]) * half;
            sym[[i, j]] = v;
            sym[[j, i]] = v;
        }
    }
    sym
}

/// Fuzzy covariance of one cluster: C_j = Σ_i μ_ij^m (x_i−v_j)(x_i−v_j)ᵀ / Σ_i μ_ij^m.
/// The result is symmetrized exactly; it is positive semi-definite up to
/// rounding. A cluster with zero membership mass has no covariance.
pub fn fuzzy_covariance<T: Scalar>(
    data: &Dataset<T>,
    memberships: &MembershipMatrix<T>,
    center: ArrayView1<'_, T>,
    cluster: usize,
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
    if cluster >= memberships.clusters() {
        return Err(SolverError::ClusterIndex {
            cluster,
            clusters: memberships.clusters(),
        });
    }
    if center.len() != data.dim() {
        return Err(SolverError::DimensionMismatch {
            expected: data.dim(),
            got: center.len(),
        });
    }
    let weight_col = memberships
        .values()
        .column(cluster)
        .mapv(|u| u.powf(fuzzifier));
    let mass = weight_col.iter().copied().sum::<T>();
    if !(mass.is_finite() && mass > T::zero()) {
        return Err(SolverError::ZeroMembershipMass { cluster });
    }
    Ok(covariance_from_weights(
        data.points(),
        weight_col.view(),
        mass,
        center,
    ))
}

/// Shrinks a covariance toward a scaled identity:
/// (1−γ)·C + γ·(tr C / d)·I. With γ = 0 the matrix is returned unchanged.
/// A covariance with zero trace (every point exactly on the center) has
/// nothing to shrink toward and gets the diagonal floor 1e-9·I instead.
pub fn regularize_covariance<T: Scalar>(covariance: &Array2<T>, gamma: T) -> Array2<T> {
    let d = covariance.nrows();
    assert_eq!(d, covariance.ncols(), "covariance must be square");
    let mut trace = T::zero();
    for i in 0..d {
        trace += covariance[[i, i]];
    }
    if trace <= T::zero() {
        return Array2::from_diag_elem(d, T::constant(ZERO_TRACE_FLOOR));
    }
    let keep = T::one() - gamma;
    let lift = gamma * trace / T::from_count(d);
    let mut out = covariance.mapv(|v| v * keep);
    for i in 0..d {
        out[[i, i]] += lift;
    }
    out
}

/// Norm-inducing matrix A_j = (ρ_j · det C_j)^(1/d) · C_j⁻¹, computed from a
/// Cholesky factorization with the determinant handled in log space so the
/// scale survives dimensions where det C underflows. By construction
/// det(A_j) = ρ_j. Fails when the covariance is not positive definite.
pub fn norm_matrix<T: Scalar>(covariance: &Array2<T>, volume: T) -> Result<Array2<T>, SolverError> {
    let d = covariance.nrows();
    if covariance.ncols() != d {
        return Err(SolverError::DimensionMismatch {
            expected: d,
            got: covariance.ncols(),
        });
    }
    if !volume.is_finite() || volume <= T::zero() {
        return Err(SolverError::InvalidConfig(
            "cluster volume must be finite and positive".into(),
        ));
    }
    let factor = cholesky(covariance).ok_or(SolverError::IllConditionedCovariance)?;
    let scale = ((volume.ln() + log_det_from_factor(&factor)) / T::from_count(d)).exp();
    if !scale.is_finite() || scale <= T::zero() {
        return Err(SolverError::IllConditionedCovariance);
    }
    let inverse = spd_inverse_from_factor(&factor);
    let norm = inverse.mapv(|v| v * scale);
    if norm.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::IllConditionedCovariance);
    }
    Ok(norm)
}

/// Squared adaptive-norm distances from every point to every center (N×c),
/// trusting the caller-validated norms.
pub(crate) fn gk_sq_distances<T: Scalar>(
    data: &Dataset<T>,
    centers: &Array2<T>,
    norms: &[Array2<T>],
) -> Array2<T> {
    let n = data.len();
    let c = centers.nrows();
    let d = data.dim();
    let points = data.points();
    let columns: Vec<Vec<T>> = (0..c)
        .into_par_iter()
        .map(|j| {
            let center = centers.row(j);
            let mut diffs = Array2::zeros((n, d));
            for i in 0..n {
                for k in 0..d {
                    diffs[[i, k]] = points[[i, k]] - center[k];
                }
            }
            let transformed = diffs.dot(&norms[j]);
            let mut column = vec![T::zero(); n];
            for i in 0..n {
                let mut acc = T::zero();
                for k in 0..d {
                    acc += transformed[[i, k]] * diffs[[i, k]];
                }
                column[i] = acc.max(T::zero());
            }
            column
        })
        .collect();
    let mut out = Array2::zeros((n, c));
    for (j, column) in columns.into_iter().enumerate() {
        for (i, v) in column.into_iter().enumerate() {
            out[[i, j]] = v;
        }
    }
    out
}

/// Objective Σ_i Σ_j μ_ij^m d²_A(x_i, v_j) under per-cluster norms. With every
/// norm equal to the identity this coincides with the Euclidean objective.
pub fn objective<T: Scalar>(
    data: &Dataset<T>,
    centers: &Array2<T>,
    norms: &[Array2<T>],
    memberships: &MembershipMatrix<T>,
    fuzzifier: T,
) -> Result<T, SolverError> {
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
    if norms.len() != centers.nrows() {
        return Err(SolverError::InvalidConfig(format!(
            "{} norm matrices for {} clusters",
            norms.len(),
            centers.nrows()
        )));
    }
    for norm in norms {
        check_norm(norm, data.dim())?;
    }
    let d2 = gk_sq_distances(data, centers, norms);
    let weights = memberships.values().mapv(|u| u.powf(fuzzifier));
    Ok(objective_from_weights(&d2, &weights))
}

pub(crate) fn fit_inner<T: Scalar>(
    data: &Dataset<T>,
    config: &FgkConfig<T>,
    init: Option<MembershipMatrix<T>>,
    mut observer: impl FnMut(&IterationSnapshot<'_, T>),
) -> Result<ClusterModel<T>, SolverError> {
    config.validate()?;
    let n = data.len();
    let d = data.dim();
    let c = config.base.clusters;
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
        None => crate::fcm::random_memberships(n, c, config.base.seed),
    };
    let m = config.base.fuzzifier;
    let gamma = config.cov_reg;
    let volumes = config.resolved_volumes();
    let threshold = T::constant(DEGENERATE_MASS);

    let mut weights = u.values().mapv(|x| x.powf(m));
    let mut centers = Array2::zeros((c, d));
    let mut norms: Vec<Array2<T>> = Vec::new();
    let mut trace: Vec<T> = Vec::with_capacity(16);
    let mut converged = false;
    let mut iterations = 0;
    let mut fallback_events = 0usize;
    let mut fallback_streak = 0usize;

    for t in 1..=config.base.max_iter {
        iterations = t;
        let masses: Vec<T> = weights.sum_axis(Axis(0)).to_vec();
        let (new_centers, reseeded) = centers_with_reseed(data, &weights, &masses);
        centers = new_centers;

        let per_cluster: Vec<(Array2<T>, bool)> = (0..c)
            .into_par_iter()
            .map(|j| {
                let covariance = if masses[j] < threshold {
                    Array2::zeros((d, d))
                } else {
                    covariance_from_weights(
                        data.points(),
                        weights.column(j),
                        masses[j],
                        centers.row(j),
                    )
                };
                let regularized = regularize_covariance(&covariance, gamma);
                match norm_matrix(&regularized, volumes[j]) {
                    Ok(a) => (a, false),
                    Err(_) => (Array2::eye(d), true),
                }
            })
            .collect();
        let fallbacks: Vec<bool> = per_cluster.iter().map(|(_, f)| *f).collect();
        norms = per_cluster.into_iter().map(|(a, _)| a).collect();
        fallback_events += fallbacks.iter().filter(|&&f| f).count();

        let d2 = gk_sq_distances(data, &centers, &norms);
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
            norms: Some(&norms),
            fallbacks: Some(&fallbacks),
        });
        if let Some(prev) = previous {
            if (prev - objective).abs() < config.base.tolerance * T::one().max(objective.abs()) {
                converged = true;
                break;
            }
        }
        if fallbacks.iter().all(|&f| f) {
            fallback_streak += 1;
            if fallback_streak >= MAX_FALLBACK_STREAK {
                return Err(SolverError::PersistentFallback {
                    clusters: c,
                    consecutive: fallback_streak,
                    iteration: t,
                });
            }
        } else {
            fallback_streak = 0;
        }
    }

    Ok(ClusterModel {
        centers,
        memberships: u,
        norm_matrices: Some(norms),
        objective_trace: trace,
        iterations,
        converged,
        seed: config.base.seed,
        fuzzifier: m,
        fallback_events,
    })
}

/// Runs Gustafson-Kessel clustering from a seeded random initialization.
/// Each iteration recomputes centers, per-cluster covariances (shrunk by
/// `cov_reg`), and norm matrices; a cluster whose covariance still cannot be
/// factorized falls back to the identity norm for that iteration, counted in
/// [`ClusterModel::fallback_events`]. The run aborts only when every cluster
/// has been on fallback for 10 consecutive iterations without converging.
pub fn fit<T: Scalar>(
    data: &Dataset<T>,
    config: &FgkConfig<T>,
) -> Result<ClusterModel<T>, SolverError> {
    fit_inner(data, config, None, |_| {})
}

/// Like [`fit`], but starting from a caller-supplied membership matrix.
pub fn fit_with_init<T: Scalar>(
    data: &Dataset<T>,
    config: &FgkConfig<T>,
    init: MembershipMatrix<T>,
) -> Result<ClusterModel<T>, SolverError> {
    fit_inner(data, config, Some(init), |_| {})
}

/// Like [`fit`], invoking `observer` once per iteration with centers,
/// memberships, norms, and per-cluster fallback flags.
pub fn fit_observed<T: Scalar>(
    data: &Dataset<T>,
    config: &FgkConfig<T>,
    observer: impl FnMut(&IterationSnapshot<'_, T>),
) -> Result<ClusterModel<T>, SolverError> {
    fit_inner(data, config, None, observer)
}
