//! Cluster validity indices for fuzzy partitions: the fuzzy partition
//! coefficient (partition crispness) and the Xie-Beni index (compactness
//! against separation). Both are used to compare cluster counts on the same
//! data, not to judge a single run in isolation.

use ndarray::Array2;
use thiserror::Error;

use crate::fcm::euclid_sq_distances;
use crate::model::{ClusterModel, Dataset, MembershipMatrix};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ValidityError {
    #[error("need at least two cluster centers, got {0}")]
    TooFewCenters(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("membership matrix is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    MembershipShape {
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error("coincident cluster centers: minimum separation is zero, index undefined")]
    DegenerateSeparation,
}

/// Fuzzy partition coefficient: (1/N) Σ_i Σ_j μ_ij². Ranges from 1/c for a
/// maximally fuzzy partition to 1 for a crisp one; higher means crisper.
pub fn fpc<T: Scalar>(memberships: &MembershipMatrix<T>) -> T {
    let mut acc = T::zero();
    for &u in memberships.values().iter() {
        acc += u * u;
    }
    acc / T::from_count(memberships.len())
}

/// Xie-Beni index: total weighted compactness Σ_i Σ_j μ_ij^m ‖x_i − v_j‖²
/// divided by N times the minimum squared separation between any two distinct
/// cluster centers. Lower is better; coincident centers leave the index
/// undefined.
pub fn xie_beni<T: Scalar>(
    data: &Dataset<T>,
    centers: &Array2<T>,
    memberships: &MembershipMatrix<T>,
    fuzzifier: T,
) -> Result<T, ValidityError> {
    let c = centers.nrows();
    if c < 2 {
        return Err(ValidityError::TooFewCenters(c));
    }
    if centers.ncols() != data.dim() {
        return Err(ValidityError::DimensionMismatch {
            expected: data.dim(),
            got: centers.ncols(),
        });
    }
    if memberships.len() != data.len() || memberships.clusters() != c {
        return Err(ValidityError::MembershipShape {
            rows: memberships.len(),
            cols: memberships.clusters(),
            expected_rows: data.len(),
            expected_cols: c,
        });
    }

    let d2 = euclid_sq_distances(data, centers);
    let mut compactness = T::zero();
    ndarray::Zip::from(&d2)
        .and(memberships.values())
        .for_each(|&dist, &u| compactness += u.powf(fuzzifier) * dist);

    let mut min_separation = T::infinity();
    for j in 0..c {
        for k in j + 1..c {
            let mut sep = T::zero();
            for col in 0..centers.ncols() {
                let diff = centers[[j, col]] - centers[[k, col]];
                sep += diff * diff;
            }
            min_separation = min_separation.min(sep);
        }
    }
    if min_separation == T::zero() {
        return Err(ValidityError::DegenerateSeparation);
    }
    Ok(compactness / (T::from_count(data.len()) * min_separation))
}

/// Both indices for a fitted model, evaluated with the fuzzifier the model
/// was trained with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityReport<T> {
    pub fpc: T,
    pub xie_beni: T,
}

pub fn report<T: Scalar>(
    data: &Dataset<T>,
    model: &ClusterModel<T>,
) -> Result<ValidityReport<T>, ValidityError> {
    Ok(ValidityReport {
        fpc: fpc(&model.memberships),
        xie_beni: xie_beni(data, &model.centers, &model.memberships, model.fuzzifier)?,
    })
}
