//! Small dense symmetric-positive-definite kernels used by the
//! Gustafson-Kessel norm computation. Cluster covariances here are at most a
//! few hundred rows, so plain triple loops are adequate and keep the results
//! reproducible across platforms.

use ndarray::Array2;

use crate::scalar::Scalar;

/// Lower-triangular Cholesky factor of a symmetric matrix, or `None` when a
/// non-positive pivot shows the matrix is not positive definite.
pub(crate) fn cholesky<T: Scalar>(a: &Array2<T>) -> Option<Array2<T>> {
    let d = a.nrows();
    debug_assert_eq!(d, a.ncols());
    let mut l = Array2::zeros((d, d));
    for i in 0..d {
        for j in 0..=i {
            let mut sum = a[[i, j]];
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if !(sum.is_finite() && sum > T::zero()) {
                    return None;
                }
                l[[i, j]] = sum.sqrt();
            } else {
                l[[i, j]] = sum / l[[j, j]];
            }
        }
    }
    Some(l)
}

/// log(det A) recovered from a Cholesky factor L of A as 2·Σ ln L[i,i].
/// Stays finite where det A itself would underflow to zero in high dimension.
pub(crate) fn log_det_from_factor<T: Scalar>(l: &Array2<T>) -> T {
    let mut acc = T::zero();
    for i in 0..l.nrows() {
        acc += l[[i, i]].ln();
    }
    acc + acc
}

/// Inverse of the SPD matrix whose Cholesky factor is `l`, via L⁻¹ and
/// A⁻¹ = L⁻ᵀ L⁻¹. The result is exactly symmetric: the upper triangle is
/// computed once and mirrored.
pub(crate) fn spd_inverse_from_factor<T: Scalar>(l: &Array2<T>) -> Array2<T> {
    let d = l.nrows();
    let mut inv_l: Array2<T> = Array2::zeros((d, d));
    for j in 0..d {
        inv_l[[j, j]] = T::one() / l[[j, j]];
        for i in j + 1..d {
            let mut sum = T::zero();
            for k in j..i {
                sum -= l[[i, k]] * inv_l[[k, j]];
            }
            inv_l[[i, j]] = sum / l[[i, i]];
        }
    }
    let mut inv = Array2::zeros((d, d));
    for i in 0..d {
        for j in i..d {
            let mut sum = T::zero();
            for k in j..d {
                sum += inv_l[[k, i]] * inv_l[[k, j]];
            }
            inv[[i, j]] = sum;
            inv[[j, i]] = sum;
        }
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn cholesky_recovers_known_factor() {
        let a = array![[4.0, 2.0], [2.0, 5.0]];
        let l = cholesky(&a).unwrap();
        assert!((l[[0, 0]] - 2.0f64).abs() < 1e-12);
        assert!((l[[1, 0]] - 1.0f64).abs() < 1e-12);
        assert!((l[[1, 1]] - 2.0f64).abs() < 1e-12);
        assert_eq!(l[[0, 1]], 0.0);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = array![[1.0, 2.0], [2.0, 1.0]];
        assert!(cholesky(&a).is_none());
        let zero = Array2::<f64>::zeros((3, 3));
        assert!(cholesky(&zero).is_none());
    }

    #[test]
    fn log_det_matches_direct_determinant() {
        let a = array![[4.0, 2.0], [2.0, 5.0]];
        let l = cholesky(&a).unwrap();
        // det = 4·5 − 2·2 = 16
        assert!((log_det_from_factor(&l) - 16.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn inverse_times_original_is_identity() {
        let a = array![[4.0f64, 2.0, 0.5], [2.0, 5.0, 1.0], [0.5, 1.0, 3.0]];
        let l = cholesky(&a).unwrap();
        let inv = spd_inverse_from_factor(&l);
        let prod = inv.dot(&a);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((prod[[i, j]] - expect).abs() < 1e-10, "prod = {prod:?}");
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(inv[[i, j]], inv[[j, i]]);
            }
        }
    }
}
