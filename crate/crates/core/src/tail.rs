//! Tail scale of the error law near its upper endpoint.

use crate::error::{GofError, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate<T> {
    pub gamma_hat: T,
    pub k: usize,
    /// Gap between the top and the (k+1)-th largest residual.
    pub denominator: T,
    /// Number of residuals.
    pub m: usize,
}

/// Negative-Hill-type scale estimate `(k/m) / (e_(m) - e_(m-k))` from `m` residuals.
pub fn neg_hill<T: Scalar>(residuals: &[T], k: usize) -> Result<TailEstimate<T>> {
    let m = residuals.len();
    if k < 1 || k >= m {
        return Err(GofError::BadK { k, m });
    }
    if residuals.iter().any(|r| !r.is_finite()) {
        return Err(GofError::Domain("non-finite residual".into()));
    }
    let mut sorted = residuals.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let denominator = sorted[m - 1] - sorted[m - 1 - k];
    if !(denominator > T::zero()) {
        return Err(GofError::ZeroDenominator { k });
    }
    // 2k/n with n = 2m
    let ratio = T::of_usize(2 * k) / T::of_usize(2 * m);
    Ok(TailEstimate {
        gamma_hat: ratio / denominator,
        k,
        denominator,
        m,
    })
}

/// Known scale when supplied, otherwise the estimate from the residuals.
pub fn resolve_gamma<T: Scalar>(known: Option<T>, residuals: &[T], k: usize) -> Result<T> {
    match known {
        Some(g) if g > T::zero() && g.is_finite() => Ok(g),
        Some(g) => Err(GofError::Domain(format!("gamma must be positive, got {g:?}"))),
        None => neg_hill(residuals, k).map(|t| t.gamma_hat),
    }
}
