//! Purity and linear entropy of the reduced detector state.
//!
//! For a single-mode Gaussian state the purity is `1 / (2√det V)`.

use crate::error::{Error, Result};
use crate::model::CovarianceMatrix;

/// Relative slack below `det = 1/4` absorbed as numerical noise.
pub const DEFAULT_PURITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementResult {
    pub purity: f64,
    pub linear_entropy: f64,
    /// Set when `det` was within tolerance below 1/4 and clamped.
    pub clamped: bool,
}

pub fn entropy_from_covariance(cov: &CovarianceMatrix) -> Result<EntanglementResult> {
    entropy_with_tolerance(cov, DEFAULT_PURITY_TOLERANCE)
}

pub fn entropy_with_tolerance(cov: &CovarianceMatrix, tolerance: f64) -> Result<EntanglementResult> {
    let det = cov.det();
    if !det.is_finite() {
        return Err(Error::InvalidState { det });
    }
    if det >= 0.25 {
        let purity = 1.0 / (2.0 * det.sqrt());
        return Ok(EntanglementResult {
            purity,
            linear_entropy: 1.0 - purity,
            clamped: false,
        });
    }
    if det >= 0.25 * (1.0 - tolerance) {
        return Ok(EntanglementResult {
            purity: 1.0,
            linear_entropy: 0.0,
            clamped: true,
        });
    }
    Err(Error::InvalidState { det })
}

/// `S(b) - S(a)` without subtracting two nearly equal purities.
pub fn entropy_difference(a: &CovarianceMatrix, b: &CovarianceMatrix) -> Result<f64> {
    let dq = b.v_qq - a.v_qq;
    let dp = b.v_pp - a.v_pp;
    let dx = b.v_qp - a.v_qp;
    entropy_difference_from_deltas(a, dq, dp, dx)
}

/// Same as [`entropy_difference`] with `b = a + (dq, dp, dx)` given by its
/// increments, which may be known more accurately than `b` itself.
pub fn entropy_difference_from_deltas(a: &CovarianceMatrix, dq: f64, dp: f64, dx: f64) -> Result<f64> {
    let det_a = a.det();
    let ddet = dq * a.v_pp + a.v_qq * dp + dq * dp - dx * (2.0 * a.v_qp + dx);
    let det_b = det_a + ddet;
    for det in [det_a, det_b] {
        if !(det >= 0.25 * (1.0 - DEFAULT_PURITY_TOLERANCE)) {
            return Err(Error::InvalidState { det });
        }
    }
    let (ra, rb) = (det_a.sqrt(), det_b.sqrt());
    Ok(ddet / (2.0 * ra * rb * (ra + rb)))
}
