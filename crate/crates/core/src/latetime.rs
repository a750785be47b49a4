//! Late-time (relaxed) detector state.
//!
//! In the stationary regime the covariance follows from the response
//! function by the fluctuation-dissipation relation:
//! `V_QQ = (1/π) ∫ Im G̃ dω` and `V_PP = (M²/π) ∫ ω² Im G̃ dω` over
//! `0 ≤ ω ≤ Λ`, with
//!
//! ```text
//! G̃(ω) = 1 / (M [Ω_r² - ω² - 2iγω + (2γ/L) e^{iωL}])
//! ```
//!
//! (the delay term is absent in free space).

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::entanglement::{entropy_difference_from_deltas, entropy_from_covariance};
use crate::error::Result;
use crate::model::{CovarianceMatrix, Geometry, PhysicalParams};
use crate::quadrature::{integrate_n, QuadratureSpec};
use crate::special::gamma0_imaginary;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LateTimeMethod {
    Quadrature,
    ClosedForm,
    Perturbative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LateTimeResult {
    pub covariance: CovarianceMatrix,
    pub entropy: f64,
    pub method: LateTimeMethod,
}

/// Leading-order mirror corrections to the late-time state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbativeCorrections {
    pub delta_v_qq: f64,
    pub delta_v_pp: f64,
    pub delta_entropy: f64,
}

/// Tolerances used when none are given.
pub fn default_quadrature() -> QuadratureSpec {
    QuadratureSpec::with_tolerances(1e-13, 1e-12)
}

pub fn response(params: &PhysicalParams, geometry: &Geometry, omega: f64) -> Complex64 {
    response_denominator(params, geometry, omega).inv()
}

fn response_denominator(params: &PhysicalParams, geometry: &Geometry, omega: f64) -> Complex64 {
    let g = params.gamma();
    let wr = params.omega_r();
    let mut d = Complex64::new(wr * wr - omega * omega, -2.0 * g * omega);
    if let Geometry::HalfSpaceDirichlet { image_distance: l } = geometry {
        d += Complex64::from_polar(2.0 * g / l, omega * l);
    }
    d * params.mass()
}

/// Breakpoints around the resonance plus a geometric ladder up to the
/// cutoff for the slowly decaying `1/ω` tail of the momentum integrand.
fn late_spec(params: &PhysicalParams, geometry: &Geometry, quad: &QuadratureSpec) -> QuadratureSpec {
    let w = params.omega_damped();
    let g = params.gamma();
    let mut pts = Vec::new();
    for k in [1.0, 10.0, 100.0] {
        pts.push(w - k * g);
        pts.push(w + k * g);
    }
    let mut x = w + 100.0 * g;
    while x < params.cutoff() {
        pts.push(x);
        x *= 2.0;
    }
    let mut spec = quad.clone().breakpoints(pts);
    if let Some(l) = geometry.image_distance() {
        spec = spec.period(2.0 * PI / l);
    }
    spec
}

pub fn late_covariance_exact(params: &PhysicalParams, geometry: &Geometry, quad: &QuadratureSpec) -> Result<LateTimeResult> {
    let spec = late_spec(params, geometry, quad);
    let r = integrate_n(
        |w| {
            let im = response(params, geometry, w).im;
            [im, w * w * im]
        },
        0.0,
        params.cutoff(),
        &spec,
    )
    .map_err(|e| resonance_context(e, params))?;
    let m = params.mass();
    let covariance = CovarianceMatrix::new(r.value[0] / PI, m * m * r.value[1] / PI, 0.0)?;
    Ok(LateTimeResult {
        covariance,
        entropy: entropy_from_covariance(&covariance)?.linear_entropy,
        method: LateTimeMethod::Quadrature,
    })
}

fn resonance_context(e: crate::Error, params: &PhysicalParams) -> crate::Error {
    let w = params.omega_damped();
    let g = params.gamma();
    match e {
        crate::Error::NonConvergence { a, b, .. } if b >= w - 10.0 * g && a <= w + 10.0 * g => e.annotate(format!(
            "late-time response integral failed near the resonance at {w} (width {g})"
        )),
        e => e.annotate("late-time response integral"),
    }
}

/// Free-space closed forms, valid to first order in `γ/Ω`.
pub fn late_covariance_free_closed(params: &PhysicalParams) -> LateTimeResult {
    let m = params.mass();
    let g = params.gamma();
    let w = params.omega_damped();
    let lam = params.cutoff();
    let log = 2.0 * (lam / w).ln() - (w / lam).powi(2);
    let v_qq = (1.0 - 2.0 * g / (PI * w)) / (2.0 * m * w);
    let v_pp = m * (w / 2.0 + g / PI * (log - 1.0));
    LateTimeResult {
        covariance: CovarianceMatrix {
            v_qq,
            v_pp,
            v_qp: 0.0,
        },
        entropy: g / (PI * params.omega_r()) * (log - 2.0),
        method: LateTimeMethod::ClosedForm,
    }
}

/// `Γ(0, ix)` for `x > 0`.
pub fn gamma0_imag(x: f64) -> Complex64 {
    gamma0_imaginary(x)
}

/// First-order mirror corrections, written with `X = e^{iΩL} Γ(0, iΩL)`.
pub fn perturbative_corrections(params: &PhysicalParams) -> PerturbativeCorrections {
    let m = params.mass();
    let g = params.gamma();
    let w = params.omega_r();
    let l = params.image_distance();
    let x = Complex64::from_polar(1.0, w * l) * gamma0_imaginary(w * l);
    let i = Complex64::i();
    let delta_v_qq = -(g / (PI * m * w * l)) * ((i / (w * w) + l / w) * x).re;
    let delta_v_pp = -(m * g / (PI * w * l)) * ((-i + l * w) * x).re;
    PerturbativeCorrections {
        delta_v_qq,
        delta_v_pp,
        delta_entropy: -(2.0 / PI) * (g / w) * x.re,
    }
}

/// Mirror-induced change of the late-time state, from quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactCorrections {
    pub free: LateTimeResult,
    pub delta_v_qq: f64,
    pub delta_v_pp: f64,
    pub delta_entropy: f64,
}

/// `S_half - S_free` at the parameters' image distance.
///
/// The covariance shift is integrated directly as
/// `G̃_half - G̃_free = -G̃_half G̃_free · 2γM e^{iωL}/L`, avoiding the
/// cancellation between two separately integrated covariances.
pub fn delta_entropy_exact(params: &PhysicalParams, quad: &QuadratureSpec) -> Result<ExactCorrections> {
    let free = late_covariance_exact(params, &Geometry::FreeSpace, quad)?;
    let half = params.half_space();
    let l = params.image_distance();
    let m = params.mass();
    let coeff = 2.0 * params.gamma() * m / l;
    let spec = late_spec(params, &half, quad);
    let r = integrate_n(
        |w| {
            let gh = response(params, &half, w);
            let gf = response(params, &Geometry::FreeSpace, w);
            let d = -(gh * gf * Complex64::from_polar(coeff, w * l)).im;
            [d, w * w * d]
        },
        0.0,
        params.cutoff(),
        &spec,
    )
    .map_err(|e| resonance_context(e, params))?;
    let delta_v_qq = r.value[0] / PI;
    let delta_v_pp = m * m * r.value[1] / PI;
    let delta_entropy = entropy_difference_from_deltas(&free.covariance, delta_v_qq, delta_v_pp, 0.0)?;
    Ok(ExactCorrections {
        free,
        delta_v_qq,
        delta_v_pp,
        delta_entropy,
    })
}
