//! Detector and field mode functions before any reflection arrives.
//!
//! The detector mode `q_a` starts from `q(0) = 1`, `q̇(0) = -iΩ_r`, which
//! makes the coupled state at `t = 0` the oscillator ground state. The
//! field mode `s` of frequency `ω` responds to a unit drive `e^{-iωt}` from
//! rest.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::PhysicalParams;

/// Roots `p± = -γ ± iΩ̃` of the characteristic polynomial.
pub fn characteristic_roots(params: &PhysicalParams) -> (Complex64, Complex64) {
    let w = params.omega_damped();
    let g = params.gamma();
    (Complex64::new(-g, w), Complex64::new(-g, -w))
}

/// `(q_h(t), q̇_h(t))` with `q_h = A e^{p₋t} + B e^{p₊t}` and
/// `A, B = ½ (1 ± (Ω_r + iγ)/Ω̃)`.
pub fn homogeneous_solution(params: &PhysicalParams, t: f64) -> (Complex64, Complex64) {
    let (pp, pm) = characteristic_roots(params);
    let r = Complex64::new(params.omega_r(), params.gamma()) / params.omega_damped();
    let a = 0.5 * (1.0 + r);
    let b = 0.5 * (1.0 - r);
    let em = (pm * t).exp();
    let ep = (pp * t).exp();
    (a * em + b * ep, a * pm * em + b * pp * ep)
}

/// Coefficients of the zeroth-order field mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZerothOrderCoeffs {
    pub m1: Complex64,
    pub m2: Complex64,
    omega: f64,
    omega_damped: f64,
    gamma: f64,
}

impl ZerothOrderCoeffs {
    /// `M1 = 1/(2(-ω - iγ + Ω̃))`, `M2 = 1/(2(-ω - iγ - Ω̃))`.
    pub fn new(params: &PhysicalParams, omega: f64) -> Self {
        let w = params.omega_damped();
        let g = params.gamma();
        ZerothOrderCoeffs {
            m1: Complex64::new(2.0 * (w - omega), -2.0 * g).inv(),
            m2: Complex64::new(-2.0 * (w + omega), -2.0 * g).inv(),
            omega,
            omega_damped: w,
            gamma: g,
        }
    }

    /// The bracket `(M1-M2) e^{-iωt} + (M2 e^{iΩ̃t} - M1 e^{-iΩ̃t}) e^{-γt}`
    /// and its time derivative. The mode itself is the bracket over `Ω̃`.
    pub fn bracket(&self, t: f64) -> (Complex64, Complex64) {
        let (w, g, om) = (self.omega_damped, self.gamma, self.omega);
        let i = Complex64::i();
        let drive = Complex64::from_polar(1.0, -om * t);
        let decay = (-g * t).exp();
        let up = Complex64::from_polar(decay, w * t);
        let down = Complex64::from_polar(decay, -w * t);
        let d = self.m1 - self.m2;
        let value = d * drive + self.m2 * up - self.m1 * down;
        let rate = -i * om * d * drive + self.m2 * Complex64::new(-g, w) * up - self.m1 * Complex64::new(-g, -w) * down;
        (value, rate)
    }

    /// `(s, ṡ)` of the zeroth-order field mode.
    pub fn mode(&self, t: f64) -> (Complex64, Complex64) {
        let (v, r) = self.bracket(t);
        (v / self.omega_damped, r / self.omega_damped)
    }
}

/// Zeroth-order bracket at frequency `omega` and time `t`.
pub fn zeroth_qplus(params: &PhysicalParams, omega: f64, t: f64) -> Complex64 {
    ZerothOrderCoeffs::new(params, omega).bracket(t).0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeKind {
    Detector,
    Field { omega: f64 },
}

/// A mode sampled on a uniform grid, with its time derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTrajectory {
    pub kind: ModeKind,
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    pub rates: Vec<Complex64>,
}

impl ModeTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Linear interpolation inside the grid (for plotting, not for accuracy).
    pub fn value_at(&self, t: f64) -> Result<Complex64> {
        let n = self.times.len();
        if n == 0 || t < self.times[0] || t > self.times[n - 1] {
            return Err(Error::Domain(format!("time {t} outside the trajectory")));
        }
        let k = self.times.partition_point(|&x| x <= t).clamp(1, n - 1);
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let f = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
        Ok(self.values[k - 1] * (1.0 - f) + self.values[k] * f)
    }
}
