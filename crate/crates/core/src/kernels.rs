//! Field spectral density, detector Green's function and the
//! noise, dissipation and damping kernels in closed form.
//!
//! With coupling `λ` and spectral density
//! `I(ω) = ω/(4π²) · (1 - sin(ωL)/(ωL))` (mirror) or `ω/(4π²)` (free),
//! the kernels on `0 ≤ ω ≤ Λ` are
//!
//! - noise `ν(τ) = λ² ∫ I(ω) cos ωτ dω`
//! - dissipation `μ(τ) = λ² ∫ I(ω) sin ωτ dω`
//! - damping `γ(τ) = (λ²/M) ∫ I(ω)/ω · cos ωτ dω`, so `μ = -M dγ/dτ`.
//!
//! The fluctuation-dissipation relation in this normalisation reads
//! `λ² I(ω) = (2/π) ω M Re γ̃(ω)` for `0 < ω < Λ`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::model::{Geometry, PhysicalParams};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::special::sici;

/// `sin x / x`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `(1 - cos x) / x`.
fn vers_over(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        x / 2.0 - x * x * x / 24.0
    } else {
        (1.0 - x.cos()) / x
    }
}

/// `(sin y - y cos y) / y²`.
fn sin_moment(y: f64) -> f64 {
    if y.abs() < 0.5 {
        // Σ_{k≥1} (-1)^{k+1} 2k y^{2k-1} / (2k+1)!
        let y2 = y * y;
        let mut term = y / 3.0;
        let mut sum = 0.0;
        for k in 1..12 {
            sum += term;
            let k = k as f64;
            term *= -y2 * (2.0 * k + 2.0) / (2.0 * k * (2.0 * k + 2.0) * (2.0 * k + 3.0));
        }
        sum
    } else {
        (y.sin() - y * y.cos()) / (y * y)
    }
}

/// `(y sin y + cos y - 1) / y²`.
fn cos_moment(y: f64) -> f64 {
    if y.abs() < 0.5 {
        // Σ_{k≥1} (-1)^{k-1} (2k-1) y^{2k-2} / (2k)!
        let y2 = y * y;
        let mut term = 0.5;
        let mut sum = 0.0;
        for k in 1..12 {
            sum += term;
            let k = k as f64;
            term *= -y2 * (2.0 * k + 1.0) / ((2.0 * k - 1.0) * (2.0 * k + 1.0) * (2.0 * k + 2.0));
        }
        sum
    } else {
        (y * y.sin() + y.cos() - 1.0) / (y * y)
    }
}

/// `I(ω)`; zero outside `0 ≤ ω`.
pub fn spectral_density(geometry: &Geometry, omega: f64) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    let free = omega / (4.0 * PI * PI);
    match geometry {
        Geometry::FreeSpace => free,
        Geometry::HalfSpaceDirichlet { image_distance } => free * (1.0 - sinc(omega * image_distance)),
    }
}

/// Retarded Green's function `e^{-γτ} sin(Ω̃τ)/Ω̃` of the bare damped oscillator.
pub fn detector_green(params: &PhysicalParams, tau: f64) -> f64 {
    if tau < 0.0 {
        return 0.0;
    }
    let w = params.omega_damped();
    (-params.gamma() * tau).exp() * (w * tau).sin() / w
}

/// Closed-form kernels for one parameter set and geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSet {
    pub params: PhysicalParams,
    pub geometry: Geometry,
}

impl KernelSet {
    pub fn new(params: PhysicalParams, geometry: Geometry) -> Self {
        KernelSet { params, geometry }
    }

    fn scale(&self) -> f64 {
        self.params.coupling_sq() / (4.0 * PI * PI)
    }

    pub fn noise(&self, tau: f64) -> f64 {
        let lam = self.params.cutoff();
        let c = self.scale();
        let free = c * lam * lam * cos_moment(lam * tau);
        match self.geometry {
            Geometry::FreeSpace => free,
            Geometry::HalfSpaceDirichlet { image_distance: l } => {
                free - c / (2.0 * l) * lam * (vers_over(lam * (l + tau)) + vers_over(lam * (l - tau)))
            }
        }
    }

    pub fn dissipation(&self, tau: f64) -> f64 {
        let lam = self.params.cutoff();
        let c = self.scale();
        let free = c * lam * lam * sin_moment(lam * tau);
        match self.geometry {
            Geometry::FreeSpace => free,
            Geometry::HalfSpaceDirichlet { image_distance: l } => {
                free - c / (2.0 * l) * lam * (sinc(lam * (tau - l)) - sinc(lam * (tau + l)))
            }
        }
    }

    pub fn damping(&self, tau: f64) -> f64 {
        let lam = self.params.cutoff();
        let c = self.scale() / self.params.mass();
        let free = c * lam * sinc(lam * tau);
        match self.geometry {
            Geometry::FreeSpace => free,
            Geometry::HalfSpaceDirichlet { image_distance: l } => {
                free - c / (2.0 * l) * (sici(lam * (l + tau)).0 + sici(lam * (l - tau)).0)
            }
        }
    }

    /// `Re γ̃(ω) = ∫_0^∞ γ(τ) cos ωτ dτ` for `0 < ω < Λ`.
    ///
    /// The integral is done numerically up to `T = L + 1` and the rest
    /// analytically in terms of sine and cosine integrals.
    pub fn damping_transform(&self, omega: f64, quad: &QuadratureSpec) -> Result<f64> {
        let lam = self.params.cutoff();
        if !(omega > 0.0 && omega < lam) {
            return Err(Error::Domain(format!(
                "damping transform needs 0 < omega < cutoff, got {omega}"
            )));
        }
        let l = self.geometry.image_distance();
        let t_head = l.map_or(1.0, |l| l + 1.0);
        let mut spec = quad.clone().period(2.0 * PI / lam);
        if let Some(l) = l {
            spec = spec.breakpoints([l]);
        }
        let (head, _) = integrate(|tau| self.damping(tau) * (omega * tau).cos(), 0.0, t_head, &spec)
            .map_err(|e| e.annotate(format!("damping transform head at omega = {omega}")))?;

        let c = self.scale() / self.params.mass();
        let mut tail = c * 0.5 * (sin_tail(lam + omega, t_head) + sin_tail(lam - omega, t_head));
        if let Some(l) = l {
            let t = t_head;
            let i1 = 0.5
                * (cos_phase_tail(lam - omega, -omega * l, t - l)
                    - cos_phase_tail(lam + omega, omega * l, t - l));
            let i2 = 0.5
                * (cos_phase_tail(lam - omega, omega * l, t + l)
                    - cos_phase_tail(lam + omega, -omega * l, t + l));
            let mid = (omega * t).sin() * (sin_tail(lam, t - l) - sin_tail(lam, t + l));
            let j = (i1 - mid - i2) / omega;
            tail -= c / (2.0 * l) * j;
        }
        Ok(head + tail)
    }
}

/// `∫_X^∞ sin(a u)/u du` for `X > 0`.
fn sin_tail(a: f64, x: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a.signum() * (FRAC_PI_2 - sici(a.abs() * x).0)
    }
}

/// `∫_X^∞ cos(b u + φ)/u du` for `X > 0`, `b ≠ 0`.
fn cos_phase_tail(b: f64, phi: f64, x: f64) -> f64 {
    let cos_tail = -sici(b.abs() * x).1;
    phi.cos() * cos_tail - phi.sin() * sin_tail(b, x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdtPoint {
    pub omega: f64,
    /// `(2/π) ω M Re γ̃(ω)`
    pub from_damping: f64,
    /// `λ² I(ω)`
    pub from_density: f64,
}

impl FdtPoint {
    pub fn residual(&self) -> f64 {
        self.from_damping - self.from_density
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdtReport {
    pub points: Vec<FdtPoint>,
}

impl FdtReport {
    pub fn max_abs_residual(&self) -> f64 {
        self.points.iter().map(|p| p.residual().abs()).fold(0.0, f64::max)
    }
}

/// Log-spaced frequencies in `[Λ/10⁴, 0.99 Λ]`.
pub fn fdt_grid(params: &PhysicalParams, n: usize) -> Vec<f64> {
    let lo = (params.cutoff() * 1e-4).ln();
    let hi = (0.99 * params.cutoff()).ln();
    (0..n)
        .map(|k| (lo + (hi - lo) * k as f64 / (n.max(2) - 1) as f64).exp())
        .collect()
}

pub fn fdt_residual(kernels: &KernelSet, omegas: &[f64], quad: &QuadratureSpec) -> Result<FdtReport> {
    let m = kernels.params.mass();
    let lam2 = kernels.params.coupling_sq();
    let points = omegas
        .iter()
        .map(|&w| {
            let re = kernels.damping_transform(w, quad)?;
            Ok(FdtPoint {
                omega: w,
                from_damping: 2.0 / PI * w * m * re,
                from_density: lam2 * spectral_density(&kernels.geometry, w),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FdtReport { points })
}
