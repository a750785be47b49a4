//! Reflection series for the mirrored detector mode in closed form.
//!
//! Writing `q_a = Σ_n θ(t - nL) P_n(t - nL)` with `P_0` the free
//! homogeneous solution, each order obeys
//! `P_n(T) = κ ∫_0^T G_r(T - y) P_{n-1}(y) dy` with `κ = -2γ/L`. Every `P_n`
//! is a finite sum of `c T^k e^{pT}` with `p ∈ {p₊, p₋}`, so the
//! convolutions are done exactly on that representation.

use num_complex::Complex64;

use super::modes::characteristic_roots;
use crate::error::{Error, Result};
use crate::model::PhysicalParams;

/// Orders beyond this lose accuracy to cancellation in the polynomial parts.
pub const MAX_SERIES_ORDER: usize = 24;

/// `Σ c[r][k] T^k e^{p_r T}` for the two characteristic roots.
#[derive(Debug, Clone, PartialEq)]
struct ExpPoly {
    coeffs: [Vec<Complex64>; 2],
}

impl ExpPoly {
    fn eval(&self, roots: [Complex64; 2], t: f64) -> (Complex64, Complex64) {
        let mut v = Complex64::new(0.0, 0.0);
        let mut d = Complex64::new(0.0, 0.0);
        for r in 0..2 {
            let e = (roots[r] * t).exp();
            let mut poly = Complex64::new(0.0, 0.0);
            let mut dpoly = Complex64::new(0.0, 0.0);
            for c in self.coeffs[r].iter().rev() {
                dpoly = dpoly * t + poly;
                poly = poly * t + c;
            }
            v += poly * e;
            d += (dpoly + roots[r] * poly) * e;
        }
        (v, d)
    }

    /// `∫_0^T K(T-y) f(y) dy` with `K(τ) = Σ_r kernel[r] e^{p_r τ}`.
    fn convolve(&self, roots: [Complex64; 2], kernel: [Complex64; 2]) -> ExpPoly {
        let deg = self.coeffs.iter().map(|c| c.len()).max().unwrap_or(0) + 1;
        let mut out = [vec![Complex64::new(0.0, 0.0); deg], vec![Complex64::new(0.0, 0.0); deg]];
        for kr in 0..2 {
            let p = roots[kr];
            for fr in 0..2 {
                let q = roots[fr];
                for (k, &c) in self.coeffs[fr].iter().enumerate() {
                    let c = c * kernel[kr];
                    if kr == fr {
                        // e^{pT} T^{k+1}/(k+1)
                        out[kr][k + 1] += c / (k + 1) as f64;
                        continue;
                    }
                    // e^{qT} Σ_j (-1)^j k!/(k-j)! T^{k-j}/δ^{j+1} - (-1)^k k!/δ^{k+1} e^{pT}
                    let delta = q - p;
                    let mut fall = 1.0; // k!/(k-j)!
                    let mut dpow = delta; // δ^{j+1}
                    for j in 0..=k {
                        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                        out[fr][k - j] += c * (sign * fall) / dpow;
                        fall *= (k - j) as f64;
                        dpow *= delta;
                    }
                    let kfact: f64 = (1..=k).map(|x| x as f64).product();
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    out[kr][0] -= c * (sign * kfact) / delta.powi(k as i32 + 1);
                }
            }
        }
        ExpPoly { coeffs: out }
    }
}

/// Closed-form orders `P_0 ..= P_N` of the mirrored detector mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionSeries {
    roots: [Complex64; 2],
    delay: f64,
    orders: Vec<ExpPoly>,
}

impl ReflectionSeries {
    pub fn new(params: &PhysicalParams, delay: f64, max_order: usize) -> Result<Self> {
        if max_order > MAX_SERIES_ORDER {
            return Err(Error::Domain(format!(
                "reflection series order {max_order} exceeds {MAX_SERIES_ORDER}"
            )));
        }
        if !(delay > 0.0 && delay.is_finite()) {
            return Err(Error::Domain(format!("delay must be positive, got {delay}")));
        }
        let (pp, pm) = characteristic_roots(params);
        let roots = [pp, pm];
        let w = params.omega_damped();
        let r = Complex64::new(params.omega_r(), params.gamma()) / w;
        let p0 = ExpPoly {
            coeffs: [vec![0.5 * (1.0 - r)], vec![0.5 * (1.0 + r)]],
        };
        // κ G_r(τ) = κ (e^{p₊τ} - e^{p₋τ}) / (2iΩ̃)
        let kappa = -2.0 * params.gamma() / delay;
        let g = Complex64::new(0.0, 2.0 * w).inv() * kappa;
        let kernel = [g, -g];
        let mut orders = vec![p0];
        for n in 1..=max_order {
            let next = orders[n - 1].convolve(roots, kernel);
            orders.push(next);
        }
        Ok(ReflectionSeries { roots, delay, orders })
    }

    pub fn max_order(&self) -> usize {
        self.orders.len() - 1
    }

    /// `(q_a, q̇_a)` including orders up to `max_order` (all stored ones by default).
    pub fn evaluate(&self, t: f64, max_order: Option<usize>) -> (Complex64, Complex64) {
        let top = max_order.unwrap_or(usize::MAX).min(self.max_order());
        let mut v = Complex64::new(0.0, 0.0);
        let mut d = Complex64::new(0.0, 0.0);
        for (n, p) in self.orders.iter().enumerate().take(top + 1) {
            let local = t - n as f64 * self.delay;
            if local < 0.0 {
                break;
            }
            let (a, b) = p.eval(self.roots, local);
            v += a;
            d += b;
        }
        (v, d)
    }
}

/// `q_a(t)` through `max_order` reflections.
pub fn reflection_series_qa(params: &PhysicalParams, delay: f64, t: f64, max_order: usize) -> Result<Complex64> {
    Ok(ReflectionSeries::new(params, delay, max_order)?.evaluate(t, None).0)
}
