//! A pair of detectors a distance `L` apart in free space.
//!
//! Detector `B` sits at `z = +L/2` and `A` at `z = -L/2`. With opposite
//! couplings `±λ` the pair reproduces a detector and its mirror image: the
//! combination `(q_B + q_A)/(2i)` obeys the mirrored delay equation with
//! source `(λ/M) sin(k₃L/2)`. Identical couplings flip the sign of the
//! exchange term, and with it the cross correlator.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::earlytime::dde::{DelayComponent, DelaySystem};
use crate::earlytime::{evolution_grid, EarlyOptions, ModeKind, ModeTrajectory, Moments, ZerothOrderCoeffs};
use crate::error::{Error, Result};
use crate::latetime::{default_quadrature, delta_entropy_exact};
use crate::model::{Geometry, PhysicalParams};
use crate::quadrature::{composite_gauss_legendre, integrate_n, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Couplings {
    /// `λ_B = λ`, `λ_A = -λ`: the image configuration.
    Opposite,
    Identical,
}

impl Couplings {
    fn sign(self) -> f64 {
        match self {
            Couplings::Opposite => -1.0,
            Couplings::Identical => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoDetectorModes {
    pub q_a: ModeTrajectory,
    pub q_b: ModeTrajectory,
}

impl TwoDetectorModes {
    /// `(q_B + q_A) / (2i)` on the common grid.
    pub fn image_combination(&self) -> Vec<Complex64> {
        let d = Complex64::new(0.0, 2.0);
        self.q_b.values.iter().zip(&self.q_a.values).map(|(b, a)| (b + a) / d).collect()
    }
}

/// Pair system driven by the field mode of frequency `omega` with
/// `k₃ = k3_fraction · omega`.
pub fn pair_system(params: &PhysicalParams, l: f64, omega: f64, k3_fraction: f64, couplings: Couplings) -> Result<DelaySystem> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::Domain(format!("separation must be positive, got {l}")));
    }
    if !(-1.0..=1.0).contains(&k3_fraction) {
        return Err(Error::Domain(format!("k3_fraction must lie in [-1, 1], got {k3_fraction}")));
    }
    let amp = params.coupling() / params.mass();
    let half = 0.5 * omega * k3_fraction * l;
    let drive_b = Complex64::from_polar(amp, half);
    let drive_a = Complex64::from_polar(couplings.sign() * amp, -half);
    Ok(DelaySystem {
        gamma: params.gamma(),
        omega_r: params.omega_r(),
        delay: Some(l),
        kappa: couplings.sign() * 2.0 * params.gamma() / l,
        omega: Some(omega),
        components: vec![DelayComponent::new(drive_b, Some(1)), DelayComponent::new(drive_a, Some(0))],
    })
}

pub fn solve_pair(
    params: &PhysicalParams,
    l: f64,
    omega: f64,
    k3_fraction: f64,
    couplings: Couplings,
    t_max: f64,
    step: f64,
) -> Result<TwoDetectorModes> {
    let sol = pair_system(params, l, omega, k3_fraction, couplings)?.solve(t_max, step, &[])?;
    let pick = |j: usize| ModeTrajectory {
        kind: ModeKind::Field { omega },
        times: sol.node_times.clone(),
        values: sol.nodes.iter().map(|s| s[j].0).collect(),
        rates: sol.nodes.iter().map(|s| s[j].1).collect(),
    };
    Ok(TwoDetectorModes { q_b: pick(0), q_a: pick(1) })
}

/// Stationary self and cross correlators of the pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairLateCorrelators {
    pub self_qq: f64,
    pub self_pp: f64,
    pub cross_qq: f64,
    pub cross_pp: f64,
    /// `V_self - V_free` for `Q` and `P`, integrated directly.
    pub self_correction_qq: f64,
    pub self_correction_pp: f64,
}

/// Late-time correlators from the pair response matrix
/// `χ = [[D, c], [c, D]]⁻¹` with `D = M(Ω_r² - ω² - 2iγω)` and
/// `c = ∓(2γM/L) e^{iωL}` (upper sign for identical couplings).
pub fn pair_late_correlators(
    params: &PhysicalParams,
    l: f64,
    couplings: Couplings,
    quad: &QuadratureSpec,
) -> Result<PairLateCorrelators> {
    let m = params.mass();
    let g = params.gamma();
    let w = params.omega_damped();
    let coeff = -couplings.sign() * 2.0 * g * m / l;
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
    let spec = quad.clone().breakpoints(pts).period(2.0 * PI / l);
    let r = integrate_n(
        |om| {
            let d = Complex64::new(params.omega_r().powi(2) - om * om, -2.0 * g * om) * m;
            let c = Complex64::from_polar(coeff, om * l);
            let det = d * d - c * c;
            let s = d / det;
            let x = -c / det;
            // D/(D²-c²) - 1/D = c²/(D(D²-c²))
            let corr = c * c / (d * det);
            let w2 = om * om;
            [s.im, w2 * s.im, x.im, w2 * x.im, corr.im, w2 * corr.im]
        },
        0.0,
        params.cutoff(),
        &spec,
    )
    .map_err(|e| e.annotate("pair response integral"))?;
    let v = r.value;
    Ok(PairLateCorrelators {
        self_qq: v[0] / PI,
        self_pp: m * m * v[1] / PI,
        cross_qq: v[2] / PI,
        cross_pp: m * m * v[3] / PI,
        self_correction_qq: v[4] / PI,
        self_correction_pp: m * m * v[5] / PI,
    })
}

/// Zeroth-order field contributions to one pair detector's self correlator
/// and to the cross correlator, from a product grid in `(ω, k₃/ω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairZerothMoments {
    pub self_part: Moments,
    pub cross_part: Moments,
}

pub fn pair_zeroth_v_part(params: &PhysicalParams, l: f64, t: f64, couplings: Couplings, opts: &EarlyOptions) -> Result<PairZerothMoments> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    let (nodes, weights) = evolution_grid(params, &Geometry::half_space(l)?, t, opts);
    // angular average of e^{ik₃L} over k₃/ω ∈ [-1, 1], even in k₃
    let panels = (params.cutoff() * l / PI).ceil() as usize + 1;
    let edges: Vec<f64> = (0..=panels).map(|k| k as f64 / panels as f64).collect();
    let (un, uw) = composite_gauss_legendre(&edges, 16);
    let m = params.mass();
    let scale = params.coupling_sq() / (m * m);
    let mut self_part = Moments::default();
    let mut cross_part = Moments::default();
    for (&om, &wt) in nodes.iter().zip(&weights) {
        let (s, r) = ZerothOrderCoeffs::new(params, om).mode(t);
        let base = scale * wt * om / (4.0 * PI * PI);
        let avg: f64 = un.iter().zip(&uw).map(|(u, w)| w * (om * l * u).cos()).sum();
        let add = |acc: &mut Moments, f: f64| {
            acc.qq += f * s.norm_sqr();
            acc.pp += f * m * m * r.norm_sqr();
            acc.qp += f * m * (s.conj() * r).re;
        };
        add(&mut self_part, base);
        add(&mut cross_part, couplings.sign() * base * avg);
    }
    Ok(PairZerothMoments { self_part, cross_part })
}

/// The mirrored detector's correlator rebuilt from a pair:
/// `(V_CC + V_DD)/2 + V_CD` for `Q_mirror = (Q_C + Q_D)/√2`.
pub fn image_from_pair(v_cc: f64, v_dd: f64, v_cd: f64) -> f64 {
    0.5 * (v_cc + v_dd) + v_cd
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderCountingRow {
    pub l: f64,
    pub mirror_gamma_exponent: f64,
    pub pair_self_gamma_exponent: f64,
    /// Cross correlator against the mirror's first-order `δV_QQ`, at the first `γ`.
    pub cross_over_mirror: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderCountingReport {
    pub rows: Vec<OrderCountingRow>,
    pub mirror_gamma_exponent: f64,
    pub pair_self_gamma_exponent: f64,
    /// Fitted at the first `γ` of the grid.
    pub pair_self_l_exponent: f64,
    pub delta_entropy_l_exponent: f64,
}

/// Least-squares slope of `ln|y|` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Fit(format!("need at least two paired points, got {} and {}", x.len(), y.len())));
    }
    let mut pts = Vec::with_capacity(x.len());
    for (&a, &b) in x.iter().zip(y) {
        if !(a > 0.0 && b != 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::Fit(format!("cannot take logarithms of ({a}, {b})")));
        }
        pts.push((a.ln(), b.abs().ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("abscissae are all equal".into()));
    }
    Ok(sxy / sxx)
}

/// Scaling of the mirror and pair corrections with `γ` and `L`.
///
/// The mirror shift of `V_QQ` is first order in the coupling while the
/// pair's self-correlator shift is second order.
pub fn order_counting_check(params: &PhysicalParams, l_grid: &[f64], gamma_grid: &[f64]) -> Result<OrderCountingReport> {
    let quad = default_quadrature();
    let mut rows = Vec::new();
    let mut pair_first_gamma = Vec::new();
    let mut entropy_first_gamma = Vec::new();
    for &l in l_grid {
        let mut mirror = Vec::new();
        let mut pair = Vec::new();
        let mut ratio = f64::NAN;
        for (k, &g) in gamma_grid.iter().enumerate() {
            let p = params.with_gamma(g)?.with_image_distance(l)?;
            let exact = delta_entropy_exact(&p, &quad)?;
            let c = pair_late_correlators(&p, l, Couplings::Opposite, &quad)?;
            mirror.push(exact.delta_v_qq);
            pair.push(c.self_correction_qq);
            if k == 0 {
                ratio = c.cross_qq / exact.delta_v_qq;
                pair_first_gamma.push(c.self_correction_qq);
                entropy_first_gamma.push(exact.delta_entropy);
            }
        }
        rows.push(OrderCountingRow {
            l,
            mirror_gamma_exponent: loglog_slope(gamma_grid, &mirror)?,
            pair_self_gamma_exponent: loglog_slope(gamma_grid, &pair)?,
            cross_over_mirror: ratio,
        });
    }
    let mean = |f: fn(&OrderCountingRow) -> f64| rows.iter().map(f).sum::<f64>() / rows.len() as f64;
    Ok(OrderCountingReport {
        mirror_gamma_exponent: mean(|r| r.mirror_gamma_exponent),
        pair_self_gamma_exponent: mean(|r| r.pair_self_gamma_exponent),
        pair_self_l_exponent: loglog_slope(l_grid, &pair_first_gamma)?,
        delta_entropy_l_exponent: loglog_slope(l_grid, &entropy_first_gamma)?,
        rows,
    })
}

/// Late-time mirror response rebuilt from the pair response matrix.
pub fn image_response(params: &PhysicalParams, l: f64, omega: f64) -> Complex64 {
    let m = params.mass();
    let d = Complex64::new(params.omega_r().powi(2) - omega * omega, -2.0 * params.gamma() * omega) * m;
    let c = Complex64::from_polar(2.0 * params.gamma() * m / l, omega * l);
    (d - c) / (d * d - c * c)
}
