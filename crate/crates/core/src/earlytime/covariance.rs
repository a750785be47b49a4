use num_complex::Complex64;
use std::f64::consts::PI;

use super::dde::{DelayComponent, DelaySystem, MAX_STEP_OMEGA};
use super::modes::{homogeneous_solution, ZerothOrderCoeffs};
use crate::entanglement::{entropy_from_covariance, EntanglementResult};
use crate::error::{Error, Result};
use crate::kernels::spectral_density;
use crate::model::{CovarianceMatrix, Geometry, PhysicalParams};
use crate::quadrature::{composite_gauss_legendre, integrate_n, QuadratureSpec};

/// How many mirror reflections are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    /// No reflections: free mode functions with the mirror's spectral weight.
    Zeroth,
    /// Reflections up to the given order.
    Truncated(usize),
    /// The complete delay equation.
    Full,
}

/// Three independent entries of a symmetric 2x2 block.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Moments {
    pub qq: f64,
    pub pp: f64,
    pub qp: f64,
}

impl Moments {
    /// Contribution of one mode with `Q ∝ x`, `P ∝ M ẋ` and weight `w`.
    fn of(x: Complex64, rate: Complex64, mass: f64, w: f64) -> Moments {
        Moments {
            qq: w * x.norm_sqr(),
            pp: w * mass * mass * rate.norm_sqr(),
            qp: w * mass * (x.conj() * rate).re,
        }
    }

    fn add(self, o: Moments) -> Moments {
        Moments {
            qq: self.qq + o.qq,
            pp: self.pp + o.pp,
            qp: self.qp + o.qp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarlyCovariance {
    pub time: f64,
    pub order: Order,
    /// From the detector's own initial fluctuations.
    pub a_part: Moments,
    /// From the field.
    pub v_part: Moments,
    pub covariance: CovarianceMatrix,
}

impl EarlyCovariance {
    fn assemble(time: f64, order: Order, a_part: Moments, v_part: Moments) -> Result<Self> {
        let s = a_part.add(v_part);
        Ok(EarlyCovariance {
            time,
            order,
            a_part,
            v_part,
            covariance: CovarianceMatrix::new(s.qq, s.pp, s.qp)?,
        })
    }

    pub fn entropy(&self) -> Result<EntanglementResult> {
        entropy_from_covariance(&self.covariance)
    }
}

/// Numerical settings for the early-time evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct EarlyOptions {
    /// Adaptive quadrature for the zeroth-order field integral.
    pub quad: QuadratureSpec,
    /// Time step of the delay solver; defaults to `min(1/(20Ω_r), L/20)`.
    pub step: Option<f64>,
    /// Gauss-Legendre points per panel of the fixed frequency grid.
    pub panel_points: usize,
    /// Points per panel inside the resonance band.
    pub resonance_points: usize,
}

impl Default for EarlyOptions {
    fn default() -> Self {
        EarlyOptions {
            quad: QuadratureSpec::with_tolerances(1e-13, 1e-10),
            step: None,
            panel_points: 16,
            resonance_points: 32,
        }
    }
}

fn validate_times(times: &[f64]) -> Result<()> {
    for &t in times {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Domain(format!("time must be non-negative, got {t}")));
        }
    }
    Ok(())
}

/// Mass-weighted prefactors `(λ/M)²` for `Q` built from a field mode.
fn field_scale(params: &PhysicalParams) -> f64 {
    params.coupling_sq() / (params.mass() * params.mass())
}

fn a_part_free(params: &PhysicalParams, t: f64) -> Moments {
    let (q, v) = homogeneous_solution(params, t);
    Moments::of(q, v, params.mass(), 1.0 / (2.0 * params.mass() * params.omega_r()))
}

/// Zeroth-order field contribution by adaptive quadrature.
fn v_part_zeroth(params: &PhysicalParams, geometry: &Geometry, t: f64, quad: &QuadratureSpec) -> Result<Moments> {
    if t == 0.0 {
        return Ok(Moments::default());
    }
    let w = params.omega_damped();
    let width = params.gamma().max(1.0 / t);
    let mut pts = Vec::new();
    for k in [1.0, 10.0, 100.0] {
        pts.push(w - k * width);
        pts.push(w + k * width);
    }
    let mut x = w + 100.0 * width;
    while x < params.cutoff() {
        pts.push(x);
        x *= 2.0;
    }
    let scale = geometry.image_distance().map_or(t, |l| t.max(l));
    let spec = quad.clone().breakpoints(pts).period(2.0 * PI / scale);
    let m = params.mass();
    let r = integrate_n(
        |om| {
            let (s, rate) = ZerothOrderCoeffs::new(params, om).mode(t);
            let mo = Moments::of(s, rate, m, spectral_density(geometry, om));
            [mo.qq, mo.pp, mo.qp]
        },
        0.0,
        params.cutoff(),
        &spec,
    )
    .map_err(|e| e.annotate(format!("zeroth-order field integral at t = {t}")))?;
    let c = field_scale(params);
    Ok(Moments {
        qq: c * r.value[0],
        pp: c * r.value[1],
        qp: c * r.value[2],
    })
}

/// Composite Gauss-Legendre grid on `[0, Λ]`, dense around `Ω̃` and with
/// panels no wider than one period of the slowest resolved oscillation.
pub fn evolution_grid(params: &PhysicalParams, geometry: &Geometry, t_max: f64, opts: &EarlyOptions) -> (Vec<f64>, Vec<f64>) {
    let w = params.omega_damped();
    let lam = params.cutoff();
    let half = (10.0 * params.gamma()).max(1.0 / t_max.max(1e-300)).min(0.5 * w);
    let scale = geometry.image_distance().map_or(t_max, |l| t_max.max(l)).max(1e-300);
    let cap = 2.0 * PI / scale;

    let core: Vec<f64> = (0..=4).map(|k| w - half + 0.5 * half * k as f64).collect();
    let mut up = vec![w + half];
    let mut width = 0.5 * half;
    while *up.last().unwrap() < lam {
        width = (width * 1.5).min(cap);
        let next = (up.last().unwrap() + width).min(lam);
        up.push(next);
    }
    let mut down = vec![w - half];
    let mut width = 0.5 * half;
    while *down.last().unwrap() > 0.0 {
        width = (width * 1.5).min(cap);
        let next = (down.last().unwrap() - width).max(0.0);
        down.push(next);
    }
    down.reverse();

    let (mut nodes, mut weights) = composite_gauss_legendre(&down, opts.panel_points);
    let (cn, cw) = composite_gauss_legendre(&core, opts.resonance_points);
    let (un, uw) = composite_gauss_legendre(&up, opts.panel_points);
    nodes.extend(cn);
    nodes.extend(un);
    weights.extend(cw);
    weights.extend(uw);
    (nodes, weights)
}

/// Default delay-solver step for a given delay.
pub fn default_step(params: &PhysicalParams, delay: f64) -> f64 {
    (1.0 / (20.0 * params.omega_r())).min(delay / 20.0)
}

/// Delay system for the mirrored mode, as one self-delayed component or as
/// a hierarchy of orders `0..=n`.
pub fn mirror_system(params: &PhysicalParams, delay: f64, order: Order, source: Option<f64>) -> Result<DelaySystem> {
    let (drive, value, rate) = match source {
        Some(_) => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
        None => (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, -params.omega_r())),
    };
    let zero = Complex64::new(0.0, 0.0);
    let components = match order {
        Order::Full => vec![DelayComponent::new(drive, Some(0)).with_initial(value, rate)],
        Order::Zeroth => vec![DelayComponent::new(drive, None).with_initial(value, rate)],
        Order::Truncated(n) => {
            let mut c = vec![DelayComponent::new(drive, None).with_initial(value, rate)];
            c.extend((1..=n).map(|k| DelayComponent::new(zero, Some(k - 1))));
            c
        }
    };
    if !(delay > 0.0 && delay.is_finite()) {
        return Err(Error::Domain(format!("image distance must be positive, got {delay}")));
    }
    Ok(DelaySystem {
        gamma: params.gamma(),
        omega_r: params.omega_r(),
        delay: Some(delay),
        kappa: -2.0 * params.gamma() / delay,
        omega: source,
        components,
    })
}

fn summed(state: &[(Complex64, Complex64)]) -> (Complex64, Complex64) {
    state
        .iter()
        .fold((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)), |acc, s| (acc.0 + s.0, acc.1 + s.1))
}

/// Early-time covariance at several times in one pass.
///
/// In free space there are no reflections and every order reduces to the
/// zeroth. With a mirror, truncated and full orders evolve the mode
/// functions with the delay solver on a fixed frequency grid, so each
/// frequency is integrated once for all requested times.
pub fn early_covariance_series(
    params: &PhysicalParams,
    geometry: &Geometry,
    times: &[f64],
    order: Order,
    opts: &EarlyOptions,
) -> Result<Vec<EarlyCovariance>> {
    validate_times(times)?;
    let delay = match (geometry, order) {
        (Geometry::FreeSpace, _) | (_, Order::Zeroth) => None,
        (Geometry::HalfSpaceDirichlet { image_distance }, _) => Some(*image_distance),
    };
    let Some(l) = delay else {
        return times
            .iter()
            .map(|&t| {
                let v = v_part_zeroth(params, geometry, t, &opts.quad)?;
                EarlyCovariance::assemble(t, order, a_part_free(params, t), v)
            })
            .collect();
    };
    if let Order::Truncated(n) = order {
        if n == 0 {
            return early_covariance_series(params, geometry, times, Order::Zeroth, opts);
        }
    }

    let t_max = times.iter().copied().fold(0.0, f64::max);
    let step = opts.step.unwrap_or_else(|| default_step(params, l));
    if step * params.omega_r() > MAX_STEP_OMEGA {
        return Err(Error::StepTooLarge {
            step,
            limit: MAX_STEP_OMEGA / params.omega_r(),
        });
    }
    let m = params.mass();

    let det = mirror_system(params, l, order, None)?.solve_samples(t_max, step, times)?;
    let a_weight = 1.0 / (2.0 * m * params.omega_r());
    let a_parts: Vec<Moments> = det
        .iter()
        .map(|s| {
            let (q, v) = summed(s);
            Moments::of(q, v, m, a_weight)
        })
        .collect();

    let mut v_parts = vec![Moments::default(); times.len()];
    if t_max > 0.0 {
        let (nodes, weights) = evolution_grid(params, geometry, t_max, opts);
        let c = field_scale(params);
        for (&om, &wt) in nodes.iter().zip(&weights) {
            let w = c * wt * spectral_density(geometry, om);
            let sol = mirror_system(params, l, order, Some(om))?.solve_samples(t_max, step, times)?;
            for (acc, s) in v_parts.iter_mut().zip(&sol) {
                let (x, r) = summed(s);
                *acc = acc.add(Moments::of(x, r, m, w));
            }
        }
    }

    times
        .iter()
        .zip(a_parts.into_iter().zip(v_parts))
        .map(|(&t, (a, v))| EarlyCovariance::assemble(t, order, a, v))
        .collect()
}

pub fn early_covariance(params: &PhysicalParams, geometry: &Geometry, t: f64, order: Order) -> Result<EarlyCovariance> {
    Ok(early_covariance_series(params, geometry, &[t], order, &EarlyOptions::default())?.remove(0))
}
