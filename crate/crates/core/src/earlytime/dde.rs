//! Linear delay-differential systems of damped oscillators.
//!
//! Each component obeys
//!
//! ```text
//! s̈_j + 2γ ṡ_j + Ω_r² s_j = c_j e^{-iωt} + κ θ(t-L) s_{d(j)}(t-L)
//! ```
//!
//! where `d(j)` is the component the delayed term reads from, if any. A
//! single mirrored mode reads itself; a truncated reflection hierarchy
//! reads the previous order; a detector pair reads the partner.
//!
//! On `[nL, (n+1)L)` the driven part is exactly `A_j(n) e^{-iωt}` with
//! `A_j(n) = a (c_j + κ e^{iωL} A_{d(j)}(n-1))`, `a = 1/(Ω_r² - ω² - 2iγω)`.
//! The remainder `u_j` solves the undriven delay equation and is integrated
//! with RK4 on a grid that divides `L`; it jumps at `t = nL` to keep `s_j`
//! continuously differentiable. Delayed values come from cubic Hermite
//! interpolation of the stored history, so the step never has to resolve
//! the drive frequency.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest accepted `h Ω_r`.
pub const MAX_STEP_OMEGA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayComponent {
    pub drive: Complex64,
    pub delayed_from: Option<usize>,
    pub initial_value: Complex64,
    pub initial_rate: Complex64,
}

impl DelayComponent {
    pub fn new(drive: Complex64, delayed_from: Option<usize>) -> Self {
        DelayComponent {
            drive,
            delayed_from,
            initial_value: Complex64::new(0.0, 0.0),
            initial_rate: Complex64::new(0.0, 0.0),
        }
    }

    pub fn with_initial(mut self, value: Complex64, rate: Complex64) -> Self {
        self.initial_value = value;
        self.initial_rate = rate;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelaySystem {
    pub gamma: f64,
    pub omega_r: f64,
    /// Delay `L`; without one the components are plain oscillators.
    pub delay: Option<f64>,
    pub kappa: f64,
    /// Drive frequency `ω`; drives are ignored when absent.
    pub omega: Option<f64>,
    pub components: Vec<DelayComponent>,
}

/// Values and rates of every component at one time.
pub type State = Vec<(Complex64, Complex64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct DelaySolution {
    /// Node spacing actually used.
    pub step: f64,
    pub node_times: Vec<f64>,
    /// `nodes[k][j]` is component `j` at `node_times[k]`.
    pub nodes: Vec<State>,
    /// Same layout for the requested sample times.
    pub samples: Vec<State>,
}

#[derive(Clone, Copy)]
struct Slow {
    left: (Complex64, Complex64),
    right: (Complex64, Complex64),
}

impl DelaySystem {
    fn validate(&self, t_max: f64, step: f64) -> Result<()> {
        if !(t_max >= 0.0 && t_max.is_finite()) {
            return Err(Error::Domain(format!("t_max must be non-negative, got {t_max}")));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Domain(format!("step must be positive, got {step}")));
        }
        let limit = MAX_STEP_OMEGA / self.omega_r;
        if step > limit {
            return Err(Error::StepTooLarge { step, limit });
        }
        if let Some(l) = self.delay {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::Domain(format!("delay must be positive, got {l}")));
            }
        }
        for (j, c) in self.components.iter().enumerate() {
            if let Some(d) = c.delayed_from {
                if d >= self.components.len() {
                    return Err(Error::Domain(format!("component {j} reads missing component {d}")));
                }
                if self.delay.is_none() {
                    return Err(Error::Domain(format!("component {j} has a delayed term but no delay is set")));
                }
            }
        }
        Ok(())
    }

    /// Fast amplitudes `A_j(n)` for `n = 0..=n_max`.
    fn fast_amplitudes(&self, n_max: usize) -> Vec<Vec<Complex64>> {
        let nc = self.components.len();
        let zero = Complex64::new(0.0, 0.0);
        let Some(w) = self.omega else {
            return vec![vec![zero; nc]; n_max + 1];
        };
        let a = Complex64::new(self.omega_r * self.omega_r - w * w, -2.0 * self.gamma * w).inv();
        let phase = self
            .delay
            .map_or(zero, |l| Complex64::from_polar(self.kappa, w * l));
        let mut out: Vec<Vec<Complex64>> = Vec::with_capacity(n_max + 1);
        out.push(self.components.iter().map(|c| a * c.drive).collect());
        for n in 1..=n_max {
            let prev = &out[n - 1];
            let row = self
                .components
                .iter()
                .map(|c| {
                    let delayed = c.delayed_from.map_or(zero, |d| phase * prev[d]);
                    a * (c.drive + delayed)
                })
                .collect();
            out.push(row);
        }
        out
    }

    /// Integrates to `t_max`, returning node values and samples at
    /// `sample_times` (which must lie in `[0, t_max]`).
    pub fn solve(&self, t_max: f64, step: f64, sample_times: &[f64]) -> Result<DelaySolution> {
        self.run(t_max, step, sample_times, true)
    }

    /// As [`DelaySystem::solve`] without recording the node trajectory.
    pub fn solve_samples(&self, t_max: f64, step: f64, sample_times: &[f64]) -> Result<Vec<State>> {
        Ok(self.run(t_max, step, sample_times, false)?.samples)
    }

    fn run(&self, t_max: f64, step: f64, sample_times: &[f64], record: bool) -> Result<DelaySolution> {
        self.validate(t_max, step)?;
        for &t in sample_times {
            if !(0.0..=t_max).contains(&t) {
                return Err(Error::Domain(format!("sample time {t} outside [0, {t_max}]")));
            }
        }
        let nc = self.components.len();
        let (h, per_delay) = match self.delay {
            Some(l) => {
                let k = (l / step).ceil().max(1.0) as usize;
                (l / k as f64, k)
            }
            None => (step, usize::MAX),
        };
        let n_steps = (t_max / h - 1e-9).ceil().max(0.0) as usize;
        let n_intervals = if per_delay == usize::MAX { 0 } else { n_steps / per_delay + 1 };
        let fast = self.fast_amplitudes(n_intervals);
        let w = self.omega.unwrap_or(0.0);
        let i = Complex64::i();
        let interval = |k: usize| if per_delay == usize::MAX { 0 } else { k / per_delay };
        let total = |k: usize, t: f64, y: &[(Complex64, Complex64)], out: &mut State| {
            let e = Complex64::from_polar(1.0, -w * t);
            let row = &fast[interval(k)];
            out.clear();
            out.extend(y.iter().zip(row).map(|(&(u, v), &a)| (u + a * e, v - i * w * a * e)));
        };

        // slow history, flat: entry k * nc + j
        let mut hist: Vec<Slow> = Vec::with_capacity((n_steps + 1) * nc);
        for (j, c) in self.components.iter().enumerate() {
            let a = fast[0][j];
            let s = (c.initial_value - a, c.initial_rate + i * w * a);
            hist.push(Slow { left: s, right: s });
        }

        let mut order: Vec<usize> = (0..sample_times.len()).collect();
        order.sort_by(|&x, &y| sample_times[x].total_cmp(&sample_times[y]));
        let mut samples: Vec<State> = vec![Vec::new(); sample_times.len()];
        let mut next_sample = 0usize;

        let ctx = Stepper {
            sys: self,
            h,
            per_delay,
            nc,
        };
        let mut ws = Workspace::new(nc);
        let mut y: State = Vec::with_capacity(nc);
        let mut y_new: State = vec![(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); nc];
        let mut buf: State = Vec::with_capacity(nc);
        let mut nodes: Vec<State> = Vec::new();
        for k in 0..=n_steps {
            let tk = k as f64 * h;
            y.clear();
            y.extend(hist[k * nc..(k + 1) * nc].iter().map(|s| s.right));
            if record {
                total(k, tk, &y, &mut buf);
                nodes.push(buf.clone());
            }
            while next_sample < order.len() {
                let idx = order[next_sample];
                let ts = sample_times[idx];
                let dt = ts - tk;
                if k < n_steps && dt >= h * (1.0 - 1e-12) {
                    break;
                }
                if dt <= 1e-12 * h {
                    total(k, ts, &y, &mut buf);
                } else {
                    ctx.rk4(&hist, k, &y, dt, &mut y_new, &mut ws);
                    total(k, ts, &y_new, &mut buf);
                }
                samples[idx] = buf.clone();
                next_sample += 1;
            }
            if k == n_steps {
                break;
            }
            ctx.rk4(&hist, k, &y, h, &mut y_new, &mut ws);
            let jump = per_delay != usize::MAX && (k + 1) % per_delay == 0;
            let e = if jump {
                Complex64::from_polar(1.0, -w * (k + 1) as f64 * h)
            } else {
                Complex64::new(0.0, 0.0)
            };
            for (j, &s) in y_new.iter().enumerate() {
                let mut slot = Slow { left: s, right: s };
                if jump {
                    // keep s continuous where the fast amplitude changes
                    let n = (k + 1) / per_delay;
                    let da = fast[n][j] - fast[n - 1][j];
                    slot.right = (s.0 - da * e, s.1 + i * w * da * e);
                }
                hist.push(slot);
            }
        }

        Ok(DelaySolution {
            step: h,
            node_times: if record { (0..=n_steps).map(|k| k as f64 * h).collect() } else { Vec::new() },
            nodes,
            samples,
        })
    }
}

struct Workspace {
    k: [Vec<(Complex64, Complex64)>; 4],
    tmp: Vec<(Complex64, Complex64)>,
}

impl Workspace {
    fn new(nc: usize) -> Self {
        let z = vec![(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); nc];
        Workspace {
            k: [z.clone(), z.clone(), z.clone(), z.clone()],
            tmp: z,
        }
    }
}

struct Stepper<'a> {
    sys: &'a DelaySystem,
    h: f64,
    per_delay: usize,
    nc: usize,
}

impl Stepper<'_> {
    /// Slow part of component `d` at fraction `theta` of interval `m`.
    fn delayed(&self, hist: &[Slow], m: usize, theta: f64, d: usize) -> Complex64 {
        let (y0, d0) = hist[m * self.nc + d].right;
        let (y1, d1) = hist[(m + 1) * self.nc + d].left;
        let t2 = theta * theta;
        let t3 = t2 * theta;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + theta;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        y0 * h00 + d0 * (h10 * self.h) + y1 * h01 + d1 * (h11 * self.h)
    }

    fn rhs(&self, hist: &[Slow], k: usize, theta: f64, y: &[(Complex64, Complex64)], out: &mut [(Complex64, Complex64)]) {
        let s = self.sys;
        let w2 = s.omega_r * s.omega_r;
        for (j, (o, &(u, v))) in out.iter_mut().zip(y).enumerate() {
            let mut acc = -2.0 * s.gamma * v - w2 * u;
            if let Some(d) = s.components[j].delayed_from {
                if self.per_delay != usize::MAX && k >= self.per_delay {
                    acc += s.kappa * self.delayed(hist, k - self.per_delay, theta, d);
                }
            }
            *o = (v, acc);
        }
    }

    fn rk4(
        &self,
        hist: &[Slow],
        k: usize,
        y: &[(Complex64, Complex64)],
        dt: f64,
        out: &mut [(Complex64, Complex64)],
        ws: &mut Workspace,
    ) {
        let frac = dt / self.h;
        let [k1, k2, k3, k4] = &mut ws.k;
        let tmp = &mut ws.tmp;
        self.rhs(hist, k, 0.0, y, k1);
        for j in 0..y.len() {
            tmp[j] = (y[j].0 + k1[j].0 * (dt / 2.0), y[j].1 + k1[j].1 * (dt / 2.0));
        }
        self.rhs(hist, k, 0.5 * frac, tmp, k2);
        for j in 0..y.len() {
            tmp[j] = (y[j].0 + k2[j].0 * (dt / 2.0), y[j].1 + k2[j].1 * (dt / 2.0));
        }
        self.rhs(hist, k, 0.5 * frac, tmp, k3);
        for j in 0..y.len() {
            tmp[j] = (y[j].0 + k3[j].0 * dt, y[j].1 + k3[j].1 * dt);
        }
        self.rhs(hist, k, frac, tmp, k4);
        for j in 0..y.len() {
            out[j] = (
                y[j].0 + (k1[j].0 + 2.0 * k2[j].0 + 2.0 * k3[j].0 + k4[j].0) * (dt / 6.0),
                y[j].1 + (k1[j].1 + 2.0 * k2[j].1 + 2.0 * k3[j].1 + k4[j].1) * (dt / 6.0),
            );
        }
    }
}
