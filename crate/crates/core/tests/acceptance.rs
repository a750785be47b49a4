//! Acceptance gate. One line per criterion, tolerances pinned below.
//!
//! Criteria listed in `KNOWN_FAILURES` fail for reasons recorded with the
//! project notes; they are still evaluated and printed as FAIL, but only an
//! unexpected failure (or an error) makes the process exit nonzero.

use std::f64::consts::{LN_2, PI};
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use udmirror::earlytime::series::MAX_SERIES_ORDER;
use udmirror::earlytime::{dde_solve, early_covariance_series, EarlyOptions, Order, ReflectionSeries};
use udmirror::kernels::{fdt_grid, fdt_residual, KernelSet};
use udmirror::latetime::{default_quadrature, delta_entropy_exact, late_covariance_exact, perturbative_corrections};
use udmirror::quadrature::QuadratureSpec;
use udmirror::twodetector::{order_counting_check, solve_pair, Couplings};
use udmirror::{make_params, CovarianceMatrix, Geometry, PhysicalParams, Result};

const MASS: f64 = 1.0;
const OMEGA_R: f64 = 5.0;
const GAMMA: f64 = 0.02;
const CUTOFF: f64 = 1000.0;
const L_SET: [f64; 5] = [0.5, 1.0, 2.0, 5.0, 10.0];

const C1_ABS_TOL: f64 = 10.0 * GAMMA * GAMMA;
const C1_MAX_SECONDS: f64 = 5.0;
const C2_MAX_SECONDS: f64 = 30.0;
const C3_REL_TOL: f64 = 0.05;
const C3_SHRINK: (f64, f64) = (2.5, 6.0);
const C4_REL_TOL: f64 = 1e-3;
const C4_FREE_SHIFT_REL_TOL: f64 = 0.1;
const C5_SLACK: f64 = 1e-8;
const C6_REL_TOL: f64 = 0.15;
const C7_SUP_TOL: f64 = 1e-6;
const C7_MAX_SECONDS: f64 = 2.0;
const C8_TOL: f64 = 1e-8;
const C9_MODE_TOL: f64 = 1e-5;
const C9_MIRROR_EXP: (f64, f64) = (1.0, 0.1);
const C9_PAIR_EXP: (f64, f64) = (2.0, 0.2);
const C10_DET_FLOOR: f64 = 0.25 * (1.0 - 1e-6);
const C10_T0_TOL: f64 = 1e-10;

const KNOWN_FAILURES: [u32; 3] = [4, 5, 10];

fn params(l: f64) -> PhysicalParams {
    make_params(MASS, OMEGA_R, GAMMA, l, CUTOFF).expect("reference parameters")
}

/// Linear entropy straight from `det`, without the validity check, so
/// unphysical states can be reported rather than rejected.
fn raw_entropy(c: &CovarianceMatrix) -> f64 {
    1.0 - 1.0 / (2.0 * c.det().sqrt())
}

struct Gate {
    states: Vec<(String, CovarianceMatrix)>,
    unexpected: Vec<u32>,
}

impl Gate {
    fn report(&mut self, id: u32, pass: bool, detail: String) {
        let known = KNOWN_FAILURES.contains(&id);
        let tag = match (pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("criterion {id:>2}: {tag}  {detail}");
        if !pass && !known {
            self.unexpected.push(id);
        }
    }

    fn keep(&mut self, label: impl Into<String>, c: CovarianceMatrix) {
        self.states.push((label.into(), c));
    }

    fn run(&mut self, id: u32, f: impl FnOnce(&mut Gate) -> Result<(bool, String)>) {
        match f(self) {
            Ok((pass, detail)) => self.report(id, pass, detail),
            Err(e) => self.report(id, false, format!("error: {e}")),
        }
    }
}

fn criterion_1(g: &mut Gate) -> Result<(bool, String)> {
    let p = params(1.0);
    let start = Instant::now();
    let exact = late_covariance_exact(&p, &Geometry::FreeSpace, &default_quadrature())?;
    let secs = start.elapsed().as_secs_f64();
    let w = p.omega_damped();
    let cl = CUTOFF;
    let vqq = (1.0 - 2.0 * GAMMA / (PI * w)) / (2.0 * MASS * w);
    let vpp = MASS * w / 2.0 + MASS * GAMMA / PI * (2.0 * (cl.ln() - w.ln()) - w * w / (cl * cl) - 1.0);
    g.keep("c1 free exact", exact.covariance);
    let dq = (exact.covariance.v_qq - vqq).abs();
    let dp = (exact.covariance.v_pp - vpp).abs();
    let pass = dq < C1_ABS_TOL && dp < C1_ABS_TOL && secs < C1_MAX_SECONDS;
    Ok((
        pass,
        format!(
            "V_QQ {:.7} vs {vqq:.7} (|d|={dq:.2e}), V_PP {:.5} vs {vpp:.5} (|d|={dp:.2e}), tol {C1_ABS_TOL:.0e}; {secs:.2}s < {C1_MAX_SECONDS}s",
            exact.covariance.v_qq, exact.covariance.v_pp
        ),
    ))
}

fn keep_half(g: &mut Gate, label: String, free: &CovarianceMatrix, dq: f64, dp: f64) -> Result<()> {
    let c = CovarianceMatrix::new(free.v_qq + dq, free.v_pp + dp, free.v_qp)?;
    g.keep(label, c);
    Ok(())
}

fn criterion_2(g: &mut Gate) -> Result<(bool, String)> {
    let start = Instant::now();
    let mut deltas = Vec::new();
    for l in L_SET {
        let e = delta_entropy_exact(&params(l), &default_quadrature())?;
        keep_half(g, format!("c2 half L={l}"), &e.free.covariance, e.delta_v_qq, e.delta_v_pp)?;
        deltas.push(e.delta_entropy);
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = deltas.iter().all(|d| *d < 0.0) && secs < C2_MAX_SECONDS;
    let list: Vec<String> = L_SET.iter().zip(&deltas).map(|(l, d)| format!("L={l}: {d:.4e}")).collect();
    Ok((pass, format!("{}; {secs:.2}s < {C2_MAX_SECONDS}s", list.join(", "))))
}

fn criterion_3(_: &mut Gate) -> Result<(bool, String)> {
    let quad = default_quadrature();
    let mut pass = true;
    let mut worst_rel: f64 = 0.0;
    let mut shrink = Vec::new();
    for l in L_SET {
        let mut disc = [0.0; 2];
        for (k, gamma) in [GAMMA, GAMMA / 2.0].into_iter().enumerate() {
            let p = params(l).with_gamma(gamma)?;
            let exact = delta_entropy_exact(&p, &quad)?.delta_entropy;
            let pert = perturbative_corrections(&p).delta_entropy;
            disc[k] = (pert - exact).abs();
            if k == 0 {
                let rel = disc[0] / exact.abs();
                worst_rel = worst_rel.max(rel);
                pass &= rel < C3_REL_TOL;
            }
        }
        let factor = disc[0] / disc[1];
        pass &= (C3_SHRINK.0..=C3_SHRINK.1).contains(&factor);
        shrink.push(format!("{factor:.2}"));
    }
    Ok((
        pass,
        format!(
            "worst relative gap {worst_rel:.3e} < {C3_REL_TOL}; shrink on halving gamma [{}] in [{}, {}]",
            shrink.join(", "),
            C3_SHRINK.0,
            C3_SHRINK.1
        ),
    ))
}

fn criterion_4(g: &mut Gate) -> Result<(bool, String)> {
    let quad = default_quadrature();
    let lo = delta_entropy_exact(&params(1.0), &quad)?;
    let hi = delta_entropy_exact(&params(1.0).with_cutoff(2.0 * CUTOFF)?, &quad)?;
    keep_half(g, "c4 half L=1 cutoff 2000".into(), &hi.free.covariance, hi.delta_v_qq, hi.delta_v_pp)?;
    g.keep("c4 free cutoff 2000", hi.free.covariance);
    let rel = (hi.delta_entropy / lo.delta_entropy - 1.0).abs();
    let shift = hi.free.entropy - lo.free.entropy;
    let expected = 2.0 * GAMMA / (PI * OMEGA_R) * LN_2;
    let shift_ok = (shift / expected - 1.0).abs() < C4_FREE_SHIFT_REL_TOL;
    Ok((
        rel < C4_REL_TOL && shift_ok,
        format!(
            "dS_L {:.6e} -> {:.6e}, relative change {rel:.2e} (tol {C4_REL_TOL:.0e}); S_free shift {shift:.4e} vs {expected:.4e} (tol {C4_FREE_SHIFT_REL_TOL})",
            lo.delta_entropy, hi.delta_entropy
        ),
    ))
}

fn sample_times() -> Vec<f64> {
    (0..20).map(|k| 25.0 * k as f64 / 19.0).collect()
}

fn nondecreasing(s: &[f64]) -> Option<usize> {
    s.windows(2).position(|w| w[1] < w[0] - C5_SLACK)
}

fn criterion_5(g: &mut Gate) -> Result<(bool, String)> {
    let times = sample_times();
    let opts = EarlyOptions::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for l in [1.0, 2.0, 4.0] {
        let p = params(l);
        let series = early_covariance_series(&p, &p.half_space(), &times, Order::Zeroth, &opts)?;
        let s: Vec<f64> = series.iter().map(|c| raw_entropy(&c.covariance)).collect();
        for c in &series {
            g.keep(format!("c5 zeroth L={l} t={:.3}", c.time), c.covariance);
        }
        let first_drop = nondecreasing(&s);
        pass &= first_drop.is_none();
        let peak = s.iter().copied().fold(f64::MIN, f64::max);
        parts.push(match first_drop {
            None => format!("L={l}: ok, S(25)={:.4e}", s[19]),
            Some(k) => format!("L={l}: drops after t={:.2}, peak {peak:.4e}, S(25)={:.4e}", times[k], s[19]),
        });
    }
    Ok((pass, format!("order 0: {}", parts.join("; "))))
}

/// Full delay dynamics on the same samples, printed for comparison only.
fn criterion_5_full_dynamics(g: &mut Gate) -> Result<()> {
    let times = sample_times();
    for l in [1.0, 2.0, 4.0] {
        let p = params(l);
        let series = early_covariance_series(&p, &p.half_space(), &times, Order::Full, &EarlyOptions::default())?;
        let s: Vec<f64> = series.iter().map(|c| raw_entropy(&c.covariance)).collect();
        for c in &series {
            g.keep(format!("c5 full L={l} t={:.3}", c.time), c.covariance);
        }
        let peak = s.iter().copied().fold(f64::MIN, f64::max);
        let tail = match nondecreasing(&s) {
            None => "nondecreasing".to_string(),
            Some(k) => format!("first drop after t={:.2}", times[k]),
        };
        println!("              full dynamics L={l}: peak {peak:.4e}, S(25)={:.4e}, {tail}", s[19]);
    }
    Ok(())
}

fn criterion_6(g: &mut Gate) -> Result<(bool, String)> {
    let t = 5.0;
    let opts = EarlyOptions::default();
    let ls: Vec<f64> = (0..=175).map(|k| 1.0 + 0.02 * k as f64).collect();
    let mut s = Vec::with_capacity(ls.len());
    for &l in &ls {
        let p = params(l);
        let c = early_covariance_series(&p, &p.half_space(), &[t], Order::Zeroth, &opts)?.remove(0);
        g.keep(format!("c6 zeroth L={l:.2} t={t}"), c.covariance);
        s.push(raw_entropy(&c.covariance));
    }
    // parabolic refinement of each interior extremum
    let mut ext = Vec::new();
    for k in 1..s.len() - 1 {
        let (a, b, c) = (s[k - 1], s[k], s[k + 1]);
        if (b - a) * (c - b) < 0.0 {
            let h = ls[1] - ls[0];
            ext.push(ls[k] + 0.5 * h * (a - c) / (a - 2.0 * b + c));
        }
    }
    if ext.len() < 3 {
        return Ok((false, format!("only {} extrema found for L in [1, 4.5]", ext.len())));
    }
    let spacing = (ext[ext.len() - 1] - ext[0]) / (ext.len() - 1) as f64;
    let target = PI / params(1.0).omega_damped();
    let rel = (spacing / target - 1.0).abs();
    Ok((
        rel < C6_REL_TOL,
        format!(
            "t={t}: {} extrema, mean spacing {spacing:.4} vs pi/Omega~ {target:.4} (rel {rel:.3}, tol {C6_REL_TOL})",
            ext.len()
        ),
    ))
}

fn criterion_7(_: &mut Gate) -> Result<(bool, String)> {
    let l = 1.0;
    let p = params(l);
    let start = Instant::now();
    let series = ReflectionSeries::new(&p, l, MAX_SERIES_ORDER)?;
    let traj = dde_solve(&p, l, None, 3.0 * l, 0.0025)?;
    let sup = traj
        .times
        .iter()
        .zip(&traj.values)
        .map(|(&t, v)| (series.evaluate(t, None).0 - v).norm())
        .fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    Ok((
        sup < C7_SUP_TOL && secs < C7_MAX_SECONDS,
        format!("sup |series - dde| = {sup:.2e} < {C7_SUP_TOL:.0e} on [0, 3L]; {secs:.2}s < {C7_MAX_SECONDS}s"),
    ))
}

fn criterion_8(_: &mut Gate) -> Result<(bool, String)> {
    let p = params(1.0);
    let grid = fdt_grid(&p, 50);
    let quad = QuadratureSpec::with_tolerances(1e-11, 1e-12);
    let free = fdt_residual(&KernelSet::new(p, Geometry::FreeSpace), &grid, &quad)?.max_abs_residual();
    let half = fdt_residual(&KernelSet::new(p, p.half_space()), &grid, &quad)?.max_abs_residual();
    Ok((
        free < C8_TOL && half < C8_TOL,
        format!("50 points: free {free:.2e}, half space {half:.2e}, tol {C8_TOL:.0e}"),
    ))
}

fn criterion_9(_: &mut Gate) -> Result<(bool, String)> {
    let (l, omega, u) = (1.0, 4.0, 0.6);
    let p = params(l);
    let t_max = 800.0;
    let pair = solve_pair(&p, l, omega, u, Couplings::Opposite, t_max, 0.01)?;
    let comb = pair.image_combination();
    let n = comb.len();
    let mut mode_err: f64 = 0.0;
    for k in [n - 1, n - 37, n - 101] {
        let t = pair.q_a.times[k];
        let denom = Complex64::new(omega * omega - OMEGA_R * OMEGA_R, 2.0 * GAMMA * omega)
            - Complex64::from_polar(2.0 * GAMMA / l, omega * l);
        let closed = -Complex64::from_polar(p.coupling() / MASS, -omega * t) * (0.5 * omega * u * l).sin() / denom;
        mode_err = mode_err.max((comb[k] - closed).norm() / closed.norm());
    }
    let report = order_counting_check(&p, &L_SET, &[0.005, 0.01, 0.02, 0.04])?;
    let me = report.mirror_gamma_exponent;
    let pe = report.pair_self_gamma_exponent;
    let pass = mode_err < C9_MODE_TOL
        && (me - C9_MIRROR_EXP.0).abs() < C9_MIRROR_EXP.1
        && (pe - C9_PAIR_EXP.0).abs() < C9_PAIR_EXP.1;
    Ok((
        pass,
        format!(
            "late pair mode rel err {mode_err:.2e} < {C9_MODE_TOL:.0e} at t~{t_max}; gamma exponents mirror {me:.3} ({}±{}), pair self {pe:.3} ({}±{})",
            C9_MIRROR_EXP.0, C9_MIRROR_EXP.1, C9_PAIR_EXP.0, C9_PAIR_EXP.1
        ),
    ))
}

fn criterion_10(g: &mut Gate) -> Result<(bool, String)> {
    let mut t0_worst: f64 = 0.0;
    for l in [1.0, 2.0, 4.0] {
        let p = params(l);
        for order in [Order::Zeroth, Order::Full] {
            let c = early_covariance_series(&p, &p.half_space(), &[0.0], order, &EarlyOptions::default())?.remove(0);
            g.keep(format!("c10 t=0 L={l} {order:?}"), c.covariance);
            t0_worst = t0_worst.max(raw_entropy(&c.covariance).abs());
        }
    }
    let bad: Vec<&(String, CovarianceMatrix)> = g.states.iter().filter(|(_, c)| !(c.det() >= C10_DET_FLOOR)).collect();
    let mut detail = format!(
        "{} states checked, {} below det floor {C10_DET_FLOOR}; |S(t=0)| max {t0_worst:.1e} < {C10_T0_TOL:.0e}",
        g.states.len(),
        bad.len()
    );
    let pass = bad.is_empty() && t0_worst < C10_T0_TOL;
    for (label, c) in bad.iter().take(12) {
        detail.push_str(&format!("\n              {label}: det {:.6}", c.det()));
    }
    if bad.len() > 12 {
        detail.push_str(&format!("\n              ... and {} more", bad.len() - 12));
    }
    Ok((pass, detail))
}

fn main() -> ExitCode {
    let mut g = Gate {
        states: Vec::new(),
        unexpected: Vec::new(),
    };
    g.run(1, criterion_1);
    g.run(2, criterion_2);
    g.run(3, criterion_3);
    g.run(4, criterion_4);
    g.run(5, criterion_5);
    if let Err(e) = criterion_5_full_dynamics(&mut g) {
        println!("              full dynamics diagnostic failed: {e}");
    }
    g.run(6, criterion_6);
    g.run(7, criterion_7);
    g.run(8, criterion_8);
    g.run(9, criterion_9);
    g.run(10, criterion_10);
    if g.unexpected.is_empty() {
        println!("acceptance: no unexpected failures (known: {KNOWN_FAILURES:?})");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected failures {:?}", g.unexpected);
        ExitCode::FAILURE
    }
}
