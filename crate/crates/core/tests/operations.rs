//! Reference values for the public operations, each against an oracle
//! that does not share code with the routine under test.

use std::f64::consts::PI;

use num_complex::Complex64;
use udmirror::earlytime::{dde_solve, early_covariance, early_covariance_series, homogeneous_solution, zeroth_qplus, EarlyOptions, Order};
use udmirror::entanglement::entropy_from_covariance;
use udmirror::kernels::{detector_green, spectral_density};
use udmirror::latetime::{delta_entropy_exact, default_quadrature, late_covariance_free_closed, perturbative_corrections, response};
use udmirror::quadrature::{gauss_legendre, integrate, QuadratureSpec};
use udmirror::special::gamma0_imaginary;
use udmirror::{make_params, Geometry, PhysicalParams};

fn params(l: f64) -> PhysicalParams {
    make_params(1.0, 5.0, 0.02, l, 1000.0).unwrap()
}

/// Classical RK4 for `x'' + 2γx' + Ω²x = 0`.
fn rk4_oscillator(gamma: f64, omega: f64, x0: Complex64, v0: Complex64, t: f64, n: usize) -> Complex64 {
    let h = t / n as f64;
    let f = |x: Complex64, v: Complex64| (v, -2.0 * gamma * v - omega * omega * x);
    let (mut x, mut v) = (x0, v0);
    for _ in 0..n {
        let (a1, b1) = f(x, v);
        let (a2, b2) = f(x + 0.5 * h * a1, v + 0.5 * h * b1);
        let (a3, b3) = f(x + 0.5 * h * a2, v + 0.5 * h * b2);
        let (a4, b4) = f(x + h * a3, v + h * b3);
        x += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        v += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
    }
    x
}

#[test]
fn green_function_and_homogeneous_mode_match_ode() {
    let p = params(1.0);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let g = rk4_oscillator(0.02, 5.0, zero, one, 1.0, 20_000);
    assert!((detector_green(&p, 1.0) - g.re).abs() < 1e-8);
    let q = rk4_oscillator(0.02, 5.0, one, Complex64::new(0.0, -5.0), 1.0, 20_000);
    assert!((homogeneous_solution(&p, 1.0).0 - q).norm() < 1e-8);
}

#[test]
fn spectral_density_matches_angular_quadrature() {
    // sphere average of 1 - cos(ωL cosθ) for the image term
    let (x, w) = gauss_legendre(64);
    let (l, omega) = (1.0, 5.0);
    let mut avg = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        let theta = 0.5 * PI * (xi + 1.0);
        // the integrand does not depend on φ ∈ [0, 2π]
        for wj in &w {
            let jac = 0.5 * PI * PI * wi * wj * theta.sin();
            avg += jac * (1.0 - (omega * l * theta.cos()).cos());
        }
    }
    let oracle = omega / (16.0 * PI * PI * PI) * avg;
    let geometry = Geometry::half_space(l).unwrap();
    assert!((spectral_density(&geometry, omega) / oracle - 1.0).abs() < 1e-12);
    assert!((spectral_density(&geometry, 5.0) - 0.150941).abs() < 1e-6);
    assert!((spectral_density(&geometry, PI) - 1.0 / (4.0 * PI)).abs() < 1e-15);
    let small: f64 = 1e-3;
    let leading = small.powi(3) / (24.0 * PI * PI);
    assert!((spectral_density(&geometry, small) / leading - 1.0).abs() < 1e-6);
}

#[test]
fn zeroth_bracket_is_scaled_green_convolution() {
    let p = params(1.0);
    let (omega, t) = (3.0, 2.0);
    let spec = QuadratureSpec::with_tolerances(1e-14, 1e-13);
    let re = integrate(|tau| detector_green(&p, t - tau) * (omega * tau).cos(), 0.0, t, &spec).unwrap().0;
    let im = integrate(|tau| -detector_green(&p, t - tau) * (omega * tau).sin(), 0.0, t, &spec).unwrap().0;
    let conv = Complex64::new(re, im) * p.omega_damped();
    assert!((zeroth_qplus(&p, omega, t) - conv).norm() < 1e-9);
    assert!(zeroth_qplus(&p, omega, 0.0).norm() < 1e-15);
}

#[test]
fn driven_mirror_mode_reaches_closed_form() {
    let p = params(1.0);
    let omega = 5.0;
    let traj = dde_solve(&p, 1.0, Some(omega), 900.0, 0.01).unwrap();
    let k = traj.len() - 1;
    let t = traj.times[k];
    let closed = Complex64::from_polar(1.0, -omega * t)
        / (Complex64::new(25.0 - omega * omega, -2.0 * 0.02 * omega) + Complex64::from_polar(0.04, omega));
    assert!((traj.values[k] - closed).norm() < 1e-6 * closed.norm(), "{} vs {closed}", traj.values[k]);
}

#[test]
fn gamma0_against_contour_integral() {
    // E1(ix) = e^{-ix} ∫_0^∞ e^{-s} / (s + ix) ds
    let spec = QuadratureSpec::with_tolerances(1e-15, 1e-13);
    for x in [0.5, 1.0, 2.0, 10.0, 50.0] {
        let re = integrate(|s| (-s).exp() * s / (s * s + x * x), 0.0, 60.0, &spec).unwrap().0;
        let im = integrate(|s| -(-s).exp() * x / (s * s + x * x), 0.0, 60.0, &spec).unwrap().0;
        let oracle = Complex64::from_polar(1.0, -x) * Complex64::new(re, im);
        assert!((gamma0_imaginary(x) - oracle).norm() < 1e-11, "x={x}");
    }
    let z = gamma0_imaginary(1.0);
    assert!((z.re + 0.337404).abs() < 1e-6 && (z.im + 0.624713).abs() < 1e-6);
}

#[test]
fn perturbative_shift_at_unit_omega_l() {
    let p = params(0.2);
    let pert = perturbative_corrections(&p).delta_entropy;
    assert!((pert + 8.74e-4).abs() < 0.01e-4, "{pert}");
    let exact = delta_entropy_exact(&p, &default_quadrature()).unwrap().delta_entropy;
    assert!((pert / exact - 1.0).abs() < 0.05, "{pert} vs {exact}");
    for ol in [0.5, 1.0, 2.0, 5.0, 10.0, 20.0] {
        assert!(perturbative_corrections(&params(ol / 5.0)).delta_entropy < 0.0);
    }
    let far = perturbative_corrections(&params(1e6));
    assert!(far.delta_entropy.abs() < 1e-12 && far.delta_v_qq.abs() < 1e-12);
}

#[test]
fn distant_mirror_recovers_free_space() {
    let e = delta_entropy_exact(&params(200.0), &default_quadrature()).unwrap();
    assert!(e.delta_v_qq.abs() < 1e-8 && e.delta_entropy.abs() < 1e-8, "{e:?}");
}

#[test]
fn static_and_far_response() {
    let p = params(1.0);
    assert!((response(&p, &Geometry::FreeSpace, 0.0) - 1.0 / 25.0).norm() < 1e-16);
    let far = response(&p, &Geometry::half_space(1e9).unwrap(), 4.0);
    assert!((far - response(&p, &Geometry::FreeSpace, 4.0)).norm() < 1e-9);
}

#[test]
fn closed_form_limits() {
    let weak = late_covariance_free_closed(&params(1.0).with_gamma(1e-9).unwrap());
    assert!(weak.entropy.abs() < 1e-8);
    assert!((weak.covariance.v_qq - 0.1).abs() < 1e-9 && (weak.covariance.v_pp - 2.5).abs() < 1e-7);
    let a = late_covariance_free_closed(&params(1.0)).entropy;
    let b = late_covariance_free_closed(&params(1.0).with_cutoff(2000.0).unwrap()).entropy;
    let slope = 2.0 * 0.02 / (PI * 5.0) * 2f64.ln();
    assert!(((b - a) / slope - 1.0).abs() < 1e-4);
}

#[test]
fn causal_gate_before_first_reflection() {
    let p = params(2.0);
    let opts = EarlyOptions {
        step: Some(0.0025),
        ..EarlyOptions::default()
    };
    let zeroth = early_covariance_series(&p, &p.half_space(), &[1.5], Order::Zeroth, &opts).unwrap()[0];
    let first = early_covariance_series(&p, &p.half_space(), &[1.5], Order::Truncated(1), &opts).unwrap()[0];
    assert!((zeroth.v_part.qq / first.v_part.qq - 1.0).abs() < 1e-6);
}

#[test]
fn early_state_is_positive() {
    let p = params(2.0);
    let s = entropy_from_covariance(&early_covariance(&p, &p.half_space(), 1.5, Order::Zeroth).unwrap().covariance).unwrap();
    assert!(s.linear_entropy > 0.0);
}

/// The sudden switch-on drives S_L to about 0.022 within t ~ 0.2 and it
/// relaxes afterwards, so the later sample is the smaller one.
#[test]
#[ignore = "fails: switch-on transient peaks before t = 0.5"]
fn early_entropy_grows_between_half_and_one_and_a_half() {
    let p = params(2.0);
    let s = |t| {
        let c = early_covariance(&p, &p.half_space(), t, Order::Zeroth).unwrap();
        entropy_from_covariance(&c.covariance).unwrap().linear_entropy
    };
    assert!(s(1.5) > s(0.5));
}
