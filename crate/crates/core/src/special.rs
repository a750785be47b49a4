//! Sine and cosine integrals and `E1(ix) = Γ(0, ix)` on the positive real axis.
//!
//! Power series for `x <= 4`. Above that the auxiliary functions come from
//! the continued fraction of `E1(ix)` (modified Lentz) up to `x = 40`, and
//! from their asymptotic expansions beyond.

use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_MAX: f64 = 4.0;
const ASYMPTOTIC_MIN: f64 = 40.0;

/// Returns `(Si(x), Ci(x))` for `x > 0`. `Ci` is `-inf` at zero.
pub fn sici(x: f64) -> (f64, f64) {
    if x < 0.0 {
        let (s, c) = sici(-x);
        // Ci(-x) = Ci(x) + i*pi; only the real part is returned
        return (-s, c);
    }
    if x == 0.0 {
        return (0.0, f64::NEG_INFINITY);
    }
    if x <= SERIES_MAX {
        series(x)
    } else {
        let (f, g) = auxiliary(x);
        let (s, c) = x.sin_cos();
        (FRAC_PI_2 - f * c - g * s, f * s - g * c)
    }
}

pub fn si(x: f64) -> f64 {
    sici(x).0
}

pub fn ci(x: f64) -> f64 {
    sici(x).1
}

/// `Γ(0, ix) = E1(ix) = -Ci(x) + i (Si(x) - π/2)` for `x > 0`.
pub fn gamma0_imaginary(x: f64) -> Complex64 {
    let (s, c) = sici(x);
    Complex64::new(-c, s - FRAC_PI_2)
}

fn series(x: f64) -> (f64, f64) {
    let x2 = x * x;
    let mut term = x; // (-1)^k x^(2k+1) / (2k+1)!
    let mut si = x;
    let mut k = 0usize;
    loop {
        k += 1;
        term *= -x2 / ((2 * k) as f64 * (2 * k + 1) as f64);
        let add = term / (2 * k + 1) as f64;
        si += add;
        if add.abs() < 1e-18 * si.abs() {
            break;
        }
    }
    let mut term = 1.0; // (-1)^k x^(2k) / (2k)!
    let mut sum = 0.0;
    let mut k = 0usize;
    loop {
        k += 1;
        term *= -x2 / ((2 * k - 1) as f64 * (2 * k) as f64);
        let add = term / (2 * k) as f64;
        sum += add;
        if add.abs() < 1e-18 * (1.0 + sum.abs()) {
            break;
        }
    }
    (si, EULER_GAMMA + x.ln() + sum)
}

/// Auxiliary functions `f(x), g(x)` with
/// `Si = π/2 - f cos x - g sin x`, `Ci = f sin x - g cos x`.
pub fn auxiliary(x: f64) -> (f64, f64) {
    if x >= ASYMPTOTIC_MIN {
        return auxiliary_asymptotic(x);
    }
    // e^{ix} E1(ix) = 1/(1+ix - 1/(3+ix - 4/(5+ix - ...)))
    let tiny = 1e-300;
    let mut b = Complex64::new(1.0, x);
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 2..10_000 {
        let a = -((i - 1) as f64).powi(2);
        b += 2.0;
        d = (d * a + b).inv();
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    // h = e^{ix} E1(ix) = g - i f
    (-h.im, h.re)
}

fn auxiliary_asymptotic(x: f64) -> (f64, f64) {
    // f ~ (1/x) Σ (-1)^k (2k)!/x^{2k}, g ~ (1/x²) Σ (-1)^k (2k+1)!/x^{2k}
    let inv2 = 1.0 / (x * x);
    let mut f = 0.0;
    let mut g = 0.0;
    let mut tf = 1.0;
    let mut tg = 1.0;
    for k in 0..40 {
        f += tf;
        g += tg;
        let nf = -tf * ((2 * k + 1) * (2 * k + 2)) as f64 * inv2;
        let ng = -tg * ((2 * k + 2) * (2 * k + 3)) as f64 * inv2;
        if nf.abs() >= tf.abs() || nf.abs() < 1e-17 {
            break;
        }
        tf = nf;
        tg = ng;
    }
    (f / x, g * inv2)
}
