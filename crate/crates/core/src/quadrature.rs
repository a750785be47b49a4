//! Adaptive Gauss-Kronrod (7/15) integration over finite intervals.
//!
//! The initial partition is built from the interval ends, any forced
//! breakpoints and, when an oscillation period is hinted, one panel per
//! period. The panel with the largest error is then bisected until the
//! summed error estimate meets the tolerance. Results are deterministic:
//! panel selection breaks ties by position and the final sum runs over
//! panels in left-to-right order.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_553,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Upper bound on panels created from a period hint.
const MAX_PERIOD_PANELS: usize = 4_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of bisections of any initial panel.
    pub max_depth: u32,
    /// Maximum number of bisections overall.
    pub max_subdivisions: usize,
    pub breakpoints: Vec<f64>,
    pub period_hint: Option<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_depth: 40,
            max_subdivisions: 200_000,
            breakpoints: Vec::new(),
            period_hint: None,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        QuadratureSpec {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }

    pub fn breakpoints(mut self, points: impl IntoIterator<Item = f64>) -> Self {
        self.breakpoints.extend(points);
        self
    }

    pub fn period(mut self, period: f64) -> Self {
        self.period_hint = Some(period);
        self
    }

    pub fn max_depth(mut self, depth: u32) -> Self {
        self.max_depth = depth;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol >= 0.0 && self.rel_tol >= 0.0) || (self.abs_tol == 0.0 && self.rel_tol == 0.0) {
            return Err(Error::Domain(format!(
                "quadrature tolerances must be non-negative and not both zero (abs {}, rel {})",
                self.abs_tol, self.rel_tol
            )));
        }
        if let Some(p) = self.period_hint {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::Domain(format!("period hint must be positive, got {p}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
    depth: u32,
    priority: f64,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<const N: usize> Eq for Panel<N> {}
impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk15<const N: usize, F>(f: &F, a: f64, b: f64) -> ([f64; N], [f64; N])
where
    F: Fn(f64) -> [f64; N],
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = [0.0; N];
    let mut resg = [0.0; N];
    let mut resabs = [0.0; N];
    let mut fv1 = [[0.0; N]; 7];
    let mut fv2 = [[0.0; N]; 7];
    for i in 0..N {
        resk[i] = WGK[7] * fc[i];
        resg[i] = WG[3] * fc[i];
        resabs[i] = (WGK[7] * fc[i]).abs();
    }
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        for i in 0..N {
            resk[i] += WGK[j] * (f1[i] + f2[i]);
            resabs[i] += WGK[j] * (f1[i].abs() + f2[i].abs());
            if j % 2 == 1 {
                resg[i] += WG[j / 2] * (f1[i] + f2[i]);
            }
        }
        fv1[j] = f1;
        fv2[j] = f2;
    }
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for i in 0..N {
        let mean = 0.5 * resk[i];
        let mut resasc = WGK[7] * (fc[i] - mean).abs();
        for j in 0..7 {
            resasc += WGK[j] * ((fv1[j][i] - mean).abs() + (fv2[j][i] - mean).abs());
        }
        let resasc = resasc * h.abs();
        let resabs = resabs[i] * h.abs();
        let mut err = ((resk[i] - resg[i]) * h).abs();
        if resasc != 0.0 && err != 0.0 {
            err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
        }
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * resabs);
        }
        if !resk[i].is_finite() {
            err = f64::INFINITY;
        }
        value[i] = resk[i] * h;
        error[i] = err;
    }
    (value, error)
}

fn neumaier(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn initial_points(a: f64, b: f64, spec: &QuadratureSpec) -> Result<Vec<f64>> {
    let mut pts = vec![a, b];
    pts.extend(spec.breakpoints.iter().copied().filter(|&x| x > a && x < b));
    if let Some(p) = spec.period_hint {
        let n = ((b - a) / p).ceil();
        if n > MAX_PERIOD_PANELS as f64 {
            return Err(Error::Domain(format!(
                "period hint {p} would create {n} panels on [{a}, {b}]"
            )));
        }
        for k in 1..(n as usize) {
            pts.push(a + k as f64 * p);
        }
    }
    pts.retain(|x| x.is_finite());
    pts.sort_by(f64::total_cmp);
    let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    pts.dedup_by(|x, y| (*x - *y).abs() <= 8.0 * f64::EPSILON * scale);
    // dedup may have dropped b in favour of a nearby point
    if let Some(last) = pts.last_mut() {
        *last = b;
    }
    pts[0] = a;
    Ok(pts)
}

/// Integrates an `N`-component function; convergence requires every
/// component to meet `max(abs_tol, rel_tol * |value|)`.
pub fn integrate_n<const N: usize, F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<QuadResult<N>>
where
    F: Fn(f64) -> [f64; N],
{
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integration limits must be finite, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult {
            value: [0.0; N],
            error: [0.0; N],
            evaluations: 0,
        });
    }
    if a > b {
        let mut r = integrate_n(f, b, a, spec)?;
        for v in r.value.iter_mut() {
            *v = -*v;
        }
        return Ok(r);
    }

    let pts = initial_points(a, b, spec)?;
    let mut panels: Vec<Panel<N>> = Vec::with_capacity(pts.len() - 1);
    for w in pts.windows(2) {
        let (value, error) = gk15(&f, w[0], w[1]);
        panels.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error,
            depth: 0,
            priority: 0.0,
        });
    }
    let mut evaluations = 15 * panels.len();

    let totals = |panels: &[Panel<N>]| -> ([f64; N], [f64; N]) {
        let mut v = [0.0; N];
        let mut e = [0.0; N];
        for i in 0..N {
            v[i] = neumaier(panels.iter().map(|p| p.value[i]));
            e[i] = panels.iter().map(|p| p.error[i]).sum();
        }
        (v, e)
    };
    let tolerances = |v: &[f64; N]| -> [f64; N] {
        let mut t = [0.0; N];
        for i in 0..N {
            t[i] = spec.abs_tol.max(spec.rel_tol * v[i].abs());
        }
        t
    };
    let priority = |p: &Panel<N>, tol: &[f64; N]| -> f64 {
        let mut m = 0.0_f64;
        for i in 0..N {
            m = m.max(p.error[i] / tol[i]);
        }
        m
    };

    let (mut total, mut total_err) = totals(&panels);
    let mut tol = tolerances(&total);
    let converged = |e: &[f64; N], t: &[f64; N]| (0..N).all(|i| e[i] <= t[i]);

    let mut heap: BinaryHeap<Panel<N>> = BinaryHeap::new();
    let mut finished: Vec<Panel<N>> = Vec::new();
    for mut p in panels {
        p.priority = priority(&p, &tol);
        heap.push(p);
    }

    let mut subdivisions = 0usize;
    const REFRESH: usize = 512;
    while !converged(&total_err, &tol) {
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        let too_deep = worst.depth >= spec.max_depth
            || subdivisions >= spec.max_subdivisions
            || !(mid > worst.a && mid < worst.b);
        if too_deep {
            let e = worst.error.iter().fold(0.0_f64, |m, &x| m.max(x));
            let te = total_err.iter().fold(0.0_f64, |m, &x| m.max(x));
            let t = tol.iter().fold(f64::INFINITY, |m, &x| m.min(x));
            return Err(Error::NonConvergence {
                a: worst.a,
                b: worst.b,
                error: e,
                total_error: te,
                tolerance: t,
            });
        }
        subdivisions += 1;
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        evaluations += 30;
        for i in 0..N {
            total[i] += v1[i] + v2[i] - worst.value[i];
            total_err[i] += e1[i] + e2[i] - worst.error[i];
        }
        for (lo, hi, value, error) in [(worst.a, mid, v1, e1), (mid, worst.b, v2, e2)] {
            let mut p = Panel {
                a: lo,
                b: hi,
                value,
                error,
                depth: worst.depth + 1,
                priority: 0.0,
            };
            p.priority = priority(&p, &tol);
            heap.push(p);
        }
        if subdivisions % REFRESH == 0 {
            let all: Vec<Panel<N>> = heap.drain().chain(finished.drain(..)).collect();
            let (t, e) = totals(&all);
            total = t;
            total_err = e;
            tol = tolerances(&total);
            for mut p in all {
                p.priority = priority(&p, &tol);
                heap.push(p);
            }
        }
    }

    finished.extend(heap.into_vec());
    finished.sort_by(|x, y| x.a.total_cmp(&y.a));
    let (value, error) = totals(&finished);
    Ok(QuadResult {
        value,
        error,
        evaluations,
    })
}

/// Scalar convenience wrapper around [`integrate_n`].
pub fn integrate<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let r = integrate_n(|x| [f(x)], a, b, spec)?;
    Ok((r.value[0], r.error[0]))
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_legendre needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Composite Gauss-Legendre rule with `n` nodes on each `[edges[k], edges[k+1]]`.
pub fn composite_gauss_legendre(edges: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(n);
    let mut nodes = Vec::with_capacity(n * edges.len().saturating_sub(1));
    let mut weights = Vec::with_capacity(nodes.capacity());
    for e in edges.windows(2) {
        let c = 0.5 * (e[0] + e[1]);
        let h = 0.5 * (e[1] - e[0]);
        for (x, w) in gx.iter().zip(&gw) {
            nodes.push(c + h * x);
            weights.push(h * w);
        }
    }
    (nodes, weights)
}
