//! Sweeps and check suites behind the `udmirror` binary.
//!
//! Every sweep cell is an independent library call, so a sub-grid
//! reproduces the matching rows of a larger sweep exactly and the worker
//! count never changes the output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Value};
use udmirror::config::RunConfig;
use udmirror::earlytime::series::MAX_SERIES_ORDER;
use udmirror::earlytime::{dde_solve, early_covariance_series, EarlyOptions, Order, ReflectionSeries};
use udmirror::entanglement::entropy_from_covariance;
use udmirror::kernels::{fdt_grid, fdt_residual, KernelSet};
use udmirror::latetime::{delta_entropy_exact, late_covariance_free_closed, perturbative_corrections};
use udmirror::quadrature::QuadratureSpec;
use udmirror::twodetector::order_counting_check;
use udmirror::{Geometry, PhysicalParams};

pub const BUILD_ID: &str = env!("UDMIRROR_BUILD_ID");

pub const EARLY_SCHEMA: [&str; 8] = ["L", "t", "v_qq", "v_pp", "v_qp", "det", "purity", "entropy"];
pub const LATE_SCHEMA: [&str; 5] = ["L", "S_free", "S_half", "delta_exact", "delta_perturbative"];

pub const FDT_TOL: f64 = 1e-8;
pub const ORACLE_TOL: f64 = 1e-6;
pub const ORACLE_STEP: f64 = 0.0025;
pub const MIRROR_EXPONENT: (f64, f64) = (1.0, 0.1);
pub const PAIR_EXPONENT: (f64, f64) = (2.0, 0.2);

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Compute(#[from] udmirror::Error),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("check suite failed: {0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Compute(udmirror::Error::Config { .. }) => 1,
            CliError::Compute(_) | CliError::Io { .. } => 2,
            CliError::CheckFailed(_) => 3,
        }
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// `min:max:n` (inclusive, `n ≥ 2`) or a comma-separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = |m: &str| CliError::Usage(format!("bad grid {text:?}: {m}"));
    let values: Vec<f64> = if let Some((lo, rest)) = text.split_once(':') {
        let (hi, n) = rest.split_once(':').ok_or_else(|| bad("expected min:max:n"))?;
        let lo: f64 = lo.trim().parse().map_err(|_| bad("min is not a number"))?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad("max is not a number"))?;
        let n: usize = n.trim().parse().map_err(|_| bad("n is not an integer"))?;
        if n < 2 {
            return Err(bad("need at least two points"));
        }
        if !(hi > lo) {
            return Err(bad("max must exceed min"));
        }
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    } else {
        text.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad(&format!("{s:?} is not a number"))))
            .collect::<Result<_, _>>()?
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(bad("values must be finite"));
    }
    Ok(values)
}

/// `zeroth`, `full`, or `truncated:N`.
pub fn parse_order(text: &str) -> Result<Order, CliError> {
    match text {
        "zeroth" | "0" => Ok(Order::Zeroth),
        "full" => Ok(Order::Full),
        _ => text
            .strip_prefix("truncated:")
            .and_then(|n| n.parse().ok())
            .map(Order::Truncated)
            .ok_or_else(|| CliError::Usage(format!("unknown order {text:?} (zeroth, full, truncated:N)"))),
    }
}

fn order_name(order: Order) -> String {
    match order {
        Order::Zeroth => "zeroth".into(),
        Order::Full => "full".into(),
        Order::Truncated(n) => format!("truncated:{n}"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LateMethod {
    Exact,
    Perturbative,
    Both,
}

impl LateMethod {
    fn name(self) -> &'static str {
        match self {
            LateMethod::Exact => "exact",
            LateMethod::Perturbative => "perturbative",
            LateMethod::Both => "both",
        }
    }
}

/// Resolved parameters and tolerances for one run.
#[derive(Debug, Clone)]
pub struct Setup {
    pub params: PhysicalParams,
    pub quad: QuadratureSpec,
    pub jobs: usize,
}

impl Setup {
    pub fn new(cfg: &RunConfig, jobs: Option<usize>) -> Result<Self, CliError> {
        let params = cfg.params().map_err(|e| match e {
            udmirror::Error::Domain(m) => CliError::Usage(m),
            other => CliError::Compute(other),
        })?;
        let (abs, rel) = cfg.tolerances();
        if !(abs > 0.0 && rel > 0.0) {
            return Err(CliError::Usage(format!("tolerances must be positive, got {abs} and {rel}")));
        }
        let jobs = match jobs {
            Some(0) => return Err(CliError::Usage("--jobs must be at least 1".into())),
            Some(j) => j,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        Ok(Setup {
            params,
            quad: QuadratureSpec::with_tolerances(abs, rel),
            jobs,
        })
    }

    /// Early-time options used for every sweep cell.
    pub fn early_options(&self, step: Option<f64>) -> EarlyOptions {
        EarlyOptions {
            quad: self.quad.clone(),
            step,
            ..EarlyOptions::default()
        }
    }

    fn pool(&self) -> Result<rayon::ThreadPool, CliError> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {} workers: {e}", self.jobs)))
    }

    fn params_json(&self) -> Value {
        let p = &self.params;
        json!({
            "mass": p.mass(),
            "omega_r": p.omega_r(),
            "gamma": p.gamma(),
            "image_distance": p.image_distance(),
            "cutoff": p.cutoff(),
            "coupling": p.coupling(),
            "omega_damped": p.omega_damped(),
        })
    }

    fn quad_json(&self) -> Value {
        json!({ "abs_tol": self.quad.abs_tol, "rel_tol": self.quad.rel_tol })
    }
}

/// Table of results plus what is needed to reproduce it.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub schema: Vec<&'static str>,
    /// `None` marks a column the chosen method does not fill.
    pub rows: Vec<Vec<Option<f64>>>,
    pub metadata: Value,
}

impl SweepResult {
    /// RFC 4180 CSV with 17 significant digits.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::Usage(format!("csv: {e}"));
        w.write_record(&self.schema).map_err(fail)?;
        for row in &self.rows {
            debug_assert_eq!(row.len(), self.schema.len());
            w.write_record(row.iter().map(|v| v.map_or(String::new(), |x| format!("{x:.16e}"))))
                .map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Usage(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is ascii"))
    }

    /// Writes `path` and its `path.json` sidecar.
    pub fn write(&self, path: &Path) -> Result<PathBuf, CliError> {
        std::fs::write(path, self.to_csv()?).map_err(|e| io_error(path, e))?;
        let mut side = path.as_os_str().to_owned();
        side.push(".json");
        let side = PathBuf::from(side);
        let text = serde_json::to_string_pretty(&self.metadata).expect("metadata serializes");
        std::fs::write(&side, text + "\n").map_err(|e| io_error(&side, e))?;
        Ok(side)
    }
}

fn metadata(setup: &Setup, command: &str, extra: Value, schema: &[&str], seconds: f64) -> Value {
    let mut m = json!({
        "command": command,
        "params": setup.params_json(),
        "quadrature": setup.quad_json(),
        "schema": schema,
        "runtime_seconds": seconds,
        "build_id": BUILD_ID,
        "jobs": setup.jobs,
    });
    if let (Value::Object(m), Value::Object(e)) = (&mut m, extra) {
        m.extend(e);
    }
    m
}

/// One early-time cell.
pub fn early_cell(setup: &Setup, l: f64, t: f64, order: Order, step: Option<f64>) -> udmirror::Result<[f64; 8]> {
    let cell = || -> udmirror::Result<[f64; 8]> {
        let p = setup.params.with_image_distance(l)?;
        let geometry = Geometry::half_space(l)?;
        let c = early_covariance_series(&p, &geometry, &[t], order, &setup.early_options(step))?.remove(0);
        let e = entropy_from_covariance(&c.covariance)?;
        let v = c.covariance;
        Ok([l, t, v.v_qq, v.v_pp, v.v_qp, v.det(), e.purity, e.linear_entropy])
    };
    cell().map_err(|e| e.annotate(format!("early sweep cell (L={l}, t={t})")))
}

pub fn early_sweep(setup: &Setup, ls: &[f64], ts: &[f64], order: Order, step: Option<f64>) -> Result<SweepResult, CliError> {
    let start = Instant::now();
    let cells: Vec<(f64, f64)> = ls.iter().flat_map(|&l| ts.iter().map(move |&t| (l, t))).collect();
    let rows = setup.pool()?.install(|| {
        cells
            .par_iter()
            .map(|&(l, t)| early_cell(setup, l, t, order, step))
            .collect::<udmirror::Result<Vec<_>>>()
    })?;
    let extra = json!({
        "geometry": "half_space_dirichlet",
        "order": order_name(order),
        "step": step,
        "l_values": ls,
        "t_values": ts,
    });
    Ok(SweepResult {
        schema: EARLY_SCHEMA.to_vec(),
        rows: rows.into_iter().map(|r| r.into_iter().map(Some).collect()).collect(),
        metadata: metadata(setup, "early-sweep", extra, &EARLY_SCHEMA, start.elapsed().as_secs_f64()),
    })
}

/// One late-time row. With the perturbative method alone `S_free` is the
/// closed form; otherwise it comes from quadrature.
pub fn late_row(setup: &Setup, l: f64, method: LateMethod) -> udmirror::Result<[Option<f64>; 5]> {
    let row = || -> udmirror::Result<[Option<f64>; 5]> {
        let p = setup.params.with_image_distance(l)?;
        let pert = perturbative_corrections(&p).delta_entropy;
        if method == LateMethod::Perturbative {
            let free = late_covariance_free_closed(&p).entropy;
            return Ok([Some(l), Some(free), Some(free + pert), None, Some(pert)]);
        }
        let exact = delta_entropy_exact(&p, &setup.quad)?;
        let free = exact.free.entropy;
        let pert = (method == LateMethod::Both).then_some(pert);
        Ok([Some(l), Some(free), Some(free + exact.delta_entropy), Some(exact.delta_entropy), pert])
    };
    row().map_err(|e| e.annotate(format!("late sweep row (L={l})")))
}

pub fn late_sweep(setup: &Setup, ls: &[f64], method: LateMethod) -> Result<SweepResult, CliError> {
    let start = Instant::now();
    let rows = setup.pool()?.install(|| {
        ls.par_iter()
            .map(|&l| late_row(setup, l, method))
            .collect::<udmirror::Result<Vec<_>>>()
    })?;
    let extra = json!({
        "geometry": "half_space_dirichlet",
        "method": method.name(),
        "l_values": ls,
    });
    Ok(SweepResult {
        schema: LATE_SCHEMA.to_vec(),
        rows: rows.into_iter().map(|r| r.to_vec()).collect(),
        metadata: metadata(setup, "late-sweep", extra, &LATE_SCHEMA, start.elapsed().as_secs_f64()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Fdt,
    Oracle,
    Orders,
    All,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckLine {
    fn below(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        CheckLine {
            name: name.into(),
            value,
            target: 0.0,
            tolerance,
            pass: value.abs() < tolerance,
        }
    }

    fn near(name: impl Into<String>, value: f64, (target, tolerance): (f64, f64)) -> Self {
        CheckLine {
            name: name.into(),
            value,
            target,
            tolerance,
            pass: (value - target).abs() < tolerance,
        }
    }
}

pub fn check_fdt(setup: &Setup) -> udmirror::Result<Vec<CheckLine>> {
    let p = setup.params;
    let grid = fdt_grid(&p, 50);
    let mut out = Vec::new();
    for (name, geometry) in [("fdt free space", Geometry::FreeSpace), ("fdt half space", p.half_space())] {
        let r = fdt_residual(&KernelSet::new(p, geometry), &grid, &setup.quad)?;
        out.push(CheckLine::below(name, r.max_abs_residual(), FDT_TOL));
    }
    Ok(out)
}

pub fn check_oracle(setup: &Setup) -> udmirror::Result<Vec<CheckLine>> {
    let p = setup.params;
    let l = p.image_distance();
    let series = ReflectionSeries::new(&p, l, MAX_SERIES_ORDER)?;
    let traj = dde_solve(&p, l, None, 3.0 * l, ORACLE_STEP.min(l / 40.0))?;
    let sup = traj
        .times
        .iter()
        .zip(&traj.values)
        .map(|(&t, v)| (series.evaluate(t, None).0 - v).norm())
        .fold(0.0, f64::max);
    Ok(vec![CheckLine::below("series vs delay solver on [0, 3L]", sup, ORACLE_TOL)])
}

pub fn check_orders(setup: &Setup) -> udmirror::Result<Vec<CheckLine>> {
    let g = setup.params.gamma();
    let r = order_counting_check(&setup.params, &[0.5, 1.0, 2.0, 5.0, 10.0], &[g / 4.0, g / 2.0, g, 2.0 * g])?;
    Ok(vec![
        CheckLine::near("mirror correction gamma exponent", r.mirror_gamma_exponent, MIRROR_EXPONENT),
        CheckLine::near("pair self-correction gamma exponent", r.pair_self_gamma_exponent, PAIR_EXPONENT),
    ])
}

pub fn run_checks(setup: &Setup, suite: Suite) -> udmirror::Result<Vec<CheckLine>> {
    let mut out = Vec::new();
    if matches!(suite, Suite::Fdt | Suite::All) {
        out.extend(check_fdt(setup)?);
    }
    if matches!(suite, Suite::Oracle | Suite::All) {
        out.extend(check_oracle(setup)?);
    }
    if matches!(suite, Suite::Orders | Suite::All) {
        out.extend(check_orders(setup)?);
    }
    Ok(out)
}

pub fn format_checks(lines: &[CheckLine]) -> String {
    let mut s = String::new();
    for c in lines {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        let _ = writeln!(
            s,
            "{tag}  {:<40} value {:.6e}  target {} ± {:.1e}",
            c.name, c.value, c.target, c.tolerance
        );
    }
    s
}
