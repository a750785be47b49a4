//! Early-time evolution after the detector is coupled at `t = 0`.
//!
//! The detector covariance splits into a part driven by the detector's own
//! initial fluctuations and a part driven by the field. Reflections from
//! the mirror arrive after every `L` and enter through a delayed term.

mod covariance;
pub mod dde;
mod modes;
pub mod series;

pub use covariance::{
    default_step, early_covariance, early_covariance_series, evolution_grid, mirror_system, EarlyCovariance,
    EarlyOptions, Moments, Order,
};
pub use modes::{characteristic_roots, homogeneous_solution, zeroth_qplus, ModeKind, ModeTrajectory, ZerothOrderCoeffs};
pub use series::{reflection_series_qa, ReflectionSeries};

use crate::error::Result;
use crate::model::PhysicalParams;

/// Mirrored detector mode (`source = None`) or field mode of frequency
/// `source`, from the full delay equation on a uniform grid.
pub fn dde_solve(params: &PhysicalParams, delay: f64, source: Option<f64>, t_max: f64, step: f64) -> Result<ModeTrajectory> {
    let sol = mirror_system(params, delay, Order::Full, source)?.solve(t_max, step, &[])?;
    Ok(ModeTrajectory {
        kind: source.map_or(ModeKind::Detector, |omega| ModeKind::Field { omega }),
        times: sol.node_times,
        values: sol.nodes.iter().map(|s| s[0].0).collect(),
        rates: sol.nodes.iter().map(|s| s[0].1).collect(),
    })
}
