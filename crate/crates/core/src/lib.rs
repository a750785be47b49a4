//! Entanglement between a harmonically bound Unruh-DeWitt detector and a
//! massless scalar field, in free space and in front of a perfect mirror.

pub mod config;
pub mod earlytime;
pub mod entanglement;
pub mod error;
pub mod kernels;
pub mod latetime;
pub mod model;
pub mod quadrature;
pub mod special;
pub mod twodetector;

pub use error::{Error, Result};
pub use model::{make_params, CovarianceMatrix, Geometry, PhysicalParams};
