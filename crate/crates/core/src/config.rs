//! `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored; unknown keys are rejected.

use crate::error::{Error, Result};
use crate::model::PhysicalParams;

pub const DEFAULT_MASS: f64 = 1.0;
pub const DEFAULT_OMEGA_R: f64 = 5.0;
pub const DEFAULT_GAMMA: f64 = 0.02;
pub const DEFAULT_IMAGE_DISTANCE: f64 = 1.0;
pub const DEFAULT_CUTOFF: f64 = 1000.0;
pub const DEFAULT_ABS_TOL: f64 = 1e-12;
pub const DEFAULT_REL_TOL: f64 = 1e-10;

pub const KEYS: [&str; 7] = [
    "mass",
    "omega_r",
    "gamma",
    "image_distance",
    "cutoff",
    "abs_tol",
    "rel_tol",
];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunConfig {
    pub mass: Option<f64>,
    pub omega_r: Option<f64>,
    pub gamma: Option<f64>,
    pub image_distance: Option<f64>,
    pub cutoff: Option<f64>,
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: line_no,
                message: format!("expected key = value, got {line:?}"),
            })?;
            let key = key.trim();
            let value: f64 = value.trim().parse().map_err(|_| Error::Config {
                line: line_no,
                message: format!("value for {key:?} is not a number: {:?}", value.trim()),
            })?;
            let slot = cfg.slot(key).ok_or_else(|| Error::Config {
                line: line_no,
                message: format!("unknown key {key:?} (known: {})", KEYS.join(", ")),
            })?;
            if slot.replace(value).is_some() {
                return Err(Error::Config {
                    line: line_no,
                    message: format!("duplicate key {key:?}"),
                });
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            line: 0,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    fn slot(&mut self, key: &str) -> Option<&mut Option<f64>> {
        Some(match key {
            "mass" => &mut self.mass,
            "omega_r" => &mut self.omega_r,
            "gamma" => &mut self.gamma,
            "image_distance" => &mut self.image_distance,
            "cutoff" => &mut self.cutoff,
            "abs_tol" => &mut self.abs_tol,
            "rel_tol" => &mut self.rel_tol,
            _ => return None,
        })
    }

    /// Values set in `over` win.
    pub fn overlay(self, over: RunConfig) -> RunConfig {
        RunConfig {
            mass: over.mass.or(self.mass),
            omega_r: over.omega_r.or(self.omega_r),
            gamma: over.gamma.or(self.gamma),
            image_distance: over.image_distance.or(self.image_distance),
            cutoff: over.cutoff.or(self.cutoff),
            abs_tol: over.abs_tol.or(self.abs_tol),
            rel_tol: over.rel_tol.or(self.rel_tol),
        }
    }

    pub fn params(&self) -> Result<PhysicalParams> {
        PhysicalParams::new(
            self.mass.unwrap_or(DEFAULT_MASS),
            self.omega_r.unwrap_or(DEFAULT_OMEGA_R),
            self.gamma.unwrap_or(DEFAULT_GAMMA),
            self.image_distance.unwrap_or(DEFAULT_IMAGE_DISTANCE),
            self.cutoff.unwrap_or(DEFAULT_CUTOFF),
        )
    }

    pub fn tolerances(&self) -> (f64, f64) {
        (
            self.abs_tol.unwrap_or(DEFAULT_ABS_TOL),
            self.rel_tol.unwrap_or(DEFAULT_REL_TOL),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_overlays() {
        let file = RunConfig::parse("# run\nmass = 2\n gamma=0.01 # weak\n\ncutoff = 2000\n").unwrap();
        let flags = RunConfig {
            gamma: Some(0.03),
            ..Default::default()
        };
        let p = file.overlay(flags).params().unwrap();
        assert_eq!(p.mass(), 2.0);
        assert_eq!(p.gamma(), 0.03);
        assert_eq!(p.cutoff(), 2000.0);
        assert_eq!(p.omega_r(), DEFAULT_OMEGA_R);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        let e = RunConfig::parse("mass = 1\nfoo = 2").unwrap_err();
        assert!(matches!(e, Error::Config { line: 2, .. }));
        assert!(RunConfig::parse("mass 1").is_err());
        assert!(RunConfig::parse("mass = one").is_err());
        assert!(RunConfig::parse("mass = 1\nmass = 2").is_err());
    }
}
