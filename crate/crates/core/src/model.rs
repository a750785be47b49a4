//! Physical parameters, boundary geometry and detector covariance matrices.
//!
//! Natural units throughout. The coupling is recovered from the damping
//! constant as `λ² = 8π M γ`; the damped frequency is `Ω̃ = √(Ω_r² - γ²)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Minimum ratio `Λ / Ω_r` accepted by [`PhysicalParams::new`].
pub const MIN_CUTOFF_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    mass: f64,
    omega_r: f64,
    gamma: f64,
    image_distance: f64,
    cutoff: f64,
}

impl PhysicalParams {
    pub fn new(mass: f64, omega_r: f64, gamma: f64, image_distance: f64, cutoff: f64) -> Result<Self> {
        let fields = [
            ("mass", mass),
            ("omega_r", omega_r),
            ("gamma", gamma),
            ("image_distance", image_distance),
            ("cutoff", cutoff),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be finite and positive, got {v}")));
            }
        }
        if gamma >= omega_r {
            return Err(Error::Domain(format!(
                "underdamped regime requires gamma < omega_r (gamma {gamma}, omega_r {omega_r})"
            )));
        }
        if cutoff <= MIN_CUTOFF_RATIO * omega_r {
            return Err(Error::Domain(format!(
                "cutoff {cutoff} must exceed {MIN_CUTOFF_RATIO} * omega_r = {}",
                MIN_CUTOFF_RATIO * omega_r
            )));
        }
        Ok(PhysicalParams {
            mass,
            omega_r,
            gamma,
            image_distance,
            cutoff,
        })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }
    pub fn omega_r(&self) -> f64 {
        self.omega_r
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn image_distance(&self) -> f64 {
        self.image_distance
    }
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// `λ = √(8π M γ)`.
    pub fn coupling(&self) -> f64 {
        (8.0 * PI * self.mass * self.gamma).sqrt()
    }

    pub fn coupling_sq(&self) -> f64 {
        8.0 * PI * self.mass * self.gamma
    }

    /// `Ω̃ = √(Ω_r² - γ²)`.
    pub fn omega_damped(&self) -> f64 {
        ((self.omega_r - self.gamma) * (self.omega_r + self.gamma)).sqrt()
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.mass, self.omega_r, gamma, self.image_distance, self.cutoff)
    }

    pub fn with_image_distance(&self, l: f64) -> Result<Self> {
        Self::new(self.mass, self.omega_r, self.gamma, l, self.cutoff)
    }

    pub fn with_cutoff(&self, cutoff: f64) -> Result<Self> {
        Self::new(self.mass, self.omega_r, self.gamma, self.image_distance, cutoff)
    }

    /// Half-space geometry at this parameter set's image distance.
    pub fn half_space(&self) -> Geometry {
        Geometry::HalfSpaceDirichlet {
            image_distance: self.image_distance,
        }
    }
}

/// Same as [`PhysicalParams::new`].
pub fn make_params(mass: f64, omega_r: f64, gamma: f64, image_distance: f64, cutoff: f64) -> Result<PhysicalParams> {
    PhysicalParams::new(mass, omega_r, gamma, image_distance, cutoff)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    FreeSpace,
    /// Perfect mirror; `image_distance` is twice the detector-mirror distance.
    HalfSpaceDirichlet { image_distance: f64 },
}

impl Geometry {
    pub fn half_space(image_distance: f64) -> Result<Self> {
        if !(image_distance.is_finite() && image_distance > 0.0) {
            return Err(Error::Domain(format!("image distance must be positive, got {image_distance}")));
        }
        Ok(Geometry::HalfSpaceDirichlet { image_distance })
    }

    pub fn image_distance(&self) -> Option<f64> {
        match self {
            Geometry::FreeSpace => None,
            Geometry::HalfSpaceDirichlet { image_distance } => Some(*image_distance),
        }
    }
}

/// Symmetric two-point functions `⟨Q²⟩`, `⟨P²⟩`, `½⟨{Q,P}⟩` of one detector.
///
/// Construction checks positivity only; the uncertainty bound
/// `det ≥ 1/4` is checked where the purity is evaluated, so truncated
/// approximations that break it can still be inspected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix {
    pub v_qq: f64,
    pub v_pp: f64,
    pub v_qp: f64,
}

impl CovarianceMatrix {
    pub fn new(v_qq: f64, v_pp: f64, v_qp: f64) -> Result<Self> {
        if !(v_qq.is_finite() && v_pp.is_finite() && v_qp.is_finite()) {
            return Err(Error::Domain(format!(
                "covariance entries must be finite ({v_qq}, {v_pp}, {v_qp})"
            )));
        }
        if v_qq <= 0.0 || v_pp <= 0.0 {
            return Err(Error::Domain(format!(
                "diagonal covariance entries must be positive (v_qq {v_qq}, v_pp {v_pp})"
            )));
        }
        Ok(CovarianceMatrix { v_qq, v_pp, v_qp })
    }

    /// Ground state of a free oscillator of mass `m` and frequency `omega`.
    pub fn ground_state(m: f64, omega: f64) -> Self {
        CovarianceMatrix {
            v_qq: 1.0 / (2.0 * m * omega),
            v_pp: m * omega / 2.0,
            v_qp: 0.0,
        }
    }

    pub fn det(&self) -> f64 {
        self.v_qq * self.v_pp - self.v_qp * self.v_qp
    }
}

pub fn covariance_det(cov: &CovarianceMatrix) -> f64 {
    cov.det()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_values() {
        let p = make_params(1.0, 5.0, 0.02, 1.0, 1000.0).unwrap();
        assert!((p.coupling_sq() - 0.502_654_824_574_366_9).abs() < 1e-15);
        assert!((p.omega_damped() - 4.999_959_999_84).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_domains() {
        assert!(make_params(1.0, 5.0, 5.0, 1.0, 1000.0).is_err());
        assert!(make_params(1.0, 5.0, 0.02, 1.0, 50.0).is_err());
        assert!(make_params(0.0, 5.0, 0.02, 1.0, 1000.0).is_err());
        assert!(make_params(1.0, 5.0, 0.02, -1.0, 1000.0).is_err());
        assert!(make_params(1.0, 5.0, f64::NAN, 1.0, 1000.0).is_err());
        assert!(CovarianceMatrix::new(-1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn ground_state_saturates_bound() {
        let c = CovarianceMatrix::ground_state(2.0, 3.0);
        assert!((c.det() - 0.25).abs() < 1e-16);
    }

    proptest! {
        #[test]
        fn gamma_round_trips_through_coupling(m in 0.1f64..10.0, g in 1e-4f64..0.5) {
            let p = make_params(m, 5.0, g, 1.0, 1000.0).unwrap();
            let back = p.coupling_sq() / (8.0 * PI * p.mass());
            prop_assert!((back - g).abs() <= 1e-14 * g);
        }

        #[test]
        fn damped_frequency_below_bare(g in 1e-4f64..4.9) {
            let p = make_params(1.0, 5.0, g, 1.0, 1000.0).unwrap();
            prop_assert!(p.omega_damped() < 5.0 && p.omega_damped() > 0.0);
        }
    }
}
