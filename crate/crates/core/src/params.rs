//! Physical and dimensionless problem descriptions.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::scalar::Scalar;

/// Default Gaussian band cutoff, in kernel standard deviations.
pub const DEFAULT_CUTOFF_ETA: f64 = 8.5;
/// Smallest admissible cutoff; the Gaussian tail at 6 standard deviations is ~1.5e-8 of the peak.
pub const MIN_CUTOFF_ETA: f64 = 6.0;
/// Grid points per unit of confinement ratio.
pub const POINTS_PER_RHO: f64 = 18.0;
/// Grid floor for small confinement ratios.
pub const MIN_GRID: usize = 64;

/// Dimensional description of a monitored diffusion.
///
/// The diffusion constant is derived, never stored independently.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams<T> {
    length: T,
    sigma: T,
    dt: T,
}

impl<T: Scalar> PhysicalParams<T> {
    pub fn new(length: T, sigma: T, dt: T) -> Result<Self> {
        for (name, v) in [("L", length), ("sigma", sigma), ("dt", dt)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(domain(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(Self { length, sigma, dt })
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    /// `D = sigma^2 / 2`.
    pub fn diffusivity(&self) -> T {
        self.sigma * self.sigma / T::lit(2.0)
    }

    /// Confinement ratio `L / (sigma * sqrt(dt))`.
    pub fn rho(&self) -> T {
        self.length / (self.sigma * self.dt.sqrt())
    }
}

/// Dimensionless problem instance on the unit interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec<T> {
    pub rho: T,
    pub y0: T,
    pub n_grid: usize,
    pub cutoff_eta: T,
}

/// Grid size from the resolution rule: `max(64, ceil(18 rho))`.
pub fn default_grid<T: Scalar>(rho: T) -> usize {
    let n = (rho * T::lit(POINTS_PER_RHO))
        .ceil()
        .to_usize()
        .unwrap_or(usize::MAX);
    n.max(MIN_GRID)
}

impl<T: Scalar> ProblemSpec<T> {
    /// Instance with the default resolution rule and cutoff.
    pub fn new(rho: T, y0: T) -> Result<Self> {
        if !(rho > T::zero()) || !rho.is_finite() {
            return Err(domain(format!("rho must be finite and > 0, got {rho}")));
        }
        let spec = Self {
            rho,
            y0,
            n_grid: default_grid(rho),
            cutoff_eta: T::lit(DEFAULT_CUTOFF_ETA),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Explicit grid size; bypasses the `18 rho` rule.
    pub fn with_n_grid(mut self, n_grid: usize) -> Result<Self> {
        if n_grid < 2 {
            return Err(domain(format!("n_grid must be >= 2, got {n_grid}")));
        }
        self.n_grid = n_grid;
        Ok(self)
    }

    pub fn with_cutoff(mut self, eta: T) -> Result<Self> {
        self.cutoff_eta = eta;
        self.validate()?;
        Ok(self)
    }

    pub fn with_y0(mut self, y0: T) -> Result<Self> {
        self.y0 = y0;
        self.validate()?;
        Ok(self)
    }

    /// Whether the grid satisfies the `ceil(18 rho)` resolution rule.
    pub fn meets_resolution_rule(&self) -> bool {
        T::from_usize_lossy(self.n_grid) >= (self.rho * T::lit(POINTS_PER_RHO)).ceil()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > T::zero()) || !self.rho.is_finite() {
            return Err(domain(format!(
                "rho must be finite and > 0, got {}",
                self.rho
            )));
        }
        check_unit_interval(self.y0)?;
        if !(self.cutoff_eta >= T::lit(MIN_CUTOFF_ETA)) || !self.cutoff_eta.is_finite() {
            return Err(domain(format!(
                "cutoff_eta must be >= {MIN_CUTOFF_ETA}, got {}",
                self.cutoff_eta
            )));
        }
        if self.n_grid < 2 {
            return Err(domain(format!("n_grid must be >= 2, got {}", self.n_grid)));
        }
        Ok(())
    }
}

pub(crate) fn check_unit_interval<T: Scalar>(y0: T) -> Result<()> {
    if !(y0 >= T::zero() && y0 <= T::one()) {
        return Err(domain(format!("y0 must lie in [0, 1], got {y0}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn physical_params_derive_rho_and_diffusivity() {
        let p = PhysicalParams::new(3.0_f64, 0.5, 4.0).unwrap();
        assert_eq!(p.diffusivity(), 0.125);
        assert_eq!(p.rho(), 3.0 / (0.5 * 2.0));
        assert!(PhysicalParams::new(0.0_f64, 1.0, 1.0).is_err());
        assert!(PhysicalParams::new(1.0_f64, -1.0, 1.0).is_err());
        assert!(PhysicalParams::new(1.0_f64, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn default_grid_follows_resolution_rule() {
        assert_eq!(default_grid(10.0_f64), 180);
        assert_eq!(default_grid(20.0_f64), 360);
        assert_eq!(default_grid(0.5_f64), MIN_GRID);
        let spec = ProblemSpec::new(200.0_f64, 0.5).unwrap();
        assert_eq!(spec.n_grid, 3600);
        assert_eq!(spec.cutoff_eta, 8.5);
        assert!(spec.meets_resolution_rule());
        assert!(!spec.with_n_grid(100).unwrap().meets_resolution_rule());
    }

    #[test]
    fn problem_spec_rejects_bad_inputs() {
        assert!(ProblemSpec::new(0.0_f64, 0.5).is_err());
        assert!(ProblemSpec::new(1.0_f64, 1.5).is_err());
        assert!(ProblemSpec::new(1.0_f64, -0.1).is_err());
        let s = ProblemSpec::new(1.0_f64, 0.0).unwrap();
        assert!(s.with_cutoff(5.0).is_err());
        assert!(s.with_n_grid(1).is_err());
        assert!(ProblemSpec::new(1.0_f64, 1.0).is_ok());
    }
}
