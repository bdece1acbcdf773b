//! Parallel evaluation over a list of `rho` values.
//!
//! Results come back in input order regardless of scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::frames::{FrameDistribution, DEFAULT_QUADRATURE_ORDER};
use crate::operator::{build_averaged_operator, StroboOperator};
use crate::params::{ProblemSpec, DEFAULT_CUTOFF_ETA};
use crate::resolvent::{exit_stats, mean_frames, DEFAULT_SPECTRAL_TOL};

/// Values `lo + k step` for `k = 0, 1, ...` while below `hi + step / 2`.
pub fn rho_range(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) {
        return Err(domain("range bounds must be finite"));
    }
    if !(step > 0.0) {
        return Err(domain(format!("step must be > 0, got {step}")));
    }
    if hi < lo {
        return Err(domain(format!("empty range {lo}:{hi}:{step}")));
    }
    let end = hi + 0.5 * step;
    let count = ((end - lo) / step).ceil() as usize;
    Ok((0..count)
        .map(|k| lo + k as f64 * step)
        .filter(|&r| r < end)
        .collect())
}

/// Discretization and interval law shared by every point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub eta: f64,
    /// Fixed grid size; `None` applies the `18 rho` rule per point.
    pub n_grid: Option<usize>,
    pub dist: FrameDistribution,
    pub quadrature_order: usize,
    pub spectral_tol: f64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            eta: DEFAULT_CUTOFF_ETA,
            n_grid: None,
            dist: FrameDistribution::Deterministic,
            quadrature_order: DEFAULT_QUADRATURE_ORDER,
            spectral_tol: DEFAULT_SPECTRAL_TOL,
        }
    }
}

impl SweepSettings {
    pub fn with_dist(mut self, dist: FrameDistribution) -> Self {
        self.dist = dist;
        self
    }

    pub fn spec(&self, rho: f64, y0: f64) -> Result<ProblemSpec<f64>> {
        let mut spec = ProblemSpec::new(rho, y0)?.with_cutoff(self.eta)?;
        if let Some(n) = self.n_grid {
            spec = spec.with_n_grid(n)?;
        }
        Ok(spec)
    }

    pub fn operator(&self, rho: f64, y0: f64) -> Result<StroboOperator<f64>> {
        build_averaged_operator(&self.spec(rho, y0)?, &self.dist, self.quadrature_order)
    }
}

/// One row of a mean-exit sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub rho: f64,
    pub y0: f64,
    pub m: f64,
    pub mean_tau: f64,
    pub lambda0: f64,
    pub gap: f64,
}

fn par_map<F>(rhos: &[f64], f: F) -> Result<Vec<(f64, f64)>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    rhos.par_iter().map(|&r| f(r).map(|v| (r, v))).collect()
}

/// `(rho, M)` pairs.
pub fn mean_frames_sweep(
    rhos: &[f64],
    y0: f64,
    settings: &SweepSettings,
) -> Result<Vec<(f64, f64)>> {
    par_map(rhos, |rho| {
        Ok(mean_frames(&settings.operator(rho, y0)?, y0)?.m)
    })
}

/// `(rho, 1 - lambda0)` pairs.
pub fn gap_sweep(rhos: &[f64], settings: &SweepSettings) -> Result<Vec<(f64, f64)>> {
    par_map(rhos, |rho| {
        let op = settings.operator(rho, 0.5)?;
        Ok(crate::resolvent::spectral_pair(&op, 0.5, settings.spectral_tol)?.gap)
    })
}

/// Mean exit frames and leading eigenvalue for each `rho`.
pub fn exit_stats_sweep(rhos: &[f64], y0: f64, settings: &SweepSettings) -> Result<Vec<SweepRow>> {
    rhos.par_iter()
        .map(|&rho| {
            let op = settings.operator(rho, y0)?;
            let s = exit_stats(&op, y0, settings.spectral_tol)?;
            Ok(SweepRow {
                rho,
                y0,
                m: s.m,
                mean_tau: s.mean_tau,
                lambda0: s.lambda0,
                gap: s.gap,
            })
        })
        .collect()
}
