//! Ordinary least-squares fits of sweep data to the asymptotic models.
//!
//! The design matrix is column-scaled and factored with Householder QR;
//! standard errors come from the residual covariance `s^2 (R^T R)^-1`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, StroboError};

/// Basis columns whose cosine similarity exceeds this trigger a warning.
pub const CORRELATION_WARNING: f64 = 0.9999;

/// Minimum `rho` accepted by the boundary and bulk fits.
pub const MIN_FIT_RHO: f64 = 10.0;
/// Minimum `rho` accepted by the gap fit.
pub const MIN_GAP_FIT_RHO: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModel {
    /// `A rho + B + C / rho`
    Boundary,
    /// `a rho^2 + b rho + c`
    Bulk,
    /// `gap rho^2 = g0 + beta / rho`
    Gap,
    /// `log y = log k + alpha log rho`
    PowerlawLoglog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub coefficients: Vec<Coefficient>,
    /// Quantities computed from the coefficients, e.g. `beta = 4 b`.
    #[serde(default)]
    pub derived: Vec<Coefficient>,
    pub rms_residual: f64,
    pub window: (f64, f64),
    pub n_points: usize,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl FitResult {
    fn find(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients
            .iter()
            .chain(&self.derived)
            .find(|c| c.name == name)
    }

    /// Value of a fitted or derived coefficient.
    pub fn get(&self, name: &str) -> Option<f64> {
        self.find(name).map(|c| c.value)
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.find(name).map(|c| c.std_error)
    }
}

struct Ols {
    beta: Vec<f64>,
    std_err: Vec<f64>,
    rms: f64,
    warnings: Vec<String>,
}

fn ols(xs: &[f64], ys: &[f64], basis: &[fn(f64) -> f64], names: &[&str]) -> Result<Ols> {
    let n = xs.len();
    let p = basis.len();
    let mut a = DMatrix::from_fn(n, p, |i, j| basis[j](xs[i]));
    let b = DVector::from_column_slice(ys);

    let norms: Vec<f64> = (0..p).map(|j| a.column(j).norm()).collect();
    let mut warnings = Vec::new();
    for j in 0..p {
        for k in (j + 1)..p {
            let cos = a.column(j).dot(&a.column(k)).abs() / (norms[j] * norms[k]);
            if cos > CORRELATION_WARNING {
                warnings.push(format!(
                    "basis columns {} and {} correlate at {cos:.6}; coefficients are ill-conditioned",
                    names[j], names[k]
                ));
            }
        }
    }
    for (j, &s) in norms.iter().enumerate() {
        if !(s > 0.0) || !s.is_finite() {
            return Err(StroboError::Fit(format!(
                "basis column {} is zero or non-finite",
                names[j]
            )));
        }
        a.column_mut(j).unscale_mut(s);
    }

    let qr = a.clone().qr();
    let r = qr.r();
    let rmax = (0..p).map(|j| r[(j, j)].abs()).fold(0.0, f64::max);
    for j in 0..p {
        if r[(j, j)].abs() <= 1e-12 * rmax {
            return Err(StroboError::Fit(
                "rank-deficient design; need more distinct rho values".into(),
            ));
        }
    }
    let qtb = qr.q().transpose() * &b;
    let scaled = r
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| StroboError::Fit("triangular solve failed".into()))?;

    let resid = &b - &a * &scaled;
    let rss = resid.norm_squared();
    let dof = (n - p) as f64;
    let s2 = rss / dof;
    let rinv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or_else(|| StroboError::Fit("triangular inverse failed".into()))?;

    let beta = (0..p).map(|j| scaled[j] / norms[j]).collect();
    let std_err = (0..p)
        .map(|j| (s2 * rinv.row(j).norm_squared()).sqrt() / norms[j])
        .collect();
    Ok(Ols {
        beta,
        std_err,
        rms: (rss / n as f64).sqrt(),
        warnings,
    })
}

fn check_data(data: &[(f64, f64)], needed: usize, min_rho: f64) -> Result<(f64, f64)> {
    if data.len() < needed {
        return Err(StroboError::InsufficientData {
            needed,
            got: data.len(),
        });
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &(rho, y) in data {
        if !rho.is_finite() || !y.is_finite() {
            return Err(StroboError::Fit(format!(
                "non-finite data point ({rho}, {y})"
            )));
        }
        if rho < min_rho {
            return Err(StroboError::Fit(format!(
                "rho = {rho} below fit minimum {min_rho}"
            )));
        }
        lo = lo.min(rho);
        hi = hi.max(rho);
    }
    Ok((lo, hi))
}

fn assemble(
    model: FitModel,
    names: &[&str],
    fit: Ols,
    window: (f64, f64),
    n_points: usize,
) -> FitResult {
    let coefficients = names
        .iter()
        .zip(fit.beta.iter().zip(&fit.std_err))
        .map(|(name, (&value, &std_error))| Coefficient {
            name: (*name).to_string(),
            value,
            std_error,
        })
        .collect();
    FitResult {
        model,
        coefficients,
        derived: Vec::new(),
        rms_residual: fit.rms,
        window,
        n_points,
        warnings: fit.warnings,
    }
}

/// Fit `M = A rho + B + C / rho`; coefficients `A`, `B`, `C`.
pub fn fit_boundary(data: &[(f64, f64)]) -> Result<FitResult> {
    let window = check_data(data, 5, MIN_FIT_RHO)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = data.iter().copied().unzip();
    let names = ["A", "B", "C"];
    let fit = ols(&xs, &ys, &[|r| r, |_| 1.0, |r| 1.0 / r], &names)?;
    Ok(assemble(
        FitModel::Boundary,
        &names,
        fit,
        window,
        data.len(),
    ))
}

/// Fit `M = a rho^2 + b rho + c`; also derives `beta = 4 b` and `C = c + 1`.
pub fn fit_bulk(data: &[(f64, f64)]) -> Result<FitResult> {
    let window = check_data(data, 6, MIN_FIT_RHO)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = data.iter().copied().unzip();
    let names = ["a", "b", "c"];
    let fit = ols(&xs, &ys, &[|r| r * r, |r| r, |_| 1.0], &names)?;
    let mut out = assemble(FitModel::Bulk, &names, fit, window, data.len());
    let (b, sb) = (out.coefficients[1].value, out.coefficients[1].std_error);
    let (c, sc) = (out.coefficients[2].value, out.coefficients[2].std_error);
    out.derived = vec![
        Coefficient {
            name: "beta".into(),
            value: 4.0 * b,
            std_error: 4.0 * sb,
        },
        Coefficient {
            name: "C".into(),
            value: c + 1.0,
            std_error: sc,
        },
    ];
    Ok(out)
}

/// Fit `gap rho^2 = g0 + beta / rho`; coefficients `g0` and `beta`.
pub fn fit_gap(data: &[(f64, f64)]) -> Result<FitResult> {
    let window = check_data(data, 4, MIN_GAP_FIT_RHO)?;
    let xs: Vec<f64> = data.iter().map(|d| d.0).collect();
    let ys: Vec<f64> = data.iter().map(|&(r, g)| g * r * r).collect();
    let names = ["g0", "beta"];
    let fit = ols(&xs, &ys, &[|_| 1.0, |r| 1.0 / r], &names)?;
    Ok(assemble(FitModel::Gap, &names, fit, window, data.len()))
}

/// Fit `log y = log_k + alpha log rho`; needs positive data.
pub fn fit_powerlaw(data: &[(f64, f64)]) -> Result<FitResult> {
    let window = check_data(data, 4, f64::MIN_POSITIVE)?;
    if data.iter().any(|&(_, y)| y <= 0.0) {
        return Err(StroboError::Fit(
            "power-law fit needs positive values".into(),
        ));
    }
    let xs: Vec<f64> = data.iter().map(|d| d.0.ln()).collect();
    let ys: Vec<f64> = data.iter().map(|d| d.1.ln()).collect();
    let names = ["log_k", "alpha"];
    let fit = ols(&xs, &ys, &[|_| 1.0, |x| x], &names)?;
    Ok(assemble(
        FitModel::PowerlawLoglog,
        &names,
        fit,
        window,
        data.len(),
    ))
}
