//! Survival sequences, mean exit frames and the leading spectral pair.
//!
//! With `h_i = k(y_i - y0)` (the Nyström image of `K delta_{y0}`) and
//! quadrature weights `w`:
//!
//! * `S_n = w . K^{n-1} h` for `n >= 1`, `S_0 = 1`
//! * `M = sum_{n>=1} S_n = w . (I - K)^{-1} h`, `E[tau] = 1 + M`
//! * `S_n ~ a0 lambda0^n` for large `n`

use serde::{Deserialize, Serialize};

use crate::banded::BandedLu;
use crate::error::{domain, Result, StroboError};
use crate::operator::StroboOperator;
use crate::params::check_unit_interval;
use crate::scalar::Scalar;

/// Survival probabilities `S_0 ..= S_nmax`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalSeries<T> {
    pub rho: T,
    pub y0: T,
    pub values: Vec<T>,
}

impl<T: Scalar> SurvivalSeries<T> {
    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    /// Successive ratios `S_{n+1} / S_n` for `n >= 1`.
    pub fn ratios(&self) -> Vec<T> {
        self.values[1..].windows(2).map(|w| w[1] / w[0]).collect()
    }
}

/// Resolvent solution for one start point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFrames<T> {
    /// Expected number of frames survived beyond the first.
    pub m: T,
    pub mean_tau: T,
    /// `||(I - K) x - h||_inf` of the returned solution.
    pub residual: T,
}

/// Leading eigenpair of the operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralPair<T> {
    pub lambda0: T,
    /// `1 - lambda0`, computed without cancellation.
    pub gap: T,
    /// Positive eigenvector normalized to unit quadrature norm.
    pub eigenvector: Vec<T>,
    /// Amplitude with `S_n ~ a0_est lambda0^n`.
    pub a0_est: T,
    pub iterations: usize,
}

/// Combined resolvent and spectral summary for one `(rho, y0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitStats<T> {
    pub m: T,
    pub mean_tau: T,
    pub lambda0: T,
    pub a0_est: T,
    pub gap: T,
}

/// `h_i = k(y_i - y0)`.
pub fn initial_vector<T: Scalar>(op: &StroboOperator<T>, y0: T) -> Result<Vec<T>> {
    check_unit_interval(y0)?;
    Ok(op
        .grid()
        .iter()
        .map(|&y| op.kernel().eval(y - y0))
        .collect())
}

pub fn survival_sequence<T: Scalar>(
    op: &StroboOperator<T>,
    y0: T,
    n_max: usize,
) -> Result<SurvivalSeries<T>> {
    if n_max < 1 {
        return Err(domain("n_max must be >= 1"));
    }
    let mut v = initial_vector(op, y0)?;
    let mut next = vec![T::zero(); v.len()];
    let mut values = Vec::with_capacity(n_max + 1);
    values.push(T::one());
    values.push(op.integrate(&v).min(T::one()));
    for n in 2..=n_max {
        op.apply(&v, &mut next);
        std::mem::swap(&mut v, &mut next);
        // before mass reaches a wall the exact ratio is 1 - O(1e-16); rounding may push it over
        values.push(op.integrate(&v).min(values[n - 1]));
    }
    Ok(SurvivalSeries {
        rho: op.rho(),
        y0,
        values,
    })
}

/// Solve `(I - K) x = h` by banded LU.
pub fn mean_frames<T: Scalar>(op: &StroboOperator<T>, y0: T) -> Result<MeanFrames<T>> {
    let lu = BandedLu::identity_minus(op)?;
    mean_frames_with(op, &lu, y0)
}

/// [`mean_frames`] reusing an existing factorization of `I - K`.
pub fn mean_frames_with<T: Scalar>(
    op: &StroboOperator<T>,
    lu: &BandedLu<T>,
    y0: T,
) -> Result<MeanFrames<T>> {
    let h = initial_vector(op, y0)?;
    let mut x = lu.solve(&h);
    let mut residual = resolvent_residual(op, &x, &h);
    // one step of refinement; the factorization is exact up to rounding
    let mut correction = residual.clone();
    lu.solve_in_place(&mut correction);
    for (xi, ci) in x.iter_mut().zip(&correction) {
        *xi += *ci;
    }
    residual = resolvent_residual(op, &x, &h);
    let res_inf = residual.iter().fold(T::zero(), |m, r| m.max(r.abs()));
    let m = op.integrate(&x);
    if !m.is_finite() || m < T::zero() {
        return Err(StroboError::Solver(format!("resolvent produced M = {m}")));
    }
    Ok(MeanFrames {
        m,
        mean_tau: T::one() + m,
        residual: res_inf,
    })
}

/// `h - (I - K) x`
fn resolvent_residual<T: Scalar>(op: &StroboOperator<T>, x: &[T], h: &[T]) -> Vec<T> {
    let mut kx = vec![T::zero(); x.len()];
    op.apply(x, &mut kx);
    h.iter()
        .zip(x)
        .zip(&kx)
        .map(|((&hi, &xi), &kxi)| hi - (xi - kxi))
        .collect()
}

/// Default stopping tolerance on the change of the gap between sweeps.
pub const DEFAULT_SPECTRAL_TOL: f64 = 1e-14;

/// Iteration cap `max(100 rho^2, 10_000)`.
pub fn iteration_cap<T: Scalar>(rho: T) -> usize {
    let cap = (T::lit(100.0) * rho * rho)
        .ceil()
        .to_usize()
        .unwrap_or(usize::MAX);
    cap.max(10_000)
}

/// Leading eigenpair by power iteration on the resolvent `(I - K)^{-1}`.
///
/// Starts from the half-sine profile `sin(pi y)`; stops when `lambda0`
/// moves by less than `tol` between sweeps. The amplitude `a0_est` is
/// computed for the start point `y0`.
pub fn spectral_pair<T: Scalar>(op: &StroboOperator<T>, y0: T, tol: T) -> Result<SpectralPair<T>> {
    let lu = BandedLu::identity_minus(op)?;
    spectral_pair_with(op, &lu, y0, tol)
}

pub fn spectral_pair_with<T: Scalar>(
    op: &StroboOperator<T>,
    lu: &BandedLu<T>,
    y0: T,
    tol: T,
) -> Result<SpectralPair<T>> {
    if !(tol > T::zero()) {
        return Err(domain(format!("tolerance must be > 0, got {tol}")));
    }
    let h = initial_vector(op, y0)?;
    let cap = iteration_cap(op.rho());

    let mut x: Vec<T> = op.grid().iter().map(|&y| (T::PI() * y).sin()).collect();
    normalize(op, &mut x);
    let mut gap = T::nan();
    let mut last_change = T::infinity();
    let mut iterations = 0;
    while iterations < cap {
        iterations += 1;
        let z = lu.solve(&x);
        // Rayleigh quotient of the resolvent: 1 / (1 - lambda0)
        let num: T = x.iter().zip(&z).map(|(&a, &b)| a * b).sum();
        let den: T = x.iter().map(|&a| a * a).sum();
        let new_gap = den / num;
        x = z;
        normalize(op, &mut x);
        last_change = (new_gap - gap).abs();
        gap = new_gap;
        if last_change < tol {
            break;
        }
    }
    if !(last_change < tol) {
        return Err(StroboError::Convergence {
            iterations,
            last_change: last_change.to_f64_lossy(),
        });
    }
    let lambda0 = T::one() - gap;
    if !(lambda0 > T::zero() && lambda0 < T::one()) {
        return Err(StroboError::Solver(format!(
            "leading eigenvalue {lambda0} outside (0, 1)"
        )));
    }
    // expansion coefficient of h on phi, times the integral of phi
    let w_phi = op.integrate(&x);
    let h_phi: T = op
        .weights()
        .iter()
        .zip(&h)
        .zip(&x)
        .map(|((&w, &hi), &p)| w * hi * p)
        .sum();
    let a0_est = w_phi * h_phi / lambda0;
    Ok(SpectralPair {
        lambda0,
        gap,
        eigenvector: x,
        a0_est,
        iterations,
    })
}

/// Scale to unit quadrature norm with non-negative mean.
fn normalize<T: Scalar>(op: &StroboOperator<T>, x: &mut [T]) {
    let norm2: T = op
        .weights()
        .iter()
        .zip(x.iter())
        .map(|(&w, &v)| w * v * v)
        .sum();
    let mut scale = T::one() / norm2.sqrt();
    if x.iter().copied().sum::<T>() < T::zero() {
        scale = -scale;
    }
    for v in x.iter_mut() {
        *v *= scale;
    }
}

/// `sum_{n=1}^{terms} S_n`, a lower bound on `M`.
pub fn neumann_partial_sum<T: Scalar>(op: &StroboOperator<T>, y0: T, terms: usize) -> Result<T> {
    if terms < 1 {
        return Err(domain("terms must be >= 1"));
    }
    let series = survival_sequence(op, y0, terms)?;
    Ok(series.values[1..].iter().copied().sum())
}

/// Resolvent and spectral data in one call, sharing the factorization.
pub fn exit_stats<T: Scalar>(op: &StroboOperator<T>, y0: T, tol: T) -> Result<ExitStats<T>> {
    let lu = BandedLu::identity_minus(op)?;
    let mf = mean_frames_with(op, &lu, y0)?;
    let sp = spectral_pair_with(op, &lu, y0, tol)?;
    Ok(ExitStats {
        m: mf.m,
        mean_tau: mf.mean_tau,
        lambda0: sp.lambda0,
        a0_est: sp.a0_est,
        gap: sp.gap,
    })
}
