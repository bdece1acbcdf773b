//! Gaussian one-frame kernel and its Nyström discretization on `(0, 1)`.
//!
//! The grid is the midpoint rule `y_i = (i + 1/2) / N` with uniform
//! weights `1/N`, so the matrix `K[i][j] = w_j k(y_i - y_j)` is a symmetric
//! Toeplitz band. Only the first row of the band is stored.

use crate::error::{domain, Result, StroboError};
use crate::frames::FrameDistribution;
use crate::params::ProblemSpec;
use crate::scalar::Scalar;

/// Smallest half-bandwidth, in grid steps, that still resolves the kernel core.
pub const MIN_BANDWIDTH: usize = 4;

/// One-frame transition density `(rho / sqrt(2 pi)) exp(-rho^2 u^2 / 2)`.
pub fn gaussian_kernel<T: Scalar>(u: T, rho: T) -> Result<T> {
    if !(rho > T::zero()) || !rho.is_finite() {
        return Err(domain(format!("kernel scale rho must be > 0, got {rho}")));
    }
    Ok(gaussian_density(u, rho))
}

#[inline]
pub(crate) fn gaussian_density<T: Scalar>(u: T, rho: T) -> T {
    let z = rho * u;
    rho * T::FRAC_1_SQRT_2() * T::FRAC_2_SQRT_PI() * T::lit(0.5) * (-T::lit(0.5) * z * z).exp()
}

/// Transition density of one frame, either a single Gaussian or a
/// variance mixture over random frame intervals.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel<T> {
    Gaussian {
        rho: T,
    },
    /// `sum_k weight_k g_{rho / sqrt(v_k)}(u)`
    Mixture {
        rho: T,
        components: Vec<(T, T)>,
    },
}

impl<T: Scalar> Kernel<T> {
    pub fn eval(&self, u: T) -> T {
        match self {
            Self::Gaussian { rho } => gaussian_density(u, *rho),
            Self::Mixture { rho, components } => components
                .iter()
                .map(|&(v, w)| w * gaussian_density(u, *rho / v.sqrt()))
                .sum(),
        }
    }

    pub fn rho(&self) -> T {
        match self {
            Self::Gaussian { rho } | Self::Mixture { rho, .. } => *rho,
        }
    }
}

/// Nyström matrix of the one-step operator.
///
/// Immutable once built; share it freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct StroboOperator<T> {
    grid: Vec<T>,
    weights: Vec<T>,
    band: Vec<T>,
    kernel: Kernel<T>,
}

impl<T: Scalar> StroboOperator<T> {
    pub fn rho(&self) -> T {
        self.kernel.rho()
    }

    /// Number of grid nodes `N`.
    pub fn n(&self) -> usize {
        self.grid.len()
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// `band[d] = K[i][i + d]` for `d = 0..=bandwidth`.
    pub fn band(&self) -> &[T] {
        &self.band
    }

    pub fn bandwidth(&self) -> usize {
        self.band.len() - 1
    }

    pub fn kernel(&self) -> &Kernel<T> {
        &self.kernel
    }

    pub fn entry(&self, i: usize, j: usize) -> T {
        let d = i.abs_diff(j);
        if d < self.band.len() {
            self.band[d]
        } else {
            T::zero()
        }
    }

    /// `out = K x`.
    pub fn apply(&self, x: &[T], out: &mut [T]) {
        let n = self.n();
        assert_eq!(x.len(), n, "vector length must match grid");
        assert_eq!(out.len(), n, "output length must match grid");
        let bw = self.bandwidth();
        for (i, o) in out.iter_mut().enumerate() {
            let lo = i.saturating_sub(bw);
            let hi = (i + bw).min(n - 1);
            *o = x[lo..=hi]
                .iter()
                .enumerate()
                .map(|(k, &xj)| self.band[(lo + k).abs_diff(i)] * xj)
                .sum();
        }
    }

    /// `sum_j K[i][j]`: probability of surviving one frame from node `i`.
    pub fn row_sum(&self, i: usize) -> T {
        let n = self.n();
        let bw = self.bandwidth();
        let lo = i.saturating_sub(bw);
        let hi = (i + bw).min(n - 1);
        (lo..=hi).map(|j| self.band[i.abs_diff(j)]).sum()
    }

    /// `w . x`
    pub fn integrate(&self, x: &[T]) -> T {
        self.weights.iter().zip(x).map(|(&w, &v)| w * v).sum()
    }
}

fn midpoint_grid<T: Scalar>(n: usize) -> (Vec<T>, Vec<T>) {
    let nf = T::from_usize_lossy(n);
    let grid = (0..n)
        .map(|i| (T::from_usize_lossy(i) + T::lit(0.5)) / nf)
        .collect();
    (grid, vec![T::one() / nf; n])
}

/// `floor(eta * width_scale * N / rho)`, clamped to `N - 1`.
fn band_halfwidth<T: Scalar>(spec: &ProblemSpec<T>, width_scale: T) -> Result<usize> {
    let n = spec.n_grid;
    let raw = spec.cutoff_eta * width_scale * T::from_usize_lossy(n) / spec.rho;
    // absorb rounding when eta N / rho is an integer in exact arithmetic
    let raw = raw * (T::one() + T::lit(16.0) * T::epsilon());
    let bw = raw.floor().to_usize().unwrap_or(usize::MAX).min(n - 1);
    if bw < MIN_BANDWIDTH {
        return Err(StroboError::Resolution {
            bandwidth: bw,
            min: MIN_BANDWIDTH,
            n_grid: n,
            rho: spec.rho.to_f64_lossy(),
        });
    }
    Ok(bw)
}

/// Nyström matrix of the deterministic one-step operator.
pub fn build_operator<T: Scalar>(spec: &ProblemSpec<T>) -> Result<StroboOperator<T>> {
    spec.validate()?;
    let n = spec.n_grid;
    let bw = band_halfwidth(spec, T::one())?;
    let (grid, weights) = midpoint_grid::<T>(n);
    let step = T::one() / T::from_usize_lossy(n);
    let band = (0..=bw)
        .map(|d| gaussian_density(T::from_usize_lossy(d) * step, spec.rho) * step)
        .collect();
    Ok(StroboOperator {
        grid,
        weights,
        band,
        kernel: Kernel::Gaussian { rho: spec.rho },
    })
}

/// Nyström matrix of the interval-averaged operator `K_mu`.
///
/// Degenerate laws return exactly [`build_operator`]. Otherwise each
/// mixture component's sampled band is rescaled to unit mass on the
/// infinite grid before weighting, so components narrower than a grid
/// step act as a local identity instead of injecting spurious mass.
/// The band extends to `eta sqrt(v_max) / rho`.
pub fn build_averaged_operator<T: Scalar>(
    spec: &ProblemSpec<T>,
    mu: &FrameDistribution,
    u_quadrature_order: usize,
) -> Result<StroboOperator<T>> {
    if mu.is_degenerate() {
        return build_operator(spec);
    }
    spec.validate()?;
    let n = spec.n_grid;
    let nodes = mu.mixture_nodes(u_quadrature_order)?;
    if let Some(&(v, _)) = nodes.iter().find(|&&(v, _)| !(v > 0.0)) {
        return Err(domain(format!(
            "frame interval support includes v = {v} <= 0"
        )));
    }
    let bw = band_halfwidth(spec, T::lit(mu.max_interval().sqrt()))?;
    let (grid, weights) = midpoint_grid::<T>(n);
    let step = T::one() / T::from_usize_lossy(n);

    let components: Vec<(T, T)> = nodes.iter().map(|&(v, w)| (T::lit(v), T::lit(w))).collect();
    let mut band = vec![T::zero(); bw + 1];
    let mut sampled = vec![T::zero(); bw + 1];
    for &(v, w) in &components {
        let scale = spec.rho / v.sqrt();
        for (d, s) in sampled.iter_mut().enumerate() {
            *s = gaussian_density(T::from_usize_lossy(d) * step, scale) * step;
        }
        let mass = sampled[0] + T::lit(2.0) * sampled[1..].iter().copied().sum::<T>();
        for (b, &s) in band.iter_mut().zip(&sampled) {
            *b += w * s / mass;
        }
    }
    Ok(StroboOperator {
        grid,
        weights,
        band,
        kernel: Kernel::Mixture {
            rho: spec.rho,
            components,
        },
    })
}
