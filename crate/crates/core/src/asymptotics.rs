//! Closed-form reference laws for large confinement ratios.
//!
//! The Nyström resolvent is the ground truth; these formulas are the
//! comparison targets and the source of the published constants.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result, StroboError};
use crate::operator::gaussian_density;
use crate::params::PhysicalParams;
use crate::scalar::Scalar;

/// Riemann zeta at 1/2.
pub const ZETA_HALF: f64 = -1.460_354_508_809_586_8;
/// `1/sqrt(2)`: boundary-start slope of `E[tau]` in `rho`.
pub const BOUNDARY_SLOPE: f64 = std::f64::consts::FRAC_1_SQRT_2;
/// Coefficient of `rho^-3` in the published gap expansion.
pub const GAP_BETA: f64 = 2.332_056;
/// Linear coefficient of the bulk law.
pub const BULK_B: f64 = 0.583_014;
/// Constant of the bulk law for `M` (frames beyond the first).
pub const BULK_C_M: f64 = -0.426_408;
/// Constant of the bulk law for `E[tau] = 1 + M`.
pub const BULK_C_TAU: f64 = 0.573_592;
/// Published boundary-fit slope and constant for `M(rho; 0)`.
pub const BOUNDARY_FIT_A: f64 = 0.707_26;
pub const BOUNDARY_FIT_B: f64 = -0.176_09;

/// `|zeta(1/2)| / sqrt(pi)`: boundary-start constant of `E[tau]`.
pub fn boundary_const() -> f64 {
    ZETA_HALF.abs() / std::f64::consts::PI.sqrt()
}

/// Constants of the boundary and bulk laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticConstants {
    pub boundary_slope: f64,
    pub boundary_const: f64,
    pub bulk_a: f64,
    pub bulk_b: f64,
    /// `E[tau]` form; the `M` form is one less.
    pub bulk_c: f64,
    pub beta: f64,
}

impl AsymptoticConstants {
    pub fn published() -> Self {
        Self {
            boundary_slope: BOUNDARY_SLOPE,
            boundary_const: boundary_const(),
            bulk_a: 0.25,
            bulk_b: BULK_B,
            bulk_c: BULK_C_TAU,
            beta: GAP_BETA,
        }
    }

    pub fn bulk_c_m_form(&self) -> f64 {
        self.bulk_c - 1.0
    }
}

/// `E[tau](rho; 0) ~ rho / sqrt(2) + |zeta(1/2)| / sqrt(pi)`.
///
/// Evaluates for any `rho`; only meaningful for `rho >~ 5`.
pub fn boundary_law<T: Scalar>(rho: T) -> T {
    rho * T::FRAC_1_SQRT_2() + T::lit(boundary_const())
}

/// `E[tau](rho; 1/2) ~ rho^2 / 4 + b rho + C`.
pub fn bulk_law<T: Scalar>(rho: T) -> T {
    T::lit(0.25) * rho * rho + T::lit(BULK_B) * rho + T::lit(BULK_C_TAU)
}

/// [`bulk_law`] for `M = E[tau] - 1`.
pub fn bulk_law_m<T: Scalar>(rho: T) -> T {
    bulk_law(rho) - T::one()
}

/// Continuous-monitoring mean exit time `x0 (L - x0) / (2 D)`.
pub fn dirichlet_mean_exit<T: Scalar>(x0: T, params: &PhysicalParams<T>) -> Result<T> {
    let l = params.length();
    if !(x0 >= T::zero() && x0 <= l) {
        return Err(domain(format!("x0 = {x0} outside [0, {l}]")));
    }
    Ok(x0 * (l - x0) / (T::lit(2.0) * params.diffusivity()))
}

/// Published gap expansion `pi^2 / (2 rho^2) + beta / rho^3`.
pub fn gap_expansion<T: Scalar>(rho: T) -> T {
    let pi = T::PI();
    pi * pi / (T::lit(2.0) * rho * rho) + T::lit(GAP_BETA) / (rho * rho * rho)
}

/// Sine-mode eigenvalue estimate: the Rayleigh quotient of `K` on
/// `phi_m(y) = sqrt(2) sin(m pi y)`,
///
/// `int_{-1}^{1} g_rho(u) [(1 - |u|) cos(m pi u) + sin(m pi |u|) / (m pi)] du`.
///
/// The second term cancels the `O(1/rho)` mean-displacement loss of the
/// first, leaving `~ exp(-m^2 pi^2 / (2 rho^2))` for large `rho`.
/// Composite 32-point Gauss-Legendre on `[0, min(1, 40/rho)]` with panels
/// no wider than a kernel width or a cosine half-period.
pub fn eigenvalue_formula<T: Scalar>(m: usize, rho: T) -> Result<T> {
    if m < 1 {
        return Err(domain("mode index m must be >= 1"));
    }
    if !(rho > T::zero()) {
        return Err(domain(format!("rho must be > 0, got {rho}")));
    }
    let upper = T::one().min(T::lit(40.0) / rho);
    let by_width = (upper * rho).ceil().to_usize().unwrap_or(1);
    let by_period = (upper * T::from_usize_lossy(m))
        .ceil()
        .to_usize()
        .unwrap_or(1);
    let panels = 2 * by_width.max(by_period).max(1);
    let rule = GaussLegendre::new(NonZeroUsize::new(32).expect("nonzero"));
    let width = upper / T::from_usize_lossy(panels);
    let mf = T::from_usize_lossy(m);
    let mut total = T::zero();
    for p in 0..panels {
        let a = T::from_usize_lossy(p) * width;
        for &(x, w) in rule.as_node_weight_pairs() {
            let u = a + width * T::lit(0.5) * (T::lit(x) + T::one());
            let arg = mf * T::PI() * u;
            let shape = (T::one() - u) * arg.cos() + arg.sin() / (mf * T::PI());
            total += T::lit(w) * width * T::lit(0.5) * gaussian_density(u, rho) * shape;
        }
    }
    Ok(T::lit(2.0) * total)
}

/// Start position for the sine-mode survival sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeStart {
    /// `y0 = 0`, odd modes.
    Boundary,
    /// `y0 = 1/2`, even modes.
    Bulk,
}

const MAX_MODES: usize = 10_000_000;

/// Survival probability from the sine-mode sums.
///
/// Boundary: `1/2 + (2/pi) sum_m exp[-pi^2 (2m+1)^2 n / (2 rho^2)] / (2m+1)`.
/// Bulk: `(2/pi) sum_m (-1)^m exp[-2 pi^2 (m+1)^2 n / rho^2] / (2m+2)`.
/// Terms are added until one falls below `truncation_tol`; for the
/// alternating bulk sum that term also bounds the dropped tail.
///
/// The boundary sum tends to 1/2 as `n -> inf`, not to zero; it is a
/// validation aid for intermediate `n` (`n >= rho^2 / 10`), not a survival law.
pub fn mode_sum_survival<T: Scalar>(
    rho: T,
    n: usize,
    start: ModeStart,
    truncation_tol: T,
) -> Result<T> {
    if n < 1 {
        return Err(domain("n must be >= 1"));
    }
    if !(truncation_tol > T::zero()) {
        return Err(domain("truncation tolerance must be > 0"));
    }
    let pi = T::PI();
    let two = T::lit(2.0);
    let ratio = T::from_usize_lossy(n) / (rho * rho);
    let mut sum = T::zero();
    for m in 0..MAX_MODES {
        let mf = T::from_usize_lossy(m);
        let term = match start {
            ModeStart::Boundary => {
                let k = two * mf + T::one();
                (-pi * pi * k * k * ratio / two).exp() / k
            }
            ModeStart::Bulk => {
                let k = mf + T::one();
                let sign = if m % 2 == 0 { T::one() } else { -T::one() };
                sign * (-two * pi * pi * k * k * ratio).exp() / (two * k)
            }
        };
        if term.abs() < truncation_tol {
            break;
        }
        sum += term;
    }
    let base = match start {
        ModeStart::Boundary => T::lit(0.5),
        ModeStart::Bulk => T::zero(),
    };
    Ok(base + two / pi * sum)
}

/// Least-squares slope of `ln E[tau]` against `ln rho` over pairs inside `window`.
pub fn effective_exponent<T: Scalar>(values: &[(T, T)], window: (T, T)) -> Result<T> {
    let (lo, hi) = window;
    let pts: Vec<(T, T)> = values
        .iter()
        .copied()
        .filter(|&(r, _)| r >= lo && r <= hi)
        .collect();
    if pts.len() < 5 {
        return Err(StroboError::InsufficientData {
            needed: 5,
            got: pts.len(),
        });
    }
    if let Some(&(r, v)) = pts
        .iter()
        .find(|&&(r, v)| !(r > T::zero() && v > T::zero()))
    {
        return Err(domain(format!(
            "log-log fit needs positive data, got ({r}, {v})"
        )));
    }
    let n = T::from_usize_lossy(pts.len());
    let (xs, ys): (Vec<T>, Vec<T>) = pts.iter().map(|&(r, v)| (r.ln(), v.ln())).unzip();
    let xm = xs.iter().copied().sum::<T>() / n;
    let ym = ys.iter().copied().sum::<T>() / n;
    let sxy: T = xs.iter().zip(&ys).map(|(&x, &y)| (x - xm) * (y - ym)).sum();
    let sxx: T = xs.iter().map(|&x| (x - xm) * (x - xm)).sum();
    if !(sxx > T::zero()) {
        return Err(StroboError::Fit("all rho values coincide".into()));
    }
    Ok(sxy / sxx)
}

/// `count` points spaced uniformly in `ln rho` over `[lo, hi]`, endpoints included.
pub fn log_uniform<T: Scalar>(lo: T, hi: T, count: usize) -> Vec<T> {
    let (a, b) = (lo.ln(), hi.ln());
    let last = T::from_usize_lossy(count.saturating_sub(1).max(1));
    (0..count)
        .map(|k| (a + (b - a) * T::from_usize_lossy(k) / last).exp())
        .collect()
}

/// Effective exponent of a law sampled at 20 log-uniform points in `window`.
pub fn effective_exponent_of<T: Scalar>(law: impl Fn(T) -> T, window: (T, T)) -> Result<T> {
    let pts: Vec<(T, T)> = log_uniform(window.0, window.1, 20)
        .into_iter()
        .map(|r| (r, law(r)))
        .collect();
    // endpoints can drift by an ulp through exp(ln(.))
    let pad = (window.1 - window.0) * T::lit(1e-12);
    effective_exponent(&pts, (window.0 - pad, window.1 + pad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    #[allow(clippy::approx_constant)]
    fn constants() {
        let c = AsymptoticConstants::published();
        assert!((c.boundary_slope - 0.707_106_8).abs() < 1e-7);
        assert!((c.boundary_const - 0.823_917_2).abs() < 1e-6);
        assert!((ZETA_HALF + 1.460_354_508_8).abs() < 1e-9);
        assert!((c.bulk_b - c.beta / 4.0).abs() < 1e-12);
        assert!((c.bulk_c_m_form() - BULK_C_M).abs() < 1e-12);
    }

    #[test]
    fn boundary_law_values() {
        assert!((boundary_law(100.0_f64) - 71.5346).abs() < 1e-4);
        assert!((boundary_law(0.0_f64) - 0.82392).abs() < 1e-5);
        for rho in [1.0_f64, 7.5, 300.0] {
            let d = boundary_law(rho) - boundary_law(rho - 1.0);
            assert!((d - BOUNDARY_SLOPE).abs() < 1e-12);
            assert!((boundary_law(rho) - rho / 2f64.sqrt() - boundary_const()).abs() < 1e-12);
        }
    }

    #[test]
    fn bulk_law_values() {
        assert!((bulk_law(10.0_f64) - 31.4038).abs() < 1e-4);
        assert!((bulk_law(40.0_f64) - 423.894).abs() < 1e-3);
        assert!((bulk_law(1e6_f64) / 1e12 - 0.25).abs() < 1e-6);
        assert!((bulk_law_m(40.0_f64) - 422.894).abs() < 1e-3);
    }

    #[test]
    fn dirichlet_benchmark() {
        let p = PhysicalParams::new(2.0_f64, 0.5, 1.0).unwrap();
        let d = p.diffusivity();
        assert_eq!(dirichlet_mean_exit(0.0, &p).unwrap(), 0.0);
        assert!((dirichlet_mean_exit(1.0, &p).unwrap() - 4.0 / (8.0 * d)).abs() < 1e-12);
        assert!(
            (dirichlet_mean_exit(0.3, &p).unwrap() - dirichlet_mean_exit(1.7, &p).unwrap()).abs()
                < 1e-12
        );
        assert!(dirichlet_mean_exit(2.5, &p).is_err());
        assert!(dirichlet_mean_exit(-0.1, &p).is_err());
    }

    #[test]
    fn gap_expansion_values() {
        assert!((gap_expansion(50.0_f64) - 0.001_992_6).abs() < 1e-7);
        let lead = |r: f64| PI * PI / (2.0 * r * r);
        assert!((gap_expansion(1e5_f64) / lead(1e5) - 1.0).abs() < 1e-4);
    }

    /// Composite Simpson on a fine grid, independent of the Gauss-Legendre path.
    fn simpson_eigenvalue(m: usize, rho: f64) -> f64 {
        let n = 200_000;
        let h = 1.0 / n as f64;
        let k = m as f64 * PI;
        let f = |u: f64| {
            rho / (2.0 * PI).sqrt()
                * (-0.5 * rho * rho * u * u).exp()
                * ((1.0 - u) * (k * u).cos() + (k * u).sin() / k)
        };
        let mut s = f(0.0) + f(1.0);
        for k in 1..n {
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
        }
        2.0 * s * h / 3.0
    }

    #[test]
    fn eigenvalue_formula_is_sine_mode_rayleigh_quotient() {
        // <phi_m, K phi_m> by a direct 2D midpoint sum
        for (m, rho) in [(1, 4.0), (2, 10.0), (3, 2.0)] {
            let n = 1500;
            let h = 1.0 / n as f64;
            let k = m as f64 * PI;
            let ys: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
            let mut q = 0.0;
            for &y in &ys {
                for &z in &ys {
                    q += 2.0 * (k * y).sin() * (k * z).sin() * rho / (2.0 * PI).sqrt()
                        * (-0.5 * rho * rho * (y - z) * (y - z)).exp();
                }
            }
            q *= h * h;
            let got = eigenvalue_formula(m, rho).unwrap();
            assert!((got - q).abs() < 2e-5, "m={m} rho={rho}: {got} vs {q}");
        }
    }

    #[test]
    fn eigenvalue_formula_against_simpson_and_asymptote() {
        for (m, rho) in [(1, 0.5), (1, 3.0), (2, 10.0), (5, 1.0), (1, 50.0)] {
            let gl = eigenvalue_formula(m, rho).unwrap();
            let simpson = simpson_eigenvalue(m, rho);
            assert!(
                (gl - simpson).abs() < 1e-10,
                "m={m} rho={rho}: {gl} vs {simpson}"
            );
        }
        let l1 = eigenvalue_formula(1, 50.0_f64).unwrap();
        assert!((l1 - (-PI * PI / 5000.0).exp()).abs() < 1e-3);
        assert!((l1 - 0.998_028).abs() < 1e-3);
        let ls: Vec<f64> = (1..6)
            .map(|m| eigenvalue_formula(m, 20.0).unwrap())
            .collect();
        assert!(ls.windows(2).all(|w| w[1] < w[0]));
        assert!(eigenvalue_formula(1, 1e-4_f64).unwrap() < 1e-4);
        assert!(eigenvalue_formula(0, 1.0_f64).is_err());
    }

    #[test]
    fn mode_sums() {
        let b = mode_sum_survival(10.0_f64, 10_000, ModeStart::Boundary, 1e-16).unwrap();
        assert!((b - 0.5).abs() < 1e-12);
        let early = mode_sum_survival(10.0_f64, 10, ModeStart::Boundary, 1e-16).unwrap();
        assert!(early > 0.5 && early < 1.5);
        // alternating bulk sum: compare with a long brute-force partial sum
        let rho = 30.0_f64;
        let n = 200;
        let brute: f64 = (0..2000)
            .map(|m| {
                let k = (m + 1) as f64;
                let s = if m % 2 == 0 { 1.0 } else { -1.0 };
                s * (-2.0 * PI * PI * k * k * n as f64 / (rho * rho)).exp() / (2.0 * k)
            })
            .sum::<f64>()
            * 2.0
            / PI;
        let got = mode_sum_survival(rho, n, ModeStart::Bulk, 1e-15).unwrap();
        assert!((got - brute).abs() < 1e-14);
        assert!(mode_sum_survival(rho, 0, ModeStart::Bulk, 1e-15).is_err());
    }

    #[test]
    fn effective_exponent_of_power_laws() {
        let quarter = |r: f64| 0.25 * r * r;
        for w in [(1.0, 10.0), (10.0, 30.0), (30.0, 100.0)] {
            assert!((effective_exponent_of(quarter, w).unwrap() - 2.0).abs() < 1e-9);
        }
        let a = effective_exponent_of(bulk_law::<f64>, (10.0, 30.0)).unwrap();
        let b = effective_exponent_of(bulk_law::<f64>, (30.0, 100.0)).unwrap();
        assert!((a - 1.87).abs() < 0.02, "{a}");
        assert!((b - 1.96).abs() < 0.02, "{b}");
    }

    #[test]
    fn effective_exponent_errors() {
        let pts: Vec<(f64, f64)> = (1..=4).map(|r| (r as f64, r as f64)).collect();
        assert!(matches!(
            effective_exponent(&pts, (0.0, 10.0)),
            Err(StroboError::InsufficientData { needed: 5, got: 4 })
        ));
        let bad: Vec<(f64, f64)> = (1..=6).map(|r| (r as f64, 1.0 - r as f64)).collect();
        assert!(effective_exponent(&bad, (0.0, 10.0)).is_err());
    }

    proptest! {
        #[test]
        fn exact_power_law_exponent(k in -3.0f64..4.0, amp in 0.01f64..100.0, lo in 1.0f64..50.0) {
            let got = effective_exponent_of(|r: f64| amp * r.powf(k), (lo, 3.0 * lo)).unwrap();
            prop_assert!((got - k).abs() < 1e-9);
        }
    }
}
