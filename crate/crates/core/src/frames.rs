//! Laws of the inter-frame interval, in units of the mean interval.

use std::fmt;
use std::num::NonZeroUsize;
use std::str::FromStr;

use gauss_quad::GaussLegendre;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result, StroboError};

/// Tail mass cut from each end of the exponential law before quadrature.
pub const EXPONENTIAL_TAIL: f64 = 1e-8;
/// Smallest Gauss-Legendre order accepted for continuous laws.
pub const MIN_QUADRATURE_ORDER: usize = 16;
/// Order used when callers have no preference.
pub const DEFAULT_QUADRATURE_ORDER: usize = 64;

/// Law `mu` of the i.i.d. frame intervals.
///
/// Two-point parameters are kept as given and rescaled on use so that the
/// mean interval is exactly one; the confinement ratio always refers to
/// the mean interval.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FrameDistribution {
    #[default]
    Deterministic,
    /// Interval `u1` with probability `p`, otherwise `u2`.
    TwoPoint { u1: f64, u2: f64, p: f64 },
    /// Uniform on `[1 - half_width, 1 + half_width]`.
    UniformJitter { half_width: f64 },
    /// Exponential with unit mean.
    Exponential,
}

impl FrameDistribution {
    pub fn two_point(u1: f64, u2: f64, p: f64) -> Result<Self> {
        if !(u1 > 0.0 && u2 > 0.0) || !u1.is_finite() || !u2.is_finite() {
            return Err(domain(format!(
                "two-point support must be strictly positive, got ({u1}, {u2})"
            )));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(domain(format!(
                "two-point weight must lie in [0, 1], got {p}"
            )));
        }
        Ok(Self::TwoPoint { u1, u2, p })
    }

    pub fn uniform_jitter(half_width: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&half_width) {
            return Err(domain(format!(
                "jitter half-width must lie in [0, 1), got {half_width}"
            )));
        }
        Ok(Self::UniformJitter { half_width })
    }

    /// Two-point support rescaled to unit mean.
    fn normalized_two_point(u1: f64, u2: f64, p: f64) -> (f64, f64) {
        let mean = p * u1 + (1.0 - p) * u2;
        (u1 / mean, u2 / mean)
    }

    /// Always one; the parametrisation fixes the mean interval.
    pub fn mean(&self) -> f64 {
        match *self {
            Self::TwoPoint { u1, u2, p } => {
                let (a, b) = Self::normalized_two_point(u1, u2, p);
                p * a + (1.0 - p) * b
            }
            _ => 1.0,
        }
    }

    /// `Var(U) / mean(U)^2`.
    pub fn variance(&self) -> f64 {
        match *self {
            Self::Deterministic => 0.0,
            Self::TwoPoint { u1, u2, p } => {
                let (a, b) = Self::normalized_two_point(u1, u2, p);
                p * (1.0 - p) * (a - b) * (a - b)
            }
            Self::UniformJitter { half_width } => half_width * half_width / 3.0,
            Self::Exponential => 1.0,
        }
    }

    /// Whether the law is a point mass at the mean interval.
    pub fn is_degenerate(&self) -> bool {
        match *self {
            Self::Deterministic => true,
            Self::TwoPoint { u1, u2, p } => u1 == u2 || p == 0.0 || p == 1.0,
            Self::UniformJitter { half_width } => half_width == 0.0,
            Self::Exponential => false,
        }
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self, Self::UniformJitter { .. } | Self::Exponential) && !self.is_degenerate()
    }

    /// Largest interval carried by the quadrature; sets the kernel band width.
    pub fn max_interval(&self) -> f64 {
        match *self {
            Self::Deterministic => 1.0,
            Self::TwoPoint { u1, u2, p } => {
                let (a, b) = Self::normalized_two_point(u1, u2, p);
                match (p > 0.0, p < 1.0) {
                    (true, true) => a.max(b),
                    (true, false) => a,
                    _ => b,
                }
            }
            Self::UniformJitter { half_width } => 1.0 + half_width,
            Self::Exponential => -EXPONENTIAL_TAIL.ln(),
        }
    }

    /// Mixture nodes `(v, weight)` with weights summing to one.
    ///
    /// Discrete laws are returned exactly, with coincident support points
    /// merged. Continuous laws use Gauss-Legendre of the given order: on the
    /// exact interval for uniform jitter, and in `s = sqrt(v)` over the
    /// `[1e-8, 1 - 1e-8]` quantile range for the exponential law, which
    /// removes the `v^{-1/2}` growth of the Gaussian peak at small `v`.
    pub fn mixture_nodes(&self, order: usize) -> Result<Vec<(f64, f64)>> {
        match *self {
            Self::Deterministic => Ok(vec![(1.0, 1.0)]),
            Self::TwoPoint { u1, u2, p } => {
                if self.is_degenerate() {
                    return Ok(vec![(1.0, 1.0)]);
                }
                let (a, b) = Self::normalized_two_point(u1, u2, p);
                Ok(vec![(a, p), (b, 1.0 - p)])
            }
            Self::UniformJitter { half_width } => {
                if half_width == 0.0 {
                    return Ok(vec![(1.0, 1.0)]);
                }
                let rule = gauss_legendre(order)?;
                let (lo, hi) = (1.0 - half_width, 1.0 + half_width);
                let nodes = rule
                    .as_node_weight_pairs()
                    .iter()
                    .map(|&(x, w)| (0.5 * ((hi - lo) * x + hi + lo), 0.5 * w))
                    .collect();
                Ok(normalize_weights(nodes))
            }
            Self::Exponential => {
                let rule = gauss_legendre(order)?;
                let s_lo = (-(1.0 - EXPONENTIAL_TAIL).ln()).sqrt();
                let s_hi = (-EXPONENTIAL_TAIL.ln()).sqrt();
                let half = 0.5 * (s_hi - s_lo);
                let nodes = rule
                    .as_node_weight_pairs()
                    .iter()
                    .map(|&(x, w)| {
                        let s = half * x + 0.5 * (s_hi + s_lo);
                        (s * s, w * half * 2.0 * s * (-s * s).exp())
                    })
                    .collect();
                Ok(normalize_weights(nodes))
            }
        }
    }

    /// Draw one interval.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Deterministic => 1.0,
            Self::TwoPoint { u1, u2, p } => {
                let (a, b) = Self::normalized_two_point(u1, u2, p);
                if rng.random::<f64>() < p {
                    a
                } else {
                    b
                }
            }
            Self::UniformJitter { half_width } => {
                1.0 + half_width * (2.0 * rng.random::<f64>() - 1.0)
            }
            Self::Exponential => Exp1.sample(rng),
        }
    }
}

fn gauss_legendre(order: usize) -> Result<GaussLegendre> {
    if order < MIN_QUADRATURE_ORDER {
        return Err(domain(format!(
            "quadrature order must be >= {MIN_QUADRATURE_ORDER} for continuous laws, got {order}"
        )));
    }
    let order = NonZeroUsize::new(order).expect("order checked above");
    Ok(GaussLegendre::new(order))
}

fn normalize_weights(mut nodes: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let total: f64 = nodes.iter().map(|&(_, w)| w).sum();
    for (_, w) in &mut nodes {
        *w /= total;
    }
    nodes
}

impl fmt::Display for FrameDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Deterministic => write!(f, "deterministic"),
            Self::TwoPoint { u1, u2, p } => write!(f, "twopoint:{u1},{u2},{p}"),
            Self::UniformJitter { half_width } => write!(f, "jitter:{half_width}"),
            Self::Exponential => write!(f, "exponential"),
        }
    }
}

impl FromStr for FrameDistribution {
    type Err = StroboError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, args) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        let parse = |a: &str| -> Result<f64> {
            a.trim()
                .parse::<f64>()
                .map_err(|e| domain(format!("bad number {a:?} in distribution {s:?}: {e}")))
        };
        match (kind, args) {
            ("deterministic", None) => Ok(Self::Deterministic),
            ("exponential", None) => Ok(Self::Exponential),
            ("jitter", Some(a)) => Self::uniform_jitter(parse(a)?),
            ("twopoint", Some(a)) => {
                let v = a.split(',').map(parse).collect::<Result<Vec<_>>>()?;
                match v.as_slice() {
                    &[u1, u2, p] => Self::two_point(u1, u2, p),
                    _ => Err(domain(format!("twopoint expects u1,u2,p, got {a:?}"))),
                }
            }
            _ => Err(domain(format!(
                "unknown distribution {s:?} (expected deterministic | twopoint:u1,u2,p | jitter:eps | exponential)"
            ))),
        }
    }
}

impl TryFrom<String> for FrameDistribution {
    type Error = StroboError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FrameDistribution> for String {
    fn from(d: FrameDistribution) -> String {
        d.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn variances_match_closed_forms() {
        assert_eq!(FrameDistribution::Deterministic.variance(), 0.0);
        let tp = FrameDistribution::two_point(0.5, 1.5, 0.5).unwrap();
        assert!((tp.variance() - 0.25).abs() < 1e-15);
        let j = FrameDistribution::uniform_jitter(0.5).unwrap();
        assert!((j.variance() - 0.25 / 3.0).abs() < 1e-15);
        assert_eq!(FrameDistribution::Exponential.variance(), 1.0);
    }

    #[test]
    fn two_point_is_rescaled_to_unit_mean() {
        let tp = FrameDistribution::two_point(1.0, 3.0, 0.5).unwrap();
        assert!((tp.mean() - 1.0).abs() < 1e-15);
        // (0.5, 1.5) after rescaling
        assert!((tp.variance() - 0.25).abs() < 1e-15);
        assert!((tp.max_interval() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_positive_support() {
        assert!(FrameDistribution::two_point(0.0, 1.0, 0.5).is_err());
        assert!(FrameDistribution::two_point(-1.0, 2.0, 0.5).is_err());
        assert!(FrameDistribution::two_point(1.0, 1.0, 1.5).is_err());
        assert!(FrameDistribution::uniform_jitter(1.0).is_err());
        assert!(FrameDistribution::uniform_jitter(-0.1).is_err());
    }

    #[test]
    fn degenerate_laws_collapse_to_a_point_mass() {
        for d in [
            FrameDistribution::Deterministic,
            FrameDistribution::two_point(1.0, 1.0, 0.3).unwrap(),
            FrameDistribution::two_point(2.0, 2.0, 0.3).unwrap(),
            FrameDistribution::uniform_jitter(0.0).unwrap(),
        ] {
            assert!(d.is_degenerate(), "{d}");
            assert_eq!(d.mixture_nodes(16).unwrap(), vec![(1.0, 1.0)]);
        }
    }

    #[test]
    fn quadrature_nodes_reproduce_moments() {
        for d in [
            FrameDistribution::uniform_jitter(0.5).unwrap(),
            FrameDistribution::Exponential,
            FrameDistribution::two_point(0.5, 1.5, 0.5).unwrap(),
        ] {
            let nodes = d.mixture_nodes(64).unwrap();
            let m0: f64 = nodes.iter().map(|n| n.1).sum();
            let m1: f64 = nodes.iter().map(|n| n.0 * n.1).sum();
            let m2: f64 = nodes.iter().map(|n| n.0 * n.0 * n.1).sum();
            assert!((m0 - 1.0).abs() < 1e-14, "{d}");
            assert!((m1 - 1.0).abs() < 1e-6, "{d}: mean {m1}");
            assert!((m2 - m1 * m1 - d.variance()).abs() < 1e-5, "{d}: var");
        }
    }

    #[test]
    fn low_quadrature_order_is_rejected_for_continuous_laws() {
        assert!(FrameDistribution::Exponential.mixture_nodes(8).is_err());
        assert!(FrameDistribution::uniform_jitter(0.2)
            .unwrap()
            .mixture_nodes(15)
            .is_err());
        assert!(FrameDistribution::Deterministic.mixture_nodes(1).is_ok());
    }

    #[test]
    fn sampled_moments_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 200_000;
        for d in [
            FrameDistribution::uniform_jitter(0.5).unwrap(),
            FrameDistribution::Exponential,
            FrameDistribution::two_point(0.5, 1.5, 0.5).unwrap(),
        ] {
            let xs: Vec<f64> = (0..n).map(|_| d.sample(&mut rng)).collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
            let se = (d.variance() / n as f64).sqrt();
            assert!((mean - 1.0).abs() < 5.0 * se, "{d}: mean {mean}");
            assert!(
                (var - d.variance()).abs() < 0.02 * d.variance().max(0.1),
                "{d}: var {var}"
            );
        }
    }

    #[test]
    fn parses_cli_forms() {
        assert_eq!(
            "deterministic".parse::<FrameDistribution>().unwrap(),
            FrameDistribution::Deterministic
        );
        assert_eq!(
            "twopoint:0.5,1.5,0.5".parse::<FrameDistribution>().unwrap(),
            FrameDistribution::TwoPoint {
                u1: 0.5,
                u2: 1.5,
                p: 0.5
            }
        );
        assert_eq!(
            "jitter:0.25".parse::<FrameDistribution>().unwrap(),
            FrameDistribution::UniformJitter { half_width: 0.25 }
        );
        assert!("jitter".parse::<FrameDistribution>().is_err());
        assert!("twopoint:1,2".parse::<FrameDistribution>().is_err());
        assert!("gamma:2".parse::<FrameDistribution>().is_err());
    }

    proptest! {
        #[test]
        fn display_parse_round_trip(u1 in 0.01f64..10.0, u2 in 0.01f64..10.0, p in 0.0f64..=1.0, eps in 0.0f64..0.999) {
            for d in [
                FrameDistribution::two_point(u1, u2, p).unwrap(),
                FrameDistribution::uniform_jitter(eps).unwrap(),
                FrameDistribution::Exponential,
                FrameDistribution::Deterministic,
            ] {
                let back: FrameDistribution = d.to_string().parse().unwrap();
                prop_assert_eq!(back, d);
                let json = serde_json::to_string(&d).unwrap();
                prop_assert_eq!(serde_json::from_str::<FrameDistribution>(&json).unwrap(), d);
            }
        }
    }
}
