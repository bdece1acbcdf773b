//! Survival statistics of one-dimensional Brownian motion observed at
//! discrete frames ("kill-on-check"), computed from a Nyström discretization
//! of the one-step projector operator on the unit interval.

// `!(x > 0)` checks deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod banded;
pub mod error;
pub mod fit;
pub mod frames;
pub mod montecarlo;
pub mod operator;
pub mod params;
pub mod resolvent;
pub mod scalar;
pub mod sweep;

pub use error::{Result, StroboError};
pub use frames::FrameDistribution;
pub use scalar::Scalar;

/// Double-precision aliases for the generic types.
pub type Operator = operator::StroboOperator<f64>;
pub type Spec = params::ProblemSpec<f64>;
pub type Physical = params::PhysicalParams<f64>;
pub type Survival = resolvent::SurvivalSeries<f64>;
pub type Spectral = resolvent::SpectralPair<f64>;
pub type MeanExit = resolvent::MeanFrames<f64>;
