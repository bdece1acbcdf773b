//! Trajectory sampling of the exit frame `tau`, independent of the operator pipeline.
//!
//! Each trial draws from its own ChaCha8 stream, keyed by `(seed, trial index)`,
//! and aggregation uses integer sums only, so results do not depend on how
//! trials are spread over threads.

use std::io::{self, BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::frames::{FrameDistribution, DEFAULT_QUADRATURE_ORDER};
use crate::operator::build_averaged_operator;
use crate::params::ProblemSpec;
use crate::resolvent::mean_frames;

/// Header line of the histogram CSV.
pub const HISTOGRAM_SCHEMA: &str = "# strobofp histogram v1";

/// Summary of a batch of simulated exits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCResult {
    pub rho: f64,
    pub y0: f64,
    pub dist: FrameDistribution,
    /// Mean of `tau` over trials that exited before the cap.
    pub mean_tau: f64,
    /// Sample standard deviation over `sqrt(completed)`.
    pub std_error: f64,
    pub n_trials: u64,
    pub seed: u64,
    /// `histogram[k]` counts trials with `tau = k + 1`.
    pub histogram: Vec<u64>,
    /// Trials still inside after `n_cap` frames; excluded from the mean.
    pub overflow: u64,
    pub n_cap: u64,
}

impl MCResult {
    pub fn completed(&self) -> u64 {
        self.n_trials - self.overflow
    }

    pub fn overflowed(&self) -> bool {
        self.overflow > 0
    }

    pub fn count(&self, tau: u64) -> u64 {
        if tau == 0 {
            return 0;
        }
        self.histogram.get(tau as usize - 1).copied().unwrap_or(0)
    }

    /// `(mc_mean - reference) / std_error`
    pub fn z_score(&self, reference_mean_tau: f64) -> f64 {
        (self.mean_tau - reference_mean_tau) / self.std_error
    }

    /// CSV with columns `tau,count`, one row per `tau` up to the largest
    /// observed, then an `overflow` row.
    pub fn write_histogram_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{HISTOGRAM_SCHEMA}")?;
        writeln!(out, "tau,count")?;
        for (k, c) in self.histogram.iter().enumerate() {
            writeln!(out, "{},{}", k + 1, c)?;
        }
        writeln!(out, "overflow,{}", self.overflow)
    }
}

/// Parse the output of [`MCResult::write_histogram_csv`] into `(counts, overflow)`.
pub fn read_histogram_csv<R: BufRead>(input: R) -> Result<(Vec<u64>, u64)> {
    let mut counts = Vec::new();
    let mut overflow = None;
    for (lineno, line) in input.lines().enumerate() {
        let line = line.map_err(|e| domain(format!("read error: {e}")))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line == "tau,count" {
            continue;
        }
        let (key, val) = line
            .split_once(',')
            .ok_or_else(|| domain(format!("line {}: expected two columns", lineno + 1)))?;
        let val: u64 = val
            .parse()
            .map_err(|e| domain(format!("line {}: bad count: {e}", lineno + 1)))?;
        if key == "overflow" {
            overflow = Some(val);
            continue;
        }
        let tau: usize = key
            .parse()
            .map_err(|e| domain(format!("line {}: bad tau: {e}", lineno + 1)))?;
        if tau != counts.len() + 1 {
            return Err(domain(format!(
                "line {}: tau {tau} out of sequence",
                lineno + 1
            )));
        }
        counts.push(val);
    }
    let overflow = overflow.ok_or_else(|| domain("missing overflow row"))?;
    Ok((counts, overflow))
}

/// `1000 (1 + rho^2)` frames.
pub fn frame_cap(rho: f64) -> u64 {
    (1000.0 * (1.0 + rho * rho)).ceil() as u64
}

#[derive(Default)]
struct Tally {
    sum: u128,
    sum_sq: u128,
    histogram: Vec<u64>,
    overflow: u64,
}

impl Tally {
    fn record(mut self, tau: Option<u64>) -> Self {
        match tau {
            Some(t) => {
                self.sum += t as u128;
                self.sum_sq += (t as u128) * (t as u128);
                let k = t as usize - 1;
                if self.histogram.len() <= k {
                    self.histogram.resize(k + 1, 0);
                }
                self.histogram[k] += 1;
            }
            None => self.overflow += 1,
        }
        self
    }

    fn merge(mut self, other: Self) -> Self {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.overflow += other.overflow;
        if self.histogram.len() < other.histogram.len() {
            self.histogram.resize(other.histogram.len(), 0);
        }
        for (a, b) in self.histogram.iter_mut().zip(&other.histogram) {
            *a += b;
        }
        self
    }
}

/// Random number stream for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Exit frame of one trajectory, `None` past `cap`.
fn run_trial(
    rho: f64,
    y0: f64,
    mu: &FrameDistribution,
    cap: u64,
    rng: &mut ChaCha8Rng,
) -> Option<u64> {
    let inv_rho = 1.0 / rho;
    let mut x = y0;
    for n in 1..=cap {
        let v = mu.sample(rng);
        let xi: f64 = StandardNormal.sample(rng);
        x += v.sqrt() * xi * inv_rho;
        if !(x > 0.0 && x < 1.0) {
            return Some(n);
        }
    }
    None
}

/// Simulate `n_trials` exits on the current rayon pool.
///
/// Step rule: `x <- x + sqrt(v) xi / rho` with `xi ~ N(0, 1)` and `v ~ mu`;
/// `tau` is the first frame with `x` outside `(0, 1)`.
pub fn simulate_tau(
    rho: f64,
    y0: f64,
    n_trials: u64,
    seed: u64,
    mu: &FrameDistribution,
) -> Result<MCResult> {
    if n_trials < 1 {
        return Err(domain("n_trials must be >= 1"));
    }
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(domain(format!("rho must be > 0, got {rho}")));
    }
    if !(0.0..=1.0).contains(&y0) {
        return Err(domain(format!("y0 must lie in [0, 1], got {y0}")));
    }
    let cap = frame_cap(rho);
    let tally = (0..n_trials)
        .into_par_iter()
        .fold(Tally::default, |acc, t| {
            let mut rng = trial_rng(seed, t);
            acc.record(run_trial(rho, y0, mu, cap, &mut rng))
        })
        .reduce(Tally::default, Tally::merge);

    let completed = n_trials - tally.overflow;
    if tally.overflow > 0 {
        log::warn!(
            "{} of {n_trials} trials exceeded the {cap}-frame cap (rho = {rho}, y0 = {y0})",
            tally.overflow
        );
    }
    let (mean_tau, std_error) = if completed == 0 {
        (f64::NAN, f64::NAN)
    } else {
        let n = completed as f64;
        let mean = tally.sum as f64 / n;
        let var = if completed > 1 {
            // exact integer central moment: (n sum_sq - sum^2) / (n (n - 1))
            let num = (completed as u128) * tally.sum_sq - tally.sum * tally.sum;
            num as f64 / (n * (n - 1.0))
        } else {
            0.0
        };
        (mean, (var / n).sqrt())
    };
    Ok(MCResult {
        rho,
        y0,
        dist: *mu,
        mean_tau,
        std_error,
        n_trials,
        seed,
        histogram: tally.histogram,
        overflow: tally.overflow,
        n_cap: cap,
    })
}

/// Monte Carlo with random intervals against the resolvent of `K_mu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfAveragingReport {
    pub mc: MCResult,
    pub resolvent_m: f64,
    pub resolvent_mean_tau: f64,
    pub z_score: f64,
    /// `|z| < 3`
    pub pass: bool,
}

pub fn self_averaging_check(
    rho: f64,
    y0: f64,
    mu: &FrameDistribution,
    n_trials: u64,
    seed: u64,
) -> Result<SelfAveragingReport> {
    let spec = ProblemSpec::new(rho, y0)?;
    let op = build_averaged_operator(&spec, mu, DEFAULT_QUADRATURE_ORDER)?;
    let mf = mean_frames(&op, y0)?;
    let mc = simulate_tau(rho, y0, n_trials, seed, mu)?;
    let z_score = mc.z_score(mf.mean_tau);
    Ok(SelfAveragingReport {
        mc,
        resolvent_m: mf.m,
        resolvent_mean_tau: mf.mean_tau,
        z_score,
        pass: z_score.abs() < 3.0,
    })
}
