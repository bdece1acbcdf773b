//! Acceptance criteria. Each test writes one `PASS` / `FAIL` line to stdout
//! (uncaptured) and then asserts.

use std::f64::consts::PI;
use std::io::Write;

use strobofp::asymptotics::{
    boundary_const, bulk_law, effective_exponent_of, BOUNDARY_FIT_A, BOUNDARY_FIT_B, BULK_B,
    BULK_C_M, BULK_C_TAU, GAP_BETA,
};
use strobofp::banded::BandedLu;
use strobofp::fit::{fit_boundary, fit_bulk, fit_gap, FitResult};
use strobofp::frames::FrameDistribution;
use strobofp::montecarlo::simulate_tau;
use strobofp::operator::build_operator;
use strobofp::params::ProblemSpec;
use strobofp::resolvent::{mean_frames, mean_frames_with, neumann_partial_sum, survival_sequence};
use strobofp::sweep::{gap_sweep, mean_frames_sweep, rho_range, SweepSettings};

const BOUNDARY_A_TOL: f64 = 1e-3;
const BOUNDARY_B_TOL: f64 = 2e-3;
const BOUNDARY_CONST_TOL: f64 = 2e-3;
const BULK_A_TOL: f64 = 1e-3;
const BULK_B_TOL: f64 = 5e-3;
const BULK_C_TOL: f64 = 2e-2;
const GAP_INTERCEPT_TOL: f64 = 1e-3;
const GAP_BETA_TOL: f64 = 0.03;
const EXPONENT_TOL: f64 = 0.02;
const MC_SIGMAS: f64 = 3.0;
const MC_TRIALS: u64 = 100_000;
const SLOPE_UNIVERSALITY_TOL: f64 = 1e-3;
const DIRICHLET_BAND: (f64, f64) = (0.98, 1.05);

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(out, "[{tag}] criterion {id:>2}: {name}: {detail}").unwrap();
    out.flush().unwrap();
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn standard_sweep() -> Vec<f64> {
    rho_range(20.0, 200.0, 10.0).unwrap()
}

fn boundary_fit(dist: FrameDistribution) -> FitResult {
    let settings = SweepSettings::default().with_dist(dist);
    let data = mean_frames_sweep(&standard_sweep(), 0.0, &settings).unwrap();
    fit_boundary(&data).unwrap()
}

#[test]
fn criterion_01_boundary_fit_constants() {
    let f = boundary_fit(FrameDistribution::Deterministic);
    let (a, b) = (f.get("A").unwrap(), f.get("B").unwrap());
    let pass =
        within(a, BOUNDARY_FIT_A, BOUNDARY_A_TOL) && within(b, BOUNDARY_FIT_B, BOUNDARY_B_TOL);
    report(
        1,
        "boundary fit A rho + B + C/rho",
        pass,
        &format!(
            "A = {a:.6} (target {BOUNDARY_FIT_A} +- {BOUNDARY_A_TOL}), B = {b:.6} (target {BOUNDARY_FIT_B} +- {BOUNDARY_B_TOL}), C = {:.4}",
            f.get("C").unwrap()
        ),
    );
}

#[test]
fn criterion_02_boundary_constant_identity() {
    let f = boundary_fit(FrameDistribution::Deterministic);
    let b1 = f.get("B").unwrap() + 1.0;
    let target = boundary_const();
    report(
        2,
        "B + 1 = |zeta(1/2)|/sqrt(pi)",
        within(b1, target, BOUNDARY_CONST_TOL),
        &format!("B + 1 = {b1:.6}, target {target:.6} +- {BOUNDARY_CONST_TOL}"),
    );
}

#[test]
fn criterion_03_bulk_fit_constants() {
    let data = mean_frames_sweep(&standard_sweep(), 0.5, &SweepSettings::default()).unwrap();
    let f = fit_bulk(&data).unwrap();
    let (a, b, c, cc) = (
        f.get("a").unwrap(),
        f.get("b").unwrap(),
        f.get("c").unwrap(),
        f.get("C").unwrap(),
    );
    let pass = within(a, 0.25, BULK_A_TOL)
        && within(b, BULK_B, BULK_B_TOL)
        && within(c, BULK_C_M, BULK_C_TOL)
        && within(cc, BULK_C_TAU, BULK_C_TOL);
    report(
        3,
        "bulk fit a rho^2 + b rho + c",
        pass,
        &format!("a = {a:.6}, b = {b:.5} (target {BULK_B}), c = {c:.5} (target {BULK_C_M}), C = {cc:.5} (target {BULK_C_TAU})"),
    );
}

#[test]
fn criterion_04_spectral_gap_expansion() {
    let rhos = rho_range(20.0, 120.0, 10.0).unwrap();
    let data = gap_sweep(&rhos, &SweepSettings::default()).unwrap();
    let f = fit_gap(&data).unwrap();
    let (g0, beta) = (f.get("g0").unwrap(), f.get("beta").unwrap());
    let target = PI * PI / 2.0;
    let pass = within(g0, target, GAP_INTERCEPT_TOL) && within(beta, GAP_BETA, GAP_BETA_TOL);
    report(
        4,
        "gap rho^2 = pi^2/2 + beta/rho",
        pass,
        &format!(
            "intercept = {g0:.6} (target {target:.6} +- {GAP_INTERCEPT_TOL}), beta = {beta:.4} (target {GAP_BETA} +- {GAP_BETA_TOL})"
        ),
    );
}

#[test]
fn criterion_05_effective_exponents() {
    let lo = effective_exponent_of(bulk_law::<f64>, (10.0, 30.0)).unwrap();
    let hi = effective_exponent_of(bulk_law::<f64>, (30.0, 100.0)).unwrap();
    let pass = within(lo, 1.87, EXPONENT_TOL) && within(hi, 1.96, EXPONENT_TOL);
    report(
        5,
        "effective exponents",
        pass,
        &format!(
            "[10,30]: {lo:.4} (target 1.87), [30,100]: {hi:.4} (target 1.96), tol {EXPONENT_TOL}"
        ),
    );
}

#[test]
fn criterion_06_monte_carlo_cross_validation() {
    let mut lines = Vec::new();
    let mut pass = true;
    let mut seed = 2024;
    for rho in [5.0, 10.0, 20.0] {
        for y0 in [0.1, 0.5] {
            seed += 1;
            let op = build_operator(&ProblemSpec::new(rho, y0).unwrap()).unwrap();
            let exact = mean_frames(&op, y0).unwrap().mean_tau;
            let mc =
                simulate_tau(rho, y0, MC_TRIALS, seed, &FrameDistribution::Deterministic).unwrap();
            let z = mc.z_score(exact);
            pass &= z.abs() < MC_SIGMAS && mc.overflow == 0;
            lines.push(format!("({rho},{y0}) z={z:+.2}"));
        }
    }
    report(6, "MC vs resolvent, 6 cells", pass, &lines.join(" "));
}

#[test]
fn criterion_07_self_averaging() {
    let rho = 10.0;
    let y0 = 0.5;
    let mut lines = Vec::new();
    let mut pass = true;
    let laws = [
        FrameDistribution::uniform_jitter(0.5).unwrap(),
        FrameDistribution::Exponential,
        FrameDistribution::two_point(0.5, 1.5, 0.5).unwrap(),
    ];
    for (k, mu) in laws.iter().enumerate() {
        let r = strobofp::montecarlo::self_averaging_check(rho, y0, mu, MC_TRIALS, 700 + k as u64)
            .unwrap();
        pass &= r.z_score.abs() < MC_SIGMAS;
        lines.push(format!(
            "{mu}: mc {:.3} vs K_mu {:.3} (z={:+.2})",
            r.mc.mean_tau, r.resolvent_mean_tau, r.z_score
        ));
    }
    report(7, "self-averaging at rho = 10", pass, &lines.join("; "));
}

#[test]
fn criterion_08_slope_universality_and_ordering() {
    let det = boundary_fit(FrameDistribution::Deterministic);
    let (a0, b0) = (det.get("A").unwrap(), det.get("B").unwrap());
    let mut lines = vec![format!("deterministic A={a0:.6} B={b0:.5}")];
    let mut pass = true;
    for mu in [
        FrameDistribution::uniform_jitter(0.5).unwrap(),
        FrameDistribution::Exponential,
        FrameDistribution::two_point(0.5, 1.5, 0.5).unwrap(),
    ] {
        let f = boundary_fit(mu);
        let (a, b) = (f.get("A").unwrap(), f.get("B").unwrap());
        pass &= within(a, a0, SLOPE_UNIVERSALITY_TOL) && b > b0;
        lines.push(format!("{mu} A={a:.6} B={b:.5}"));
    }
    report(
        8,
        "slope universality and constant ordering",
        pass,
        &lines.join("; "),
    );
}

#[test]
fn criterion_09_dirichlet_limit() {
    let rho: f64 = 200.0;
    let mut lines = Vec::new();
    let mut pass = true;
    for y0 in [0.25, 0.5, 0.75] {
        let op = build_operator(&ProblemSpec::new(rho, y0).unwrap()).unwrap();
        let m = mean_frames(&op, y0).unwrap().m;
        let ratio = m / (rho * rho * y0 * (1.0 - y0));
        pass &= ratio >= DIRICHLET_BAND.0 && ratio <= DIRICHLET_BAND.1;
        lines.push(format!("y0={y0}: {ratio:.5}"));
    }
    report(
        9,
        "M / (rho^2 y0 (1 - y0)) at rho = 200",
        pass,
        &format!("{} (band {:?})", lines.join(", "), DIRICHLET_BAND),
    );
}

#[test]
fn criterion_10_property_suites() {
    let mut failures = Vec::new();

    // sub-stochastic rows, monotone survival, mirror symmetry, Neumann = resolvent
    for rho in [0.5, 3.0, 10.0, 40.0] {
        let op = build_operator(&ProblemSpec::new(rho, 0.3).unwrap()).unwrap();
        let worst = (0..op.n()).map(|i| op.row_sum(i)).fold(0.0, f64::max);
        if worst > 1.0 + 4.0 * f64::EPSILON {
            failures.push(format!("row sum {worst} at rho {rho}"));
        }
        let s = survival_sequence(&op, 0.3, 200).unwrap();
        if s.values.windows(2).any(|w| w[1] > w[0]) || s.values[0] != 1.0 {
            failures.push(format!("survival not monotone at rho {rho}"));
        }
        let lu = BandedLu::identity_minus(&op).unwrap();
        let a = mean_frames_with(&op, &lu, 0.3).unwrap().m;
        let b = mean_frames_with(&op, &lu, 0.7).unwrap().m;
        if ((a - b) / a).abs() > 1e-12 {
            failures.push(format!("mirror asymmetry {a} vs {b} at rho {rho}"));
        }
        if rho <= 10.0 {
            let partial = neumann_partial_sum(&op, 0.3, 20_000).unwrap();
            if ((partial - a) / a).abs() > 1e-9 {
                failures.push(format!("Neumann {partial} vs resolvent {a} at rho {rho}"));
            }
        }
    }

    // exact-model recovery in every fitter
    let rhos = standard_sweep();
    let fb = fit_boundary(
        &rhos
            .iter()
            .map(|&r| (r, 0.7 * r - 0.2 + 0.3 / r))
            .collect::<Vec<_>>(),
    )
    .unwrap();
    let fu = fit_bulk(
        &rhos
            .iter()
            .map(|&r| (r, 0.25 * r * r + 0.58 * r - 0.43))
            .collect::<Vec<_>>(),
    )
    .unwrap();
    let fg = fit_gap(
        &rhos
            .iter()
            .map(|&r| (r, PI * PI / (2.0 * r * r) + 2.332 / r.powi(3)))
            .collect::<Vec<_>>(),
    )
    .unwrap();
    for f in [&fb, &fu, &fg] {
        if f.rms_residual >= 1e-9 {
            failures.push(format!("{:?} fit residual {}", f.model, f.rms_residual));
        }
    }
    if !(within(fb.get("C").unwrap(), 0.3, 1e-10)
        && within(fu.get("c").unwrap(), -0.43, 1e-10)
        && within(fg.get("beta").unwrap(), 2.332, 1e-9))
    {
        failures.push("fitter failed exact recovery".into());
    }

    // MC bit-reproducibility across thread counts
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                simulate_tau(7.0, 0.4, 20_000, 1234, &FrameDistribution::Exponential).unwrap()
            })
    };
    if run(1) != run(6) {
        failures.push("MC result depends on thread count".into());
    }

    let detail = if failures.is_empty() {
        "sub-stochasticity, monotone survival, mirror symmetry, Neumann/resolvent, fitter recovery, MC reproducibility".to_string()
    } else {
        failures.join("; ")
    };
    report(10, "property suites", failures.is_empty(), &detail);
}
