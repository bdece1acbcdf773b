use strobofp::operator::build_operator;
use strobofp::params::ProblemSpec;
use strobofp::resolvent::mean_frames;

fn m_at(rho: f64, y0: f64, n: usize, eta: f64) -> f64 {
    let spec = ProblemSpec::new(rho, y0)
        .unwrap()
        .with_n_grid(n)
        .unwrap()
        .with_cutoff(eta)
        .unwrap();
    mean_frames(&build_operator(&spec).unwrap(), y0).unwrap().m
}

#[test]
fn midpoint_rule_converges_at_second_order() {
    for y0 in [0.0, 0.5] {
        let m1 = m_at(20.0, y0, 360, 8.5);
        let m2 = m_at(20.0, y0, 720, 8.5);
        let m3 = m_at(20.0, y0, 1440, 8.5);
        let ratio = (m1 - m2) / (m2 - m3);
        assert!((ratio - 4.0).abs() < 0.2, "y0 = {y0}: ratio {ratio}");
        // Richardson-extrapolated value agrees with the default grid to 1e-3 relative
        let extrap = m3 + (m3 - m2) / 3.0;
        assert!(((m1 - extrap) / extrap).abs() < 1e-3);
    }
}

#[test]
fn widening_the_cutoff_changes_nothing_visible() {
    let a = m_at(20.0, 0.5, 360, 8.5);
    let b = m_at(20.0, 0.5, 360, 12.0);
    assert!((a - b).abs() < 1e-9, "{a} vs {b}");
}

#[test]
fn default_grid_tracks_resolution_rule() {
    let spec = ProblemSpec::new(20.0, 0.5).unwrap();
    assert_eq!(spec.n_grid, 360);
    assert!(spec.meets_resolution_rule());
}
