//! Figure data and gnuplot scripts.
//!
//! * `fig2`: `E[tau]` at the midpoint on log axes with windowed power-law fits
//! * `fig3`: boundary-start `M` with its fit and linear asymptote
//! * `fig4`: midpoint `M` with its fit and the leading `rho^2 / 4`

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use strobofp::asymptotics::{boundary_const, bulk_law, log_uniform, BOUNDARY_SLOPE};
use strobofp::fit::{fit_boundary, fit_bulk, fit_powerlaw};
use strobofp::sweep::mean_frames_sweep;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::table::{num, Table};

/// Windows of the effective-exponent fits.
pub const EXPONENT_WINDOWS: [(f64, f64); 2] = [(10.0, 30.0), (30.0, 100.0)];
const FIG2_RANGE: (f64, f64) = (5.0, 200.0);
const FIG2_POINTS: usize = 40;

fn write_file(
    dir: &Path,
    name: &str,
    f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> CliResult {
    let path = dir.join(name);
    let file = File::create(&path)
        .map_err(|e| CliError::Io(anyhow::anyhow!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Slope and prefactor of `log y` on `log rho` for the points inside `window`.
fn window_fit(data: &[(f64, f64)], window: (f64, f64)) -> CliResult<(f64, f64)> {
    let pad = 1e-9 * window.1;
    let pts: Vec<_> = data
        .iter()
        .copied()
        .filter(|&(r, _)| r >= window.0 - pad && r <= window.1 + pad)
        .collect();
    let f = fit_powerlaw(&pts)?;
    Ok((f.get("alpha").unwrap(), f.get("log_k").unwrap().exp()))
}

fn in_window(rho: f64, w: (f64, f64)) -> bool {
    let pad = 1e-9 * w.1;
    rho >= w.0 - pad && rho <= w.1 + pad
}

pub fn cmd_figures(config: &RunConfig, dir: &Path, log: &mut dyn Write) -> CliResult {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(anyhow::anyhow!("{}: {e}", dir.display())))?;
    let settings = config.settings();

    // fig2: log-uniform samples so that every window holds many points
    let mut rhos2 = log_uniform(FIG2_RANGE.0, FIG2_RANGE.1, FIG2_POINTS);
    for w in EXPONENT_WINDOWS {
        rhos2.extend([w.0, w.1]);
    }
    rhos2.sort_by(f64::total_cmp);
    rhos2.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * *b);
    let nys: Vec<(f64, f64)> = mean_frames_sweep(&rhos2, 0.5, &settings)?
        .into_iter()
        .map(|(r, m)| (r, m + 1.0))
        .collect();
    let law: Vec<(f64, f64)> = rhos2.iter().map(|&r| (r, bulk_law(r))).collect();
    let mut fits = Vec::new();
    for w in EXPONENT_WINDOWS {
        let (alpha_law, k_law) = window_fit(&law, w)?;
        let (alpha_nys, _) = window_fit(&nys, w)?;
        fits.push((w, alpha_law, k_law, alpha_nys));
    }
    let mut t2 = Table::new(
        "fig2",
        &[
            "rho",
            "mean_tau",
            "bulk_law",
            "quarter_rho2",
            "fit_10_30",
            "fit_30_100",
        ],
    );
    for &(w, a_law, _, a_nys) in &fits {
        t2.note(format!(
            "alpha_eff[{},{}] = {a_law:.4} (bulk law), {a_nys:.4} (resolvent)",
            w.0, w.1
        ));
    }
    for (&(r, tau), &(_, lw)) in nys.iter().zip(&law) {
        let mut row = vec![num(r), num(tau), num(lw), num(0.25 * r * r)];
        for &(w, a, k, _) in &fits {
            row.push(if in_window(r, w) {
                num(k * r.powf(a))
            } else {
                String::new()
            });
        }
        t2.push(row);
    }
    write_file(dir, "fig2.csv", |w| t2.write(w))?;
    write_file(dir, "fig2.gp", |w| {
        writeln!(w, "set datafile separator ','")?;
        writeln!(w, "set key autotitle columnhead top left")?;
        writeln!(w, "set terminal pngcairo size 800,600")?;
        writeln!(w, "set output 'fig2.png'")?;
        writeln!(w, "set logscale xy")?;
        writeln!(w, "set xlabel 'rho'")?;
        writeln!(w, "set ylabel 'E[tau]'")?;
        for (i, &(win, a, _, _)) in fits.iter().enumerate() {
            writeln!(
                w,
                "set label {} 'alpha_eff = {a:.2} on [{}, {}]' at graph 0.55, graph {:.2}",
                i + 1,
                win.0,
                win.1,
                0.2 - 0.07 * i as f64
            )?;
        }
        writeln!(
            w,
            "plot 'fig2.csv' using 1:2 with points pt 7 title 'resolvent, y0 = 1/2', \\"
        )?;
        writeln!(
            w,
            "     '' using 1:3 with lines lw 2 title 'rho^2/4 + b rho + C', \\"
        )?;
        writeln!(w, "     '' using 1:4 with lines dt 2 title 'rho^2/4', \\")?;
        writeln!(
            w,
            "     '' using 1:5 with lines lw 3 title 'power-law fit [10, 30]', \\"
        )?;
        writeln!(
            w,
            "     '' using 1:6 with lines lw 3 title 'power-law fit [30, 100]'"
        )
    })?;

    // fig3 and fig4 share the sweep
    let rhos = config.rhos()?;
    let boundary = mean_frames_sweep(&rhos, 0.0, &settings)?;
    let fb = fit_boundary(&boundary)?;
    let (a, b, c) = (
        fb.get("A").unwrap(),
        fb.get("B").unwrap(),
        fb.get("C").unwrap(),
    );
    let mut t3 = Table::new("fig3", &["rho", "M", "fit", "asymptote"]);
    t3.note(format!("fit: A={a} B={b} C={c}"));
    t3.note(format!(
        "asymptote: rho/sqrt(2) + {:.6} - 1",
        boundary_const()
    ));
    for &(r, m) in &boundary {
        t3.push(vec![
            num(r),
            num(m),
            num(a * r + b + c / r),
            num(BOUNDARY_SLOPE * r + boundary_const() - 1.0),
        ]);
    }
    write_file(dir, "fig3.csv", |w| t3.write(w))?;
    write_file(dir, "fig3.gp", |w| {
        writeln!(w, "set datafile separator ','")?;
        writeln!(w, "set key autotitle columnhead top left")?;
        writeln!(w, "set terminal pngcairo size 800,600")?;
        writeln!(w, "set output 'fig3.png'")?;
        writeln!(w, "set xlabel 'rho'")?;
        writeln!(w, "set ylabel 'M(rho; 0)'")?;
        writeln!(
            w,
            "plot 'fig3.csv' using 1:2 with points pt 7 title 'resolvent, y0 = 0', \\"
        )?;
        writeln!(
            w,
            "     '' using 1:3 with lines lw 2 title 'fit A rho + B + C/rho', \\"
        )?;
        writeln!(
            w,
            "     '' using 1:4 with lines dt 2 title 'rho/sqrt(2) + |zeta(1/2)|/sqrt(pi) - 1'"
        )
    })?;

    let bulk = mean_frames_sweep(&rhos, 0.5, &settings)?;
    let fu = fit_bulk(&bulk)?;
    let (qa, qb, qc) = (
        fu.get("a").unwrap(),
        fu.get("b").unwrap(),
        fu.get("c").unwrap(),
    );
    let mut t4 = Table::new("fig4", &["rho", "M", "fit", "quarter_rho2"]);
    t4.note(format!("fit: a={qa} b={qb} c={qc}"));
    for &(r, m) in &bulk {
        t4.push(vec![
            num(r),
            num(m),
            num(qa * r * r + qb * r + qc),
            num(0.25 * r * r),
        ]);
    }
    write_file(dir, "fig4.csv", |w| t4.write(w))?;
    write_file(dir, "fig4.gp", |w| {
        writeln!(w, "set datafile separator ','")?;
        writeln!(w, "set key autotitle columnhead top left")?;
        writeln!(w, "set terminal pngcairo size 800,600")?;
        writeln!(w, "set output 'fig4.png'")?;
        writeln!(w, "set xlabel 'rho'")?;
        writeln!(w, "set ylabel 'M(rho; 1/2)'")?;
        writeln!(
            w,
            "plot 'fig4.csv' using 1:2 with points pt 7 title 'resolvent, y0 = 1/2', \\"
        )?;
        writeln!(
            w,
            "     '' using 1:3 with lines lw 2 title 'fit a rho^2 + b rho + c', \\"
        )?;
        writeln!(w, "     '' using 1:4 with lines dt 2 title 'rho^2/4'")
    })?;

    writeln!(log, "wrote fig2/fig3/fig4 (.csv, .gp) to {}", dir.display())?;
    for &(w, a_law, _, a_nys) in &fits {
        writeln!(
            log,
            "  alpha_eff[{}, {}] = {a_law:.4} (law), {a_nys:.4} (resolvent)",
            w.0, w.1
        )?;
    }
    writeln!(
        log,
        "  boundary fit A = {a:.6}, B = {b:.6}; bulk fit a = {qa:.6}, b = {qb:.5}, c = {qc:.5}"
    )?;
    Ok(())
}
