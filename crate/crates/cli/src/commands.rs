use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use strobofp::asymptotics::{
    boundary_const, eigenvalue_formula, gap_expansion, mode_sum_survival, ModeStart,
    BOUNDARY_FIT_A, BOUNDARY_FIT_B, BULK_B, BULK_C_M, BULK_C_TAU, GAP_BETA,
};
use strobofp::fit::{fit_boundary, fit_bulk, fit_gap, FitResult};
use strobofp::montecarlo::{simulate_tau, SelfAveragingReport};
use strobofp::resolvent::{mean_frames, spectral_pair, survival_sequence};
use strobofp::sweep::{exit_stats_sweep, gap_sweep, mean_frames_sweep};

use crate::config::{CommandKind, FitKind, OutputFormat, RunConfig};
use crate::error::{CliError, CliResult};
use crate::figures;
use crate::table::{num, Table};

/// Mode sums stop adding terms below this size.
const MODE_SUM_TOL: f64 = 1e-15;

pub fn run(config: &RunConfig, log: &mut dyn Write) -> CliResult {
    match config.command {
        CommandKind::Meantau => with_output(config, |out| cmd_meantau(config, out)),
        CommandKind::Survival => with_output(config, |out| cmd_survival(config, out)),
        CommandKind::Spectrum => with_output(config, |out| cmd_spectrum(config, out)),
        CommandKind::Fit => with_output(config, |out| cmd_fit(config, out, log)),
        CommandKind::Mc => with_output(config, |out| cmd_mc(config, out, log)),
        CommandKind::Figures => {
            let dir = config.out.as_deref().unwrap_or(Path::new("figures"));
            figures::cmd_figures(config, dir, log)
        }
    }
}

fn with_output(config: &RunConfig, f: impl FnOnce(&mut dyn Write) -> CliResult) -> CliResult {
    match &config.out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::Io(anyhow::anyhow!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> CliResult {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn check_y0(y0: f64) -> CliResult {
    if !(0.0..=1.0).contains(&y0) {
        return Err(CliError::usage(format!(
            "--y0 must lie in [0, 1], got {y0}"
        )));
    }
    Ok(())
}

fn settings_note(config: &RunConfig) -> String {
    let grid = config
        .n_grid
        .map_or_else(|| "auto".to_string(), |n| n.to_string());
    format!(
        "y0={} eta={} n_grid={grid} dist={}",
        config.y0, config.eta, config.dist
    )
}

pub fn cmd_meantau(config: &RunConfig, out: &mut dyn Write) -> CliResult {
    check_y0(config.y0)?;
    let rhos = config.rhos()?;
    let mut rows = exit_stats_sweep(&rhos, config.y0, &config.settings())?;
    rows.sort_by(|a, b| a.rho.total_cmp(&b.rho));
    match config.format {
        OutputFormat::Json => write_json(out, &rows),
        OutputFormat::Csv => {
            let mut t = Table::new("meantau", &["rho", "y0", "M", "mean_tau", "lambda0", "gap"]);
            t.note(settings_note(config));
            for r in &rows {
                t.push(vec![
                    num(r.rho),
                    num(r.y0),
                    num(r.m),
                    num(r.mean_tau),
                    num(r.lambda0),
                    num(r.gap),
                ]);
            }
            Ok(t.write(out)?)
        }
    }
}

#[derive(Debug, Serialize)]
struct SurvivalRow {
    n: usize,
    s_n: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    mode_sum: Option<f64>,
}

fn mode_start(y0: f64) -> CliResult<ModeStart> {
    if y0 == 0.0 || y0 == 1.0 {
        Ok(ModeStart::Boundary)
    } else if y0 == 0.5 {
        Ok(ModeStart::Bulk)
    } else {
        Err(CliError::usage("--modesum needs --y0 0, 0.5 or 1"))
    }
}

pub fn cmd_survival(config: &RunConfig, out: &mut dyn Write) -> CliResult {
    check_y0(config.y0)?;
    let rho = config.single_rho()?;
    let start = if config.modesum {
        Some(mode_start(config.y0)?)
    } else {
        None
    };
    let op = config.settings().operator(rho, config.y0)?;
    let series = survival_sequence(&op, config.y0, config.n_max)?;
    let mut rows = Vec::with_capacity(series.values.len());
    for (n, &s) in series.values.iter().enumerate() {
        let mode_sum = match start {
            Some(st) if n >= 1 => Some(mode_sum_survival(rho, n, st, MODE_SUM_TOL)?),
            _ => None,
        };
        rows.push(SurvivalRow {
            n,
            s_n: s,
            mode_sum,
        });
    }
    match config.format {
        OutputFormat::Json => write_json(out, &rows),
        OutputFormat::Csv => {
            let cols: &[&str] = if start.is_some() {
                &["n", "S_n", "mode_sum"]
            } else {
                &["n", "S_n"]
            };
            let mut t = Table::new("survival", cols);
            t.note(format!("rho={rho} {}", settings_note(config)));
            for r in &rows {
                let mut row = vec![r.n.to_string(), num(r.s_n)];
                if start.is_some() {
                    row.push(r.mode_sum.map(num).unwrap_or_default());
                }
                t.push(row);
            }
            Ok(t.write(out)?)
        }
    }
}

#[derive(Debug, Serialize)]
struct SpectrumRow {
    rho: f64,
    lambda0: f64,
    gap: f64,
    gap_expansion: f64,
    a0_est: f64,
    lambda1_formula: f64,
    iterations: usize,
}

pub fn cmd_spectrum(config: &RunConfig, out: &mut dyn Write) -> CliResult {
    use rayon::prelude::*;
    check_y0(config.y0)?;
    let rhos = config.rhos()?;
    let settings = config.settings();
    let mut rows = rhos
        .par_iter()
        .map(|&rho| -> CliResult<SpectrumRow> {
            let op = settings.operator(rho, config.y0)?;
            let sp = spectral_pair(&op, config.y0, settings.spectral_tol)?;
            Ok(SpectrumRow {
                rho,
                lambda0: sp.lambda0,
                gap: sp.gap,
                gap_expansion: gap_expansion(rho),
                a0_est: sp.a0_est,
                lambda1_formula: eigenvalue_formula(1, rho)?,
                iterations: sp.iterations,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    rows.sort_by(|a, b| a.rho.total_cmp(&b.rho));
    match config.format {
        OutputFormat::Json => write_json(out, &rows),
        OutputFormat::Csv => {
            let mut t = Table::new(
                "spectrum",
                &[
                    "rho",
                    "lambda0",
                    "gap",
                    "gap_expansion",
                    "a0_est",
                    "lambda1_formula",
                    "iterations",
                ],
            );
            t.note(settings_note(config));
            for r in &rows {
                t.push(vec![
                    num(r.rho),
                    num(r.lambda0),
                    num(r.gap),
                    num(r.gap_expansion),
                    num(r.a0_est),
                    num(r.lambda1_formula),
                    r.iterations.to_string(),
                ]);
            }
            Ok(t.write(out)?)
        }
    }
}

/// Run the sweep and regression selected by `config.model`.
pub fn run_fit(config: &RunConfig) -> CliResult<FitResult> {
    let model = config
        .model
        .ok_or_else(|| CliError::usage("--model is required"))?;
    let rhos = config.rhos()?;
    let settings = config.settings();
    let fit = match model {
        FitKind::Boundary => fit_boundary(&mean_frames_sweep(&rhos, 0.0, &settings)?)?,
        FitKind::Bulk => fit_bulk(&mean_frames_sweep(&rhos, 0.5, &settings)?)?,
        FitKind::Gap => fit_gap(&gap_sweep(&rhos, &settings)?)?,
    };
    Ok(fit)
}

fn compare_line(log: &mut dyn Write, name: &str, value: f64, reference: f64) -> io::Result<()> {
    writeln!(
        log,
        "  {name:<8} {value:>12.6}   reference {reference:>10.6}   deviation {:+.2e}",
        value - reference
    )
}

/// Human-readable comparison with the reference constants.
pub fn fit_summary(fit: &FitResult, log: &mut dyn Write) -> io::Result<()> {
    writeln!(
        log,
        "{:?} fit over rho in [{}, {}], {} points, rms residual {:.3e}",
        fit.model, fit.window.0, fit.window.1, fit.n_points, fit.rms_residual
    )?;
    let g = |k: &str| fit.get(k).unwrap_or(f64::NAN);
    match fit.model {
        strobofp::fit::FitModel::Boundary => {
            compare_line(log, "A", g("A"), BOUNDARY_FIT_A)?;
            compare_line(log, "B", g("B"), BOUNDARY_FIT_B)?;
            compare_line(log, "B + 1", g("B") + 1.0, boundary_const())?;
            writeln!(log, "  C        {:>12.6}", g("C"))?;
        }
        strobofp::fit::FitModel::Bulk => {
            compare_line(log, "a", g("a"), 0.25)?;
            compare_line(log, "b", g("b"), BULK_B)?;
            compare_line(log, "c", g("c"), BULK_C_M)?;
            compare_line(log, "beta=4b", g("beta"), GAP_BETA)?;
            compare_line(log, "C=c+1", g("C"), BULK_C_TAU)?;
        }
        strobofp::fit::FitModel::Gap => {
            compare_line(log, "g0", g("g0"), PI * PI / 2.0)?;
            compare_line(log, "beta", g("beta"), GAP_BETA)?;
        }
        strobofp::fit::FitModel::PowerlawLoglog => {
            writeln!(log, "  alpha    {:>12.6}", g("alpha"))?;
        }
    }
    for w in &fit.warnings {
        writeln!(log, "  warning: {w}")?;
    }
    Ok(())
}

pub fn cmd_fit(config: &RunConfig, out: &mut dyn Write, log: &mut dyn Write) -> CliResult {
    let fit = run_fit(config)?;
    fit_summary(&fit, log)?;
    write_json(out, &fit)
}

pub fn run_mc(config: &RunConfig) -> CliResult<SelfAveragingReport> {
    check_y0(config.y0)?;
    let rho = config.single_rho()?;
    if config.trials < 1 {
        return Err(CliError::usage("--trials must be >= 1"));
    }
    let op = config.settings().operator(rho, config.y0)?;
    let mf = mean_frames(&op, config.y0)?;
    let mc = simulate_tau(rho, config.y0, config.trials, config.seed, &config.dist)?;
    let z_score = mc.z_score(mf.mean_tau);
    Ok(SelfAveragingReport {
        mc,
        resolvent_m: mf.m,
        resolvent_mean_tau: mf.mean_tau,
        z_score,
        pass: z_score.abs() < 3.0,
    })
}

pub fn cmd_mc(config: &RunConfig, out: &mut dyn Write, log: &mut dyn Write) -> CliResult {
    let report = run_mc(config)?;
    let mc = &report.mc;
    writeln!(
        log,
        "mc mean_tau {:.4} +- {:.4} ({} trials, {} overflow), resolvent {:.4}, z = {:+.2} ({})",
        mc.mean_tau,
        mc.std_error,
        mc.n_trials,
        mc.overflow,
        report.resolvent_mean_tau,
        report.z_score,
        if report.pass {
            "within 3 sigma"
        } else {
            "outside 3 sigma"
        }
    )?;
    if let Some(path) = &config.histogram {
        let file = File::create(path)
            .map_err(|e| CliError::Io(anyhow::anyhow!("{}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        mc.write_histogram_csv(&mut w)?;
        w.flush()?;
    }
    write_json(out, &report)
}
