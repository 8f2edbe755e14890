//! `fit-tls` — inversion-recovery fitting and bath export.

use std::path::Path;
use std::time::Instant;

use numsplit_core::bath::{
    bath_from_fit, fit_inversion_recovery, synth_inversion_recovery, DecayTrace,
    InversionRecoveryParams,
};
use numsplit_core::units::angular_to_mhz;

use crate::manifest::write_manifest;
use crate::outputs::{csv_row, fmt, OutputWriter};
use crate::{CliError, Ctx};

fn read_trace_csv(path: &Path) -> Result<DecayTrace, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Config(vec![format!("{}: empty file", path.display())]))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let (t_col, p_col) = match (
        cols.iter().position(|c| *c == "t_us"),
        cols.iter().position(|c| *c == "P_e"),
    ) {
        (Some(t), Some(p)) => (t, p),
        _ => {
            return Err(CliError::Config(vec![format!(
                "{}: header must contain t_us and P_e columns, got '{header}'",
                path.display()
            )]))
        }
    };
    let mut times = Vec::new();
    let mut pops = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let parse = |idx: usize| -> Result<f64, CliError> {
            fields
                .get(idx)
                .and_then(|f| f.trim().parse::<f64>().ok())
                .ok_or_else(|| {
                    CliError::Config(vec![format!(
                        "{}: line {}: cannot parse field {idx}",
                        path.display(),
                        lineno + 2
                    )])
                })
        };
        times.push(parse(t_col)?);
        pops.push(parse(p_col)?);
    }
    if times.is_empty() {
        return Err(CliError::Config(vec![format!(
            "{}: no data rows",
            path.display()
        )]));
    }
    DecayTrace::new(times, pops).map_err(|e| CliError::Config(vec![e.to_string()]))
}

/// Starting points when the config does not give one. The oscillation
/// frequency makes the cost landscape multimodal in the coupling, so scan a
/// discrete spectrum of the detrended trace for the dominant line and fit
/// from a few candidates around it, keeping the best.
fn initial_candidates(trace: &DecayTrace) -> Vec<InversionRecoveryParams> {
    let n = trace.times.len();
    let (t0, p0) = (trace.times[0], trace.populations[0]);
    let (t1, p1) = (trace.times[n - 1], trace.populations[n - 1]);
    let span = t1 - t0;
    let gamma1 = ((p0.max(1e-3) / p1.max(1e-3)).ln() / span).clamp(1e-3, 1e2);
    let amp_exp = (0.7 * p0).clamp(0.05, 1.4);
    let amp_osc = (p0 - amp_exp).clamp(0.05, 1.4);

    // detrended residual spectrum: |sum_i r_i e^{-i w t_i}| on a frequency
    // grid up to the sampling Nyquist rate
    let resid: Vec<f64> = trace
        .times
        .iter()
        .zip(&trace.populations)
        .map(|(&t, &p)| p - p0 * (-gamma1 * t).exp())
        .collect();
    let dt = span / (n - 1) as f64;
    let w_nyquist = std::f64::consts::PI / dt;
    let w_min = 2.0 * std::f64::consts::PI / span;
    let n_scan = 400;
    let mut best_w = w_min;
    let mut best_mag = 0.0;
    for k in 1..=n_scan {
        let w = w_min + (w_nyquist * 0.5 - w_min) * k as f64 / n_scan as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (&t, &r) in trace.times.iter().zip(&resid) {
            re += r * (w * t).cos();
            im -= r * (w * t).sin();
        }
        let mag = re * re + im * im;
        if mag > best_mag {
            best_mag = mag;
            best_w = w;
        }
    }
    // cos(2gt) oscillates at angular frequency 2g; seed from the scan peak
    // plus a log-spaced ladder across the resolvable band (the landscape is
    // multimodal in g, and each fit costs only milliseconds)
    let mut gs = vec![best_w / 2.0];
    let g_lo = w_min / 2.0;
    let g_hi = w_nyquist / 4.0;
    let n_ladder = 24;
    for k in 0..=n_ladder {
        gs.push(g_lo * (g_hi / g_lo).powf(k as f64 / n_ladder as f64));
    }
    gs.iter()
        .map(|&g| InversionRecoveryParams {
            amp_osc,
            amp_exp,
            coupling: g,
            dephasing: (3.0 * gamma1).max(0.2),
            background: gamma1,
        })
        .collect()
}

pub fn run(ctx: &Ctx, trace_path: Option<&Path>, synth: bool) -> Result<(), CliError> {
    let started = Instant::now();
    let fit_cfg = ctx
        .resolved
        .fit
        .as_ref()
        .ok_or_else(|| CliError::Config(vec!["fit-tls needs a [fit] section".into()]))?;

    let mut writer = OutputWriter::new(&ctx.out_dir)?;
    let trace = if synth {
        let synth_cfg = fit_cfg.synth.as_ref().ok_or_else(|| {
            CliError::Config(vec!["--synth needs a [fit.synth] section".into()])
        })?;
        let times: Vec<f64> = (0..synth_cfg.points)
            .map(|i| i as f64 * synth_cfg.horizon / (synth_cfg.points - 1) as f64)
            .collect();
        let trace = synth_inversion_recovery(
            &synth_cfg.params,
            &times,
            synth_cfg.noise_sd,
            ctx.seed,
        )?;
        writer.write_csv(
            "synth_trace.csv",
            "t_us,P_e",
            trace
                .times
                .iter()
                .zip(&trace.populations)
                .map(|(&t, &p)| csv_row(&[fmt(t), fmt(p)])),
        )?;
        trace
    } else {
        let path = trace_path.ok_or_else(|| {
            CliError::Config(vec!["fit-tls needs --trace FILE (or --synth)".into()])
        })?;
        read_trace_csv(path)?
    };

    let candidates = match fit_cfg.initial {
        Some(init) => vec![init],
        None => initial_candidates(&trace),
    };
    let mut best: Option<numsplit_core::bath::InversionRecoveryFit> = None;
    let mut last_err = None;
    for init in &candidates {
        match fit_inversion_recovery(&trace, init) {
            Ok(f) => {
                if best
                    .as_ref()
                    .is_none_or(|b| f.residual_rms < b.residual_rms)
                {
                    best = Some(f);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let fit = match best {
        Some(f) => f,
        None => return Err(last_err.expect("at least one candidate ran").into()),
    };
    let p = &fit.params;
    let sigma = fit.covariance.as_ref().map(|cov| {
        (0..5)
            .map(|i| cov[i * 5 + i].max(0.0).sqrt())
            .collect::<Vec<f64>>()
    });

    println!("inversion-recovery fit ({} iterations):", fit.iterations);
    let names = ["amp_osc", "amp_exp", "coupling", "dephasing", "background"];
    let values = [p.amp_osc, p.amp_exp, p.coupling, p.dephasing, p.background];
    let units = ["1", "1", "rad/us", "1/us", "1/us"];
    for i in 0..5 {
        let unc = sigma
            .as_ref()
            .map(|s| format!(" +- {:.3e}", s[i]))
            .unwrap_or_default();
        println!("  {} = {:.6}{} {}", names[i], values[i], unc, units[i]);
    }
    println!(
        "  g/2pi = {:.4} MHz, residual rms = {:.3e}",
        angular_to_mhz(p.coupling),
        fit.residual_rms
    );
    if fit.coupling_unidentifiable {
        println!("  note: coupling unidentifiable (trace is a single exponential)");
    }
    if fit.window_short {
        println!("  note: trace spans fewer than 3 fitted dephasing times");
    }

    let bath = bath_from_fit(&fit, fit_cfg.tls_frequency, fit_cfg.background)?;
    let mut bath_toml = String::from("[bath]\n");
    bath_toml.push_str(&format!(
        "background = {{ value = {}, unit = \"per_us\" }}\n",
        fmt(bath.background)
    ));
    for c in &bath.components {
        bath_toml.push_str("\n[[bath.tls]]\n");
        bath_toml.push_str(&format!(
            "frequency = {{ value = {}, unit = \"rad_per_us\" }}\n",
            fmt(c.frequency)
        ));
        bath_toml.push_str(&format!(
            "coupling = {{ value = {}, unit = \"rad_per_us\" }}\n",
            fmt(c.coupling)
        ));
        bath_toml.push_str(&format!(
            "dephasing = {{ value = {}, unit = \"per_us\" }}\n",
            fmt(c.dephasing)
        ));
    }
    writer.write_bytes("bath_fit.toml", bath_toml.as_bytes())?;

    let extras = serde_json::json!({
        "params": {
            "amp_osc": p.amp_osc,
            "amp_exp": p.amp_exp,
            "coupling_rad_per_us": p.coupling,
            "dephasing_per_us": p.dephasing,
            "background_per_us": p.background,
        },
        "residual_rms": fit.residual_rms,
        "iterations": fit.iterations,
        "coupling_unidentifiable": fit.coupling_unidentifiable,
        "window_short": fit.window_short,
    });
    write_manifest(&mut writer, "fit-tls", ctx.seed, &ctx.normalized, started, extras)?;
    Ok(())
}
