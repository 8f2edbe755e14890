//! `spectrum` — export emission spectra for the configured drive choices.

use std::time::Instant;

use numsplit_core::pointer::solve_pointer_states;
use numsplit_core::polaron::{crosscheck_pole_positions, mixing_ladder};
use numsplit_core::spectrum::{
    correlation_trace, fft_params, pole_decomposition, spectrum_via_fft, DEFAULT_TRUNCATION,
};
use numsplit_core::units::angular_to_mhz;

use crate::config::{anchor_label, DriveFrequency, ResolvedDrive};
use crate::manifest::write_manifest;
use crate::outputs::{csv_row, fmt, OutputWriter};
use crate::{CliError, Ctx, Method};

pub fn run(ctx: &Ctx) -> Result<(), CliError> {
    let started = Instant::now();
    let resolved = &ctx.resolved;
    let spec_cfg = resolved
        .spectrum
        .as_ref()
        .ok_or_else(|| CliError::Config(vec!["spectrum command needs a [spectrum] section".into()]))?;
    let drive_cfg = resolved
        .drive
        .as_ref()
        .ok_or_else(|| CliError::Config(vec!["spectrum command needs a [drive] section".into()]))?;

    let dev = &resolved.device;
    let mut writer = OutputWriter::new(&ctx.out_dir)?;
    let omega_q = dev.qubit_frequency;
    let n = spec_cfg.points;

    for &anchor in &spec_cfg.drives {
        let label = anchor_label(anchor);
        let drive = resolved.drive_spec(&ResolvedDrive {
            frequency: DriveFrequency::Anchor(anchor),
            strength: drive_cfg.strength,
        })?;
        let sol = solve_pointer_states(dev, &drive)?;

        if sol.amplitude == 0.0 || sol.gamma_m == 0.0 {
            println!(
                "drive {label}: degenerate zero-width line at omega_q + B (no drive); exporting zeros"
            );
            writer.write_csv(
                format!("spectrum_{label}.csv").as_str(),
                "omega_over_2pi_MHz,S_q_us",
                (0..n).map(|i| {
                    let w = omega_q - spec_cfg.window
                        + 2.0 * spec_cfg.window * i as f64 / (n - 1) as f64;
                    csv_row(&[fmt(angular_to_mhz(w)), fmt(0.0)])
                }),
            )?;
            continue;
        }

        let spec = pole_decomposition(&sol, omega_q, DEFAULT_TRUNCATION)?;
        println!(
            "drive {label}: omega_d/2pi = {:.4} MHz, Gamma_m = {:.4} 1/us, {} poles (J = {})",
            angular_to_mhz(drive.frequency),
            sol.gamma_m,
            spec.poles.len(),
            spec.truncation_order
        );
        writer.write_csv(
            format!("spectrum_{label}.csv").as_str(),
            "omega_over_2pi_MHz,S_q_us",
            (0..n).map(|i| {
                let w =
                    omega_q - spec_cfg.window + 2.0 * spec_cfg.window * i as f64 / (n - 1) as f64;
                csv_row(&[fmt(angular_to_mhz(w)), fmt(spec.evaluate(w))])
            }),
        )?;

        if matches!(ctx.method, Method::Quadrature | Method::Both) {
            let (horizon, nfft) = fft_params(&sol, omega_q)?;
            let sampled = spectrum_via_fft(&sol, omega_q, horizon, nfft)?;
            writer.write_csv(
                format!("spectrum_{label}_fft.csv").as_str(),
                "omega_over_2pi_MHz,S_q_us",
                sampled
                    .omegas
                    .iter()
                    .zip(&sampled.values)
                    .map(|(&w, &s)| csv_row(&[fmt(angular_to_mhz(w)), fmt(s)])),
            )?;
        }

        if spec_cfg.export_correlation {
            let horizon = spec_cfg
                .correlation_horizon
                .unwrap_or(8.0 / sol.gamma_m.min(sol.loss_g / 2.0));
            let trace = correlation_trace(&sol, omega_q, horizon, spec_cfg.correlation_points)?;
            writer.write_csv(
                format!("correlation_{label}.csv").as_str(),
                "t_us,re_C,im_C",
                trace
                    .times
                    .iter()
                    .zip(&trace.values)
                    .map(|(&t, c)| csv_row(&[fmt(t), fmt(c.re), fmt(c.im)])),
            )?;
        }

        // multi-wave-mixing sidebands and their consistency with the poles
        let ladder = mixing_ladder(&sol, dev, &drive, DEFAULT_TRUNCATION)?;
        writer.write_csv(
            format!("ladder_{label}.csv").as_str(),
            "n,omega_B_over_2pi_MHz,weight",
            ladder.rungs.iter().map(|r| {
                csv_row(&[
                    r.n.to_string(),
                    fmt(angular_to_mhz(r.bath_frequency)),
                    fmt(r.weight),
                ])
            }),
        )?;
        let check = crosscheck_pole_positions(&ladder, &spec, 1e-9);
        println!(
            "  mixing ladder: {} sidebands, spacing deviation {:.2e}, weight trend {}: {}",
            ladder.rungs.len(),
            check.spacing_rel_dev,
            if check.weight_trend_consistent { "consistent" } else { "mismatched" },
            if check.pass { "pass" } else { "FAIL" }
        );
    }

    write_manifest(
        &mut writer,
        "spectrum",
        ctx.seed,
        &ctx.normalized,
        started,
        serde_json::json!({ "truncation_tolerance": DEFAULT_TRUNCATION }),
    )?;
    Ok(())
}
