//! `rate` — single-point decay-rate prediction.

use std::time::Instant;

use numsplit_core::rate::{decay_rate_closed_form, decay_rate_quadrature, lorentzian_model_rate};
use numsplit_core::spectrum::{pole_decomposition, DEFAULT_TRUNCATION};
use numsplit_core::units::angular_to_mhz;

use crate::manifest::write_manifest;
use crate::outputs::{csv_row, fmt, OutputWriter};
use crate::{CliError, Ctx, Method};

pub fn run(ctx: &Ctx) -> Result<(), CliError> {
    let started = Instant::now();
    let resolved = &ctx.resolved;
    let bath = resolved
        .bath
        .as_ref()
        .ok_or_else(|| CliError::Config(vec!["rate command needs a [bath] section".into()]))?;
    let (drive, sol) = super::solved_drive(resolved)?;
    let dev = &resolved.device;
    let omega_q = dev.qubit_frequency;

    let mut rows: Vec<String> = Vec::new();
    let closed = if sol.amplitude == 0.0 {
        let g = bath.evaluate(omega_q);
        numsplit_core::rate::DecayPrediction {
            gamma_eg: g,
            t1: 1.0 / g,
            per_pole: Vec::new(),
            background: bath.background,
            method: numsplit_core::rate::RateMethod::ZeroDrive,
            error_estimate: 0.0,
        }
    } else {
        let spec = pole_decomposition(&sol, omega_q, DEFAULT_TRUNCATION)?;
        decay_rate_closed_form(&spec, bath)
    };
    println!(
        "analytic: Gamma_eg = {:.6e} 1/us, T1 = {:.4} us ({} poles contributing)",
        closed.gamma_eg,
        closed.t1,
        closed.per_pole.len()
    );
    rows.push(csv_row(&[
        closed.method.as_str().to_string(),
        fmt(closed.gamma_eg),
        fmt(closed.t1),
        fmt(closed.background),
        fmt(closed.error_estimate),
    ]));

    if matches!(ctx.method, Method::Quadrature | Method::Both) {
        let quad = decay_rate_quadrature(&sol, omega_q, bath, ctx.tol)?;
        let dev_rel = (quad.gamma_eg - closed.gamma_eg).abs() / closed.gamma_eg.abs().max(1e-300);
        println!(
            "quadrature: Gamma_eg = {:.6e} 1/us (relative deviation {dev_rel:.2e})",
            quad.gamma_eg
        );
        rows.push(csv_row(&[
            quad.method.as_str().to_string(),
            fmt(quad.gamma_eg),
            fmt(quad.t1),
            fmt(quad.background),
            fmt(quad.error_estimate),
        ]));
    }

    let lorentz = lorentzian_model_rate(dev, &drive, bath)?;
    println!(
        "lorentzian baseline: Gamma_eg = {:.6e} 1/us (x{:.2} of the full model)",
        lorentz.gamma_eg,
        lorentz.gamma_eg / closed.gamma_eg.max(1e-300)
    );
    rows.push(csv_row(&[
        "lorentzian-baseline".to_string(),
        fmt(lorentz.gamma_eg),
        fmt(lorentz.t1),
        fmt(lorentz.background),
        fmt(lorentz.error_estimate),
    ]));

    let mut writer = OutputWriter::new(&ctx.out_dir)?;
    writer.write_csv(
        "rate.csv",
        "method,Gamma_eg_per_us,T1_us,background_per_us,err_est",
        rows,
    )?;

    // per-pole breakdown for the analytic route
    if !closed.per_pole.is_empty() {
        let spec = pole_decomposition(&sol, omega_q, DEFAULT_TRUNCATION)?;
        writer.write_csv(
            "rate_per_pole.csv",
            "pole_index,center_over_2pi_MHz,half_width_per_us,weight_re,contribution_per_us",
            closed.per_pole.iter().enumerate().map(|(j, &c)| {
                let p = &spec.poles[j];
                csv_row(&[
                    j.to_string(),
                    fmt(angular_to_mhz(p.center)),
                    fmt(p.half_width),
                    fmt(p.weight.re),
                    fmt(c),
                ])
            }),
        )?;
    }

    write_manifest(
        &mut writer,
        "rate",
        ctx.seed,
        &ctx.normalized,
        started,
        serde_json::json!({ "truncation_tolerance": DEFAULT_TRUNCATION }),
    )?;
    Ok(())
}
