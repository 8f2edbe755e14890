//! `sweep` — T1 map over drive frequency × measurement strength.

use std::time::Instant;

use rayon::prelude::*;

use numsplit_core::device::DriveSpec;
use numsplit_core::oracle::{self, SimConfig};
use numsplit_core::pointer::{
    drive_for_separation, level_drive_amplitude, solve_pointer_states,
};
use numsplit_core::rate::{decay_rate_closed_form, DecayPrediction, RateMethod};
use numsplit_core::spectrum::{pole_decomposition, DEFAULT_TRUNCATION};
use numsplit_core::units::angular_to_mhz;
use numsplit_core::BathSpectrum;

use crate::config::SweepKnob;
use crate::manifest::write_manifest;
use crate::outputs::{csv_row, fmt, OutputWriter};
use crate::{CliError, Ctx, Method};

struct PointResult {
    omega_d: f64,
    knob: f64,
    d_r: Option<f64>,
    gamma_m: Option<f64>,
    analytic: Option<DecayPrediction>,
    oracle_gamma: Option<f64>,
    error: Option<String>,
}

fn analytic_point(
    ctx: &Ctx,
    bath: &BathSpectrum,
    omega_d: f64,
    knob: f64,
    knob_kind: &SweepKnob,
) -> Result<(DriveSpec, numsplit_core::PointerSolution, DecayPrediction), String> {
    let dev = &ctx.resolved.device;
    let d_r = match knob_kind {
        SweepKnob::SnrRates(_) => {
            level_drive_amplitude(dev, omega_d, knob).map_err(|e| e.to_string())?
        }
        SweepKnob::Separations(_) => {
            drive_for_separation(dev, omega_d, knob).map_err(|e| e.to_string())?
        }
        SweepKnob::Amplitudes(_) => knob,
    };
    let drive = DriveSpec::new(dev, omega_d, d_r).map_err(|e| e.to_string())?;
    let sol = solve_pointer_states(dev, &drive).map_err(|e| e.to_string())?;
    let prediction = if sol.amplitude == 0.0 {
        let g = bath.evaluate(dev.qubit_frequency);
        DecayPrediction {
            gamma_eg: g,
            t1: if g > 0.0 { 1.0 / g } else { f64::INFINITY },
            per_pole: Vec::new(),
            background: bath.background,
            method: RateMethod::ZeroDrive,
            error_estimate: 0.0,
        }
    } else {
        let spec = pole_decomposition(&sol, dev.qubit_frequency, DEFAULT_TRUNCATION)
            .map_err(|e| e.to_string())?;
        decay_rate_closed_form(&spec, bath)
    };
    Ok((drive, sol, prediction))
}

fn oracle_point(
    ctx: &Ctx,
    bath: &BathSpectrum,
    drive: &DriveSpec,
    sol: &numsplit_core::PointerSolution,
    gamma_hint: f64,
) -> Result<f64, String> {
    let ocfg = &ctx.resolved.oracle;
    let t_sim = ocfg
        .t_sim
        .unwrap_or_else(|| oracle::suggested_horizon(sol.loss_g, gamma_hint));
    let mut cfg = SimConfig::new(
        ctx.resolved.device,
        *drive,
        bath.components.clone(),
        t_sim,
    )
    .map_err(|e| e.to_string())?;
    if ocfg.n_fock > 0 {
        cfg.n_fock = ocfg.n_fock;
    }
    cfg.cfl_fraction = ocfg.cfl_fraction;
    cfg.snapshots = ocfg.snapshots;
    cfg.tls_dissipation = ocfg.tls_dissipation;
    cfg.check_positivity = ocfg.check_positivity;
    // the bath floor enters the oracle as a direct Markovian qubit channel
    cfg.qubit_decay = ocfg.qubit_decay + bath.background;
    let trace = oracle::evolve(&cfg).map_err(|e| e.to_string())?;
    let fit = oracle::extract_rate(&trace).map_err(|e| e.to_string())?;
    Ok(fit.gamma)
}

pub fn run(ctx: &Ctx) -> Result<(), CliError> {
    let started = Instant::now();
    let resolved = &ctx.resolved;
    let sweep = resolved
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config(vec!["sweep command needs a [sweep] section".into()]))?;
    let bath = resolved
        .bath
        .as_ref()
        .ok_or_else(|| CliError::Config(vec!["sweep command needs a [bath] section".into()]))?;
    let knobs: &[f64] = match &sweep.knob {
        SweepKnob::SnrRates(v) | SweepKnob::Separations(v) | SweepKnob::Amplitudes(v) => v,
    };
    if sweep.drive_frequencies.is_empty() || knobs.is_empty() {
        return Err(CliError::Config(vec!["sweep grids must be non-empty".into()]));
    }

    let grid: Vec<(f64, f64)> = sweep
        .drive_frequencies
        .iter()
        .flat_map(|&w| knobs.iter().map(move |&k| (w, k)))
        .collect();

    let with_oracle = matches!(ctx.method, Method::Oracle | Method::Both);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ctx.jobs)
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    let points: Vec<PointResult> = pool.install(|| {
        grid.par_iter()
            .map(|&(omega_d, knob)| {
                match analytic_point(ctx, bath, omega_d, knob, &sweep.knob) {
                    Ok((drive, sol, prediction)) => {
                        let oracle_gamma = if with_oracle {
                            match oracle_point(ctx, bath, &drive, &sol, prediction.gamma_eg) {
                                Ok(g) => Some(g),
                                Err(e) => {
                                    return PointResult {
                                        omega_d,
                                        knob,
                                        d_r: Some(drive.amplitude),
                                        gamma_m: Some(sol.gamma_m),
                                        analytic: Some(prediction),
                                        oracle_gamma: None,
                                        error: Some(format!("oracle: {e}")),
                                    }
                                }
                            }
                        } else {
                            None
                        };
                        PointResult {
                            omega_d,
                            knob,
                            d_r: Some(drive.amplitude),
                            gamma_m: Some(sol.gamma_m),
                            analytic: Some(prediction),
                            oracle_gamma,
                            error: None,
                        }
                    }
                    Err(e) => PointResult {
                        omega_d,
                        knob,
                        d_r: None,
                        gamma_m: None,
                        analytic: None,
                        oracle_gamma: None,
                        error: Some(e),
                    },
                }
            })
            .collect()
    });

    let method_tag = match ctx.method {
        Method::Analytic | Method::Quadrature => "analytic",
        Method::Oracle => "oracle",
        Method::Both => "both",
    };
    let mut header = String::from(
        "omega_d_over_2pi_MHz,snr_rate_MHz_or_delta_alpha,d_r_over_2pi_MHz,Gamma_m_per_us,\
         Gamma_eg_per_us,T1_us,method,err_est",
    );
    if with_oracle {
        header.push_str(",Gamma_oracle_per_us,T1_oracle_us,rel_deviation");
    }
    header.push_str(",error");

    let mut failed = 0usize;
    let rows: Vec<String> = points
        .iter()
        .map(|p| {
            if p.error.is_some() {
                failed += 1;
            }
            let mut fields = vec![
                fmt(angular_to_mhz(p.omega_d)),
                fmt(p.knob),
                p.d_r.map(|v| fmt(angular_to_mhz(v))).unwrap_or_default(),
                p.gamma_m.map(fmt).unwrap_or_default(),
                p.analytic.as_ref().map(|a| fmt(a.gamma_eg)).unwrap_or_default(),
                p.analytic.as_ref().map(|a| fmt(a.t1)).unwrap_or_default(),
                method_tag.to_string(),
                p.analytic
                    .as_ref()
                    .map(|a| fmt(a.error_estimate))
                    .unwrap_or_default(),
            ];
            if with_oracle {
                fields.push(p.oracle_gamma.map(fmt).unwrap_or_default());
                fields.push(p.oracle_gamma.map(|g| fmt(1.0 / g)).unwrap_or_default());
                let dev = match (p.oracle_gamma, p.analytic.as_ref()) {
                    (Some(g), Some(a)) => Some((g - a.gamma_eg).abs() / a.gamma_eg.abs().max(1e-300)),
                    _ => None,
                };
                fields.push(dev.map(fmt).unwrap_or_default());
            }
            fields.push(p.error.clone().unwrap_or_default().replace(',', ";"));
            csv_row(&fields)
        })
        .collect();

    let mut writer = OutputWriter::new(&ctx.out_dir)?;
    writer.write_csv("sweep.csv", &header, rows)?;
    write_manifest(
        &mut writer,
        "sweep",
        ctx.seed,
        &ctx.normalized,
        started,
        serde_json::json!({
            "grid_points": grid.len(),
            "failed_points": failed,
            "truncation_tolerance": DEFAULT_TRUNCATION,
        }),
    )?;

    println!(
        "sweep: {} points ({} failed), method {method_tag}",
        grid.len(),
        failed
    );
    if failed == grid.len() {
        return Err(CliError::Numerical("every sweep point failed".into()));
    }
    if failed > 0 {
        return Err(CliError::PartialSweep(format!(
            "{failed} of {} sweep points failed; see the error column",
            grid.len()
        )));
    }
    Ok(())
}
