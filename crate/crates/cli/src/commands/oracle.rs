//! `oracle` — run the Lindblad master-equation simulator.

use std::time::Instant;

use numsplit_core::oracle::{self, SimConfig};
use numsplit_core::rate::decay_rate_closed_form;
use numsplit_core::spectrum::{pole_decomposition, DEFAULT_TRUNCATION};

use crate::manifest::write_manifest;
use crate::outputs::{csv_row, fmt, OutputWriter};
use crate::{CliError, Ctx};

pub fn run(ctx: &Ctx, certify: bool) -> Result<(), CliError> {
    let started = Instant::now();
    let resolved = &ctx.resolved;
    let (drive, sol) = super::solved_drive(resolved)?;
    let dev = &resolved.device;
    let ocfg = &resolved.oracle;

    // analytic prediction used for the horizon hint and the comparison line
    let analytic = match &resolved.bath {
        Some(bath) if sol.amplitude > 0.0 => {
            let spec = pole_decomposition(&sol, dev.qubit_frequency, DEFAULT_TRUNCATION)?;
            Some(decay_rate_closed_form(&spec, bath))
        }
        Some(bath) => Some(numsplit_core::rate::DecayPrediction {
            gamma_eg: bath.evaluate(dev.qubit_frequency),
            t1: 1.0 / bath.evaluate(dev.qubit_frequency),
            per_pole: Vec::new(),
            background: bath.background,
            method: numsplit_core::rate::RateMethod::ZeroDrive,
            error_estimate: 0.0,
        }),
        None => None,
    };

    let t_sim = ocfg.t_sim.unwrap_or_else(|| {
        oracle::suggested_horizon(sol.loss_g, analytic.as_ref().map_or(0.0, |a| a.gamma_eg))
    });
    let tls = resolved
        .bath
        .as_ref()
        .map(|b| b.components.clone())
        .unwrap_or_default();
    let mut cfg = SimConfig::new(*dev, drive, tls, t_sim)?;
    if ocfg.n_fock > 0 {
        cfg.n_fock = ocfg.n_fock;
    }
    cfg.cfl_fraction = ocfg.cfl_fraction;
    cfg.snapshots = ocfg.snapshots;
    cfg.tls_dissipation = ocfg.tls_dissipation;
    cfg.initial_state = ocfg.initial_state;
    cfg.check_positivity = ocfg.check_positivity;
    cfg.qubit_decay =
        ocfg.qubit_decay + resolved.bath.as_ref().map_or(0.0, |b| b.background);
    cfg.validate()?;

    println!(
        "oracle: dimension {} (n_fock {}, {} TLS), horizon {:.3} us",
        cfg.dimension(),
        cfg.n_fock,
        cfg.tls.len(),
        cfg.t_sim
    );
    let trace = oracle::evolve(&cfg)?;
    println!(
        "  trace residual {:.2e}, hermiticity {:.2e}, min eigenvalue {:.2e}, dt {:.2e} us",
        trace.trace_residual_max, trace.hermiticity_residual_max, trace.min_eigenvalue, trace.dt
    );

    let mut writer = OutputWriter::new(&ctx.out_dir)?;
    writer.write_csv(
        "oracle_trace.csv",
        "t_us,P_e,n_photon,top_fock_occ",
        trace.times.iter().enumerate().map(|(i, &t)| {
            csv_row(&[
                fmt(t),
                fmt(trace.excited_population[i]),
                fmt(trace.photon_number[i]),
                fmt(trace.top_fock_occupancy[i]),
            ])
        }),
    )?;

    let mut extras = serde_json::json!({
        "dimension": cfg.dimension(),
        "n_fock": cfg.n_fock,
        "t_sim_us": cfg.t_sim,
        "dt_us": trace.dt,
        "trace_residual_max": trace.trace_residual_max,
        "min_eigenvalue": trace.min_eigenvalue,
    });

    match oracle::extract_rate(&trace) {
        Ok(fit) => {
            println!(
                "  extracted Gamma = {:.6e} 1/us (T1 = {:.3} us), oscillatory: {}",
                fit.gamma,
                1.0 / fit.gamma,
                fit.oscillatory
            );
            extras["extracted_gamma_per_us"] = serde_json::json!(fit.gamma);
            extras["oscillatory"] = serde_json::json!(fit.oscillatory);
            if let Some(a) = &analytic {
                let rel = (fit.gamma - a.gamma_eg).abs() / a.gamma_eg.abs().max(1e-300);
                println!(
                    "  analytic Gamma = {:.6e} 1/us, relative deviation {:.2}%",
                    a.gamma_eg,
                    100.0 * rel
                );
                extras["analytic_gamma_per_us"] = serde_json::json!(a.gamma_eg);
                extras["rel_deviation"] = serde_json::json!(rel);
            }
        }
        Err(e) => {
            println!("  rate extraction skipped: {e}");
            extras["extraction_error"] = serde_json::json!(e.to_string());
        }
    }

    if certify {
        let report = oracle::extract_rate_with_convergence(&cfg)?;
        println!(
            "  certification: step halving {:.3e}, n_fock+5 {:.3e} (relative)",
            report.step_rel_dev, report.fock_rel_dev
        );
        extras["certification"] = serde_json::json!({
            "gamma_base": report.base.gamma,
            "gamma_halved_step": report.halved_step.gamma,
            "gamma_raised_fock": report.raised_fock.gamma,
            "step_rel_dev": report.step_rel_dev,
            "fock_rel_dev": report.fock_rel_dev,
        });
    }

    write_manifest(&mut writer, "oracle", ctx.seed, &ctx.normalized, started, extras)?;
    Ok(())
}
