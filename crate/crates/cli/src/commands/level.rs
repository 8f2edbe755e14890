//! `level` — drive-amplitude leveling and Stark-shift report.

use std::time::Instant;

use numsplit_core::device::DriveSpec;
use numsplit_core::pointer::{level_drive_amplitude, solve_pointer_states};
use numsplit_core::spectrum::first_moment;
use numsplit_core::units::angular_to_mhz;

use crate::manifest::write_manifest;
use crate::outputs::{csv_row, fmt, OutputWriter};
use crate::{CliError, Ctx};

pub fn run(ctx: &Ctx) -> Result<(), CliError> {
    let started = Instant::now();
    let resolved = &ctx.resolved;
    let level = resolved
        .level
        .as_ref()
        .ok_or_else(|| CliError::Config(vec!["level command needs a [level] section".into()]))?;
    let dev = &resolved.device;
    let gamma_target = level.target_snr_rate / (4.0 * dev.quantum_efficiency);
    println!(
        "leveling to d/dt SNR = {} 1/us => Gamma_m = {:.6} 1/us (eta = {})",
        level.target_snr_rate, gamma_target, dev.quantum_efficiency
    );

    let mut rows = Vec::new();
    for &omega_d in &level.drive_frequencies {
        let d_r = level_drive_amplitude(dev, omega_d, level.target_snr_rate)?;
        let drive = DriveSpec::new(dev, omega_d, d_r)?;
        let sol = solve_pointer_states(dev, &drive)?;
        let stark = first_moment(&sol, dev.qubit_frequency) - dev.qubit_frequency;
        let term2 = 2.0 * sol.drive_asym * sol.alpha_e.re;
        rows.push(csv_row(&[
            fmt(angular_to_mhz(omega_d)),
            fmt(angular_to_mhz(d_r)),
            fmt(sol.gamma_m),
            fmt(angular_to_mhz(stark)),
            fmt(angular_to_mhz(term2)),
        ]));
        let at_e = (omega_d - dev.resonator_frequency_e()).abs()
            < 1e-9 * dev.resonator_frequency.abs();
        if at_e {
            println!(
                "  omega_d = omega_r(e): drive-asymmetry Stark term vanishes ({:.3e} MHz)",
                angular_to_mhz(term2)
            );
        }
    }

    let mut writer = OutputWriter::new(&ctx.out_dir)?;
    writer.write_csv(
        "level.csv",
        "omega_d_over_2pi_MHz,d_r_over_2pi_MHz,Gamma_m_per_us,stark_shift_over_2pi_MHz,\
         stark_term2_over_2pi_MHz",
        rows,
    )?;
    write_manifest(
        &mut writer,
        "level",
        ctx.seed,
        &ctx.normalized,
        started,
        serde_json::json!({ "gamma_m_target_per_us": gamma_target }),
    )?;
    Ok(())
}
