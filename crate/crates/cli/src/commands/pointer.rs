//! `pointer` — solve and report the pointer-state solution.

use std::time::Instant;

use numsplit_core::units::angular_to_mhz;

use crate::manifest::write_manifest;
use crate::outputs::{csv_row, fmt, OutputWriter};
use crate::{CliError, Ctx};

pub fn run(ctx: &Ctx) -> Result<(), CliError> {
    let started = Instant::now();
    let (drive, sol) = super::solved_drive(&ctx.resolved)?;
    let dev = &ctx.resolved.device;

    println!("pointer solution");
    println!(
        "  drive: omega_d/2pi = {:.6} MHz (detuning {:.6} MHz), d_r/2pi = {:.6} MHz",
        angular_to_mhz(drive.frequency),
        angular_to_mhz(sol.detuning),
        angular_to_mhz(drive.amplitude),
    );
    println!(
        "  alpha_g = {:+.6} {:+.6}i   alpha_e = {:+.6} {:+.6}i",
        sol.alpha_g.re, sol.alpha_g.im, sol.alpha_e.re, sol.alpha_e.im
    );
    println!(
        "  delta_alpha = {:+.6} {:+.6}i  |delta_alpha| = {:.6}",
        sol.delta_alpha.re,
        sol.delta_alpha.im,
        sol.delta_alpha.norm()
    );
    println!(
        "  Gamma_m = {:.6} 1/us  (Gamma_m/2pi = {:.6} MHz)",
        sol.gamma_m,
        angular_to_mhz(sol.gamma_m)
    );
    println!(
        "  B = {:.6} rad/us  (B/2pi = {:.6} MHz)",
        sol.freq_shift,
        angular_to_mhz(sol.freq_shift)
    );
    println!(
        "  A = {:+.6} {:+.6}i  |A| = {:.6}",
        sol.pole_amp.re,
        sol.pole_amp.im,
        sol.pole_amp.norm()
    );
    let b_dev = sol.freq_shift_deviation();
    if b_dev > 1e-6 {
        println!(
            "  note: exponent-derived B deviates from the closed form by {b_dev:.3e} relative"
        );
    }

    let mut writer = OutputWriter::new(&ctx.out_dir)?;
    let rows = [
        ("re_alpha_g", "1", sol.alpha_g.re, None),
        ("im_alpha_g", "1", sol.alpha_g.im, None),
        ("re_alpha_e", "1", sol.alpha_e.re, None),
        ("im_alpha_e", "1", sol.alpha_e.im, None),
        ("re_delta_alpha", "1", sol.delta_alpha.re, None),
        ("im_delta_alpha", "1", sol.delta_alpha.im, None),
        ("abs_delta_alpha", "1", sol.delta_alpha.norm(), None),
        (
            "gamma_m",
            "1/us",
            sol.gamma_m,
            Some(angular_to_mhz(sol.gamma_m)),
        ),
        (
            "freq_shift_b",
            "rad/us",
            sol.freq_shift,
            Some(angular_to_mhz(sol.freq_shift)),
        ),
        ("re_pole_amp_a", "1", sol.pole_amp.re, None),
        ("im_pole_amp_a", "1", sol.pole_amp.im, None),
        (
            "drive_amplitude",
            "rad/us",
            drive.amplitude,
            Some(angular_to_mhz(drive.amplitude)),
        ),
        (
            "detuning",
            "rad/us",
            sol.detuning,
            Some(angular_to_mhz(sol.detuning)),
        ),
        ("loss_g", "1/us", sol.loss_g, Some(angular_to_mhz(sol.loss_g))),
        ("loss_e", "1/us", sol.loss_e, Some(angular_to_mhz(sol.loss_e))),
        (
            "qubit_frequency",
            "rad/us",
            dev.qubit_frequency,
            Some(angular_to_mhz(dev.qubit_frequency)),
        ),
    ];
    writer.write_csv(
        "pointer.csv",
        "quantity,unit,value,value_over_2pi_MHz",
        rows.iter().map(|(name, unit, v, mhz)| {
            csv_row(&[
                name.to_string(),
                unit.to_string(),
                fmt(*v),
                mhz.map(fmt).unwrap_or_default(),
            ])
        }),
    )?;
    write_manifest(
        &mut writer,
        "pointer",
        ctx.seed,
        &ctx.normalized,
        started,
        serde_json::Value::Null,
    )?;
    Ok(())
}
