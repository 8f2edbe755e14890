//! Multi-wave-mixing diagnostics in the displaced (polaron) frame.
//!
//! Displacing the resonator to its qubit-conditioned pointer field
//! diagonalizes the driven Hamiltonian; the qubit lowering operator picks up
//! a displacement factor `exp(δα â† − δα* â)`, so a decay event can create
//! `n` resonator photons. Energy matching then places the emitted bath
//! photon at `ω_B(n) = ω̃_q + n(ω_d − ω_r)`, with Poisson amplitudes
//! `e^{−|δα|²} |δα|^{2n}/n!`. These sidebands must line up with the pole
//! structure of the emission spectrum, which this module cross-checks.

use crate::device::{DeviceParams, DriveSpec};
use crate::error::{Error, Result};
use crate::pointer::PointerSolution;
use crate::spectrum::QubitSpectrum;

/// One sideband of the mixing ladder.
#[derive(Debug, Clone, Copy)]
pub struct MixingRung {
    /// Net photons added to the resonator.
    pub n: usize,
    /// Matched bath photon frequency ω_B(n) (rad/µs).
    pub bath_frequency: f64,
    /// Poisson amplitude e^{−|δα|²}|δα|^{2n}/n!.
    pub weight: f64,
}

/// Dressed qubit frequency plus the ladder of photon-assisted sidebands.
#[derive(Debug, Clone)]
pub struct MixingLadder {
    /// Drive-dressed qubit frequency ω̃_q (rad/µs).
    pub dressed_frequency: f64,
    pub rungs: Vec<MixingRung>,
    /// Uniform rung spacing ω_d − ω_r = Δ_d (rad/µs).
    pub spacing: f64,
}

/// Drive-dressed qubit frequency from the diagonalized polaron Hamiltonian
/// (δ_p = 0 form): the difference of the drive-shift terms at n_q = 1 and 0,
///
/// ```text
///   ω̃_q = ω_q + d_r²(Δ_d−χ)/((Δ_d−χ)² + κ²/4) − d_r²Δ_d/(Δ_d² + κ²/4).
/// ```
pub fn dressed_qubit_frequency(device: &DeviceParams, drive: &DriveSpec) -> f64 {
    let chi = device.dispersive_shift;
    let kappa = device.base_loss;
    let dd = drive.detuning(device);
    let d2 = drive.amplitude * drive.amplitude;
    device.qubit_frequency + d2 * (dd - chi) / ((dd - chi).powi(2) + kappa * kappa / 4.0)
        - d2 * dd / (dd * dd + kappa * kappa / 4.0)
}

/// Enumerate the mixing ladder until the Poisson weight tail drops below
/// `eps`.
pub fn mixing_ladder(
    sol: &PointerSolution,
    device: &DeviceParams,
    drive: &DriveSpec,
    eps: f64,
) -> Result<MixingLadder> {
    if eps <= 0.0 || eps > 1e-6 || eps.is_nan() {
        return Err(Error::InvalidParam(format!(
            "ladder tail tolerance must lie in (0, 1e-6], got {eps}"
        )));
    }
    let mu = sol.delta_alpha.norm_sqr();
    let dressed = dressed_qubit_frequency(device, drive);
    let spacing = drive.detuning(device);
    let mut rungs = Vec::new();
    let mut weight = (-mu).exp();
    let mut covered = 0.0;
    let mut n = 0usize;
    loop {
        rungs.push(MixingRung {
            n,
            bath_frequency: dressed + n as f64 * spacing,
            weight,
        });
        covered += weight;
        if 1.0 - covered < eps {
            break;
        }
        n += 1;
        weight *= mu / n as f64;
        if n > 10_000 {
            return Err(Error::InvalidParam(format!(
                "ladder does not truncate: |delta alpha|^2 = {mu:.3e}"
            )));
        }
    }
    Ok(MixingLadder {
        dressed_frequency: dressed,
        rungs,
        spacing,
    })
}

/// Per-sideband comparison between the mixing ladder and the spectrum poles.
#[derive(Debug, Clone)]
pub struct PeakComparison {
    pub n: usize,
    pub ladder_weight: f64,
    /// |w_n| of the matching spectral pole.
    pub pole_weight_magnitude: f64,
    /// |w_n| / ladder weight; constant in n for physical factors.
    pub ratio: f64,
}

/// Report of the ladder-vs-poles cross-check.
#[derive(Debug, Clone)]
pub struct PoleCrosscheck {
    pub ladder_spacing: f64,
    pub pole_spacing: f64,
    /// |ladder − pole| spacing deviation relative to the spacing scale.
    pub spacing_rel_dev: f64,
    /// True when |w_j| rises and falls in step with the Poisson weights.
    pub weight_trend_consistent: bool,
    pub per_peak: Vec<PeakComparison>,
    pub pass: bool,
}

/// Verify that the sideband ladder and the emission-spectrum poles share
/// their spacing, and that the weight magnitudes follow the same trend.
/// Mismatches are reported, not raised.
pub fn crosscheck_pole_positions(
    ladder: &MixingLadder,
    spec: &QubitSpectrum,
    tol: f64,
) -> PoleCrosscheck {
    let pole_spacing = if spec.poles.len() >= 2 {
        spec.poles[1].center - spec.poles[0].center
    } else {
        0.0
    };
    let ladder_spacing = ladder.spacing;
    let scale = ladder_spacing.abs().max(pole_spacing.abs()).max(1e-300);
    let spacing_rel_dev = if spec.poles.len() >= 2 {
        (ladder_spacing - pole_spacing).abs() / scale
    } else {
        0.0
    };

    let common = ladder.rungs.len().min(spec.poles.len());
    let mut per_peak = Vec::with_capacity(common);
    for i in 0..common {
        let lw = ladder.rungs[i].weight;
        let pw = spec.poles[i].weight.norm();
        per_peak.push(PeakComparison {
            n: i,
            ladder_weight: lw,
            pole_weight_magnitude: pw,
            ratio: if lw > 0.0 { pw / lw } else { f64::NAN },
        });
    }
    let mut trend = true;
    for w in per_peak.windows(2) {
        let dl = w[1].ladder_weight - w[0].ladder_weight;
        let dp = w[1].pole_weight_magnitude - w[0].pole_weight_magnitude;
        if dl * dp < 0.0 && dl.abs() > 1e-14 && dp.abs() > 1e-14 {
            trend = false;
        }
    }
    PoleCrosscheck {
        ladder_spacing,
        pole_spacing,
        spacing_rel_dev,
        weight_trend_consistent: trend,
        pass: spacing_rel_dev <= tol && trend,
        per_peak,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointer::{drive_for_separation, solve_pointer_states};
    use crate::spectrum::{first_moment, pole_decomposition};
    use crate::units::mhz_to_angular;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn device(chi_mhz: f64, kappa_mhz: f64) -> DeviceParams {
        DeviceParams::new(
            mhz_to_angular(4746.3),
            mhz_to_angular(6779.6),
            mhz_to_angular(chi_mhz),
            mhz_to_angular(kappa_mhz),
            0.0,
            0.1294,
        )
        .unwrap()
    }

    #[test]
    fn undriven_dressed_frequency_is_bare() {
        let dev = device(-5.0, 5.0);
        let drv = DriveSpec::new(&dev, dev.resonator_frequency, 0.0).unwrap();
        assert_eq!(dressed_qubit_frequency(&dev, &drv), dev.qubit_frequency);
    }

    #[test]
    fn resonant_drive_shift() {
        // Delta_d = 0: shift reduces to -d^2 chi/(chi^2 + kappa^2/4).
        let dev = device(-5.0, 5.0);
        let d_r = mhz_to_angular(2.0);
        let drv = DriveSpec::new(&dev, dev.resonator_frequency, d_r).unwrap();
        let chi = dev.dispersive_shift;
        let expect = dev.qubit_frequency
            - d_r * d_r * chi / (chi * chi + dev.base_loss * dev.base_loss / 4.0);
        assert_relative_eq!(dressed_qubit_frequency(&dev, &drv), expect, max_relative = 1e-14);
    }

    /// The polaron dressed frequency and the emission first moment are
    /// different dressed quantities; log their discrepancy on a generic point.
    #[test]
    fn dressed_frequency_vs_first_moment_logged() {
        let dev = device(-5.0, 5.0);
        let omega_d = dev.resonator_frequency + 0.4 * dev.dispersive_shift;
        let d_r = drive_for_separation(&dev, omega_d, 0.8).unwrap();
        let drv = DriveSpec::new(&dev, omega_d, d_r).unwrap();
        let sol = solve_pointer_states(&dev, &drv).unwrap();
        let dressed = dressed_qubit_frequency(&dev, &drv);
        let moment = first_moment(&sol, dev.qubit_frequency);
        println!(
            "dressed shift {:.6} rad/us vs first-moment shift {:.6} rad/us (delta {:.3e})",
            dressed - dev.qubit_frequency,
            moment - dev.qubit_frequency,
            dressed - moment
        );
        // both are drive-induced shifts of comparable magnitude
        assert!((dressed - dev.qubit_frequency).abs() > 0.0);
        assert!((moment - dev.qubit_frequency).abs() > 0.0);
    }

    #[test]
    fn ladder_poisson_normalization() {
        let dev = device(-10.0, 2.5);
        let omega_d = dev.resonator_frequency_e();
        let d_r = drive_for_separation(&dev, omega_d, 1.3).unwrap();
        let drv = DriveSpec::new(&dev, omega_d, d_r).unwrap();
        let sol = solve_pointer_states(&dev, &drv).unwrap();
        let ladder = mixing_ladder(&sol, &dev, &drv, 1e-10).unwrap();
        let total: f64 = ladder.rungs.iter().map(|r| r.weight).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
        // |delta alpha| = 1 would give weight(1)/weight(0) = 1; here it is mu
        let mu = sol.delta_alpha.norm_sqr();
        assert_relative_eq!(
            ladder.rungs[1].weight / ladder.rungs[0].weight,
            mu,
            max_relative = 1e-12
        );
    }

    #[test]
    fn zero_separation_single_rung() {
        let dev = device(-5.0, 5.0);
        let drv = DriveSpec::new(&dev, dev.resonator_frequency, 0.0).unwrap();
        let sol = solve_pointer_states(&dev, &drv).unwrap();
        let ladder = mixing_ladder(&sol, &dev, &drv, 1e-10).unwrap();
        assert_eq!(ladder.rungs.len(), 1);
        assert_eq!(ladder.rungs[0].weight, 1.0);
    }

    #[test]
    fn unit_separation_equal_first_weights() {
        let dev = device(-5.0, 5.0);
        let omega_d = dev.resonator_frequency;
        let d_r = drive_for_separation(&dev, omega_d, 1.0).unwrap();
        let drv = DriveSpec::new(&dev, omega_d, d_r).unwrap();
        let sol = solve_pointer_states(&dev, &drv).unwrap();
        let ladder = mixing_ladder(&sol, &dev, &drv, 1e-10).unwrap();
        assert_relative_eq!(
            ladder.rungs[1].weight / ladder.rungs[0].weight,
            1.0,
            max_relative = 1e-10
        );
    }

    #[test]
    fn spacing_matches_poles() {
        // chi/2pi = -10 MHz, drive at omega_r(e): both spacings are 10 MHz.
        let dev = device(-10.0, 2.5);
        let omega_d = dev.resonator_frequency_e();
        let d_r = drive_for_separation(&dev, omega_d, 1.0).unwrap();
        let drv = DriveSpec::new(&dev, omega_d, d_r).unwrap();
        let sol = solve_pointer_states(&dev, &drv).unwrap();
        let ladder = mixing_ladder(&sol, &dev, &drv, 1e-10).unwrap();
        let spec = pole_decomposition(&sol, dev.qubit_frequency, 1e-10).unwrap();
        let check = crosscheck_pole_positions(&ladder, &spec, 1e-12);
        assert!(check.pass, "{check:?}");
        assert_relative_eq!(check.ladder_spacing, mhz_to_angular(-10.0), max_relative = 1e-12);
        assert_relative_eq!(check.pole_spacing, mhz_to_angular(-10.0), max_relative = 1e-12);
        // the weight-magnitude ratio is constant across sidebands
        let r0 = check.per_peak[0].ratio;
        for p in &check.per_peak {
            assert_relative_eq!(p.ratio, r0, max_relative = 1e-10);
        }
    }

    #[test]
    fn coincident_collapse_at_zero_detuning() {
        let dev = device(-5.0, 5.0);
        let omega_d = dev.resonator_frequency;
        let d_r = drive_for_separation(&dev, omega_d, 1.0).unwrap();
        let drv = DriveSpec::new(&dev, omega_d, d_r).unwrap();
        let sol = solve_pointer_states(&dev, &drv).unwrap();
        let ladder = mixing_ladder(&sol, &dev, &drv, 1e-10).unwrap();
        let spec = pole_decomposition(&sol, dev.qubit_frequency, 1e-10).unwrap();
        let check = crosscheck_pole_positions(&ladder, &spec, 1e-12);
        assert!(check.pass);
        assert_eq!(check.ladder_spacing, 0.0);
        assert_eq!(check.pole_spacing, 0.0);
    }

    #[test]
    fn randomized_spacing_equality() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for _ in 0..100 {
            let chi: f64 = rng.random_range(1.0..12.0);
            let dev = device(-chi, rng.random_range(1.0..8.0));
            let omega_d =
                dev.resonator_frequency + dev.dispersive_shift * rng.random_range(-1.2..1.2);
            let d_r = drive_for_separation(&dev, omega_d, rng.random_range(0.1..1.5)).unwrap();
            let drv = DriveSpec::new(&dev, omega_d, d_r).unwrap();
            let sol = solve_pointer_states(&dev, &drv).unwrap();
            let ladder = mixing_ladder(&sol, &dev, &drv, 1e-10).unwrap();
            let spec = pole_decomposition(&sol, dev.qubit_frequency, 1e-10).unwrap();
            let check = crosscheck_pole_positions(&ladder, &spec, 1e-12);
            assert!(check.spacing_rel_dev <= 1e-12);
        }
    }

    #[test]
    fn tolerance_validated() {
        let dev = device(-5.0, 5.0);
        let drv = DriveSpec::new(&dev, dev.resonator_frequency, 1.0).unwrap();
        let sol = solve_pointer_states(&dev, &drv).unwrap();
        assert!(mixing_ladder(&sol, &dev, &drv, 1e-3).is_err());
    }
}
