//! Cross-module smoke check: the Lindblad oracle reproduces the analytic
//! golden-rule rate on one representative driven configuration. The full
//! grid over both coupling regimes lives in the CLI acceptance suite.

use numsplit_core::bath::{BathSpectrum, TlsSpec};
use numsplit_core::device::{DeviceParams, DriveSpec};
use numsplit_core::oracle::{self, SimConfig};
use numsplit_core::pointer::{drive_for_separation, solve_pointer_states};
use numsplit_core::rate::decay_rate_closed_form;
use numsplit_core::spectrum::pole_decomposition;
use numsplit_core::units::mhz_to_angular;

#[test]
fn oracle_matches_analytic_rate_at_unit_separation() {
    // chi = kappa regime, drive at the midpoint, |delta alpha| = 1, one TLS
    // detuned by 2 chi.
    let dev = DeviceParams::new(
        mhz_to_angular(4746.3),
        mhz_to_angular(6779.6),
        mhz_to_angular(-5.0),
        mhz_to_angular(5.0),
        0.0,
        0.1294,
    )
    .unwrap();
    let bath = BathSpectrum::new(
        vec![TlsSpec::new(
            dev.qubit_frequency + 2.0 * dev.dispersive_shift,
            mhz_to_angular(0.5),
            mhz_to_angular(0.5),
        )
        .unwrap()],
        0.0,
    )
    .unwrap();

    let omega_d = dev.resonator_frequency + 0.5 * dev.dispersive_shift;
    let d_r = drive_for_separation(&dev, omega_d, 1.0).unwrap();
    let drive = DriveSpec::new(&dev, omega_d, d_r).unwrap();
    let sol = solve_pointer_states(&dev, &drive).unwrap();
    let spec = pole_decomposition(&sol, dev.qubit_frequency, 1e-10).unwrap();
    let analytic = decay_rate_closed_form(&spec, &bath).gamma_eg;

    let kappa_g = sol.loss_g;
    let t_sim = oracle::suggested_horizon(kappa_g, analytic);
    let cfg = SimConfig::new(dev, drive, bath.components.clone(), t_sim).unwrap();
    let trace = oracle::evolve(&cfg).unwrap();
    let fit = oracle::extract_rate(&trace).unwrap();

    let dev_rel = (fit.gamma - analytic).abs() / analytic;
    println!(
        "analytic {analytic:.5e} vs oracle {:.5e} ({:.1}% deviation, dim {}, dt {:.2e})",
        fit.gamma,
        100.0 * dev_rel,
        cfg.dimension(),
        trace.dt,
    );
    assert!(
        dev_rel <= 0.15,
        "oracle deviates {:.1}% from the analytic rate",
        100.0 * dev_rel
    );
    assert!(trace.trace_residual_max < 1e-8);
    assert!(trace.hermiticity_residual_max < 1e-8);
    assert!(trace.min_eigenvalue > -1e-7);
}
