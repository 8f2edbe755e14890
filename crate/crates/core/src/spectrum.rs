//! Drive-renormalized qubit correlation function and emission spectrum.
//!
//! With the pointer solution in hand, the qubit coherence is
//!
//! ```text
//!   C_q(t) = exp[i(ω_q+B)t − Γ_m t] · exp{A*[1 − e^{(iΔ_d − κ_g/2)t}]}
//! ```
//!
//! and its Fourier transform `S_q(ω) = ∫ dt e^{iωt} C_q*(t)` is a weighted
//! sum of Lorentzian poles
//!
//! ```text
//!   S_q(ω) = Σ_j 2 Re[ w_j / (γ_j − i(ω − ω_j)) ],
//!   w_j = (−A)^j e^A / j!,   γ_j = Γ_m + jκ_g/2,   ω_j = ω_q + jΔ_d + B.
//! ```
//!
//! The single coefficient `A` (stored on [`PointerSolution`]) feeds both
//! routes, so the FFT cross-check pins the conjugation convention.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::pointer::PointerSolution;

/// Default truncation tolerance for the pole sum tail.
pub const DEFAULT_TRUNCATION: f64 = 1e-10;

/// One Lorentzian pole of the emission spectrum.
#[derive(Debug, Clone, Copy)]
pub struct SpectralPole {
    /// Complex weight w_j = (−A)^j e^A / j!.
    pub weight: Complex64,
    /// Center frequency ω_j = ω_q + jΔ_d + B (rad/µs).
    pub center: f64,
    /// Half-width γ_j = Γ_m + jκ_g/2 (1/µs).
    pub half_width: f64,
}

/// Truncated pole decomposition of the qubit emission spectrum.
#[derive(Debug, Clone)]
pub struct QubitSpectrum {
    pub poles: Vec<SpectralPole>,
    /// Truncation order J (poles run j = 0..=J).
    pub truncation_order: usize,
    /// Bound on the discarded tail Σ_{j>J} |A|^j e^{Re A}/j!.
    pub truncation_residual: f64,
    /// Tolerance the truncation was built with.
    pub truncation_tolerance: f64,
    /// Qubit frequency the spectrum is anchored to (rad/µs).
    pub qubit_frequency: f64,
    /// Pointer solution the spectrum was built from.
    pub source: PointerSolution,
}

impl QubitSpectrum {
    /// Spectral density S_q(ω) in µs. Non-negative; truncation artifacts
    /// below the truncation tolerance are clamped to zero.
    pub fn evaluate(&self, omega: f64) -> f64 {
        let mut total = 0.0;
        for p in &self.poles {
            total += 2.0
                * (p.weight / Complex64::new(p.half_width, -(omega - p.center))).re;
        }
        if total < 0.0 {
            let clamp_scale = self.truncation_tolerance * self.peak_scale().max(1.0);
            debug_assert!(
                total >= -clamp_scale,
                "pole sum dipped negative beyond the truncation tolerance: {total:.3e}"
            );
            return 0.0;
        }
        total
    }

    /// Σ_j Re w_j; equals 1 up to the truncation residual.
    pub fn weight_sum(&self) -> f64 {
        self.poles.iter().map(|p| p.weight.re).sum()
    }

    /// Largest pole half-width (1/µs).
    pub fn max_half_width(&self) -> f64 {
        self.poles.last().map_or(0.0, |p| p.half_width)
    }

    /// Crude scale of the peak height, 2/γ_0.
    fn peak_scale(&self) -> f64 {
        self.poles.first().map_or(0.0, |p| {
            if p.half_width > 0.0 {
                2.0 / p.half_width
            } else {
                0.0
            }
        })
    }

    /// Window [lo, hi] containing all pole centers padded by
    /// `pad` half-widths of the widest pole.
    pub fn support_window(&self, pad: f64) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in &self.poles {
            lo = lo.min(p.center);
            hi = hi.max(p.center);
        }
        let margin = pad * self.max_half_width().max(f64::MIN_POSITIVE);
        (lo - margin, hi + margin)
    }
}

/// Qubit coherence C_q(t) for the system prepared in `|e, α_e⟩`.
pub fn correlation(sol: &PointerSolution, omega_q: f64, t: f64) -> Complex64 {
    debug_assert!(t >= 0.0, "correlation is defined for t >= 0 (got {t})");
    let steady = Complex64::new(-sol.gamma_m * t, (omega_q + sol.freq_shift) * t).exp();
    let a_star = sol.pole_amp.conj();
    let transient = (a_star * (1.0 - (sol.transient_exponent() * t).exp())).exp();
    steady * transient
}

/// Uniformly sampled C_q(t) on [0, t_max].
#[derive(Debug, Clone)]
pub struct CorrelationTrace {
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
}

pub fn correlation_trace(
    sol: &PointerSolution,
    omega_q: f64,
    t_max: f64,
    samples: usize,
) -> Result<CorrelationTrace> {
    if t_max <= 0.0 || t_max.is_nan() || samples < 2 {
        return Err(Error::InvalidParam(
            "correlation trace needs t_max > 0 and at least 2 samples".into(),
        ));
    }
    let dt = t_max / (samples - 1) as f64;
    let times: Vec<f64> = (0..samples).map(|i| i as f64 * dt).collect();
    let values = times.iter().map(|&t| correlation(sol, omega_q, t)).collect();
    Ok(CorrelationTrace { times, values })
}

/// Tail bound Σ_{j>order} |a|^j e^{re_a}/j!, summed forward until terms
/// become negligible.
fn tail_bound(a_abs: f64, re_a: f64, order: usize) -> f64 {
    let log_scale = re_a;
    // term_{order+1} = |a|^{order+1}/(order+1)!
    let mut log_term = (order as f64 + 1.0) * a_abs.max(f64::MIN_POSITIVE).ln();
    for j in 1..=(order + 1) {
        log_term -= (j as f64).ln();
    }
    let mut term = (log_term + log_scale).exp();
    let mut sum = 0.0;
    let mut j = order + 1;
    loop {
        sum += term;
        j += 1;
        term *= a_abs / j as f64;
        if term < sum * 1e-18 + 1e-300 || j > order + 400 {
            break;
        }
    }
    sum
}

/// Decompose the emission spectrum into its truncated pole sum.
///
/// The truncation order is the smallest J whose tail bound falls below
/// `eps_trunc`, floored at `⌈|A| + 10√(|A|+1)⌉` so the retained weights
/// always cover the bulk of the Poisson-like distribution.
pub fn pole_decomposition(
    sol: &PointerSolution,
    omega_q: f64,
    eps_trunc: f64,
) -> Result<QubitSpectrum> {
    if eps_trunc <= 0.0 || eps_trunc > 1e-6 || eps_trunc.is_nan() {
        return Err(Error::InvalidParam(format!(
            "truncation tolerance must lie in (0, 1e-6], got {eps_trunc}"
        )));
    }
    if sol.loss_g <= 0.0 {
        return Err(Error::Degenerate(
            "pole widths cannot grow: kappa_g <= 0".into(),
        ));
    }
    let a = sol.pole_amp;
    let a_abs = a.norm();
    let floor = if a_abs == 0.0 {
        0 // all higher weights vanish identically
    } else {
        (a_abs + 10.0 * (a_abs + 1.0).sqrt()).ceil() as usize
    };
    let mut order = 0;
    while tail_bound(a_abs, a.re, order) >= eps_trunc {
        order += 1;
        if order > 10_000 {
            return Err(Error::InvalidParam(format!(
                "pole sum does not truncate: |A| = {a_abs:.3e}"
            )));
        }
    }
    let order = order.max(floor);
    let residual = tail_bound(a_abs, a.re, order);

    let mut poles = Vec::with_capacity(order + 1);
    let mut weight = a.exp(); // w_0 = e^A
    for j in 0..=order {
        poles.push(SpectralPole {
            weight,
            center: omega_q + j as f64 * sol.detuning + sol.freq_shift,
            half_width: sol.gamma_m + j as f64 * sol.loss_g / 2.0,
        });
        weight *= -a / (j as f64 + 1.0);
    }
    Ok(QubitSpectrum {
        poles,
        truncation_order: order,
        truncation_residual: residual,
        truncation_tolerance: eps_trunc,
        qubit_frequency: omega_q,
        source: *sol,
    })
}

/// Spectrum sampled on a uniform frequency grid.
#[derive(Debug, Clone)]
pub struct SampledSpectrum {
    pub omegas: Vec<f64>,
    pub values: Vec<f64>,
}

/// Automatic horizon and grid size for [`spectrum_via_fft`]: the horizon
/// resolves the slowest decay 20 times over, the grid's Nyquist range covers
/// every pole center padded by 20 maximal widths.
pub fn fft_params(sol: &PointerSolution, omega_q: f64) -> Result<(f64, usize)> {
    if sol.gamma_m <= 0.0 {
        return Err(Error::Degenerate(
            "zero-width spectrum: FFT route needs gamma_m > 0".into(),
        ));
    }
    let spec = pole_decomposition(sol, omega_q, DEFAULT_TRUNCATION)?;
    let horizon = 20.0 / sol.gamma_m.min(sol.loss_g / 2.0);
    let center_span = sol.detuning.abs() * spec.truncation_order as f64;
    let span = center_span + 20.0 * spec.max_half_width();
    let dt_max = std::f64::consts::PI / span;
    let n = (horizon / dt_max).ceil().max(64.0);
    let n = 1usize << (n.log2().ceil() as u32);
    Ok((horizon, n))
}

/// Evaluate S_q(ω) numerically as the half-line Fourier transform
/// `2 Re ∫_0^∞ e^{iωt} C_q*(t) dt`, discretized with a trapezoid rule on an
/// N-point grid and accelerated by an FFT. Serves as the cross-check for the
/// analytic pole sum.
pub fn spectrum_via_fft(
    sol: &PointerSolution,
    omega_q: f64,
    horizon: f64,
    n: usize,
) -> Result<SampledSpectrum> {
    if sol.gamma_m <= 0.0 {
        if sol.pole_amp.norm() > 0.0 {
            return Err(Error::Degenerate(
                "non-decaying correlation: gamma_m = 0 with A != 0".into(),
            ));
        }
        return Err(Error::Degenerate(
            "zero-drive spectrum is a delta line; use the analytic shortcut".into(),
        ));
    }
    if !n.is_power_of_two() || n < 64 {
        return Err(Error::InvalidParam(format!(
            "FFT size must be a power of two >= 64, got {n}"
        )));
    }
    let min_horizon = 20.0 / sol.gamma_m.min(sol.loss_g / 2.0);
    if horizon < min_horizon * (1.0 - 1e-12) {
        return Err(Error::InvalidParam(format!(
            "horizon {horizon:.3} us too short to resolve the slowest decay (need >= {min_horizon:.3})"
        )));
    }
    let spec = pole_decomposition(sol, omega_q, DEFAULT_TRUNCATION)?;
    let span_needed =
        sol.detuning.abs() * spec.truncation_order as f64 + 20.0 * spec.max_half_width();
    let dt = horizon / n as f64;
    if std::f64::consts::PI / dt < span_needed {
        return Err(Error::InvalidParam(format!(
            "Nyquist range {:.1} rad/us does not cover the pole structure ({span_needed:.1})",
            std::f64::consts::PI / dt
        )));
    }

    // Work relative to the zeroth pole center so the sampled signal is slow.
    let omega_ref = omega_q + sol.freq_shift;
    let mut buf: Vec<Complex64> = (0..n)
        .map(|k| {
            let t = k as f64 * dt;
            correlation(sol, omega_q, t).conj() * Complex64::new(0.0, omega_ref * t).exp()
        })
        .collect();
    let g0 = buf[0];
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);

    // S(omega_ref + nu_k) = 2 Re{ dt (G_k - g_0/2) }, nu_k = 2 pi k / horizon
    // with the upper half of the grid folded to negative frequencies.
    let dnu = 2.0 * std::f64::consts::PI / horizon;
    let mut pairs: Vec<(f64, f64)> = buf
        .iter()
        .enumerate()
        .map(|(k, gk)| {
            let nu = if k <= n / 2 {
                k as f64 * dnu
            } else {
                (k as f64 - n as f64) * dnu
            };
            (omega_ref + nu, 2.0 * (dt * (gk - g0 / 2.0)).re)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(SampledSpectrum {
        omegas: pairs.iter().map(|p| p.0).collect(),
        values: pairs.iter().map(|p| p.1).collect(),
    })
}

/// First moment ∫ (dω/2π) ω S_q(ω) of the emission spectrum, evaluated
/// analytically as Im{Ċ_q(0)} = ω_q + |α_e|²χ + 2d_r(u−v)Re{α_e}.
pub fn first_moment(sol: &PointerSolution, omega_q: f64) -> f64 {
    omega_q
        + sol.chi_tilde.re * sol.alpha_e.norm_sqr()
        + 2.0 * sol.drive_asym * sol.alpha_e.re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{DeviceParams, DriveSpec};
    use crate::pointer::{drive_for_separation, solve_pointer_states};
    use crate::units::{mhz_to_angular, TWO_PI};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn device(chi_mhz: f64, kappa_mhz: f64, dp: f64) -> DeviceParams {
        DeviceParams::new(
            mhz_to_angular(4746.3),
            mhz_to_angular(6779.6),
            mhz_to_angular(chi_mhz),
            mhz_to_angular(kappa_mhz),
            dp,
            0.1294,
        )
        .unwrap()
    }

    fn fig2a_blue() -> (DeviceParams, PointerSolution) {
        let dev = device(-5.0, 5.0, 0.0);
        let d_r = drive_for_separation(&dev, dev.resonator_frequency, 1.0).unwrap();
        let drv = DriveSpec::new(&dev, dev.resonator_frequency, d_r).unwrap();
        (dev, solve_pointer_states(&dev, &drv).unwrap())
    }

    #[test]
    fn correlation_initial_value() {
        let (dev, sol) = fig2a_blue();
        let c0 = correlation(&sol, dev.qubit_frequency, 0.0);
        assert_relative_eq!((c0 - Complex64::ONE).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn undriven_qubit_keeps_coherence() {
        let dev = device(-5.0, 5.0, 0.0);
        let drv = DriveSpec::new(&dev, dev.resonator_frequency, 0.0).unwrap();
        let sol = solve_pointer_states(&dev, &drv).unwrap();
        for t in [0.1, 1.0, 7.3] {
            let c = correlation(&sol, dev.qubit_frequency, t);
            assert_relative_eq!(c.norm(), 1.0, max_relative = 1e-14);
            let expect = Complex64::new(0.0, dev.qubit_frequency * t).exp();
            assert_relative_eq!((c - expect).norm(), 0.0, epsilon = 1e-9);
        }
    }

    /// Oracle: evaluate the double exponential by its power series
    /// exp{A*(1 − e^{st})} = Σ_k [A*(1 − e^{st})]^k / k!, summed term by term
    /// to machine precision, independent of the library exp() composition.
    #[test]
    fn correlation_matches_series_expansion() {
        let (dev, sol) = fig2a_blue();
        let t = 1.0 / dev.base_loss;
        let a_star = sol.pole_amp.conj();
        let inner = a_star * (1.0 - (sol.transient_exponent() * t).exp());
        let mut series = Complex64::ZERO;
        let mut term = Complex64::ONE;
        let mut k = 0usize;
        while term.norm() > 1e-20 {
            series += term;
            k += 1;
            term *= inner / k as f64;
        }
        let steady =
            Complex64::new(-sol.gamma_m * t, (dev.qubit_frequency + sol.freq_shift) * t).exp();
        let expect = steady * series;
        let got = correlation(&sol, dev.qubit_frequency, t);
        assert_relative_eq!((got - expect).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn correlation_magnitude_bounded() {
        let (dev, sol) = fig2a_blue();
        for i in 0..400 {
            let t = i as f64 * 0.01;
            assert!(correlation(&sol, dev.qubit_frequency, t).norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn lorentzian_limit_single_pole() {
        // A = 0 with a finite width: single Lorentzian centered at
        // omega_q + B with half-width Gamma_m and peak height 2/Gamma_m.
        let (dev, mut sol) = fig2a_blue();
        sol.pole_amp = Complex64::ZERO;
        let spec = pole_decomposition(&sol, dev.qubit_frequency, 1e-10).unwrap();
        assert_relative_eq!(spec.poles[0].weight.re, 1.0, max_relative = 1e-14);
        assert_eq!(spec.poles[0].center, dev.qubit_frequency + sol.freq_shift);
        assert_eq!(spec.poles[0].half_width, sol.gamma_m);
        let peak = spec.evaluate(dev.qubit_frequency + sol.freq_shift);
        assert_relative_eq!(peak, 2.0 / sol.gamma_m, max_relative = 1e-12);
        // far tail decays
        let far = spec.evaluate(dev.qubit_frequency + 1e7 * spec.max_half_width());
        assert!(far < 1e-9 * peak);
    }

    #[test]
    fn weights_telescope_to_unity() {
        let (dev, sol) = fig2a_blue();
        let spec = pole_decomposition(&sol, dev.qubit_frequency, 1e-10).unwrap();
        assert_abs_diff_eq!(spec.weight_sum(), 1.0, epsilon = 1e-10);
        assert!(spec.truncation_residual < 1e-10);
        // half-widths strictly increasing
        for w in spec.poles.windows(2) {
            assert!(w[1].half_width > w[0].half_width);
        }
    }

    #[test]
    fn pole_spacing_follows_detuning() {
        // chi/2pi = -10 MHz, drive at omega_r(e): centers spaced by |chi|.
        let dev = device(-10.0, 2.5, 0.0);
        let omega_d = dev.resonator_frequency_e();
        let d_r = drive_for_separation(&dev, omega_d, 1.0).unwrap();
        let drv = DriveSpec::new(&dev, omega_d, d_r).unwrap();
        let sol = solve_pointer_states(&dev, &drv).unwrap();
        let spec = pole_decomposition(&sol, dev.qubit_frequency, 1e-10).unwrap();
        for w in spec.poles.windows(2) {
            // centers sit at |omega_q| ~ 3e4 rad/us; differencing them is
            // accurate to ~1e-13 relative of the spacing
            assert_relative_eq!(
                w[1].center - w[0].center,
                mhz_to_angular(-10.0),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn coincident_poles_at_zero_detuning() {
        let (dev, sol) = fig2a_blue();
        let spec = pole_decomposition(&sol, dev.qubit_frequency, 1e-10).unwrap();
        let center0 = spec.poles[0].center;
        for p in &spec.poles {
            assert!((p.center - center0).abs() < 1e-12 * dev.qubit_frequency.abs());
        }
    }

    #[test]
    fn truncation_tolerance_validated() {
        let (dev, sol) = fig2a_blue();
        assert!(pole_decomposition(&sol, dev.qubit_frequency, 1e-5).is_err());
        assert!(pole_decomposition(&sol, dev.qubit_frequency, 0.0).is_err());
    }

    #[test]
    fn fft_matches_poles_and_normalizes() {
        let (dev, sol) = fig2a_blue();
        let (horizon, n) = fft_params(&sol, dev.qubit_frequency).unwrap();
        let sampled = spectrum_via_fft(&sol, dev.qubit_frequency, horizon, n).unwrap();
        let spec = pole_decomposition(&sol, dev.qubit_frequency, 1e-10).unwrap();

        let mut diff2 = 0.0;
        let mut norm2 = 0.0;
        let mut integral = 0.0;
        for (i, (&w, &s)) in sampled.omegas.iter().zip(&sampled.values).enumerate() {
            let p = spec.evaluate(w);
            diff2 += (s - p) * (s - p);
            norm2 += p * p;
            if i + 1 < sampled.omegas.len() {
                integral += 0.5 * (s + sampled.values[i + 1]) * (sampled.omegas[i + 1] - w);
            }
        }
        assert!((diff2 / norm2).sqrt() < 1e-3, "L2 = {}", (diff2 / norm2).sqrt());
        assert_abs_diff_eq!(integral / TWO_PI, 1.0, epsilon = 1e-4);
    }

    #[test]
    fn fft_rejects_degenerate_and_bad_grids() {
        let dev = device(-5.0, 5.0, 0.0);
        let drv = DriveSpec::new(&dev, dev.resonator_frequency, 0.0).unwrap();
        let sol = solve_pointer_states(&dev, &drv).unwrap();
        assert!(spectrum_via_fft(&sol, dev.qubit_frequency, 10.0, 1024).is_err());

        let (_, sol) = fig2a_blue();
        assert!(spectrum_via_fft(&sol, dev.qubit_frequency, 10.0, 1000).is_err()); // not pow2
        assert!(spectrum_via_fft(&sol, dev.qubit_frequency, 1e-3, 1024).is_err()); // horizon short
    }

    #[test]
    fn first_moment_zero_drive() {
        let dev = device(-5.0, 5.0, 0.0);
        let drv = DriveSpec::new(&dev, dev.resonator_frequency, 0.0).unwrap();
        let sol = solve_pointer_states(&dev, &drv).unwrap();
        assert_eq!(first_moment(&sol, dev.qubit_frequency), dev.qubit_frequency);
    }

    #[test]
    fn first_moment_symmetric_is_stark_shift() {
        let (dev, sol) = fig2a_blue();
        let expect = dev.qubit_frequency + sol.alpha_e.norm_sqr() * dev.dispersive_shift;
        assert_relative_eq!(
            first_moment(&sol, dev.qubit_frequency),
            expect,
            max_relative = 1e-14
        );
    }

    /// Numerical-differentiation oracle: the analytic moment must match
    /// Im{(C_q(h) − C_q(0))/h} extrapolated h → 0 (Richardson step).
    #[test]
    fn first_moment_matches_finite_difference() {
        let dev = device(-8.8, 7.7536, -0.1548);
        let omega_d = dev.resonator_frequency + 0.42 * dev.dispersive_shift;
        let drv = DriveSpec::new(&dev, omega_d, TWO_PI * 3.0).unwrap();
        let sol = solve_pointer_states(&dev, &drv).unwrap();

        let fd = |h: f64| {
            let c = correlation(&sol, dev.qubit_frequency, h);
            ((c - Complex64::ONE) / h).im
        };
        let h = 1e-7;
        let richardson = (4.0 * fd(h / 2.0) - fd(h)) / 3.0;
        let analytic = first_moment(&sol, dev.qubit_frequency);
        // compare the drive-induced shift, not the absolute frequency
        let shift = analytic - dev.qubit_frequency;
        let shift_fd = richardson - dev.qubit_frequency;
        assert_relative_eq!(shift, shift_fd, max_relative = 1e-3);
    }

    #[test]
    fn short_time_dephasing_is_quadratic() {
        // -log|C_q(t)| = O(t^2) for symmetric losses: fit the linear
        // coefficient on a shrinking grid and check it vanishes.
        let (dev, sol) = fig2a_blue();
        for t in [1e-4, 1e-5, 1e-6] {
            let dephasing = -correlation(&sol, dev.qubit_frequency, t).norm().ln();
            // quadratic bound with the known curvature scale
            let curvature = sol.gamma_m * sol.loss_g;
            assert!(
                dephasing.abs() < 2.0 * curvature * t * t,
                "t={t}: dephasing {dephasing:.3e} not quadratic"
            );
        }
    }

    #[test]
    fn lorentzian_limit_weak_drive() {
        // |delta_alpha|^2 = 0.01: deviation from the single Lorentzian of
        // width Gamma_m stays below 3% within +-10 Gamma_m of the center.
        let dev = device(-5.0, 5.0, 0.0);
        let d_r = drive_for_separation(&dev, dev.resonator_frequency, 0.1).unwrap();
        let drv = DriveSpec::new(&dev, dev.resonator_frequency, d_r).unwrap();
        let sol = solve_pointer_states(&dev, &drv).unwrap();
        let spec = pole_decomposition(&sol, dev.qubit_frequency, 1e-10).unwrap();
        let center = dev.qubit_frequency + sol.freq_shift;
        let mut sup: f64 = 0.0;
        for i in 0..=1000 {
            let w = center + (i as f64 / 1000.0 * 2.0 - 1.0) * 10.0 * sol.gamma_m;
            let lorentz =
                2.0 * sol.gamma_m / ((w - center).powi(2) + sol.gamma_m * sol.gamma_m);
            sup = sup.max((spec.evaluate(w) - lorentz).abs() / lorentz);
        }
        assert!(sup <= 0.03, "sup deviation {sup:.4}");
    }

    #[test]
    fn correlation_trace_grid() {
        let (dev, sol) = fig2a_blue();
        let trace = correlation_trace(&sol, dev.qubit_frequency, 2.0, 101).unwrap();
        assert_eq!(trace.times.len(), 101);
        assert_relative_eq!((trace.values[0] - Complex64::ONE).norm(), 0.0, epsilon = 1e-14);
        assert!(correlation_trace(&sol, dev.qubit_frequency, 0.0, 101).is_err());
    }
}
