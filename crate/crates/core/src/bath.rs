//! TLS bath spectral densities and inversion-recovery trace analysis.
//!
//! Each strongly coupled two-level defect contributes a Lorentzian to the
//! bath noise density seen by the qubit,
//!
//! ```text
//!   S_B(ω) = Σ_k 2 g_k² γ_{2,k} / ((ω − ω_{tls,k})² + γ_{2,k}²) + 1/T1,
//! ```
//!
//! with the constant floor accounting for everything else. Near resonance a
//! coherent TLS imprints swap oscillations on the qubit decay,
//!
//! ```text
//!   P_e(t) = a₁ cos(2 g_tls t) e^{−γ₂ t} + a₂ e^{−γ₁ t},
//! ```
//!
//! from which `g_tls` and `γ₂` are recovered by nonlinear least squares.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::lm::{self, LmOptions};
use crate::quad;

/// One two-level defect coupled to the qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TlsSpec {
    /// TLS transition frequency ω_tls (rad/µs).
    pub frequency: f64,
    /// Coupling strength g_tls (rad/µs), ≥ 0.
    pub coupling: f64,
    /// Total dephasing rate γ_2 (1/µs), > 0.
    pub dephasing: f64,
    /// Optional γ_1/γ_φ split; must satisfy γ_2 = γ_1/2 + γ_φ.
    pub relaxation: Option<f64>,
    pub pure_dephasing: Option<f64>,
}

impl TlsSpec {
    pub fn new(frequency: f64, coupling: f64, dephasing: f64) -> Result<Self> {
        let tls = Self {
            frequency,
            coupling,
            dephasing,
            relaxation: None,
            pure_dephasing: None,
        };
        tls.validate()?;
        Ok(tls)
    }

    pub fn with_split(
        frequency: f64,
        coupling: f64,
        relaxation: f64,
        pure_dephasing: f64,
    ) -> Result<Self> {
        let tls = Self {
            frequency,
            coupling,
            dephasing: relaxation / 2.0 + pure_dephasing,
            relaxation: Some(relaxation),
            pure_dephasing: Some(pure_dephasing),
        };
        tls.validate()?;
        Ok(tls)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("frequency", self.frequency),
            ("coupling", self.coupling),
            ("dephasing", self.dephasing),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParam(format!("tls {name} is not finite")));
            }
        }
        if self.coupling < 0.0 {
            return Err(Error::InvalidParam(format!(
                "tls coupling must be >= 0, got {}",
                self.coupling
            )));
        }
        if self.dephasing <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "tls dephasing must be > 0, got {}",
                self.dephasing
            )));
        }
        if let (Some(g1), Some(gp)) = (self.relaxation, self.pure_dephasing) {
            if g1 < 0.0 || gp < 0.0 {
                return Err(Error::InvalidParam("tls rate split must be non-negative".into()));
            }
            let sum = g1 / 2.0 + gp;
            if (sum - self.dephasing).abs() > 1e-12 * self.dephasing.max(1.0) {
                return Err(Error::InvalidParam(format!(
                    "tls rate split inconsistent: gamma_1/2 + gamma_phi = {sum} != gamma_2 = {}",
                    self.dephasing
                )));
            }
        }
        Ok(())
    }

    /// Lorentzian contribution 2g²γ₂/((ω−ω_tls)² + γ₂²) in 1/µs.
    pub fn evaluate(&self, omega: f64) -> f64 {
        2.0 * self.coupling * self.coupling * self.dephasing
            / ((omega - self.frequency).powi(2) + self.dephasing * self.dephasing)
    }
}

/// Composite bath: Lorentzian TLS components over a constant floor.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BathSpectrum {
    pub components: Vec<TlsSpec>,
    /// Constant background rate 1/T1 (1/µs), ≥ 0.
    pub background: f64,
}

impl BathSpectrum {
    pub fn new(components: Vec<TlsSpec>, background: f64) -> Result<Self> {
        if background < 0.0 || !background.is_finite() {
            return Err(Error::InvalidParam(format!(
                "bath background must be >= 0, got {background}"
            )));
        }
        for c in &components {
            c.validate()?;
        }
        Ok(Self {
            components,
            background,
        })
    }

    /// Flat bath S_B = c.
    pub fn constant(c: f64) -> Result<Self> {
        Self::new(Vec::new(), c)
    }

    /// Noise spectral density S_B(ω) in 1/µs.
    pub fn evaluate(&self, omega: f64) -> f64 {
        self.background + self.components.iter().map(|c| c.evaluate(omega)).sum::<f64>()
    }
}

/// Measured (or synthesized) excited-population decay trace.
#[derive(Debug, Clone)]
pub struct DecayTrace {
    pub times: Vec<f64>,
    pub populations: Vec<f64>,
}

impl DecayTrace {
    pub fn new(times: Vec<f64>, populations: Vec<f64>) -> Result<Self> {
        if times.len() != populations.len() {
            return Err(Error::InvalidParam(format!(
                "trace lengths differ: {} times vs {} samples",
                times.len(),
                populations.len()
            )));
        }
        if times.iter().any(|t| !t.is_finite()) || populations.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParam("trace contains non-finite entries".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParam("trace time grid must be strictly increasing".into()));
        }
        Ok(Self { times, populations })
    }
}

/// Parameters of the inversion-recovery model
/// `P_e(t) = a₁ cos(2 g t) e^{−γ₂ t} + a₂ e^{−γ₁ t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionRecoveryParams {
    pub amp_osc: f64,
    pub amp_exp: f64,
    /// g_tls (rad/µs).
    pub coupling: f64,
    /// γ_2 (1/µs).
    pub dephasing: f64,
    /// γ_1 (1/µs).
    pub background: f64,
}

impl InversionRecoveryParams {
    pub fn evaluate(&self, t: f64) -> f64 {
        self.amp_osc * (2.0 * self.coupling * t).cos() * (-self.dephasing * t).exp()
            + self.amp_exp * (-self.background * t).exp()
    }
}

/// Synthesize a decay trace from the model plus seeded Gaussian noise.
pub fn synth_inversion_recovery(
    params: &InversionRecoveryParams,
    times: &[f64],
    noise_sd: f64,
    seed: u64,
) -> Result<DecayTrace> {
    if times.windows(2).any(|w| w[1] <= w[0]) || times.is_empty() {
        return Err(Error::InvalidParam("time grid must be non-empty and increasing".into()));
    }
    if noise_sd < 0.0 || noise_sd.is_nan() {
        return Err(Error::InvalidParam(format!("noise_sd must be >= 0, got {noise_sd}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_sd.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::InvalidParam(format!("noise distribution: {e}")))?;
    let populations = times
        .iter()
        .map(|&t| {
            let clean = params.evaluate(t);
            if noise_sd > 0.0 {
                clean + noise.sample(&mut rng)
            } else {
                clean
            }
        })
        .collect();
    DecayTrace::new(times.to_vec(), populations)
}

/// Result of fitting the five-parameter inversion-recovery model.
#[derive(Debug, Clone)]
pub struct InversionRecoveryFit {
    pub params: InversionRecoveryParams,
    /// Row-major 5×5 covariance (a₁, a₂, g, γ₂, γ₁); `None` if singular.
    pub covariance: Option<Vec<f64>>,
    pub residual_rms: f64,
    pub iterations: usize,
    /// Set when the data cannot constrain the coupling (a₁ ≈ 0).
    pub coupling_unidentifiable: bool,
    /// Set when the trace span covers fewer than 3 fitted dephasing times.
    pub window_short: bool,
}

fn model_residuals(trace: &DecayTrace, x: &[f64], r: &mut [f64]) {
    let p = InversionRecoveryParams {
        amp_osc: x[0],
        amp_exp: x[1],
        coupling: x[2],
        dephasing: x[3],
        background: x[4],
    };
    for (i, (&t, &y)) in trace.times.iter().zip(&trace.populations).enumerate() {
        r[i] = p.evaluate(t) - y;
    }
}

fn model_jacobian(trace: &DecayTrace, x: &[f64], j: &mut [f64]) {
    let (a1, _a2, g, g2, g1) = (x[0], x[1], x[2], x[3], x[4]);
    for (i, &t) in trace.times.iter().enumerate() {
        let e2 = (-g2 * t).exp();
        let e1 = (-g1 * t).exp();
        let c = (2.0 * g * t).cos();
        let s = (2.0 * g * t).sin();
        let row = &mut j[i * 5..(i + 1) * 5];
        row[0] = c * e2;
        row[1] = e1;
        row[2] = -2.0 * t * a1 * s * e2;
        row[3] = -t * a1 * c * e2;
        row[4] = -t * x[1] * e1;
    }
}

/// Fit the inversion-recovery model to a trace by damped least squares with
/// the analytic Jacobian. Amplitudes are bounded to [−1.5, 1.5] and rates
/// kept positive.
pub fn fit_inversion_recovery(
    trace: &DecayTrace,
    initial: &InversionRecoveryParams,
) -> Result<InversionRecoveryFit> {
    if trace.times.len() < 20 {
        return Err(Error::InvalidParam(format!(
            "need at least 20 samples to fit, got {}",
            trace.times.len()
        )));
    }
    let x0 = [
        initial.amp_osc,
        initial.amp_exp,
        initial.coupling,
        initial.dephasing,
        initial.background,
    ];
    let lower = [-1.5, -1.5, 0.0, 1e-9, 1e-9];
    let upper = [1.5, 1.5, f64::INFINITY, f64::INFINITY, f64::INFINITY];
    let m = trace.times.len();
    let fit = lm::fit(
        |x, r| model_residuals(trace, x, r),
        |x, j| model_jacobian(trace, x, j),
        &x0,
        &lower,
        &upper,
        m,
        &LmOptions::default(),
    )?;

    let params = InversionRecoveryParams {
        amp_osc: fit.params[0],
        amp_exp: fit.params[1],
        coupling: fit.params[2],
        dephasing: fit.params[3],
        background: fit.params[4],
    };
    // identifiability: the coupling column of the Jacobian collapses when
    // a1 ~ 0 (pure single exponential)
    let col_max = fit
        .jacobian_column_norms
        .iter()
        .fold(0.0f64, |a, &b| a.max(b));
    let coupling_unidentifiable =
        fit.jacobian_column_norms[2] < 1e-8 * col_max.max(f64::MIN_POSITIVE);
    let span = trace.times.last().unwrap() - trace.times[0];
    let window_short = span * params.dephasing < 3.0;
    Ok(InversionRecoveryFit {
        covariance: fit.covariance(m),
        residual_rms: fit.residual_rms,
        iterations: fit.iterations,
        params,
        coupling_unidentifiable,
        window_short,
    })
}

/// Package a fitted TLS into a bath spectrum at a known TLS frequency over a
/// constant background floor.
pub fn bath_from_fit(
    fit: &InversionRecoveryFit,
    tls_frequency: f64,
    background: f64,
) -> Result<BathSpectrum> {
    if fit.params.coupling < 0.0 || fit.params.dephasing <= 0.0 {
        return Err(Error::InvalidParam(format!(
            "fitted rates invalid: g = {}, gamma_2 = {}",
            fit.params.coupling, fit.params.dephasing
        )));
    }
    if fit.params.coupling == 0.0 || fit.coupling_unidentifiable {
        return BathSpectrum::new(Vec::new(), background);
    }
    BathSpectrum::new(
        vec![TlsSpec::new(
            tls_frequency,
            fit.params.coupling,
            fit.params.dephasing,
        )?],
        background,
    )
}

/// Quadrature check of the residue identity ∫ dω/2π (one Lorentzian) = g².
pub fn component_weight_by_quadrature(tls: &TlsSpec, rel_tol: f64) -> Result<f64> {
    let r = quad::integrate_with_tails(
        |w| tls.evaluate(w),
        tls.frequency - 50.0 * tls.dephasing,
        tls.frequency + 50.0 * tls.dephasing,
        rel_tol,
        1e-300,
    )?;
    Ok(r.value / crate::units::TWO_PI)
}
