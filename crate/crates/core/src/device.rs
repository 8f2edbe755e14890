//! Static device constants and readout drive description.

use crate::error::{Error, Result};

/// Device constants of the transmon-resonator readout system.
///
/// Frequencies are angular (rad/µs), `base_loss` is 1/µs. The dispersive
/// shift is the full shift: the resonator frequency with the qubit excited is
/// `resonator_frequency + dispersive_shift`. The Purcell filter enters only
/// through the asymmetry `δ_p`, which skews the state-conditioned loss rates
/// to `κ_g = κ(1−δ_p/2)²` and `κ_e = κ(1+δ_p/2)²` and the drive amplitudes
/// likewise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceParams {
    /// Qubit transition frequency ω_q (rad/µs).
    pub qubit_frequency: f64,
    /// Ground-state resonator frequency ω_r(g) (rad/µs).
    pub resonator_frequency: f64,
    /// Full dispersive shift χ (rad/µs, signed).
    pub dispersive_shift: f64,
    /// Bare resonator loss rate κ (1/µs).
    pub base_loss: f64,
    /// Purcell asymmetry δ_p (dimensionless).
    pub purcell_asymmetry: f64,
    /// Measurement-chain quantum efficiency η ∈ (0, 1].
    pub quantum_efficiency: f64,
    /// Purcell filter frequency ω_p (rad/µs). Ingested metadata, unused by
    /// the formulas.
    pub purcell_frequency: Option<f64>,
    /// Readout-Purcell coupling J (rad/µs). Ingested metadata, unused.
    pub purcell_coupling: Option<f64>,
}

impl DeviceParams {
    pub fn new(
        qubit_frequency: f64,
        resonator_frequency: f64,
        dispersive_shift: f64,
        base_loss: f64,
        purcell_asymmetry: f64,
        quantum_efficiency: f64,
    ) -> Result<Self> {
        let dev = Self {
            qubit_frequency,
            resonator_frequency,
            dispersive_shift,
            base_loss,
            purcell_asymmetry,
            quantum_efficiency,
            purcell_frequency: None,
            purcell_coupling: None,
        };
        dev.validate()?;
        Ok(dev)
    }

    /// Build from the state-conditioned loss rates `κ_g`, `κ_e` instead of
    /// `(κ, δ_p)`, the form in which fitted device tables usually arrive.
    pub fn from_state_losses(
        qubit_frequency: f64,
        resonator_frequency: f64,
        dispersive_shift: f64,
        loss_g: f64,
        loss_e: f64,
        quantum_efficiency: f64,
    ) -> Result<Self> {
        if loss_g <= 0.0 || loss_e <= 0.0 || loss_g.is_nan() || loss_e.is_nan() {
            return Err(Error::InvalidParam(format!(
                "state losses must be positive, got kappa_g={loss_g}, kappa_e={loss_e}"
            )));
        }
        // sqrt(kappa_g/kappa_e) = (1 - dp/2)/(1 + dp/2)
        let r = (loss_g / loss_e).sqrt();
        let delta_p = 2.0 * (1.0 - r) / (1.0 + r);
        let kappa = loss_g / (1.0 - delta_p / 2.0).powi(2);
        Self::new(
            qubit_frequency,
            resonator_frequency,
            dispersive_shift,
            kappa,
            delta_p,
            quantum_efficiency,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("qubit_frequency", self.qubit_frequency),
            ("resonator_frequency", self.resonator_frequency),
            ("dispersive_shift", self.dispersive_shift),
            ("base_loss", self.base_loss),
            ("purcell_asymmetry", self.purcell_asymmetry),
            ("quantum_efficiency", self.quantum_efficiency),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidParam(format!("{name} is not finite")));
            }
        }
        if self.base_loss <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "base_loss must be > 0, got {}",
                self.base_loss
            )));
        }
        if self.loss_g() <= 0.0 || self.loss_e() <= 0.0 {
            return Err(Error::Degenerate(format!(
                "purcell_asymmetry = {} makes one state-conditioned loss rate vanish",
                self.purcell_asymmetry
            )));
        }
        if self.quantum_efficiency <= 0.0 || self.quantum_efficiency > 1.0 {
            return Err(Error::InvalidParam(format!(
                "quantum_efficiency must lie in (0, 1], got {}",
                self.quantum_efficiency
            )));
        }
        Ok(())
    }

    /// Loss rate with the qubit in the ground state, κ_g = κ(1−δ_p/2)².
    pub fn loss_g(&self) -> f64 {
        self.base_loss * (1.0 - self.purcell_asymmetry / 2.0).powi(2)
    }

    /// Loss rate with the qubit in the excited state, κ_e = κ(1+δ_p/2)².
    pub fn loss_e(&self) -> f64 {
        self.base_loss * (1.0 + self.purcell_asymmetry / 2.0).powi(2)
    }

    /// Excited-state resonator frequency ω_r(e) = ω_r + χ.
    pub fn resonator_frequency_e(&self) -> f64 {
        self.resonator_frequency + self.dispersive_shift
    }
}

/// Continuous-wave readout drive.
///
/// The four factors (x, y, u, v) generalize the Purcell asymmetry: the
/// damping operator is `(x|e⟩⟨e| + y|g⟩⟨g|)â` and the drive couples as
/// `d_r(u|e⟩⟨e| + v|g⟩⟨g|)(â†+â)`. For a physical Purcell filter
/// `x = u = 1+δ_p/2` and `y = v = 1−δ_p/2`, which [`DriveSpec::new`]
/// enforces exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSpec {
    /// Lab-frame drive frequency ω_d (rad/µs).
    pub frequency: f64,
    /// Drive amplitude d_r (rad/µs), non-negative.
    pub amplitude: f64,
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub v: f64,
}

impl DriveSpec {
    /// Drive with the default Purcell factors of `device`.
    pub fn new(device: &DeviceParams, frequency: f64, amplitude: f64) -> Result<Self> {
        let half = device.purcell_asymmetry / 2.0;
        Self::with_factors(
            frequency,
            amplitude,
            1.0 + half,
            1.0 - half,
            1.0 + half,
            1.0 - half,
        )
    }

    /// Drive with explicit generalized factors.
    pub fn with_factors(
        frequency: f64,
        amplitude: f64,
        x: f64,
        y: f64,
        u: f64,
        v: f64,
    ) -> Result<Self> {
        for (name, val) in [
            ("frequency", frequency),
            ("amplitude", amplitude),
            ("x", x),
            ("y", y),
            ("u", u),
            ("v", v),
        ] {
            if !val.is_finite() {
                return Err(Error::InvalidParam(format!("drive {name} is not finite")));
            }
        }
        if amplitude < 0.0 {
            return Err(Error::InvalidParam(format!(
                "drive amplitude must be >= 0, got {amplitude}"
            )));
        }
        Ok(Self {
            frequency,
            amplitude,
            x,
            y,
            u,
            v,
        })
    }

    /// Drive detuning Δ_d = ω_d − ω_r(g).
    pub fn detuning(&self, device: &DeviceParams) -> f64 {
        self.frequency - device.resonator_frequency
    }

    /// Excited-state drive amplitude d_{r,e} = u·d_r.
    pub fn amplitude_e(&self) -> f64 {
        self.u * self.amplitude
    }

    /// Ground-state drive amplitude d_{r,g} = v·d_r.
    pub fn amplitude_g(&self) -> f64 {
        self.v * self.amplitude
    }
}
