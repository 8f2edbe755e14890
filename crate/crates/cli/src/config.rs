//! TOML configuration with explicit per-field unit tags.
//!
//! Every frequency- or rate-like quantity must carry a unit tag so the
//! ambiguity between ω/2π conventions and plain rates can never corrupt a
//! run silently:
//!
//! - `MHz_over_2pi` — ordinary frequency f; internally ω = 2π·f rad/µs.
//! - `MHz_rate`     — plain rate; 1 MHz = 1 1/µs unchanged.
//! - `us`           — time in µs.
//! - `rad_per_us` / `per_us` — already in internal units (used by the
//!   normalized re-export, accepted on ingestion for round-trips).
//!
//! Conversion to internal units happens exactly once, in [`RawConfig::resolve`].

use serde::{Deserialize, Serialize};

use numsplit_core::bath::{BathSpectrum, InversionRecoveryParams, TlsSpec};
use numsplit_core::device::{DeviceParams, DriveSpec};
use numsplit_core::oracle::{InitialState, TlsDissipation};
use numsplit_core::units::TWO_PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnitTag {
    #[serde(rename = "MHz_over_2pi")]
    MhzOver2Pi,
    #[serde(rename = "MHz_rate")]
    MhzRate,
    #[serde(rename = "us")]
    Us,
    #[serde(rename = "rad_per_us")]
    RadPerUs,
    #[serde(rename = "per_us")]
    PerUs,
}

/// A number with its unit tag. Bare numbers deserialize only for
/// dimensionless fields, never through this type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tagged {
    pub value: f64,
    pub unit: UnitTag,
}

impl Tagged {
    pub fn rad_per_us(value: f64) -> Self {
        Self {
            value,
            unit: UnitTag::RadPerUs,
        }
    }

    pub fn per_us(value: f64) -> Self {
        Self {
            value,
            unit: UnitTag::PerUs,
        }
    }

    pub fn us(value: f64) -> Self {
        Self {
            value,
            unit: UnitTag::Us,
        }
    }

    /// Frequency-like field → rad/µs.
    fn angular(&self, field: &str, errors: &mut Vec<String>) -> f64 {
        match self.unit {
            UnitTag::MhzOver2Pi => TWO_PI * self.value,
            UnitTag::RadPerUs => self.value,
            _ => {
                errors.push(format!(
                    "{field}: expected a frequency-like unit (MHz_over_2pi | rad_per_us)"
                ));
                f64::NAN
            }
        }
    }

    /// Rate-like field → 1/µs. Both quoting conventions are legal here;
    /// the tag decides.
    fn rate(&self, field: &str, errors: &mut Vec<String>) -> f64 {
        match self.unit {
            UnitTag::MhzRate | UnitTag::PerUs => self.value,
            UnitTag::MhzOver2Pi => TWO_PI * self.value,
            UnitTag::RadPerUs => self.value,
            UnitTag::Us => {
                errors.push(format!(
                    "{field}: expected a rate-like unit (MHz_rate | MHz_over_2pi | per_us)"
                ));
                f64::NAN
            }
        }
    }

    /// Time-like field → µs.
    fn time(&self, field: &str, errors: &mut Vec<String>) -> f64 {
        match self.unit {
            UnitTag::Us => self.value,
            _ => {
                errors.push(format!("{field}: expected unit us"));
                f64::NAN
            }
        }
    }
}

/// Either an explicit list or a uniform start/stop/count grid, in the unit
/// of the carrying field.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub list: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit: Option<UnitTag>,
}

impl GridSpec {
    fn raw_values(&self, field: &str, errors: &mut Vec<String>) -> Vec<f64> {
        if let Some(list) = &self.list {
            if self.start.is_some() || self.stop.is_some() || self.count.is_some() {
                errors.push(format!("{field}: give either list or start/stop/count, not both"));
            }
            if list.is_empty() {
                errors.push(format!("{field}: list must not be empty"));
            }
            return list.clone();
        }
        match (self.start, self.stop, self.count) {
            (Some(a), Some(b), Some(n)) if n >= 1 => {
                if n == 1 {
                    vec![a]
                } else {
                    (0..n)
                        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
                        .collect()
                }
            }
            _ => {
                errors.push(format!("{field}: need start/stop/count (count >= 1) or list"));
                Vec::new()
            }
        }
    }

    fn angular(&self, field: &str, errors: &mut Vec<String>) -> Vec<f64> {
        let vals = self.raw_values(field, errors);
        let unit = self.unit.unwrap_or_else(|| {
            errors.push(format!("{field}: frequency-like grid needs a unit tag"));
            UnitTag::RadPerUs
        });
        vals.iter()
            .map(|&v| Tagged { value: v, unit }.angular(field, errors))
            .collect()
    }

    fn rate(&self, field: &str, errors: &mut Vec<String>) -> Vec<f64> {
        let vals = self.raw_values(field, errors);
        let unit = self.unit.unwrap_or_else(|| {
            errors.push(format!("{field}: rate-like grid needs a unit tag"));
            UnitTag::PerUs
        });
        vals.iter()
            .map(|&v| Tagged { value: v, unit }.rate(field, errors))
            .collect()
    }

    fn dimensionless(&self, field: &str, errors: &mut Vec<String>) -> Vec<f64> {
        if self.unit.is_some() {
            errors.push(format!("{field}: dimensionless grid must not carry a unit"));
        }
        self.raw_values(field, errors)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSection {
    pub qubit_frequency: Tagged,
    pub resonator_frequency: Tagged,
    pub dispersive_shift: Tagged,
    /// Either (base_loss [+ purcell_asymmetry]) or (loss_g + loss_e).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_loss: Option<Tagged>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub purcell_asymmetry: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loss_g: Option<Tagged>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loss_e: Option<Tagged>,
    pub quantum_efficiency: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub purcell_frequency: Option<Tagged>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub purcell_coupling: Option<Tagged>,
}

/// Drive frequency anchors relative to the two conditioned resonator lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveAnchor {
    /// ω_r(g)
    G,
    /// [ω_r(g) + ω_r(e)]/2
    Mid,
    /// ω_r(e)
    E,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    /// Exactly one of frequency | detuning | anchor.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequency: Option<Tagged>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detuning: Option<Tagged>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anchor: Option<DriveAnchor>,
    /// Exactly one of amplitude | snr_rate | dephasing_rate | separation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<Tagged>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_rate: Option<Tagged>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dephasing_rate: Option<Tagged>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub separation: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TlsSection {
    /// Exactly one of frequency | detuning (relative to the qubit).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequency: Option<Tagged>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detuning: Option<Tagged>,
    pub coupling: Tagged,
    pub dephasing: Tagged,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relaxation: Option<Tagged>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pure_dephasing: Option<Tagged>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct BathSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub background: Option<Tagged>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tls: Vec<TlsSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    /// Drive-frequency choices to export, e.g. ["g", "mid", "e"].
    #[serde(default = "default_drives")]
    pub drives: Vec<DriveAnchor>,
    /// Half-width of the frequency grid around the qubit line.
    pub window: Tagged,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default)]
    pub export_correlation: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlation_horizon: Option<Tagged>,
    #[serde(default = "default_corr_points")]
    pub correlation_points: usize,
}

fn default_drives() -> Vec<DriveAnchor> {
    vec![DriveAnchor::G, DriveAnchor::Mid, DriveAnchor::E]
}
fn default_points() -> usize {
    2001
}
fn default_corr_points() -> usize {
    801
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub drive_frequencies: GridSpec,
    /// Exactly one knob axis: snr_rates | separations | amplitudes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_rates: Option<GridSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub separations: Option<GridSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<GridSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TlsDissipationTag {
    #[default]
    Relaxation,
    Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialStateTag {
    #[default]
    ExcitedPointer,
    GroundVacuum,
    ExcitedVacuum,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSection {
    /// 0 = automatic truncation from the pointer fields.
    pub n_fock: usize,
    /// None = automatic horizon from the analytic rate.
    pub t_sim: Option<Tagged>,
    pub cfl_fraction: f64,
    pub snapshots: usize,
    pub tls_dissipation: TlsDissipationTag,
    pub qubit_decay: Option<Tagged>,
    pub initial_state: InitialStateTag,
    pub check_positivity: bool,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            n_fock: 0,
            t_sim: None,
            cfl_fraction: 0.35,
            snapshots: 400,
            tls_dissipation: TlsDissipationTag::Relaxation,
            qubit_decay: None,
            initial_state: InitialStateTag::ExcitedPointer,
            check_positivity: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelSection {
    pub target_snr_rate: Tagged,
    pub drive_frequencies: GridSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitInitialSection {
    pub amp_osc: f64,
    pub amp_exp: f64,
    pub coupling: Tagged,
    pub dephasing: Tagged,
    pub background: Tagged,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSynthSection {
    pub amp_osc: f64,
    pub amp_exp: f64,
    pub coupling: Tagged,
    pub dephasing: Tagged,
    pub background: Tagged,
    pub horizon: Tagged,
    pub points: usize,
    pub noise_sd: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    /// TLS position for the exported bath: one of frequency | detuning.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tls_frequency: Option<Tagged>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tls_detuning: Option<Tagged>,
    /// Background floor written into the exported bath.
    pub background: Tagged,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<FitInitialSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synth: Option<FitSynthSection>,
}

/// Top-level configuration file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub device: DeviceSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bath: Option<BathSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<LevelSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitSection>,
}

/// Drive choice in internal units, before pairing with a device.
#[derive(Debug, Clone, Copy)]
pub enum DriveFrequency {
    Absolute(f64),
    Detuning(f64),
    Anchor(DriveAnchor),
}

#[derive(Debug, Clone, Copy)]
pub enum DriveStrength {
    Amplitude(f64),
    SnrRate(f64),
    DephasingRate(f64),
    Separation(f64),
}

#[derive(Debug, Clone)]
pub struct ResolvedDrive {
    pub frequency: DriveFrequency,
    pub strength: DriveStrength,
}

#[derive(Debug, Clone)]
pub struct ResolvedSpectrum {
    pub drives: Vec<DriveAnchor>,
    pub window: f64,
    pub points: usize,
    pub export_correlation: bool,
    pub correlation_horizon: Option<f64>,
    pub correlation_points: usize,
}

#[derive(Debug, Clone)]
pub enum SweepKnob {
    SnrRates(Vec<f64>),
    Separations(Vec<f64>),
    Amplitudes(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct ResolvedSweep {
    pub drive_frequencies: Vec<f64>,
    pub knob: SweepKnob,
}

#[derive(Debug, Clone)]
pub struct ResolvedOracle {
    pub n_fock: usize,
    pub t_sim: Option<f64>,
    pub cfl_fraction: f64,
    pub snapshots: usize,
    pub tls_dissipation: TlsDissipation,
    pub qubit_decay: f64,
    pub initial_state: InitialState,
    pub check_positivity: bool,
}

#[derive(Debug, Clone)]
pub struct ResolvedLevel {
    pub target_snr_rate: f64,
    pub drive_frequencies: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ResolvedFit {
    pub tls_frequency: f64,
    pub background: f64,
    pub initial: Option<InversionRecoveryParams>,
    pub synth: Option<ResolvedSynth>,
}

#[derive(Debug, Clone)]
pub struct ResolvedSynth {
    pub params: InversionRecoveryParams,
    pub horizon: f64,
    pub points: usize,
    pub noise_sd: f64,
}

/// Fully validated configuration in internal units.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub seed: u64,
    pub device: DeviceParams,
    pub drive: Option<ResolvedDrive>,
    pub bath: Option<BathSpectrum>,
    pub spectrum: Option<ResolvedSpectrum>,
    pub sweep: Option<ResolvedSweep>,
    pub oracle: ResolvedOracle,
    pub level: Option<ResolvedLevel>,
    pub fit: Option<ResolvedFit>,
}

impl Resolved {
    /// Drive frequency in rad/µs for the configured device.
    pub fn drive_frequency(&self, freq: DriveFrequency) -> f64 {
        anchor_frequency(&self.device, freq)
    }

    /// Build a concrete [`DriveSpec`], resolving the strength knob.
    pub fn drive_spec(&self, drive: &ResolvedDrive) -> numsplit_core::Result<DriveSpec> {
        let omega_d = self.drive_frequency(drive.frequency);
        let d_r = match drive.strength {
            DriveStrength::Amplitude(a) => a,
            DriveStrength::SnrRate(r) => {
                numsplit_core::pointer::level_drive_amplitude(&self.device, omega_d, r)?
            }
            DriveStrength::DephasingRate(g) => {
                numsplit_core::pointer::drive_for_dephasing(&self.device, omega_d, g)?
            }
            DriveStrength::Separation(s) => {
                numsplit_core::pointer::drive_for_separation(&self.device, omega_d, s)?
            }
        };
        DriveSpec::new(&self.device, omega_d, d_r)
    }
}

pub fn anchor_frequency(device: &DeviceParams, freq: DriveFrequency) -> f64 {
    match freq {
        DriveFrequency::Absolute(w) => w,
        DriveFrequency::Detuning(d) => device.resonator_frequency + d,
        DriveFrequency::Anchor(a) => match a {
            DriveAnchor::G => device.resonator_frequency,
            DriveAnchor::Mid => device.resonator_frequency + device.dispersive_shift / 2.0,
            DriveAnchor::E => device.resonator_frequency_e(),
        },
    }
}

pub fn anchor_label(a: DriveAnchor) -> &'static str {
    match a {
        DriveAnchor::G => "g",
        DriveAnchor::Mid => "mid",
        DriveAnchor::E => "e",
    }
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// Validate and convert to internal units. All field-level problems are
    /// collected and reported together.
    pub fn resolve(&self) -> Result<Resolved, Vec<String>> {
        let mut errors = Vec::new();

        // device
        let d = &self.device;
        let wq = d.qubit_frequency.angular("device.qubit_frequency", &mut errors);
        let wr = d
            .resonator_frequency
            .angular("device.resonator_frequency", &mut errors);
        let chi = d.dispersive_shift.angular("device.dispersive_shift", &mut errors);
        let device = match (&d.base_loss, &d.loss_g, &d.loss_e) {
            (Some(kappa), None, None) => {
                let kappa = kappa.rate("device.base_loss", &mut errors);
                DeviceParams::new(
                    wq,
                    wr,
                    chi,
                    kappa,
                    d.purcell_asymmetry.unwrap_or(0.0),
                    d.quantum_efficiency,
                )
            }
            (None, Some(kg), Some(ke)) => {
                if d.purcell_asymmetry.is_some() {
                    errors.push(
                        "device.purcell_asymmetry: incompatible with loss_g/loss_e (it is \
                         derived from them)"
                            .into(),
                    );
                }
                let kg = kg.rate("device.loss_g", &mut errors);
                let ke = ke.rate("device.loss_e", &mut errors);
                DeviceParams::from_state_losses(wq, wr, chi, kg, ke, d.quantum_efficiency)
            }
            _ => {
                errors.push(
                    "device: give either base_loss (+ purcell_asymmetry) or loss_g + loss_e"
                        .into(),
                );
                DeviceParams::new(1.0, 2.0, -0.1, 1.0, 0.0, 0.5)
            }
        };
        let mut device = match device {
            Ok(dev) => dev,
            Err(e) => {
                errors.push(format!("device: {e}"));
                DeviceParams::new(1.0, 2.0, -0.1, 1.0, 0.0, 0.5).expect("fallback device")
            }
        };
        device.purcell_frequency = d
            .purcell_frequency
            .map(|t| t.angular("device.purcell_frequency", &mut errors));
        device.purcell_coupling = d
            .purcell_coupling
            .map(|t| t.angular("device.purcell_coupling", &mut errors));

        // drive
        let drive = self.drive.as_ref().map(|s| {
            let frequency = match (&s.frequency, &s.detuning, &s.anchor) {
                (Some(f), None, None) => {
                    DriveFrequency::Absolute(f.angular("drive.frequency", &mut errors))
                }
                (None, Some(det), None) => {
                    DriveFrequency::Detuning(det.angular("drive.detuning", &mut errors))
                }
                (None, None, Some(a)) => DriveFrequency::Anchor(*a),
                _ => {
                    errors.push("drive: give exactly one of frequency | detuning | anchor".into());
                    DriveFrequency::Detuning(0.0)
                }
            };
            let strength = match (&s.amplitude, &s.snr_rate, &s.dephasing_rate, &s.separation) {
                (Some(a), None, None, None) => {
                    DriveStrength::Amplitude(a.angular("drive.amplitude", &mut errors))
                }
                (None, Some(r), None, None) => {
                    DriveStrength::SnrRate(r.rate("drive.snr_rate", &mut errors))
                }
                (None, None, Some(g), None) => {
                    DriveStrength::DephasingRate(g.rate("drive.dephasing_rate", &mut errors))
                }
                (None, None, None, Some(sep)) => DriveStrength::Separation(*sep),
                _ => {
                    errors.push(
                        "drive: give exactly one of amplitude | snr_rate | dephasing_rate | \
                         separation"
                            .into(),
                    );
                    DriveStrength::Amplitude(0.0)
                }
            };
            ResolvedDrive {
                frequency,
                strength,
            }
        });

        // bath
        let bath = self.bath.as_ref().map(|s| {
            let background = s
                .background
                .map(|t| t.rate("bath.background", &mut errors))
                .unwrap_or(0.0);
            let mut comps = Vec::new();
            for (i, tls) in s.tls.iter().enumerate() {
                let field = format!("bath.tls[{i}]");
                let freq = match (&tls.frequency, &tls.detuning) {
                    (Some(f), None) => f.angular(&format!("{field}.frequency"), &mut errors),
                    (None, Some(det)) => {
                        device.qubit_frequency + det.angular(&format!("{field}.detuning"), &mut errors)
                    }
                    _ => {
                        errors.push(format!("{field}: give exactly one of frequency | detuning"));
                        f64::NAN
                    }
                };
                let coupling = tls.coupling.angular(&format!("{field}.coupling"), &mut errors);
                let dephasing = tls.dephasing.rate(&format!("{field}.dephasing"), &mut errors);
                let spec = match (&tls.relaxation, &tls.pure_dephasing) {
                    (None, None) => TlsSpec::new(freq, coupling, dephasing),
                    (relax, pure) => {
                        let g1 = relax
                            .map(|t| t.rate(&format!("{field}.relaxation"), &mut errors))
                            .unwrap_or(0.0);
                        let gp = pure
                            .map(|t| t.rate(&format!("{field}.pure_dephasing"), &mut errors))
                            .unwrap_or(0.0);
                        let split = TlsSpec::with_split(freq, coupling, g1, gp);
                        match split {
                            Ok(s) if (s.dephasing - dephasing).abs()
                                <= 1e-9 * dephasing.max(1.0) =>
                            {
                                Ok(s)
                            }
                            Ok(s) => {
                                errors.push(format!(
                                    "{field}: dephasing {dephasing} inconsistent with the \
                                     relaxation/pure_dephasing split ({})",
                                    s.dephasing
                                ));
                                Ok(s)
                            }
                            e => e,
                        }
                    }
                };
                match spec {
                    Ok(s) => comps.push(s),
                    Err(e) => errors.push(format!("{field}: {e}")),
                }
            }
            match BathSpectrum::new(comps, background) {
                Ok(b) => b,
                Err(e) => {
                    errors.push(format!("bath: {e}"));
                    BathSpectrum::default()
                }
            }
        });

        // spectrum
        let spectrum = self.spectrum.as_ref().map(|s| {
            if s.points < 2 {
                errors.push("spectrum.points: need at least 2".into());
            }
            if s.export_correlation && s.correlation_points < 2 {
                errors.push("spectrum.correlation_points: need at least 2".into());
            }
            ResolvedSpectrum {
                drives: s.drives.clone(),
                window: s.window.angular("spectrum.window", &mut errors),
                points: s.points,
                export_correlation: s.export_correlation,
                correlation_horizon: s
                    .correlation_horizon
                    .map(|t| t.time("spectrum.correlation_horizon", &mut errors)),
                correlation_points: s.correlation_points,
            }
        });

        // sweep
        let sweep = self.sweep.as_ref().map(|s| {
            let freqs = s
                .drive_frequencies
                .angular("sweep.drive_frequencies", &mut errors);
            let knob = match (&s.snr_rates, &s.separations, &s.amplitudes) {
                (Some(g), None, None) => SweepKnob::SnrRates(g.rate("sweep.snr_rates", &mut errors)),
                (None, Some(g), None) => {
                    SweepKnob::Separations(g.dimensionless("sweep.separations", &mut errors))
                }
                (None, None, Some(g)) => {
                    SweepKnob::Amplitudes(g.angular("sweep.amplitudes", &mut errors))
                }
                _ => {
                    errors.push(
                        "sweep: give exactly one of snr_rates | separations | amplitudes".into(),
                    );
                    SweepKnob::Separations(Vec::new())
                }
            };
            ResolvedSweep {
                drive_frequencies: freqs,
                knob,
            }
        });

        // oracle
        let o = self.oracle.clone().unwrap_or_default();
        let oracle = ResolvedOracle {
            n_fock: o.n_fock,
            t_sim: o.t_sim.map(|t| t.time("oracle.t_sim", &mut errors)),
            cfl_fraction: o.cfl_fraction,
            snapshots: o.snapshots,
            tls_dissipation: match o.tls_dissipation {
                TlsDissipationTag::Relaxation => TlsDissipation::Relaxation,
                TlsDissipationTag::Split => TlsDissipation::Split,
            },
            qubit_decay: o
                .qubit_decay
                .map(|t| t.rate("oracle.qubit_decay", &mut errors))
                .unwrap_or(0.0),
            initial_state: match o.initial_state {
                InitialStateTag::ExcitedPointer => InitialState::ExcitedPointer,
                InitialStateTag::GroundVacuum => InitialState::GroundVacuum,
                InitialStateTag::ExcitedVacuum => InitialState::ExcitedVacuum,
            },
            check_positivity: o.check_positivity,
        };

        // level
        let level = self.level.as_ref().map(|s| {
            let rate = s.target_snr_rate.rate("level.target_snr_rate", &mut errors);
            if rate <= 0.0 || rate.is_nan() {
                errors.push(format!("level.target_snr_rate: must be > 0, got {rate}"));
            }
            ResolvedLevel {
                target_snr_rate: rate,
                drive_frequencies: s
                    .drive_frequencies
                    .angular("level.drive_frequencies", &mut errors),
            }
        });

        // fit
        let fit = self.fit.as_ref().map(|s| {
            let tls_frequency = match (&s.tls_frequency, &s.tls_detuning) {
                (Some(f), None) => f.angular("fit.tls_frequency", &mut errors),
                (None, Some(det)) => {
                    device.qubit_frequency + det.angular("fit.tls_detuning", &mut errors)
                }
                _ => {
                    errors.push("fit: give exactly one of tls_frequency | tls_detuning".into());
                    f64::NAN
                }
            };
            let initial = s.initial.as_ref().map(|i| InversionRecoveryParams {
                amp_osc: i.amp_osc,
                amp_exp: i.amp_exp,
                coupling: i.coupling.angular("fit.initial.coupling", &mut errors),
                dephasing: i.dephasing.rate("fit.initial.dephasing", &mut errors),
                background: i.background.rate("fit.initial.background", &mut errors),
            });
            let synth = s.synth.as_ref().map(|y| {
                if y.points < 2 {
                    errors.push("fit.synth.points: need at least 2".into());
                }
                if y.noise_sd < 0.0 || y.noise_sd.is_nan() {
                    errors.push("fit.synth.noise_sd: must be >= 0".into());
                }
                ResolvedSynth {
                    params: InversionRecoveryParams {
                        amp_osc: y.amp_osc,
                        amp_exp: y.amp_exp,
                        coupling: y.coupling.angular("fit.synth.coupling", &mut errors),
                        dephasing: y.dephasing.rate("fit.synth.dephasing", &mut errors),
                        background: y.background.rate("fit.synth.background", &mut errors),
                    },
                    horizon: y.horizon.time("fit.synth.horizon", &mut errors),
                    points: y.points,
                    noise_sd: y.noise_sd,
                }
            });
            ResolvedFit {
                tls_frequency,
                background: s.background.rate("fit.background", &mut errors),
                initial,
                synth,
            }
        });

        if errors.is_empty() {
            Ok(Resolved {
                seed: self.seed.unwrap_or(0),
                device,
                drive,
                bath,
                spectrum,
                sweep,
                oracle,
                level,
                fit,
            })
        } else {
            Err(errors)
        }
    }

    /// Normalized form: every tagged field rewritten in canonical internal
    /// units (frequencies rad_per_us, rates per_us, times us). Re-resolving
    /// the result reproduces the same internal values bit-exactly.
    pub fn normalized(&self) -> Result<RawConfig, Vec<String>> {
        let resolved = self.resolve()?;
        let mut out = self.clone();
        out.seed = Some(resolved.seed);
        let dev = &resolved.device;
        out.device = DeviceSection {
            qubit_frequency: Tagged::rad_per_us(dev.qubit_frequency),
            resonator_frequency: Tagged::rad_per_us(dev.resonator_frequency),
            dispersive_shift: Tagged::rad_per_us(dev.dispersive_shift),
            base_loss: Some(Tagged::per_us(dev.base_loss)),
            purcell_asymmetry: Some(dev.purcell_asymmetry),
            loss_g: None,
            loss_e: None,
            quantum_efficiency: dev.quantum_efficiency,
            purcell_frequency: dev.purcell_frequency.map(Tagged::rad_per_us),
            purcell_coupling: dev.purcell_coupling.map(Tagged::rad_per_us),
        };
        if let (Some(raw), Some(res)) = (&mut out.drive, &resolved.drive) {
            *raw = DriveSection {
                frequency: match res.frequency {
                    DriveFrequency::Absolute(w) => Some(Tagged::rad_per_us(w)),
                    _ => None,
                },
                detuning: match res.frequency {
                    DriveFrequency::Detuning(d) => Some(Tagged::rad_per_us(d)),
                    _ => None,
                },
                anchor: match res.frequency {
                    DriveFrequency::Anchor(a) => Some(a),
                    _ => None,
                },
                amplitude: match res.strength {
                    DriveStrength::Amplitude(a) => Some(Tagged::rad_per_us(a)),
                    _ => None,
                },
                snr_rate: match res.strength {
                    DriveStrength::SnrRate(r) => Some(Tagged::per_us(r)),
                    _ => None,
                },
                dephasing_rate: match res.strength {
                    DriveStrength::DephasingRate(g) => Some(Tagged::per_us(g)),
                    _ => None,
                },
                separation: match res.strength {
                    DriveStrength::Separation(s) => Some(s),
                    _ => None,
                },
            };
        }
        if let (Some(raw), Some(res)) = (&mut out.bath, &resolved.bath) {
            *raw = BathSection {
                background: Some(Tagged::per_us(res.background)),
                tls: res
                    .components
                    .iter()
                    .map(|c| TlsSection {
                        frequency: Some(Tagged::rad_per_us(c.frequency)),
                        detuning: None,
                        coupling: Tagged::rad_per_us(c.coupling),
                        dephasing: Tagged::per_us(c.dephasing),
                        relaxation: c.relaxation.map(Tagged::per_us),
                        pure_dephasing: c.pure_dephasing.map(Tagged::per_us),
                    })
                    .collect(),
            };
        }
        if let (Some(raw), Some(res)) = (&mut out.spectrum, &resolved.spectrum) {
            raw.window = Tagged::rad_per_us(res.window);
            raw.correlation_horizon = res.correlation_horizon.map(Tagged::us);
        }
        if let (Some(raw), Some(res)) = (&mut out.sweep, &resolved.sweep) {
            raw.drive_frequencies = GridSpec {
                start: None,
                stop: None,
                count: None,
                list: Some(res.drive_frequencies.clone()),
                unit: Some(UnitTag::RadPerUs),
            };
            let (snr, sep, amp) = match &res.knob {
                SweepKnob::SnrRates(v) => (Some(v.clone()), None, None),
                SweepKnob::Separations(v) => (None, Some(v.clone()), None),
                SweepKnob::Amplitudes(v) => (None, None, Some(v.clone())),
            };
            raw.snr_rates = snr.map(|list| GridSpec {
                start: None,
                stop: None,
                count: None,
                list: Some(list),
                unit: Some(UnitTag::PerUs),
            });
            raw.separations = sep.map(|list| GridSpec {
                start: None,
                stop: None,
                count: None,
                list: Some(list),
                unit: None,
            });
            raw.amplitudes = amp.map(|list| GridSpec {
                start: None,
                stop: None,
                count: None,
                list: Some(list),
                unit: Some(UnitTag::RadPerUs),
            });
        }
        if let Some(raw) = &mut out.oracle {
            raw.t_sim = resolved.oracle.t_sim.map(Tagged::us);
            raw.qubit_decay = Some(Tagged::per_us(resolved.oracle.qubit_decay));
        }
        if let (Some(raw), Some(res)) = (&mut out.level, &resolved.level) {
            raw.target_snr_rate = Tagged::per_us(res.target_snr_rate);
            raw.drive_frequencies = GridSpec {
                start: None,
                stop: None,
                count: None,
                list: Some(res.drive_frequencies.clone()),
                unit: Some(UnitTag::RadPerUs),
            };
        }
        if let (Some(raw), Some(res)) = (&mut out.fit, &resolved.fit) {
            raw.tls_frequency = Some(Tagged::rad_per_us(res.tls_frequency));
            raw.tls_detuning = None;
            raw.background = Tagged::per_us(res.background);
            if let (Some(ri), Some(i)) = (&mut raw.initial, &res.initial) {
                ri.coupling = Tagged::rad_per_us(i.coupling);
                ri.dephasing = Tagged::per_us(i.dephasing);
                ri.background = Tagged::per_us(i.background);
            }
            if let (Some(ry), Some(y)) = (&mut raw.synth, &res.synth) {
                ry.coupling = Tagged::rad_per_us(y.params.coupling);
                ry.dephasing = Tagged::per_us(y.params.dephasing);
                ry.background = Tagged::per_us(y.params.background);
                ry.horizon = Tagged::us(y.horizon);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE_DEVICE: &str = r#"
[device]
qubit_frequency = { value = 4746.3, unit = "MHz_over_2pi" }
resonator_frequency = { value = 6779.6, unit = "MHz_over_2pi" }
dispersive_shift = { value = -8.8, unit = "MHz_over_2pi" }
loss_g = { value = 9.0, unit = "MHz_over_2pi" }
loss_e = { value = 6.6, unit = "MHz_over_2pi" }
quantum_efficiency = 0.1294

[drive]
anchor = "g"
snr_rate = { value = 1.0, unit = "MHz_rate" }

[bath]
background = { value = 0.15, unit = "MHz_rate" }

[[bath.tls]]
detuning = { value = -16.3, unit = "MHz_over_2pi" }
coupling = { value = 0.20, unit = "MHz_over_2pi" }
dephasing = { value = 0.85, unit = "MHz_rate" }
"#;

    #[test]
    fn table_device_parses_and_resolves() {
        let raw = RawConfig::parse(TABLE_DEVICE).unwrap();
        let resolved = raw.resolve().unwrap();
        approx::assert_relative_eq!(
            resolved.device.loss_g(),
            TWO_PI * 9.0,
            max_relative = 1e-12
        );
        approx::assert_relative_eq!(
            resolved.device.loss_e(),
            TWO_PI * 6.6,
            max_relative = 1e-12
        );
        let bath = resolved.bath.as_ref().unwrap();
        assert_eq!(bath.background, 0.15);
        assert_eq!(bath.components[0].dephasing, 0.85);
        approx::assert_relative_eq!(
            bath.components[0].frequency,
            resolved.device.qubit_frequency - TWO_PI * 16.3,
            max_relative = 1e-12
        );
    }

    #[test]
    fn untagged_frequency_rejected() {
        let text = TABLE_DEVICE.replace(
            r#"qubit_frequency = { value = 4746.3, unit = "MHz_over_2pi" }"#,
            "qubit_frequency = 4746.3",
        );
        assert!(RawConfig::parse(&text).is_err());
    }

    #[test]
    fn time_tag_rejected_for_frequency() {
        let text = TABLE_DEVICE.replace(
            r#"dispersive_shift = { value = -8.8, unit = "MHz_over_2pi" }"#,
            r#"dispersive_shift = { value = -8.8, unit = "us" }"#,
        );
        let raw = RawConfig::parse(&text).unwrap();
        let errs = raw.resolve().unwrap_err();
        assert!(errs.iter().any(|e| e.contains("device.dispersive_shift")));
    }

    #[test]
    fn rate_accepts_both_quoting_conventions() {
        let angular = TABLE_DEVICE.replace(
            r#"dephasing = { value = 0.85, unit = "MHz_rate" }"#,
            r#"dephasing = { value = 0.5, unit = "MHz_over_2pi" }"#,
        );
        let raw = RawConfig::parse(&angular).unwrap();
        let resolved = raw.resolve().unwrap();
        approx::assert_relative_eq!(
            resolved.bath.unwrap().components[0].dephasing,
            TWO_PI * 0.5,
            max_relative = 1e-12
        );
    }

    #[test]
    fn normalization_round_trip_is_idempotent() {
        let raw = RawConfig::parse(TABLE_DEVICE).unwrap();
        let a = raw.resolve().unwrap();
        let normalized = raw.normalized().unwrap();
        let text = toml::to_string(&normalized).unwrap();
        let reparsed = RawConfig::parse(&text).unwrap();
        let b = reparsed.resolve().unwrap();
        // bit-exact round trip of every resolved quantity
        assert_eq!(a.device.qubit_frequency, b.device.qubit_frequency);
        assert_eq!(a.device.base_loss, b.device.base_loss);
        assert_eq!(a.device.purcell_asymmetry, b.device.purcell_asymmetry);
        assert_eq!(a.bath, b.bath);
        let n2 = reparsed.normalized().unwrap();
        assert_eq!(toml::to_string(&n2).unwrap(), text);
    }

    #[test]
    fn exclusive_choices_enforced() {
        let both = TABLE_DEVICE.replace(
            "anchor = \"g\"",
            "anchor = \"g\"\nfrequency = { value = 6779.6, unit = \"MHz_over_2pi\" }",
        );
        let raw = RawConfig::parse(&both).unwrap();
        assert!(raw.resolve().is_err());

        let neither = TABLE_DEVICE.replace("anchor = \"g\"\n", "");
        let raw = RawConfig::parse(&neither).unwrap();
        assert!(raw.resolve().is_err());
    }

    #[test]
    fn grid_forms() {
        let mut errors = Vec::new();
        let grid = GridSpec {
            start: Some(0.0),
            stop: Some(2.0),
            count: Some(5),
            list: None,
            unit: None,
        };
        assert_eq!(
            grid.dimensionless("x", &mut errors),
            vec![0.0, 0.5, 1.0, 1.5, 2.0]
        );
        let single = GridSpec {
            start: Some(1.0),
            stop: Some(9.0),
            count: Some(1),
            list: None,
            unit: None,
        };
        assert_eq!(single.dimensionless("x", &mut errors), vec![1.0]);
        assert!(errors.is_empty());
        let bad = GridSpec {
            start: Some(0.0),
            stop: None,
            count: None,
            list: None,
            unit: None,
        };
        bad.dimensionless("x", &mut errors);
        assert!(!errors.is_empty());
    }
}
