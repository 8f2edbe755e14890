//! Readout-induced qubit lifetime degradation for a dispersively coupled
//! transmon-resonator system.
//!
//! The crate predicts the qubit decay rate under a continuous readout drive
//! by combining three pieces:
//!
//! 1. [`pointer`] — steady-state and transient pointer fields of the driven,
//!    lossy, qubit-state-conditioned resonator, together with the
//!    measurement-induced dephasing rate `Γ_m`, the drive-induced frequency
//!    shift `B`, and the transient coefficient `A`.
//! 2. [`spectrum`] — the drive-renormalized qubit correlation function
//!    `C_q(t)` and its emission spectrum `S_q(ω)`, a truncated weighted sum
//!    of Lorentzian poles spaced by the drive detuning (number splitting).
//! 3. [`rate`] — the golden-rule decay rate `Γ_{e→g} = ∫ dω/2π S_q(ω) S_B(ω)`
//!    against a TLS bath spectrum `S_B`, with a closed-form path for
//!    Lorentzian baths and adaptive quadrature for arbitrary ones.
//!
//! Supporting modules: [`bath`] models TLS noise spectra and fits
//! inversion-recovery traces, [`oracle`] is an independent Lindblad
//! master-equation simulator used as ground truth, and [`polaron`] provides
//! multi-wave-mixing diagnostics that cross-check the pole structure.
//!
//! Units: all frequencies are angular (rad/µs), rates are 1/µs, times are µs.
//! Configuration ingestion (MHz conversions) happens once, in the CLI crate.

pub mod bath;
pub mod device;
pub mod error;
pub mod lm;
pub mod oracle;
pub mod pointer;
pub mod polaron;
pub mod quad;
pub mod rate;
pub mod spectrum;
pub mod units;

pub use bath::{BathSpectrum, DecayTrace, InversionRecoveryParams, TlsSpec};
pub use device::{DeviceParams, DriveSpec};
pub use error::{Error, Result};
pub use oracle::{InitialState, PopulationTrace, SimConfig};
pub use pointer::{solve_pointer_states, PointerSolution};
pub use rate::{DecayPrediction, Leveling, RateMethod, SweepPoint};
pub use spectrum::{CorrelationTrace, QubitSpectrum, SampledSpectrum};
