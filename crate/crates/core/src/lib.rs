//! Plan, simulate, and verify conversion of a cavity coherent state into an
//! arbitrary superposition of Fock states.
//!
//! The protocol drives a dispersively coupled qubit with one weak tone per
//! occupied number state; post-selecting the qubit's excited state leaves the
//! cavity in the target superposition. The crate covers the whole chain:
//!
//! * [`fock`] — truncated Fock-space algebra (states, displacement, parity);
//! * [`targets`] — phase-state and squeezed-vacuum target families;
//! * [`planner`] — tone amplitudes/phases and the source-amplitude optimizer;
//! * [`pulse`] — Gaussian multi-tone waveform synthesis;
//! * [`dynamics`] — analytic and numerically integrated protocol evolution;
//! * [`tomography`] — Wigner maps, measurement simulation, state
//!   reconstruction, bootstrap error bars, quadrature statistics.

pub mod dynamics;
pub mod error;
pub mod fock;
mod fsutil;
pub mod planner;
pub mod pulse;
pub mod targets;
pub mod tomography;

pub use error::{Error, Result};
pub use fock::{CavityState, JointState, Operator};
pub use planner::{ProtocolPlan, ToneSpec};
pub use pulse::Waveform;
pub use targets::TargetSpec;
pub use tomography::{DensityMatrix, GridGeometry, WignerGrid};

pub use num_complex::Complex64;
