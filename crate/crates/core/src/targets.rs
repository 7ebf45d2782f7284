//! Target-state families the protocol can aim at: truncated phase states,
//! Fock-truncated squeezed vacuum, and explicit amplitude vectors.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{ln_factorial, CavityState};

/// What the cavity should end up in.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetKind {
    /// Equal-magnitude superposition of |0⟩..|N⟩ with winding phase
    /// θ = 2kπ/(N+1).
    Phase { n_max: usize, k: usize },
    /// Squeezed vacuum ξ = r·e^{iθ} truncated at an even Fock cutoff.
    Squeezed { r: f64, theta: f64, cutoff: usize },
    /// Explicit amplitudes, normalized on realization.
    Custom { amps: Vec<C64> },
}

/// A target kind together with the truncated-space dimension it is realized
/// on.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSpec {
    kind: TargetKind,
    dim: usize,
}

impl TargetSpec {
    pub fn phase(n_max: usize, k: usize, dim: usize) -> Self {
        Self { kind: TargetKind::Phase { n_max, k }, dim }
    }

    pub fn squeezed(r: f64, theta: f64, cutoff: usize, dim: usize) -> Self {
        Self { kind: TargetKind::Squeezed { r, theta, cutoff }, dim }
    }

    pub fn custom(amps: Vec<C64>, dim: usize) -> Self {
        Self { kind: TargetKind::Custom { amps }, dim }
    }

    pub fn kind(&self) -> &TargetKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Builds the normalized state vector on `dim` levels.
    pub fn realize(&self) -> Result<CavityState> {
        match &self.kind {
            TargetKind::Phase { n_max, k } => phase_state(*n_max, *k, self.dim),
            TargetKind::Squeezed { r, theta, cutoff } => {
                squeezed_state(*r, *theta, *cutoff, self.dim)
            }
            TargetKind::Custom { amps } => {
                if amps.len() > self.dim {
                    return Err(Error::DimensionMismatch {
                        expected: amps.len(),
                        got: self.dim,
                    });
                }
                let mut padded = amps.clone();
                padded.resize(self.dim, C64::new(0.0, 0.0));
                CavityState::from_amplitudes(padded)
            }
        }
    }
}

/// Truncated phase state: ampsₙ = e^{inθ}/√(N+1) for n ≤ N with
/// θ = 2kπ/(N+1), zero above N.
pub fn phase_state(n_max: usize, k: usize, dim: usize) -> Result<CavityState> {
    if dim <= n_max {
        return Err(Error::DimensionMismatch { expected: n_max + 1, got: dim });
    }
    if k > n_max {
        return Err(Error::InvalidPhaseIndex { k, n_max });
    }
    let theta = 2.0 * std::f64::consts::PI * k as f64 / (n_max as f64 + 1.0);
    let mag = 1.0 / ((n_max as f64 + 1.0)).sqrt();
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    for (n, a) in amps.iter_mut().enumerate().take(n_max + 1) {
        *a = C64::from_polar(mag, n as f64 * theta);
    }
    CavityState::from_amplitudes(amps)
}

/// Squeezed vacuum ξ = r·e^{iθ} truncated at `cutoff` (even) and
/// renormalized: amps_{2n} ∝ (−e^{iθ} tanh r)ⁿ √((2n)!)/(n!·2ⁿ), odd levels
/// empty.
pub fn squeezed_state(r: f64, theta: f64, cutoff: usize, dim: usize) -> Result<CavityState> {
    if cutoff % 2 != 0 {
        return Err(Error::OddCutoff { cutoff });
    }
    if dim <= cutoff {
        return Err(Error::DimensionMismatch { expected: cutoff + 1, got: dim });
    }
    if r < 0.0 || !r.is_finite() {
        return Err(Error::InvalidSqueeze { r });
    }
    let t = r.tanh();
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    amps[0] = C64::new(1.0, 0.0);
    if t > 0.0 {
        let ln2 = std::f64::consts::LN_2;
        for n in 1..=cutoff / 2 {
            let nf = n as f64;
            // √((2n)!)/(n!·2ⁿ) through logs; the (−1)ⁿ of (−tanh r)ⁿ rides on
            // the phase.
            let ln_mag = nf * t.ln() + 0.5 * ln_factorial(2 * n) - ln_factorial(n) - nf * ln2;
            let phase = nf * (theta + std::f64::consts::PI);
            amps[2 * n] = C64::from_polar(ln_mag.exp(), phase);
        }
    }
    CavityState::from_amplitudes(amps)
}
