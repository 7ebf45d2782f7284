//! Joint qubit–cavity evolution under the dispersive Hamiltonian with a
//! classical qubit drive, plus the post-selection step.
//!
//! Photon number is conserved, so the joint state splits into independent
//! two-level problems, one per Fock level. The fast diagonal phases (the
//! dispersive shift and Kerr terms) are removed exactly by an integrating
//! factor; only the drive coupling is stepped numerically.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{coherent_amplitudes, CavityState, JointState};
use crate::planner::ProtocolPlan;
use crate::pulse::Waveform;

/// Default ceiling for the RK4 step, 1 ns.
pub const DT_MAX_DEFAULT: f64 = 1e-9;

/// Norm drift above this aborts with `StepTooLarge`.
const DRIFT_LIMIT: f64 = 1e-6;

/// Cavity anharmonicity parameters, both in rad/s and zero by default.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KerrParams {
    /// Cavity self-Kerr K: −(K/2)·n(n−1) on both qubit branches.
    pub k: f64,
    /// Qubit-state-dependent Kerr correction χ′: +(χ′/2)·n(n−1) on the
    /// excited branch.
    pub chi_prime: f64,
}

/// Result of a numeric evolution: final state plus integration diagnostics.
#[derive(Debug, Clone)]
pub struct NumericEvolution {
    pub state: JointState,
    /// |norm − 1| of the raw integrated vector before renormalization.
    pub norm_drift: f64,
    pub steps: usize,
}

/// Closed-form endpoint of the protocol in the ideal number-selective
/// limit: each level n rotates by exactly βₙ with the planned phase, and
/// the excited branch carries the accumulated dispersive phase n·χ·τ.
pub fn evolve_analytic(alpha: C64, plan: &ProtocolPlan) -> Result<JointState> {
    let dim = plan.target.dim();
    let n_top = plan.tones.last().map(|t| t.n).unwrap_or(0);
    if dim <= n_top {
        return Err(Error::DimensionMismatch { expected: n_top + 1, got: dim });
    }
    let c = coherent_amplitudes(alpha, dim)?;
    let mut g = vec![C64::new(0.0, 0.0); dim];
    let mut e = vec![C64::new(0.0, 0.0); dim];
    for n in 0..dim {
        let cn = c.amplitudes()[n];
        match plan.tones.get(n) {
            Some(tone) => {
                g[n] = cn * tone.beta.cos();
                let phase = tone.phi + n as f64 * plan.chi_qc * plan.tau;
                e[n] = -C64::i() * cn * tone.beta.sin() * C64::from_polar(1.0, phase);
            }
            None => g[n] = cn,
        }
    }
    JointState::from_parts(g, e)
}

/// Integrates the driven dispersive model over the waveform window with
/// fixed-step RK4 in the integrating-factor frame.
///
/// Diagonal energies per level n: E_g = −(K/2)n(n−1) on the ground branch
/// and E_e = −χn − (K/2)n(n−1) + (χ′/2)n(n−1) on the excited branch. The
/// integrated variables u, v relate to the branch amplitudes through
/// c_g = u·e^{−iE_g t}, c_e = v·e^{−iE_e t}, leaving the stiff phases to
/// exact exponentials regardless of step size.
pub fn evolve_numeric(
    alpha: C64,
    waveform: &Waveform,
    chi_qc: f64,
    kerr: &KerrParams,
    dim: usize,
    dt_max: f64,
) -> Result<NumericEvolution> {
    let c = coherent_amplitudes(alpha, dim)?;
    let duration = waveform.duration();
    // The norm-drift guard below, not a sample-period clamp, polices steps
    // that are too coarse for the drive; dt_max stays in the caller's hands.
    let steps = (duration / dt_max).ceil().max(1.0) as usize;
    let dt = duration / steps as f64;

    // Rotation frequency of the coupling for level n: ωₙ = E_e − E_g.
    let omega: Vec<f64> = (0..dim)
        .map(|n| {
            let nn = n as f64 * (n as f64 - 1.0);
            -chi_qc * n as f64 + 0.5 * kerr.chi_prime * nn
        })
        .collect();

    let mut u: Vec<C64> = c.amplitudes().iter().copied().collect();
    let mut v = vec![C64::new(0.0, 0.0); dim];

    for k in 0..steps {
        let t0 = k as f64 * dt;
        // steps·dt can overshoot duration by an ulp, and past the end the
        // drive reads as zero; pin the last endpoint to the boundary.
        let t1 = if k + 1 == steps { duration } else { t0 + dt };
        let th = 0.5 * (t0 + t1);
        let d0 = waveform.drive_at(t0);
        let dh = waveform.drive_at(th);
        let d1 = waveform.drive_at(t1);
        for n in 0..dim {
            let w = omega[n];
            let deriv = |drive: C64, t: f64, un: C64, vn: C64| -> (C64, C64) {
                let rot = C64::from_polar(1.0, w * t);
                (
                    -C64::i() * drive.conj() * rot.conj() * vn,
                    -C64::i() * drive * rot * un,
                )
            };
            let (ku1, kv1) = deriv(d0, t0, u[n], v[n]);
            let (ku2, kv2) = deriv(
                dh,
                th,
                u[n] + ku1 * (0.5 * dt),
                v[n] + kv1 * (0.5 * dt),
            );
            let (ku3, kv3) = deriv(
                dh,
                th,
                u[n] + ku2 * (0.5 * dt),
                v[n] + kv2 * (0.5 * dt),
            );
            let (ku4, kv4) = deriv(d1, t1, u[n] + ku3 * dt, v[n] + kv3 * dt);
            u[n] += (ku1 + (ku2 + ku3) * 2.0 + ku4) * (dt / 6.0);
            v[n] += (kv1 + (kv2 + kv3) * 2.0 + kv4) * (dt / 6.0);
        }
    }

    let norm_sq: f64 = u
        .iter()
        .zip(&v)
        .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
        .sum();
    let norm_drift = (norm_sq.sqrt() - 1.0).abs();
    if norm_drift > DRIFT_LIMIT {
        return Err(Error::StepTooLarge { drift: norm_drift, limit: DRIFT_LIMIT });
    }

    // Undo the integrating factor at the readout time.
    let mut g = vec![C64::new(0.0, 0.0); dim];
    let mut e = vec![C64::new(0.0, 0.0); dim];
    for n in 0..dim {
        let nn = n as f64 * (n as f64 - 1.0);
        let e_g = -0.5 * kerr.k * nn;
        let e_e = -chi_qc * n as f64 - 0.5 * kerr.k * nn + 0.5 * kerr.chi_prime * nn;
        g[n] = u[n] * C64::from_polar(1.0, -e_g * duration);
        e[n] = v[n] * C64::from_polar(1.0, -e_e * duration);
    }
    let state = JointState::from_parts(g, e)?;
    Ok(NumericEvolution { state, norm_drift, steps })
}

/// Projects onto the excited qubit branch: returns the renormalized cavity
/// state and the probability of that outcome.
pub fn postselect_excited(state: &JointState) -> Result<(CavityState, f64)> {
    let prob = state.excited_population();
    if prob < 1e-15 {
        return Err(Error::ZeroProbability);
    }
    let scale = 1.0 / prob.sqrt();
    let amps: Vec<C64> = state.excited().iter().map(|a| a * scale).collect();
    Ok((CavityState::from_amplitudes(amps)?, prob))
}
