//! The four subcommands. Each stage writes its artifacts into the output
//! directory and returns what later stages need, so `report` chains them
//! without re-reading its own files.

use std::path::Path;

use fockgen::dynamics::{evolve_analytic, evolve_numeric, postselect_excited, DT_MAX_DEFAULT};
use fockgen::planner::{optimize_alpha, solve_drive_parameters, AlphaSearch, ProtocolPlan};
use fockgen::pulse::{required_sample_rate, synthesize_waveform_with_cap};
use fockgen::tomography::{
    bootstrap_statistics, fidelity, quadrature_variance, reconstruct_density_matrix,
    reduction_factor, simulate_measurement, wigner_exact,
};
use fockgen::{CavityState, Complex64 as C64, GridGeometry};

use crate::artifacts::{self, PlanArtifact, ReportArtifact, StateArtifact, ToneArtifact};
use crate::config::{Physics, RunConfig, TargetConfig};
use crate::{Failure, Mode};

const TWO_PI: f64 = std::f64::consts::TAU;

fn make_plan(config: &RunConfig, phys: &Physics) -> Result<ProtocolPlan, Failure> {
    let target = config.target_spec();
    let plan = match config.alpha {
        Some(a) => solve_drive_parameters(&target, C64::new(a, 0.0), phys.chi_qc, phys.tau)?,
        None => optimize_alpha(&target, phys.chi_qc, phys.tau, &AlphaSearch::default())?.1,
    };
    Ok(plan)
}

pub fn plan(config: &RunConfig, out: &Path) -> Result<PlanArtifact, Failure> {
    let phys = config.physics()?;
    let plan = make_plan(config, &phys)?;
    let art = PlanArtifact {
        alpha: plan.alpha.re,
        chi_qc_hz: plan.chi_qc / TWO_PI,
        tau_s: plan.tau,
        predicted_success: plan.predicted_success,
        tones: plan
            .tones
            .iter()
            .map(|t| ToneArtifact {
                n: t.n,
                // + 0.0 turns the n = 0 tone's −0.0 into plain zero.
                detuning_hz: t.detuning / TWO_PI + 0.0,
                beta_rad: t.beta,
                phi_rad: t.phi,
            })
            .collect(),
    };
    artifacts::write_json(&out.join("plan.json"), &art)?;
    println!(
        "plan.json: alpha = {:.6}, predicted success = {:.6}",
        art.alpha, art.predicted_success
    );
    Ok(art)
}

pub fn simulate(config: &RunConfig, mode: Mode, out: &Path) -> Result<StateArtifact, Failure> {
    let phys = config.physics()?;
    let plan = make_plan(config, &phys)?;
    let target = config.target_spec().realize()?;
    let joint = match mode {
        Mode::Analytic => evolve_analytic(plan.alpha, &plan)?,
        Mode::Numeric => {
            let required = required_sample_rate(&plan);
            let rate = if phys.sample_rate < required {
                log::warn!(
                    "sample rate {:.3e} Sa/s cannot resolve the highest tone; using {:.3e} Sa/s",
                    phys.sample_rate,
                    required
                );
                required
            } else {
                phys.sample_rate
            };
            let waveform = synthesize_waveform_with_cap(&plan, phys.sigma, rate, phys.omega_cap)?;
            waveform.write_csv(&out.join("waveform.csv"))?;
            let evo =
                evolve_numeric(plan.alpha, &waveform, phys.chi_qc, &phys.kerr, config.dim, DT_MAX_DEFAULT)?;
            log::info!("integrated {} steps, norm drift {:.2e}", evo.steps, evo.norm_drift);
            evo.state
        }
    };
    let (cavity, probability) = postselect_excited(&joint)?;
    let fid = cavity.overlap_fidelity(&target)?;
    let art = StateArtifact {
        dim: cavity.dim(),
        probability,
        fidelity: fid,
        amplitudes: cavity.amplitudes().iter().map(|a| [a.re, a.im]).collect(),
    };
    artifacts::write_json(&out.join("state.json"), &art)?;
    println!("state.json: probability = {probability:.6}, fidelity = {fid:.6}");
    Ok(art)
}

pub fn tomography(
    config: &RunConfig,
    state: Option<&StateArtifact>,
    out: &Path,
) -> Result<ReportArtifact, Failure> {
    config.physics()?;
    let target_full = config.target_spec().realize()?;
    // Reconstruct on the target's natural support, not the simulation space:
    // levels the target never occupies only add ill-conditioned parameters.
    let recon_dim = 1
        + target_full
            .amplitudes()
            .iter()
            .rposition(|a| a.norm() > 0.0)
            .expect("normalized state has nonzero support");
    let target = CavityState::from_amplitudes(target_full.amplitudes()[..recon_dim].to_vec())?;

    let (source, probability) = match state {
        Some(s) => {
            let amps = s.amplitudes.iter().map(|[re, im]| C64::new(*re, *im)).collect();
            (CavityState::from_amplitudes(amps)?, Some(s.probability))
        }
        None => (target_full, None),
    };

    let geometry = GridGeometry::new(config.grid.extent, config.grid.spacing)?;
    let m = &config.measurement;
    let exact = wigner_exact(&source, &geometry);
    let measured = simulate_measurement(&exact, m.r, m.noise_sigma, m.seed)?;
    exact.write_csv(&out.join("wigner_exact.csv"))?;
    measured.write_csv(&out.join("wigner_measured.csv"))?;

    let rho = reconstruct_density_matrix(&measured, recon_dim)?;
    rho.write_csv(&out.join("rho.csv"))?;
    let f = fidelity(&rho, &target)?;
    // Per-pixel measurement streams and per-resample bootstrap streams both
    // count from zero; the +1 keeps the two RNG families disjoint.
    let stats =
        bootstrap_statistics(&measured, &target, recon_dim, m.bootstrap_resamples, m.seed + 1)?;
    let variance = match &config.target {
        TargetConfig::Squeezed { theta, .. } => Some(quadrature_variance(&measured, theta / 2.0)?),
        _ => None,
    };
    let report = ReportArtifact {
        r: reduction_factor(&measured),
        p: probability,
        f,
        variance,
        r_std: stats.r_std,
        f_std: stats.f_std,
    };
    artifacts::write_json(&out.join("report.json"), &report)?;
    println!("report.json: R = {:.4}, F = {:.4}", report.r, report.f);
    Ok(report)
}

pub fn report(config: &RunConfig, out: &Path) -> Result<(), Failure> {
    plan(config, out)?;
    let state = simulate(config, Mode::Numeric, out)?;
    tomography(config, Some(&state), out)?;
    Ok(())
}
