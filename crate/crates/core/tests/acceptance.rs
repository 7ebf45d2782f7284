//! End-to-end gate: one test per release criterion, each printing a single
//! PASS line with the measured numbers when it holds. Tolerances are stated
//! inline next to each assertion.

use std::time::Instant;

use fockgen::dynamics::{evolve_analytic, evolve_numeric, postselect_excited, KerrParams};
use fockgen::planner::{optimize_alpha, solve_drive_parameters, success_probability, AlphaSearch};
use fockgen::pulse::{synthesize_waveform, synthesize_waveform_with_cap};
use fockgen::targets::squeezed_state;
use fockgen::tomography::{
    fidelity, quadrature_variance, reconstruct_density_matrix, reduction_factor,
    simulate_measurement, wigner_exact,
};
use fockgen::{Complex64 as C64, DensityMatrix, GridGeometry, TargetSpec};

const CHI: f64 = -2.0 * std::f64::consts::PI * 1.44e6;
const SIGMA: f64 = 0.36e-6;
const TAU: f64 = 4.0 * SIGMA;

/// The six benchmark targets with their coherent amplitudes, at a dimension
/// comfortably past every truncation guard.
fn benchmark_targets() -> Vec<(&'static str, TargetSpec, f64)> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let pi = std::f64::consts::PI;
    vec![
        ("phase N=5", TargetSpec::phase(5, 0, 24), 1.63),
        ("phase N=6", TargetSpec::phase(6, 0, 24), 1.74),
        ("phase N=7", TargetSpec::phase(7, 0, 24), 1.85),
        ("squeezed θ=0", TargetSpec::squeezed(0.8, 0.0, 8, 24), 1.45),
        ("squeezed θ=π/2", TargetSpec::squeezed(0.8, half_pi, 8, 24), 1.45),
        ("squeezed θ=π", TargetSpec::squeezed(0.8, pi, 8, 24), 1.45),
    ]
}

/// Same states in their natural spaces, sized for reconstruction.
fn tomography_targets() -> Vec<(&'static str, TargetSpec)> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let pi = std::f64::consts::PI;
    vec![
        ("phase N=5", TargetSpec::phase(5, 0, 6)),
        ("phase N=6", TargetSpec::phase(6, 0, 7)),
        ("phase N=7", TargetSpec::phase(7, 0, 8)),
        ("squeezed θ=0", TargetSpec::squeezed(0.8, 0.0, 8, 9)),
        ("squeezed θ=π/2", TargetSpec::squeezed(0.8, half_pi, 8, 9)),
        ("squeezed θ=π", TargetSpec::squeezed(0.8, pi, 8, 9)),
    ]
}

fn default_grid() -> GridGeometry {
    GridGeometry::new(3.5, 0.1).unwrap()
}

#[test]
fn criterion_1_optimal_alpha_matches_the_reference_values() {
    let mut report = Vec::new();
    for (n_max, reference) in [(5usize, 1.63), (6, 1.74), (7, 1.85)] {
        let start = Instant::now();
        let target = TargetSpec::phase(n_max, 0, 24);
        let (alpha, _) =
            optimize_alpha(&target, CHI, TAU, &AlphaSearch::default()).unwrap();
        let elapsed = start.elapsed();
        assert!(
            (alpha - reference).abs() <= 0.05,
            "N={n_max}: alpha {alpha:.4} vs reference {reference} (tol 0.05)"
        );
        assert!(elapsed.as_secs_f64() < 1.0, "N={n_max}: took {elapsed:?}");
        report.push(format!("N={n_max}: {alpha:.4} (ref {reference})"));
    }
    println!("criterion 1 PASS: optimal alpha {}", report.join(", "));
}

#[test]
fn criterion_2_analytic_pipeline_is_exact_for_every_benchmark_target() {
    let start = Instant::now();
    for (name, target, alpha) in benchmark_targets() {
        let alpha = C64::new(alpha, 0.0);
        let plan = solve_drive_parameters(&target, alpha, CHI, TAU).unwrap();
        let joint = evolve_analytic(alpha, &plan).unwrap();
        let (state, prob) = postselect_excited(&joint).unwrap();
        let f = state.overlap_fidelity(&target.realize().unwrap()).unwrap();
        assert!(f >= 1.0 - 1e-9, "{name}: fidelity {f}");
        let brute = success_probability(&plan);
        assert!(
            (prob - brute).abs() <= 1e-10,
            "{name}: prob {prob} vs brute {brute}"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "criterion 2 PASS: 6/6 targets at fidelity ≥ 1-1e-9, probabilities dual-route within 1e-10 ({elapsed:?})"
    );
}

#[test]
fn criterion_3_bandwidth_limited_fidelity_and_monotone_improvement() {
    let start = Instant::now();
    let target = TargetSpec::phase(5, 0, 24);
    let alpha = C64::new(1.63, 0.0);
    // The 0.88 MHz pulse needs peak Rabi 3.63e6 rad/s, past the default
    // per-tone cap, so all three runs share an explicit 2π·0.6 MHz cap and
    // differ only in bandwidth.
    let cap = 2.0 * std::f64::consts::PI * 0.6e6;
    let mut fids = Vec::new();
    for sigma_f in [0.88e6, 0.44e6, 0.22e6] {
        let sigma_t = 1.0 / (2.0 * std::f64::consts::PI * sigma_f);
        let plan = solve_drive_parameters(&target, alpha, CHI, 4.0 * sigma_t).unwrap();
        let w = synthesize_waveform_with_cap(&plan, sigma_t, 200.0e6, cap).unwrap();
        let out = evolve_numeric(alpha, &w, CHI, &KerrParams::default(), 24, 1e-9).unwrap();
        assert!(out.norm_drift <= 1e-8, "σ_f={sigma_f}: drift {}", out.norm_drift);
        let (state, _) = postselect_excited(&out.state).unwrap();
        let f = state.overlap_fidelity(&target.realize().unwrap()).unwrap();
        fids.push((sigma_f, f));
    }
    assert!(fids[1].1 >= 0.98, "σ_f=0.44 MHz fidelity {}", fids[1].1);
    assert!(
        fids[0].1 < fids[1].1 && fids[1].1 < fids[2].1,
        "not monotone: {fids:?}"
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    let shown: Vec<String> = fids
        .iter()
        .map(|(s, f)| format!("{:.2} MHz → {f:.5}", s / 1e6))
        .collect();
    println!("criterion 3 PASS: {} ({elapsed:?})", shown.join(", "));
}

#[test]
fn criterion_4_tomography_round_trip_noiseless_and_noisy() {
    let start = Instant::now();
    let grid = default_grid();
    let mut worst_clean: f64 = 1.0;
    let mut worst_noisy_mean: f64 = 1.0;
    for (name, target) in tomography_targets() {
        let state = target.realize().unwrap();
        let exact = wigner_exact(&state, &grid);

        let clean = simulate_measurement(&exact, 1.0, 0.0, 0).unwrap();
        let rho = reconstruct_density_matrix(&clean, target.dim()).unwrap();
        let f = fidelity(&rho, &state).unwrap();
        assert!(f >= 0.995, "{name}: noiseless fidelity {f}");
        worst_clean = worst_clean.min(f);

        let mut acc = 0.0;
        for seed in 0..10u64 {
            let meas = simulate_measurement(&exact, 0.8, 0.01, seed).unwrap();
            let rho = reconstruct_density_matrix(&meas, target.dim()).unwrap();
            acc += fidelity(&rho, &state).unwrap();
        }
        let mean = acc / 10.0;
        assert!(mean >= 0.95, "{name}: mean noisy fidelity {mean}");
        worst_noisy_mean = worst_noisy_mean.min(mean);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "criterion 4 PASS: worst noiseless fidelity {worst_clean:.6}, worst noisy mean {worst_noisy_mean:.4} over 10 seeds ({elapsed:?})"
    );
}

#[test]
fn criterion_5_reduction_factor_unit_on_exact_grids_and_recovered_under_noise() {
    let grid = default_grid();
    let mut worst_dev: f64 = 0.0;
    let mut worst_rhat_dev: f64 = 0.0;
    for (name, target) in tomography_targets() {
        let state = target.realize().unwrap();
        let exact = wigner_exact(&state, &grid);
        let r = reduction_factor(&exact);
        assert!((r - 1.0).abs() <= 0.01, "{name}: exact-grid R {r}");
        worst_dev = worst_dev.max((r - 1.0).abs());

        let meas = simulate_measurement(&exact, 0.82, 0.01, 7).unwrap();
        let r_hat = reduction_factor(&meas);
        assert!((r_hat - 0.82).abs() <= 0.02, "{name}: recovered R {r_hat}");
        worst_rhat_dev = worst_rhat_dev.max((r_hat - 0.82).abs());
    }
    println!(
        "criterion 5 PASS: exact-grid R within {worst_dev:.4} of 1.00, recovered R within {worst_rhat_dev:.4} of 0.82"
    );
}

#[test]
fn criterion_6_squeezed_quadrature_variances() {
    // Grid wide enough for the anti-squeezed marginal (std ≈ 1.1).
    let grid = GridGeometry::new(4.5, 0.1).unwrap();
    let state = squeezed_state(0.8, 0.0, 8, 16).unwrap();
    let w = wigner_exact(&state, &grid);

    let v0 = quadrature_variance(&w, 0.0).unwrap();
    let v90 = quadrature_variance(&w, std::f64::consts::FRAC_PI_2).unwrap();

    // Moment-integral oracle on the angle-0 marginal.
    let axis = grid.axis();
    let mut marginal = vec![0.0; axis.len()];
    for i in 0..axis.len() {
        for j in 0..axis.len() {
            marginal[i] += w.value(i, j) * grid.spacing();
        }
    }
    let mass: f64 = marginal.iter().sum::<f64>() * grid.spacing();
    let mean: f64 =
        axis.iter().zip(&marginal).map(|(u, m)| u * m).sum::<f64>() * grid.spacing() / mass;
    let moment: f64 = axis
        .iter()
        .zip(&marginal)
        .map(|(u, m)| (u - mean) * (u - mean) * m)
        .sum::<f64>()
        * grid.spacing()
        / mass;

    println!(
        "criterion 6 measured: fit(0) = {v0:.5}, moment(0) = {moment:.5}, fit(π/2) = {v90:.4}"
    );
    assert!(v90 > 1.0, "anti-squeezed variance {v90} must exceed 1.0");
    assert!(
        v0 <= 0.06,
        "fitted variance {v0:.5} exceeds 0.06: the n ≤ 8 truncation places the true \
         fit at 0.0606 (second moment 0.0644), see notes on the cutoff-8 state"
    );
    assert!(
        (v0 - moment).abs() <= 0.003,
        "fit-vs-moment gap {:.4}: the truncated marginal is non-Gaussian, the gap is \
         a property of the state",
        (v0 - moment).abs()
    );
    println!("criterion 6 PASS: fit(0) = {v0:.5} ≤ 0.06, gap {:.4} ≤ 0.003, fit(π/2) = {v90:.4} > 1", (v0 - moment).abs());
}

#[test]
fn criterion_7_success_probability_dual_route() {
    // Informational values next to the measured ones (0.37/0.31/0.23,
    // lower from experimental loss); the asserted property is the
    // route-vs-route agreement.
    let mut rows = Vec::new();
    for (n_max, alpha, measured) in [(5usize, 1.63, 0.37), (6, 1.74, 0.31), (7, 1.85, 0.23)] {
        let target = TargetSpec::phase(n_max, 0, 24);
        let plan =
            solve_drive_parameters(&target, C64::new(alpha, 0.0), CHI, TAU).unwrap();
        let brute = success_probability(&plan);
        assert!(
            (plan.predicted_success - brute).abs() <= 1e-10,
            "N={n_max}: {} vs {brute}",
            plan.predicted_success
        );
        // The minimum Poisson weight sits at n = 0 for all three amplitudes,
        // so P = (N+1)e^{−α²} is an independent closed form.
        let closed = (n_max as f64 + 1.0) * (-alpha * alpha).exp();
        assert!(
            (plan.predicted_success - closed).abs() <= 1e-12,
            "N={n_max}: {} vs closed form {closed}",
            plan.predicted_success
        );
        rows.push(format!(
            "N={n_max}: ideal {:.4} (measured {measured})",
            plan.predicted_success
        ));
    }
    println!("criterion 7 PASS: {}", rows.join(", "));
}

#[test]
fn criterion_8_numerical_hygiene() {
    // RK4 order: every stage time lands on a 20 GS/s sample knot, so the
    // ratio isolates integrator truncation; halving dt must shrink the
    // error 16× within a factor of 2.
    let target = TargetSpec::custom(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)], 16);
    let alpha = C64::new(1.0, 0.0);
    let plan = solve_drive_parameters(&target, alpha, CHI, TAU).unwrap();
    let wave = synthesize_waveform(&plan, SIGMA, 20.0e9).unwrap();
    let run = |dt: f64| {
        evolve_numeric(alpha, &wave, CHI, &KerrParams::default(), 16, dt)
            .unwrap()
            .state
    };
    let reference = run(0.2e-9);
    let err = |dt: f64| {
        let s = run(dt);
        let mut acc = 0.0f64;
        for n in 0..16 {
            acc += (s.ground()[n] - reference.ground()[n]).norm_sqr();
            acc += (s.excited()[n] - reference.excited()[n]).norm_sqr();
        }
        acc.sqrt()
    };
    let e4 = err(4e-9);
    let e2 = err(2e-9);
    let ratio = e4 / e2;
    assert!(
        (8.0..=32.0).contains(&ratio),
        "convergence ratio {ratio} outside 16x ± factor 2 (err4 {e4:.3e}, err2 {e2:.3e})"
    );

    // Wigner bound on every exact benchmark grid.
    let grid = default_grid();
    let bound = 2.0 / std::f64::consts::PI + 1e-9;
    for (name, target) in tomography_targets() {
        let exact = wigner_exact(&target.realize().unwrap(), &grid);
        let peak = exact.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(peak <= bound, "{name}: |W| peak {peak}");
    }

    // Reconstructed matrices re-validate against the density-matrix
    // invariants (Hermitian, unit trace, PSD) and stay physical.
    let state = TargetSpec::phase(5, 0, 6).realize().unwrap();
    let meas =
        simulate_measurement(&wigner_exact(&state, &grid), 0.9, 0.01, 3).unwrap();
    let rho = reconstruct_density_matrix(&meas, 6).unwrap();
    assert!(DensityMatrix::from_matrix(rho.matrix().clone()).is_ok());
    assert!(rho.purity() <= 1.0 + 1e-9, "purity {}", rho.purity());
    assert!((rho.matrix().trace().re - 1.0).abs() <= 1e-10);

    println!(
        "criterion 8 PASS: RK4 ratio {ratio:.1} in [8, 32], Wigner bound respected on 6/6 grids, reconstruction invariants hold"
    );
}
