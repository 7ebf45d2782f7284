//! Run configuration. The JSON boundary speaks experiment units (MHz, µs,
//! kHz, MS/s); [`RunConfig::physics`] is the one place they become SI.

use std::path::PathBuf;

use fockgen::dynamics::KerrParams;
use fockgen::TargetSpec;
use num_complex::Complex64 as C64;
use serde::Deserialize;

use crate::Failure;

const TWO_PI: f64 = std::f64::consts::TAU;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub target: TargetConfig,
    /// Dispersive shift χ_qc/2π in MHz, signed.
    #[serde(default = "defaults::chi_qc_mhz")]
    pub chi_qc_mhz: f64,
    /// Gaussian tone width σ in µs; the gate lasts 4σ.
    #[serde(default = "defaults::sigma_us")]
    pub sigma_us: f64,
    /// Waveform sample rate in MS/s, raised automatically when the plan's
    /// highest tone needs more.
    #[serde(default = "defaults::sample_rate_msps")]
    pub sample_rate_msps: f64,
    /// Per-tone peak amplitude cap Ω/2π in MHz.
    #[serde(default = "defaults::omega_cap_mhz")]
    pub omega_cap_mhz: f64,
    /// Truncation dimension for simulation and targets.
    #[serde(default = "defaults::dim")]
    pub dim: usize,
    /// Fixes the source amplitude; omitted means search for the optimum.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub measurement: MeasurementConfig,
    #[serde(default)]
    pub kerr: KerrConfig,
    /// Output directory; the --out flag takes precedence.
    #[serde(default)]
    pub outputs: Option<PathBuf>,
}

/// Target state selector.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetConfig {
    /// Flat superposition of 0..=n_max with winding index k.
    Phase {
        n_max: usize,
        #[serde(default)]
        k: usize,
    },
    /// Squeezed vacuum ξ = r·e^{iθ} truncated at an even cutoff.
    Squeezed {
        r: f64,
        #[serde(default)]
        theta: f64,
        cutoff: usize,
    },
    /// Explicit amplitudes as [re, im] pairs.
    Custom { amplitudes: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub extent: f64,
    pub spacing: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { extent: 3.5, spacing: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasurementConfig {
    /// Reduction factor applied to the exact Wigner values.
    pub r: f64,
    /// Per-pixel Gaussian noise width.
    pub noise_sigma: f64,
    pub seed: u64,
    pub bootstrap_resamples: usize,
}

impl Default for MeasurementConfig {
    fn default() -> Self {
        Self { r: 1.0, noise_sigma: 0.0, seed: 0, bootstrap_resamples: 100 }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KerrConfig {
    /// Cavity self-Kerr K/2π in kHz.
    pub k_khz: f64,
    /// Qubit-state-dependent Kerr correction χ′/2π in kHz.
    pub chi_prime_khz: f64,
}

mod defaults {
    pub fn chi_qc_mhz() -> f64 {
        -1.44
    }
    pub fn sigma_us() -> f64 {
        0.36
    }
    pub fn sample_rate_msps() -> f64 {
        100.0
    }
    pub fn omega_cap_mhz() -> f64 {
        0.3
    }
    pub fn dim() -> usize {
        24
    }
}

/// SI view of the configuration: rad/s, seconds, Sa/s.
#[derive(Debug, Clone, Copy)]
pub struct Physics {
    pub chi_qc: f64,
    pub sigma: f64,
    pub tau: f64,
    pub sample_rate: f64,
    pub omega_cap: f64,
    pub kerr: KerrParams,
}

impl RunConfig {
    pub fn target_spec(&self) -> TargetSpec {
        match &self.target {
            TargetConfig::Phase { n_max, k } => TargetSpec::phase(*n_max, *k, self.dim),
            TargetConfig::Squeezed { r, theta, cutoff } => {
                TargetSpec::squeezed(*r, *theta, *cutoff, self.dim)
            }
            TargetConfig::Custom { amplitudes } => TargetSpec::custom(
                amplitudes.iter().map(|[re, im]| C64::new(*re, *im)).collect(),
                self.dim,
            ),
        }
    }

    /// Validates the scalar fields and converts to SI.
    pub fn physics(&self) -> Result<Physics, Failure> {
        let bad = |msg: String| Err(Failure::Config(msg));
        for (name, v) in [
            ("chi_qc_mhz", self.chi_qc_mhz),
            ("sigma_us", self.sigma_us),
            ("sample_rate_msps", self.sample_rate_msps),
            ("omega_cap_mhz", self.omega_cap_mhz),
            ("grid.extent", self.grid.extent),
            ("grid.spacing", self.grid.spacing),
            ("measurement.r", self.measurement.r),
            ("measurement.noise_sigma", self.measurement.noise_sigma),
            ("kerr.k_khz", self.kerr.k_khz),
            ("kerr.chi_prime_khz", self.kerr.chi_prime_khz),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} = {v} is not finite"));
            }
        }
        if self.sigma_us <= 0.0 {
            return bad(format!("sigma_us = {} must be positive", self.sigma_us));
        }
        if self.sample_rate_msps <= 0.0 {
            return bad(format!("sample_rate_msps = {} must be positive", self.sample_rate_msps));
        }
        if self.omega_cap_mhz <= 0.0 {
            return bad(format!("omega_cap_mhz = {} must be positive", self.omega_cap_mhz));
        }
        if self.dim < 2 {
            return bad(format!("dim = {} is below the smallest two-level space", self.dim));
        }
        if self.measurement.noise_sigma < 0.0 {
            return bad(format!(
                "measurement.noise_sigma = {} must be nonnegative",
                self.measurement.noise_sigma
            ));
        }
        if let Some(a) = self.alpha {
            if !a.is_finite() || a < 0.0 {
                return bad(format!("alpha = {a} must be finite and nonnegative"));
            }
        }
        let sigma = self.sigma_us * 1e-6;
        Ok(Physics {
            chi_qc: TWO_PI * self.chi_qc_mhz * 1e6,
            sigma,
            tau: 4.0 * sigma,
            sample_rate: self.sample_rate_msps * 1e6,
            omega_cap: TWO_PI * self.omega_cap_mhz * 1e6,
            kerr: KerrParams {
                k: TWO_PI * self.kerr.k_khz * 1e3,
                chi_prime: TWO_PI * self.kerr.chi_prime_khz * 1e3,
            },
        })
    }
}
