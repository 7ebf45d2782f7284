//! Waveform synthesis: each plan tone becomes a detuned Gaussian pulse whose
//! area sets the rotation angle, and the tones sum into one complex drive.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::planner::ProtocolPlan;

/// Default per-tone amplitude ceiling, 2π · 0.3 MHz. Keeps every tone weak
/// relative to typical dispersive shifts so number selectivity survives.
pub const OMEGA_CAP_DEFAULT: f64 = 2.0 * std::f64::consts::PI * 0.3e6;

/// Default RK4 step ceiling companion lives in `dynamics`; this is the
/// sampling margin demanded of waveforms: 20 samples per period of the
/// fastest tone.
const SAMPLING_MARGIN: f64 = 20.0;

fn erf_sqrt2() -> f64 {
    libm::erf(std::f64::consts::SQRT_2)
}

/// Area of the truncated envelope peak·exp(−(t−2σ)²/2σ²) over [0, 4σ]:
/// peak·σ·√(2π)·erf(√2).
pub fn gaussian_pulse_area(peak: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::NonpositiveSigma { sigma });
    }
    Ok(peak * sigma * (2.0 * std::f64::consts::PI).sqrt() * erf_sqrt2())
}

/// Peak amplitude whose truncated Gaussian envelope integrates to `area`.
pub fn peak_for_area(area: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::NonpositiveSigma { sigma });
    }
    Ok(area / (sigma * (2.0 * std::f64::consts::PI).sqrt() * erf_sqrt2()))
}

/// Sampled complex drive in rad/s over [0, duration].
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<C64>,
    sample_rate: f64,
    duration: f64,
}

impl Waveform {
    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn peak_magnitude(&self) -> f64 {
        self.samples.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }

    /// Drive value at time `t` by linear interpolation, zero outside the
    /// pulse window.
    pub fn drive_at(&self, t: f64) -> C64 {
        if t < 0.0 || t > self.duration || self.samples.is_empty() {
            return C64::new(0.0, 0.0);
        }
        let s = t * self.sample_rate;
        let idx = s.floor() as usize;
        if idx + 1 >= self.samples.len() {
            return *self.samples.last().unwrap();
        }
        let frac = s - idx as f64;
        self.samples[idx] * (1.0 - frac) + self.samples[idx + 1] * frac
    }

    /// Writes `t_s,re_rad_per_s,im_rad_per_s` rows with LF endings and 17
    /// significant digits, enough for an exact f64 round trip.
    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut out = String::with_capacity(self.samples.len() * 72 + 40);
        out.push_str("t_s,re_rad_per_s,im_rad_per_s\n");
        let dt = 1.0 / self.sample_rate;
        for (k, s) in self.samples.iter().enumerate() {
            out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", k as f64 * dt, s.re, s.im));
        }
        write_atomic(path, &out)
    }
}

/// Builds the multi-tone drive for `plan` with the default amplitude cap.
///
/// Every tone shares the Gaussian envelope of width `sigma` on [0, 4σ];
/// tone n rides at its detuning with its planned phase, and its peak is
/// calibrated so the pulse area equals βₙ. Requires `plan.tau` = 4σ and a
/// sample rate of at least 20 samples per period of the fastest detuning.
pub fn synthesize_waveform(plan: &ProtocolPlan, sigma: f64, sample_rate: f64) -> Result<Waveform> {
    synthesize_waveform_with_cap(plan, sigma, sample_rate, OMEGA_CAP_DEFAULT)
}

/// [`synthesize_waveform`] with an explicit per-tone amplitude ceiling.
pub fn synthesize_waveform_with_cap(
    plan: &ProtocolPlan,
    sigma: f64,
    sample_rate: f64,
    omega_cap: f64,
) -> Result<Waveform> {
    if !(sigma > 0.0) {
        return Err(Error::NonpositiveSigma { sigma });
    }
    let duration = 4.0 * sigma;
    if (plan.tau - duration).abs() > 1e-9 * plan.tau.abs().max(duration) {
        return Err(Error::PlanTauMismatch { tau: plan.tau, duration });
    }
    let required = required_sample_rate(plan);
    if !(sample_rate > 0.0) || sample_rate < required {
        return Err(Error::SampleRateTooLow { required, got: sample_rate });
    }

    let mut peaks = Vec::with_capacity(plan.tones.len());
    for tone in &plan.tones {
        let peak = peak_for_area(tone.beta, sigma)?;
        if peak > omega_cap {
            return Err(Error::AmplitudeCapExceeded {
                tone: tone.n,
                amplitude: peak,
                cap: omega_cap,
            });
        }
        peaks.push(peak);
    }

    let dt = 1.0 / sample_rate;
    let n_samples = (duration * sample_rate).round() as usize + 1;
    let mut samples = vec![C64::new(0.0, 0.0); n_samples];
    let center = 2.0 * sigma;
    for (k, s) in samples.iter_mut().enumerate() {
        let t = k as f64 * dt;
        let u = (t - center) / sigma;
        let env = (-0.5 * u * u).exp();
        let mut acc = C64::new(0.0, 0.0);
        for (tone, &peak) in plan.tones.iter().zip(&peaks) {
            if peak == 0.0 {
                continue;
            }
            acc += C64::from_polar(peak * env, tone.detuning * t + tone.phi);
        }
        *s = acc;
    }

    Ok(Waveform { samples, sample_rate, duration })
}

/// Minimum sample rate for `plan`: 20 samples per period of the fastest
/// tone detuning.
pub fn required_sample_rate(plan: &ProtocolPlan) -> f64 {
    plan.tones
        .iter()
        .map(|t| SAMPLING_MARGIN * t.detuning.abs() / (2.0 * std::f64::consts::PI))
        .fold(0.0, f64::max)
}
