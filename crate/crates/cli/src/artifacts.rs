//! On-disk artifact schemas. Struct field order is file order; a rerun with
//! the same config and seed must produce byte-identical files, so artifacts
//! are plain structs, serialized pretty and written atomically.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanArtifact {
    pub alpha: f64,
    /// χ_qc/2π in Hz.
    pub chi_qc_hz: f64,
    pub tau_s: f64,
    pub predicted_success: f64,
    pub tones: Vec<ToneArtifact>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToneArtifact {
    pub n: usize,
    /// δₙ/2π in Hz.
    pub detuning_hz: f64,
    pub beta_rad: f64,
    pub phi_rad: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateArtifact {
    pub dim: usize,
    /// Post-selection probability of the run that produced the state.
    pub probability: f64,
    /// Overlap fidelity against the configured target.
    pub fidelity: f64,
    /// Cavity amplitudes as [re, im] pairs.
    pub amplitudes: Vec<[f64; 2]>,
}

/// Fixed report schema; quantities that do not apply are explicit nulls,
/// never missing keys.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportArtifact {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "P")]
    pub p: Option<f64>,
    #[serde(rename = "F")]
    pub f: f64,
    /// Quadrature variance along the squeezing axis; null for targets
    /// without one.
    pub variance: Option<f64>,
    pub r_std: f64,
    pub f_std: f64,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut text =
        serde_json::to_string_pretty(value).expect("artifact types serialize infallibly");
    text.push('\n');
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| Failure::Lib(fockgen::Error::Io(e.to_string()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(text.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn read_state(path: &Path) -> Result<StateArtifact, Failure> {
    let text = fs::read_to_string(path).map_err(|e| {
        Failure::Usage(format!("cannot read state file {}: {e}", path.display()))
    })?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("malformed state file {}: {e}", path.display())))
}
