//! Crate-wide error type. Every fallible operation in the library returns
//! [`Result`]; variants carry enough context to name the offending quantity.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Truncated coherent state leaks more weight above the cutoff than the
    /// tail tolerance allows.
    #[error("coherent tail {tail:.3e} at dim {dim} exceeds tolerance {tol:.0e}")]
    TruncationError { tail: f64, dim: usize, tol: f64 },

    /// Operands live on different truncated spaces.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A dimension argument below the smallest meaningful value.
    #[error("dimension {got} is too small (need at least {min})")]
    InvalidDimension { got: usize, min: usize },

    /// State or target vector with no weight to normalize.
    #[error("vector has zero norm")]
    ZeroNorm,

    /// The target demands weight on a Fock level the source state cannot
    /// supply.
    #[error("target needs amplitude at n={n} where the coherent source vanishes")]
    InfeasibleTarget { n: usize },

    /// Optimizer search interval is empty or degenerate.
    #[error("empty search range [{lo}, {hi}] with step {step}")]
    EmptySearchRange { lo: f64, hi: f64, step: f64 },

    /// Gaussian envelope width must be positive.
    #[error("pulse width sigma = {sigma} must be positive")]
    NonpositiveSigma { sigma: f64 },

    /// Sampling cannot resolve the highest drive tone.
    #[error("sample rate {got:.3e} Sa/s below required {required:.3e} Sa/s")]
    SampleRateTooLow { required: f64, got: f64 },

    /// A tone amplitude exceeds the hardware-style cap.
    #[error("tone n={tone} amplitude {amplitude:.4e} rad/s exceeds cap {cap:.4e} rad/s")]
    AmplitudeCapExceeded {
        tone: usize,
        amplitude: f64,
        cap: f64,
    },

    /// Integrator norm drift exceeded the failure threshold.
    #[error("integration norm drift {drift:.3e} exceeds {limit:.0e}; reduce the step")]
    StepTooLarge { drift: f64, limit: f64 },

    /// Post-selection on an unoccupied branch.
    #[error("post-selection branch has vanishing probability")]
    ZeroProbability,

    /// Waveform duration disagrees with the plan's recorded gate time.
    #[error("waveform duration {duration:.6e} s disagrees with plan tau {tau:.6e} s")]
    PlanTauMismatch { tau: f64, duration: f64 },

    /// Reduction factor outside (0, 1].
    #[error("reduction factor {r} outside (0, 1]")]
    InvalidR { r: f64 },

    /// Grid extent and spacing must be positive with extent ≥ spacing.
    #[error("invalid grid: extent {extent}, spacing {spacing}")]
    InvalidGrid { extent: f64, spacing: f64 },

    /// A matrix failed the density-matrix checks (Hermitian, unit trace,
    /// positive semidefinite).
    #[error("not a density matrix: {detail}")]
    InvalidDensityMatrix { detail: String },

    /// Fewer grid pixels than real parameters to fit.
    #[error("grid has {pixels} pixels, fewer than the {params} parameters of a dim-{dim} state")]
    UnderdeterminedGrid {
        pixels: usize,
        params: usize,
        dim: usize,
    },

    /// Normal equations of the reconstruction are rank deficient.
    #[error("reconstruction design matrix is singular")]
    SingularDesign,

    /// Nonlinear marginal fit failed to converge.
    #[error("gaussian fit diverged: {detail}")]
    FitDiverged { detail: String },

    /// Bootstrap needs a minimum number of resamples for stable std errors.
    #[error("{got} resamples requested, minimum is {min}")]
    TooFewResamples { got: usize, min: usize },

    /// Squeezed-vacuum targets only populate even Fock levels.
    #[error("squeezed cutoff {cutoff} must be even")]
    OddCutoff { cutoff: usize },

    /// Phase-state winding index must stay within the superposition size.
    #[error("phase index k={k} exceeds N={n_max}")]
    InvalidPhaseIndex { k: usize, n_max: usize },

    /// Squeeze amplitude must be a finite non-negative number.
    #[error("squeeze amplitude {r} must be finite and non-negative")]
    InvalidSqueeze { r: f64 },

    /// File import found a line that does not match the documented format.
    #[error("malformed input at line {line}: {detail}")]
    Malformed { line: usize, detail: String },

    /// Filesystem failure while reading or writing an artifact.
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
