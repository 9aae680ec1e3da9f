use thiserror::Error;

/// Failures raised by the model, the analytic solution, the reference
/// integrator and the trajectory analyses.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("drive is resonant with the linearized qubit (delta_d = 0); the displacement omega/delta_d is singular")]
    ResonantDrive,

    #[error("`{name}` must be strictly positive, got {value}")]
    NonPositiveInput { name: &'static str, value: f64 },

    #[error("`{name}` must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error("Fock space dimension {0} is too small (need at least 2)")]
    DimensionTooSmall(usize),

    #[error("state does not fit the truncated Fock space: tail mass {tail:.3e} above level {dim}")]
    TruncationOverflow { dim: usize, tail: f64 },

    #[error("trace drifted by {drift:.3e} at t = {t:.6e} s")]
    TraceDrift { t: f64, drift: f64 },

    #[error("density matrix lost hermiticity ({deviation:.3e}) at t = {t:.6e} s")]
    HermiticityLoss { t: f64, deviation: f64 },

    #[error("sample times must be non-negative and strictly increasing")]
    InvalidTimeGrid,

    #[error("finite-difference residual {residual:.3e} exceeds budget {budget:.3e}; reduce the step")]
    StepTooLarge { residual: f64, budget: f64 },

    #[error("the propagator at t = 0 is a delta function")]
    ZeroTime,

    #[error("kernel width {sigma:.3e} spans fewer than 3 cells of size {cell:.3e}")]
    GridTooCoarse { sigma: f64, cell: f64 },

    #[error("initial field is not normalized (mass {0:.6})")]
    FieldNotNormalized(f64),

    #[error("initial mean coincides with the limit-cycle point; nothing to classify")]
    DegenerateStart,

    #[error("no return to the positive x-axis before t = {0:.6e} s")]
    NoRecurrence(f64),

    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
