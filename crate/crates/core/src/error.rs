use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of a closed-form relation.
    #[error("domain error: {0}")]
    Domain(String),

    /// `I - ħ²/4` is at or below the pure-state threshold, so the multipliers diverge.
    #[error("pure limit reached: I - hbar^2/4 = {gap:e} (threshold {threshold:e}); use the expectation-value representation")]
    PureLimit { gap: f64, threshold: f64 },

    /// Classical `I_cl` vanished: the phase-space density is a delta function.
    #[error("delta limit reached: I_cl = {i_cl:e}")]
    DeltaLimit { i_cl: f64 },

    #[error("invariant drift exceeded at t = {t}: {quantity} drifted by {drift:e} (tolerance {tol:e})")]
    DriftExceeded {
        quantity: &'static str,
        t: f64,
        drift: f64,
        tol: f64,
    },

    #[error("adaptive step underflow at t = {t}: dt = {dt:e}")]
    StepUnderflow { t: f64, dt: f64 },

    #[error("non-finite state encountered at t = {t}")]
    NonFinite { t: f64 },

    #[error("Lyapunov estimate did not converge: final-window spread {spread:e} around {estimate:e}")]
    NonConverged { estimate: f64, spread: f64 },

    #[error("trajectory never crossed the section A = 0 with P_A > 0")]
    NoCrossings,

    #[error("initial signs are inconsistent with <L>(0) = {l}")]
    InconsistentSigns { l: f64 },

    /// Requested regime point cannot be realized (e.g. `E_r` too small for the energy shell).
    #[error("unreachable regime: {0}")]
    Unreachable(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code for the CLI: 1 configuration, 2 numerical, 3 unreachable regime.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Validation(_) | Error::Io(_) => 1,
            Error::Domain(_)
            | Error::DriftExceeded { .. }
            | Error::StepUnderflow { .. }
            | Error::NonFinite { .. }
            | Error::NonConverged { .. }
            | Error::NoCrossings
            | Error::InconsistentSigns { .. } => 2,
            Error::PureLimit { .. } | Error::DeltaLimit { .. } | Error::Unreachable(_) => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
