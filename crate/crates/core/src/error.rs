use thiserror::Error;

/// Errors produced by the library layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("coordinate transform undefined: {0}")]
    TransformUndefined(&'static str),

    #[error("invalid time span [{start}, {end}]")]
    InvalidTimeSpan { start: f64, end: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("maximum number of steps ({max_steps}) exceeded at t = {t}")]
    MaxStepsExceeded { max_steps: usize, t: f64 },

    #[error("no section crossing found before t = {t_max}")]
    SectionTimeout { t_max: f64 },

    #[error("point is not a folded equilibrium (residual {residual:e})")]
    NotStationary { residual: f64 },

    #[error("no sign change of {what} on [{lo}, {hi}]")]
    BracketFailure {
        what: &'static str,
        lo: f64,
        hi: f64,
    },

    #[error("value {value} outside domain: {reason}")]
    Domain { value: f64, reason: &'static str },

    #[error("quadrature did not converge (estimated error {estimate:e})")]
    QuadratureNonconvergence { estimate: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("not a Hopf point: determinant {det} at the trace-zero equilibrium")]
    NotAHopf { det: f64 },

    #[error("no global return completed before t = {t_max}")]
    NoReturn { t_max: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
