use thiserror::Error;

use crate::gev::PwmTriple;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside the admissible domain: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("probability weighted moments do not exist for shape {0} >= 1")]
    MomentsUndefined(f64),

    #[error("no shape in [{lo}, {hi}] solves g1(shape) = {target}")]
    NoRoot { target: f64, lo: f64, hi: f64 },

    #[error("PWM triple ({:.6}, {:.6}, {:.6}) violates {violated}", .pwm.beta0, .pwm.beta1, .pwm.beta2)]
    OutsideDomain {
        pwm: PwmTriple,
        violated: &'static str,
    },

    #[error("PWM fit failed for triple ({:.6}, {:.6}, {:.6}): {cause}", .pwm.beta0, .pwm.beta1, .pwm.beta2)]
    Fit { pwm: PwmTriple, cause: Box<Error> },

    #[error("sample of size {got} is too small, need at least {need}")]
    InsufficientSample { need: usize, got: usize },

    #[error("block size {r} exceeds series length {n}")]
    EmptySample { n: usize, r: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("insufficient span: {0}")]
    InsufficientSpan(String),

    #[error("all covariate values are equal")]
    DegenerateCovariate,

    #[error("invalid parameter {name}: {reason}")]
    Parameter { name: &'static str, reason: String },
}

impl Error {
    pub(crate) fn parameter(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}
