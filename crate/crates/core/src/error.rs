use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("sample is empty")]
    EmptySample,

    #[error("maximum likelihood estimate {0:?} is not strictly inside the mean space")]
    UndefinedMle(Vec<f64>),

    #[error("loss is not finite (estimate on or outside the mean-space boundary)")]
    NonFiniteLoss,

    #[error("observation {value} is outside the support of the {family} family")]
    InvalidObservation { value: f64, family: &'static str },

    #[error("predictive density underflowed to zero")]
    NumericUnderflow,

    #[error("quadrature did not converge: last refinements differ by {diff:e} at {nodes} nodes")]
    GridTooCoarse { diff: f64, nodes: usize },

    #[error("marginal states disagree on sample size ({0} vs {1})")]
    MismatchedN(usize, usize),

    #[error("criterion needs n >= {min}, got {n}")]
    NTooSmall { n: usize, min: usize },

    #[error("{0} does not define an anytime-valid test")]
    NotAnytimeValid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
