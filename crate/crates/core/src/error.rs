use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("exponent must be a finite real in (1, inf), got {0}")]
    InvalidExponent(f64),
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("rank-one sampler rejected {0} consecutive draws")]
    DegenerateSampler(usize),
    #[error("matrix is not rank one: {0}")]
    NotRankOne(String),
    #[error("scaling integral is not integrable at z = w = 0")]
    NonIntegrable,
    #[error("exponent p = {p} lies outside the {branch} branch")]
    BranchMismatch { p: f64, branch: &'static str },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("profile length {got} does not match grid length {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("operation requires {expected} measure")]
    MeasureMismatch { expected: &'static str },
    #[error("point ({x}, {y}) lies outside the field extent")]
    NodeOutsideExtent { x: f64, y: f64 },
    #[error("kernel is singular at r = rho = {0}")]
    SingularPoint(f64),
    #[error("stretch support does not fit the rho grid: {0}")]
    SupportMismatch(String),
    #[error("invalid stretch: {0}")]
    InvalidStretch(String),
    #[error("stretch has a vanishing denominator")]
    ZeroDenominator,
    #[error("NaN encountered during {0}")]
    NanDetected(&'static str),
    #[error("field mean {mean:e} is not negligible (max |sample| = {max:e})")]
    NonzeroMean { mean: f64, max: f64 },
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("mode concentration {0} below 0.99")]
    ResolutionInsufficient(f64),
    #[error("heat integrand tail ratio {0:e} exceeds 1e-4")]
    TailTooHeavy(f64),
    #[error("surrogate partial {which} disagrees with finite differences (rel. error {error:e})")]
    InvalidSurrogate { which: &'static str, error: f64 },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
