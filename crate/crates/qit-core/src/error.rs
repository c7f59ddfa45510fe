use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max |M - M^dagger| = {defect:.3e})")]
    NonHermitian { defect: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("bad dimensions: {0}")]
    BadDims(String),
    #[error("function undefined on the spectrum: {0}")]
    FunctionDomain(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("subsystem is not classical (off-diagonal mass {mass:.3e})")]
    NotClassical { mass: f64 },
    #[error("map is not completely positive (Choi eigenvalue {min_eig:.3e})")]
    NotCp { min_eig: f64 },
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
    #[error("problem too large: {0}")]
    TooLarge(String),
    #[error("smoothing parameter {eps} must be below {bound}")]
    EpsTooLarge { eps: f64, bound: f64 },
    #[error("lambda {lambda} exceeds D_max = {dmax}")]
    LambdaTooLarge { lambda: f64, dmax: f64 },
    #[error("parameter out of range: {0}")]
    Range(String),
    #[error("basis is not orthonormal (defect {defect:.3e})")]
    BasisNotOrthonormal { defect: f64 },
    #[error("SDP solver stopped with status {status}: {detail}")]
    Solver { status: String, detail: String },
    #[error("iterative solver did not converge (residual {residual:.3e})")]
    NonConvergence { residual: f64 },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
