use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown builtin kernel `{0}`")]
    UnknownBuiltin(String),

    #[error("unknown lift function `{0}`")]
    UnresolvedFunction(String),

    #[error("kernel spec field `{field}`: {reason}")]
    InvalidSpec { field: &'static str, reason: String },

    #[error("grid values must be {points}x{points}, got {rows} rows (row {bad_row} has {bad_len} entries)")]
    GridDimensionMismatch {
        points: usize,
        rows: usize,
        bad_row: usize,
        bad_len: usize,
    },

    #[error("point ({re}, {im}) is outside the kernel domain")]
    OutsideDomain { re: f64, im: f64 },

    #[error("point ({re}, {im}) is not a stored grid point")]
    GridPointNotFound { re: f64, im: f64 },

    #[error("real-field kernel received a point with nonzero imaginary part {0}")]
    NonRealInput(f64),

    #[error("step must be nonzero")]
    ZeroStep,

    #[error("derivative of order ({m1}, {m2}) unavailable in closed form and finite-difference fallback is disabled")]
    DerivativeUnavailable { m1: usize, m2: usize },

    #[error("derivative order {requested} exceeds declared smoothness {declared}")]
    SmoothnessExceeded { requested: u32, declared: u32 },

    #[error("matrix has dimension 0")]
    EmptyMatrix,

    #[error("matrix has a non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (defect {0:e})")]
    NonHermitian(f64),

    #[error("operation requires a real-field kernel")]
    RealFieldRequired,

    #[error("operation requires a complex-field kernel")]
    ComplexFieldRequired,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("point ({re}, {im}) is not strictly inside the contour")]
    OutsideContour { re: f64, im: f64 },

    #[error("trace needs at least 3 steps, got {0}")]
    TraceTooShort(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn outside(z: num_complex::Complex64) -> Self {
        Error::OutsideDomain { re: z.re, im: z.im }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
