use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not normalized (norm^2 = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("state must be in the {expected} basis")]
    WrongBasis { expected: &'static str },

    #[error("momentum index {n} outside [-{half}, {half})")]
    MomentumOutOfRange { n: i64, half: i64 },

    #[error("momentum mixture with strip height {nu} contains no grid state")]
    EmptyMixture { nu: f64 },

    #[error("invalid fit window: {0}")]
    InvalidWindow(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
