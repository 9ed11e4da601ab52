use thiserror::Error;

/// Errors produced by the field, sum, code and moment engines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("field degree r = {0} is outside the supported range 2..=12")]
    UnsupportedDegree(u32),
    #[error("modulus {modulus:#x} does not have degree {degree}")]
    ModulusDegree { modulus: u32, degree: u32 },
    #[error("modulus {0:#x} is reducible over GF(2)")]
    ReducibleModulus(u32),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("argument a must be a nonzero field element")]
    ZeroArgument,
    #[error("{what} exceeds the exhaustive iteration cap ({limit})")]
    IterationCap { what: &'static str, limit: String },
    #[error("discriminant {0} must be negative and congruent to 0 or 1 mod 4")]
    InvalidDiscriminant(i64),
    #[error("inexact division in {0}; this indicates an implementation bug")]
    InexactDivision(&'static str),
    #[error("{0}")]
    MissingData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
