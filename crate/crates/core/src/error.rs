use num_bigint::BigUint;
use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),

    #[error("prime mismatch: {left} vs {right}")]
    PrimeMismatch { left: u64, right: u64 },

    #[error("level mismatch: {left} vs {right}")]
    LevelMismatch { left: u32, right: u32 },

    #[error("level must be at least 1")]
    ZeroLevel,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{value} is not a unit modulo {p}^{level}")]
    NonUnit { value: BigUint, p: u64, level: u32 },

    #[error("valuation unknown: value vanishes at precision {precision}")]
    ValuationUnknown { precision: u32 },

    #[error("cannot project from level {source_level} to level {target}")]
    PrecisionExceeded { source_level: u32, target: u32 },

    #[error("invalid branch parameter: {0}")]
    InvalidBranchParam(String),

    #[error("{what}: needs {needed}, budget is {cap}")]
    CapacityExceeded { what: String, needed: u128, cap: u128 },

    #[error("matrix is not a solution modulo p^{level}")]
    NotASolutionModPn { level: u32 },

    #[error("lift constraint violated: {0}")]
    ConstraintViolated(String),

    #[error("product or inverse left the table: {0}")]
    ClosureViolation(String),

    #[error("matrix is not an element of the group at level {level}")]
    NotAGroupElement { level: u32 },

    #[error("inconsistent family: level {level} image is not the projection of level {next}")]
    InconsistentFamily { level: u32, next: u32 },

    #[error("descriptor mismatch: {0} vs {1}")]
    DescriptorMismatch(String, String),

    #[error("level order violated: {from} -> {to}")]
    LevelOrder { from: u32, to: u32 },

    #[error("Cardano multiplicity {found} for element {element}, expected 2")]
    CardanoMultiplicity { element: String, found: usize },

    #[error("label {label} does not match dimension {d}")]
    LabelDimension { label: String, d: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
