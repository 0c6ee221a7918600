use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NonPrime(u64),
    #[error("bad precision budget: {0}")]
    BadPrecision(String),
    #[error("ideal exponent {0} must lie in (0, 1]")]
    BadIdealExponent(String),
    #[error("ideal exponent {exp} times ramification {e} is not an integer")]
    NonIntegralIdeal { exp: String, e: u64 },
    #[error("elements live in different rings")]
    RingMismatch,
    #[error("bad tower spec: {0}")]
    Spec(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("level {level} out of range (tower depth {depth})")]
    LevelOutOfRange { level: u32, depth: u32 },
    #[error("no Frobenius factorization at level {level}: witness {witness}")]
    NoFrobeniusFactorization { level: u32, witness: String },
    #[error("not invertible: {0}")]
    NotInvertible(String),
    #[error("search space too large: {0}")]
    DimensionTooLarge(String),
    #[error(
        "delta methods disagree at level {level}: semigroup {semigroup}, elimination {elimination}"
    )]
    MethodDisagreement {
        level: u32,
        semigroup: String,
        elimination: String,
    },
    #[error("no epsilon in (0,1) found up to level {0}")]
    NoEpsilon(u32),
    #[error("axioms still failing at level cap {0}")]
    AssemblyFailed(u32),
    #[error("map is not a ring homomorphism: {0}")]
    NotAHomomorphism(String),
    #[error("enumeration too large: {0}")]
    EnumerationTooLarge(String),
    #[error("torsion present: {0}")]
    TorsionPresent(String),
    #[error("the monoidal map needs a tilt element of depth at least 1")]
    ZeroDepth,
    #[error("insufficient depth: {0}")]
    InsufficientDepth(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
