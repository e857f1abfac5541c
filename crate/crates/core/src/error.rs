//! Error type shared by all modules, with the exit-code mapping used by the CLI.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("characteristic {0} is not prime")]
    CompositeCharacteristic(u64),

    #[error("wild ramification: p = {p} divides e = {e}")]
    WildRamification { p: u64, e: u64 },

    #[error("Hensel precondition failed: v(f(a)) = {val_f:?} must exceed 2*v(f'(a)) = {val_df2:?}")]
    HenselPreconditionFailed { val_f: String, val_df2: String },

    #[error("zero input where a nonzero element is required")]
    ZeroInput,

    #[error("context mismatch: {0}")]
    ContextMismatch(String),

    #[error("leading coefficient of the divisor is not a unit")]
    NonUnitLeadingCoefficient,

    #[error("modulus must be monic")]
    NonMonicModulus,

    #[error("polynomial is not a right divisor of the modulus")]
    NotARightDivisor,

    #[error("modulus mismatch: {0}")]
    ModulusMismatch(String),

    #[error("nonzero sigma-derivation is not supported over this coefficient ring")]
    UnsupportedDelta,

    #[error("unsupported construction: {0}")]
    Unsupported(String),

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("search space of size {size} exceeds the configured bound {bound}")]
    SearchTooLarge { size: u128, bound: u128 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// CLI exit code: 10-19 for domain errors, 20 precision, 30 search bound.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CompositeCharacteristic(_) => 10,
            Error::WildRamification { .. } => 11,
            Error::HenselPreconditionFailed { .. } => 12,
            Error::ZeroInput => 13,
            Error::ContextMismatch(_) => 14,
            Error::NonUnitLeadingCoefficient => 15,
            Error::NonMonicModulus => 16,
            Error::NotARightDivisor => 17,
            Error::ModulusMismatch(_) => 18,
            Error::UnsupportedDelta | Error::Unsupported(_) => 19,
            Error::PrecisionExhausted(_) => 20,
            Error::SearchTooLarge { .. } => 30,
            Error::Config(_) | Error::Io(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
