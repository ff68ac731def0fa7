use thiserror::Error;

/// Errors produced by the library.
///
/// `Verification` is reserved for internal cross-checks that should never
/// fire on correct code (a certificate that fails re-verification, a
/// witness search contradicting its own exhaustive check). Callers that
/// map errors to exit codes treat it differently from plain input errors.
#[derive(Debug, Error)]
pub enum Error {
    #[error("nothing to factor: {0}")]
    NothingToFactor(u128),

    #[error("incomplete factorization: unfactored cofactor {0}")]
    IncompleteFactorization(u128),

    #[error("base {base} not invertible modulo {modulus}")]
    BaseNotInvertible { base: u64, modulus: u64 },

    #[error("generator {gen} not invertible modulo {modulus}")]
    GeneratorNotInvertible { gen: u64, modulus: u64 },

    #[error("modulus must be an odd prime, got {0}")]
    NotOddPrime(u64),

    #[error("modulus {0} exceeds the supported bound 2^62")]
    ModulusTooLarge(u64),

    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),

    #[error("residue {residue} out of range for modulus {modulus}")]
    ResidueOutOfRange { residue: u64, modulus: u64 },

    #[error("target must be nonzero")]
    ZeroTarget,

    #[error("no representation of {target} as a sum of {terms} subgroup elements")]
    NoRepresentation { target: u64, terms: u32 },

    #[error("not a multiple: exponent sum is {residue} mod {modulus}, expected 0")]
    NotAMultiple { residue: u64, modulus: u64 },

    #[error("weight cap {0} out of range (2..={max})", max = crate::weight::MAX_WEIGHT_CAP)]
    WeightCapOutOfRange(u32),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("empty record stream")]
    EmptyRecords,

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("verification failure: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures of internal re-verification rather than bad input.
    pub fn is_verification(&self) -> bool {
        matches!(self, Error::Verification(_))
    }
}
