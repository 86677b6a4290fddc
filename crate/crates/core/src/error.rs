use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is below 2")]
    ModulusTooSmall(u64),
    #[error("modulus {0} is not below 2^62")]
    ModulusTooLarge(u64),
    #[error("modulus {0} is even; absolute-least residues need an odd modulus")]
    EvenModulus(u64),
    #[error("{value} is not invertible modulo {modulus}")]
    NotInvertible { value: u64, modulus: u64 },
    #[error("{0} is not an odd prime")]
    NotOddPrime(i64),
    #[error("coefficient {a} vanishes modulo {p}")]
    ZeroCoefficient { a: i64, p: u64 },
    #[error("gcd({k}, {order}) = {gcd}, so x^{k} does not permute the reduced residues")]
    ExponentNotCoprime { k: i64, order: u64, gcd: u64 },
    #[error("argument {x} lies outside 1..={max}")]
    OutOfRange { x: u64, max: u64 },
    #[error("class modulus {0} must be at least 2")]
    ClassModulus(u64),
    #[error("exponent k = 1 is excluded by this guard")]
    UnitExponent,
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("empty range: {lo} > {hi}")]
    EmptyRange { lo: u64, hi: u64 },
    #[error("unknown verification suite `{0}`")]
    UnknownSuite(String),
}

impl Error {
    /// Stable machine-readable tag, used by the CLI error payload.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ModulusTooSmall(_) => "modulus-too-small",
            Error::ModulusTooLarge(_) => "modulus-too-large",
            Error::EvenModulus(_) => "even-modulus",
            Error::NotInvertible { .. } => "not-invertible",
            Error::NotOddPrime(_) => "not-odd-prime",
            Error::ZeroCoefficient { .. } => "zero-coefficient",
            Error::ExponentNotCoprime { .. } => "exponent-not-coprime",
            Error::OutOfRange { .. } => "out-of-range",
            Error::ClassModulus(_) => "class-modulus",
            Error::UnitExponent => "unit-exponent",
            Error::Hypothesis(_) => "hypothesis-violated",
            Error::EmptyRange { .. } => "empty-range",
            Error::UnknownSuite(_) => "unknown-suite",
        }
    }
}
