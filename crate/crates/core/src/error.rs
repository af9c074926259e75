use alloc::string::String;
use core::fmt;

/// Everything that can go wrong inside the arithmetic and construction layers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// The prime is not an odd prime.
    InvalidPrime(u32),
    /// A precision cap was zero or otherwise unusable.
    InvalidCap(&'static str),
    DivisionByZero,
    /// A result (or divisor) is known to zero digits.
    PrecisionExhausted,
    /// An integrality requirement failed.
    NonIntegral {
        context: &'static str,
    },
    /// A coefficient fell below the valuation floor admitted in ring-R contexts.
    BelowValuationFloor {
        index: usize,
        valuation: i64,
        floor: i64,
    },
    /// Substitution series must have an exactly zero constant term.
    NonzeroConstantTerm,
    /// Operands were built over different primes or truncation windows.
    ShapeMismatch,
    /// The infinite product did not settle within the factor budget.
    StabilizationNotReached {
        factors: usize,
    },
    /// A per-step linear solve was singular modulo (p, X).
    SolveNotInvertible {
        level: usize,
    },
    /// A documented precondition of an operation was violated.
    Precondition(&'static str),
    /// A claimed identity failed at the tracked precision.
    CheckFailed {
        claim: &'static str,
        detail: String,
    },
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidPrime(p) => {
                write!(f, "p = {p} is not an odd prime (p = 2 is not supported)")
            }
            Error::InvalidCap(which) => write!(f, "invalid precision cap: {which}"),
            Error::DivisionByZero => write!(f, "division by exact zero"),
            Error::PrecisionExhausted => {
                write!(f, "precision exhausted: value known to zero digits")
            }
            Error::NonIntegral { context } => write!(f, "non-integral value in {context}"),
            Error::BelowValuationFloor {
                index,
                valuation,
                floor,
            } => write!(
                f,
                "coefficient {index} has valuation {valuation}, below the floor {floor}"
            ),
            Error::NonzeroConstantTerm => {
                write!(f, "substituted series has a nonzero constant term")
            }
            Error::ShapeMismatch => write!(f, "operands have mismatched prime or truncation"),
            Error::StabilizationNotReached { factors } => {
                write!(f, "product did not stabilize after {factors} factors")
            }
            Error::SolveNotInvertible { level } => {
                write!(
                    f,
                    "lifting operator at level {level} is not invertible mod (p, X)"
                )
            }
            Error::Precondition(what) => write!(f, "precondition violated: {what}"),
            Error::CheckFailed { claim, detail } => write!(f, "check {claim} failed: {detail}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
