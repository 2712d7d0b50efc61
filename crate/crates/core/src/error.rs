use core::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// An exponent sequence decreased or became negative at `index`.
    InvalidExponent { index: usize, reason: &'static str },
    /// The sampled exponent sequence does not grow without bound.
    ExponentNotDivergent { index: usize },
    /// A table-backed sequence was queried past its last entry.
    IndexBeyondTable { index: usize, len: usize },
    /// A matrix column is not monotone in the grading index.
    NonMonotoneMatrix { n: usize, k: usize },
    /// No column of the matrix is positive at row `n`.
    DegenerateRow { n: usize },
    InvalidP(f64),
    InvalidParameter(&'static str),
    /// A fast path that needs a power series space was given a generic one.
    NotPowerSeries,
    /// The power-boundedness criterion on power series spaces needs `alpha_0 > 0`.
    ZeroLeadingExponent,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidExponent { index, reason } => {
                write!(f, "invalid exponent sequence at index {index}: {reason}")
            }
            Error::ExponentNotDivergent { index } => write!(
                f,
                "exponent sequence does not grow: alpha_(2N) <= alpha_N for N = {index}"
            ),
            Error::IndexBeyondTable { index, len } => {
                write!(f, "index {index} is beyond the table of length {len}")
            }
            Error::NonMonotoneMatrix { n, k } => {
                write!(f, "matrix entry a({n},{k}) exceeds a({n},{})", k + 1)
            }
            Error::DegenerateRow { n } => write!(f, "matrix row {n} has no positive entry"),
            Error::InvalidP(p) => write!(f, "p must be 0 or lie in [1, inf], got {p}"),
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::NotPowerSeries => write!(f, "space is not tagged as a power series space"),
            Error::ZeroLeadingExponent => write!(
                f,
                "the power-boundedness criterion on power series spaces requires alpha_0 > 0"
            ),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
