//! Signed reals stored as `(sign, ln|x|)`.
//!
//! Köthe weights such as `e^{k(n+1)}` leave the `f64` range long before the
//! index grids used by the checkers are exhausted, so every product is kept
//! on the log scale and only exponentiated at the very end.

use core::cmp::Ordering;
use core::fmt;
use core::ops::{Div, Mul, Neg};

/// A real number as a sign in `{-1, 0, 1}` and a natural-log magnitude.
///
/// Zero is the unique value with `sign == 0`, and its magnitude is `-inf`.
#[derive(Clone, Copy, PartialEq)]
pub struct LogReal {
    ln_mag: f64,
    sign: i8,
}

impl LogReal {
    pub const ZERO: LogReal = LogReal { ln_mag: f64::NEG_INFINITY, sign: 0 };
    pub const ONE: LogReal = LogReal { ln_mag: 0.0, sign: 1 };

    /// Builds a value from its parts, normalizing every zero representation.
    pub fn from_parts(sign: i8, ln_mag: f64) -> LogReal {
        if sign == 0 || ln_mag == f64::NEG_INFINITY {
            LogReal::ZERO
        } else {
            LogReal { ln_mag, sign: sign.signum() }
        }
    }

    /// A positive value `e^{ln_mag}`.
    pub fn exp(ln_mag: f64) -> LogReal {
        LogReal::from_parts(1, ln_mag)
    }

    pub fn from_f64(x: f64) -> LogReal {
        if x == 0.0 {
            LogReal::ZERO
        } else if x > 0.0 {
            LogReal { ln_mag: libm::log(x), sign: 1 }
        } else {
            LogReal { ln_mag: libm::log(-x), sign: -1 }
        }
    }

    /// Natural log of the magnitude, `-inf` for zero.
    #[inline]
    pub fn ln_abs(self) -> f64 {
        self.ln_mag
    }

    #[inline]
    pub fn sign(self) -> i8 {
        self.sign
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn abs(self) -> LogReal {
        LogReal::from_parts(self.sign.abs(), self.ln_mag)
    }

    /// `|x|^p` for `p > 0`.
    pub fn abs_pow(self, p: f64) -> LogReal {
        LogReal::from_parts(self.sign.abs(), self.ln_mag * p)
    }

    /// Converts back to `f64`; magnitudes past the range saturate to `±inf`.
    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * libm::exp(self.ln_mag),
        }
    }
}

impl Mul for LogReal {
    type Output = LogReal;
    fn mul(self, rhs: LogReal) -> LogReal {
        if self.sign == 0 || rhs.sign == 0 {
            return LogReal::ZERO;
        }
        LogReal::from_parts(self.sign * rhs.sign, self.ln_mag + rhs.ln_mag)
    }
}

/// Division with `0/0 = 0` and `x/0 = ±inf` for `x != 0`.
impl Div for LogReal {
    type Output = LogReal;
    fn div(self, rhs: LogReal) -> LogReal {
        if self.sign == 0 {
            return LogReal::ZERO;
        }
        if rhs.sign == 0 {
            return LogReal { ln_mag: f64::INFINITY, sign: self.sign };
        }
        LogReal::from_parts(self.sign * rhs.sign, self.ln_mag - rhs.ln_mag)
    }
}

impl Neg for LogReal {
    type Output = LogReal;
    fn neg(self) -> LogReal {
        LogReal { ln_mag: self.ln_mag, sign: -self.sign }
    }
}

impl PartialOrd for LogReal {
    fn partial_cmp(&self, other: &LogReal) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Some(Ordering::Equal),
                1 => self.ln_mag.partial_cmp(&other.ln_mag),
                _ => other.ln_mag.partial_cmp(&self.ln_mag),
            },
            ord => Some(ord),
        }
    }
}

impl fmt::Debug for LogReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "LogReal(0)"),
            1 => write!(f, "LogReal(+e^{})", self.ln_mag),
            _ => write!(f, "LogReal(-e^{})", self.ln_mag),
        }
    }
}

/// `ln(e^a + e^b)` without overflow.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY || hi == f64::INFINITY {
        return hi;
    }
    hi + libm::log1p(libm::exp(lo - hi))
}

/// `ln Σ e^{x_i}` with max extraction; the empty sum is `-inf`.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut acc = LogSum::new();
    for t in terms {
        acc.add(t);
    }
    acc.value()
}

/// Streaming log-sum-exp of nonnegative terms given by their logs.
///
/// Keeps a running maximum and a sum scaled by it, so each term costs one
/// `exp`.
#[derive(Clone, Copy, Debug)]
pub struct LogSum {
    max: f64,
    scaled: f64,
}

impl Default for LogSum {
    fn default() -> Self {
        LogSum::new()
    }
}

impl LogSum {
    pub const fn new() -> LogSum {
        LogSum { max: f64::NEG_INFINITY, scaled: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, ln_term: f64) {
        if ln_term == f64::NEG_INFINITY {
            return;
        }
        if ln_term == f64::INFINITY {
            self.max = f64::INFINITY;
            self.scaled = 1.0;
            return;
        }
        if ln_term <= self.max {
            self.scaled += libm::exp(ln_term - self.max);
        } else {
            self.scaled = self.scaled * libm::exp(self.max - ln_term) + 1.0;
            self.max = ln_term;
        }
    }

    #[inline]
    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY || self.max == f64::INFINITY {
            self.max
        } else {
            self.max + libm::log(self.scaled)
        }
    }
}

/// Sum of signed terms given on the log scale.
///
/// All terms are rescaled by the largest magnitude, so cancellation happens
/// in ordinary arithmetic on numbers of size at most one. A Neumaier
/// correction keeps the rounding error at a few ulps of the largest term.
#[derive(Clone, Debug, Default)]
pub struct SignedLogSum {
    terms: alloc::vec::Vec<LogReal>,
}

impl SignedLogSum {
    pub fn new() -> SignedLogSum {
        SignedLogSum { terms: alloc::vec::Vec::new() }
    }

    pub fn push(&mut self, t: LogReal) {
        if !t.is_zero() {
            self.terms.push(t);
        }
    }

    pub fn clear(&mut self) {
        self.terms.clear();
    }

    pub fn value(&self) -> LogReal {
        signed_log_sum(&self.terms)
    }
}

/// Signed sum of log-scale terms, see [`SignedLogSum`].
pub fn signed_log_sum(terms: &[LogReal]) -> LogReal {
    let max = terms
        .iter()
        .filter(|t| !t.is_zero())
        .map(|t| t.ln_abs())
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return LogReal::ZERO;
    }
    if max == f64::INFINITY {
        let pos = terms.iter().any(|t| t.ln_abs() == f64::INFINITY && t.sign() > 0);
        let neg = terms.iter().any(|t| t.ln_abs() == f64::INFINITY && t.sign() < 0);
        return match (pos, neg) {
            (true, false) => LogReal::from_parts(1, f64::INFINITY),
            (false, true) => LogReal::from_parts(-1, f64::INFINITY),
            // inf - inf has no meaningful value; report an unbounded magnitude
            _ => LogReal::from_parts(1, f64::INFINITY),
        };
    }
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for t in terms.iter().filter(|t| !t.is_zero()) {
        let v = f64::from(t.sign()) * libm::exp(t.ln_abs() - max);
        let s = sum + v;
        if libm::fabs(sum) >= libm::fabs(v) {
            comp += (sum - s) + v;
        } else {
            comp += (v - s) + sum;
        }
        sum = s;
    }
    let total = sum + comp;
    let r = LogReal::from_f64(total);
    LogReal::from_parts(r.sign(), r.ln_abs() + max)
}

/// `ln(a/b)` for nonnegative quantities given by their logs, with the
/// conventions `0/anything = 0` and `x/0 = inf` for `x > 0`.
#[inline]
pub fn ln_ratio(ln_num: f64, ln_den: f64) -> f64 {
    if ln_num == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else if ln_den == f64::NEG_INFINITY {
        f64::INFINITY
    } else {
        ln_num - ln_den
    }
}
