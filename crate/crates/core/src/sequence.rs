//! Exponent sequences and weight sequences.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::logreal::LogReal;

/// Monotone exponent sequence `alpha` of a power series space.
#[derive(Clone, Debug, PartialEq)]
pub enum ExponentSequence {
    /// `alpha_n = n + 1`
    Linear,
    /// `alpha_n = ln(n + 1)`
    Logarithmic,
    /// `alpha_n = (n + 1)^theta`, `theta > 0`
    Power { theta: f64 },
    /// Explicit values; queries past the end are errors.
    Table(Arc<[f64]>),
}

impl ExponentSequence {
    /// `alpha_n`, or an error past the end of a table.
    pub fn get(&self, n: usize) -> Result<f64> {
        match self {
            ExponentSequence::Table(t) => t
                .get(n)
                .copied()
                .ok_or(Error::IndexBeyondTable { index: n, len: t.len() }),
            _ => Ok(self.value(n)),
        }
    }

    /// `alpha_n` for indices known to be in range. Tables yield NaN past
    /// their end; callers clamp to [`Self::index_limit`] first.
    #[inline]
    pub fn value(&self, n: usize) -> f64 {
        match self {
            ExponentSequence::Linear => n as f64 + 1.0,
            ExponentSequence::Logarithmic => libm::log(n as f64 + 1.0),
            ExponentSequence::Power { theta } => libm::pow(n as f64 + 1.0, *theta),
            ExponentSequence::Table(t) => t.get(n).copied().unwrap_or(f64::NAN),
        }
    }

    /// Number of indices with a defined value, `None` when unbounded.
    pub fn index_limit(&self) -> Option<usize> {
        match self {
            ExponentSequence::Table(t) => Some(t.len()),
            _ => None,
        }
    }

    /// Checks nonnegativity and monotonicity on `[0, sample)` and growth via
    /// `alpha_{2N} > alpha_N` at dyadic `N`.
    pub fn validate(&self, sample: usize) -> Result<()> {
        if let ExponentSequence::Power { theta } = self {
            if !(*theta > 0.0) || !theta.is_finite() {
                return Err(Error::InvalidParameter("power exponent must be positive"));
            }
        }
        let len = self.index_limit().map_or(sample, |l| l.min(sample));
        if len < 2 {
            return Err(Error::InvalidParameter("exponent table needs at least two entries"));
        }
        let mut prev = f64::NEG_INFINITY;
        for n in 0..len {
            let a = self.value(n);
            if !a.is_finite() || a < 0.0 {
                return Err(Error::InvalidExponent { index: n, reason: "value must be finite and nonnegative" });
            }
            if a < prev {
                return Err(Error::InvalidExponent { index: n, reason: "sequence decreases" });
            }
            prev = a;
        }
        let mut big_n = 1;
        while 2 * big_n < len {
            if self.value(2 * big_n) <= self.value(big_n) {
                return Err(Error::ExponentNotDivergent { index: big_n });
            }
            big_n *= 2;
        }
        Ok(())
    }

    /// Short description used in reports.
    pub fn describe(&self) -> alloc::string::String {
        use alloc::format;
        match self {
            ExponentSequence::Linear => "n+1".into(),
            ExponentSequence::Logarithmic => "ln(n+1)".into(),
            ExponentSequence::Power { theta } => format!("(n+1)^{theta}"),
            ExponentSequence::Table(t) => format!("table[{}]", t.len()),
        }
    }
}

type LogFn = Arc<dyn Fn(usize) -> LogReal + Send + Sync>;

/// Generator of a signed weight sequence `w_n`.
#[derive(Clone)]
pub enum WeightFamily {
    /// `w_n = c`
    Constant(f64),
    /// `w_n = (n + 1)^theta`
    Polynomial { theta: f64 },
    /// `w_n = exp(gamma * alpha_n)`
    ExpAlpha { gamma: f64, alpha: ExponentSequence },
    /// `w_n = 1 / max(1, n)`; window products are factorial ratios.
    ReciprocalFactorial,
    /// `w_n = sqrt(n + 1)`
    SqrtShifted,
    /// `w_n = sqrt(n)`
    Sqrt,
    /// Explicit values; queries past the end are errors.
    Table(Arc<[f64]>),
    /// Arbitrary log-scale generator.
    Custom { name: &'static str, f: LogFn },
}

impl fmt::Debug for WeightFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFamily::Constant(c) => write!(f, "Constant({c})"),
            WeightFamily::Polynomial { theta } => write!(f, "Polynomial({theta})"),
            WeightFamily::ExpAlpha { gamma, alpha } => write!(f, "ExpAlpha({gamma}, {alpha:?})"),
            WeightFamily::ReciprocalFactorial => write!(f, "ReciprocalFactorial"),
            WeightFamily::SqrtShifted => write!(f, "SqrtShifted"),
            WeightFamily::Sqrt => write!(f, "Sqrt"),
            WeightFamily::Table(t) => write!(f, "Table[{}]", t.len()),
            WeightFamily::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl WeightFamily {
    pub fn describe(&self) -> alloc::string::String {
        use alloc::format;
        match self {
            WeightFamily::Constant(c) => format!("{c}"),
            WeightFamily::Polynomial { theta } => format!("(n+1)^{theta}"),
            WeightFamily::ExpAlpha { gamma, alpha } => format!("exp({gamma}*alpha_n), alpha_n = {}", alpha.describe()),
            WeightFamily::ReciprocalFactorial => "1/max(1,n)".into(),
            WeightFamily::SqrtShifted => "sqrt(n+1)".into(),
            WeightFamily::Sqrt => "sqrt(n)".into(),
            WeightFamily::Table(t) => format!("table[{}]", t.len()),
            WeightFamily::Custom { name, .. } => (*name).into(),
        }
    }

    /// `w_n` on the log scale.
    #[inline]
    pub fn log_value(&self, n: usize) -> LogReal {
        let x = n as f64;
        match self {
            WeightFamily::Constant(c) => LogReal::from_f64(*c),
            WeightFamily::Polynomial { theta } => LogReal::exp(theta * libm::log(x + 1.0)),
            WeightFamily::ExpAlpha { gamma, alpha } => LogReal::exp(gamma * alpha.value(n)),
            WeightFamily::ReciprocalFactorial => LogReal::exp(-libm::log(x.max(1.0))),
            WeightFamily::SqrtShifted => LogReal::exp(0.5 * libm::log(x + 1.0)),
            WeightFamily::Sqrt => LogReal::exp(0.5 * libm::log(x)),
            WeightFamily::Table(t) => t.get(n).map_or(LogReal::from_parts(1, f64::NAN), |&v| LogReal::from_f64(v)),
            WeightFamily::Custom { f, .. } => f(n),
        }
    }

    /// `w_n` in ordinary arithmetic, exact for integer-valued families.
    pub fn linear_value(&self, n: usize) -> f64 {
        let x = n as f64;
        match self {
            WeightFamily::Constant(c) => *c,
            WeightFamily::Polynomial { theta } if *theta == 1.0 => x + 1.0,
            WeightFamily::Polynomial { theta } if *theta == 0.0 => 1.0,
            WeightFamily::Polynomial { theta } => libm::pow(x + 1.0, *theta),
            WeightFamily::ReciprocalFactorial => 1.0 / x.max(1.0),
            WeightFamily::SqrtShifted => libm::sqrt(x + 1.0),
            WeightFamily::Sqrt => libm::sqrt(x),
            WeightFamily::Table(t) => t.get(n).copied().unwrap_or(f64::NAN),
            _ => self.log_value(n).to_f64(),
        }
    }

    pub fn index_limit(&self) -> Option<usize> {
        match self {
            WeightFamily::Table(t) => Some(t.len()),
            WeightFamily::ExpAlpha { alpha, .. } => alpha.index_limit(),
            _ => None,
        }
    }
}

/// Prefix data for the window products `prod_{j=n}^{n+m-1} |w_j|`.
///
/// `W_n = sum_{j<n} ln|w_j|` is accumulated with a Neumaier correction and
/// stored as an unevaluated sum `hi + lo`, so a window difference keeps
/// close to full relative precision even when `W_n` is large. Zero weights
/// are excluded from the sum and counted separately.
#[derive(Clone, Debug)]
struct Prefix {
    hi: Vec<f64>,
    lo: Vec<f64>,
    zeros: Vec<u32>,
    negatives: Vec<u32>,
}

impl Prefix {
    fn build(family: &WeightFamily, len: usize) -> Prefix {
        let mut hi = Vec::with_capacity(len + 1);
        let mut lo = Vec::with_capacity(len + 1);
        let mut zeros = Vec::with_capacity(len + 1);
        let mut negatives = Vec::with_capacity(len + 1);
        let (mut s, mut c, mut z, mut neg) = (0.0f64, 0.0f64, 0u32, 0u32);
        hi.push(0.0);
        lo.push(0.0);
        zeros.push(0);
        negatives.push(0);
        for j in 0..len {
            let w = family.log_value(j);
            if w.is_zero() {
                z += 1;
            } else {
                if w.sign() < 0 {
                    neg += 1;
                }
                let v = w.ln_abs();
                let t = s + v;
                if libm::fabs(s) >= libm::fabs(v) {
                    c += (s - t) + v;
                } else {
                    c += (v - t) + s;
                }
                s = t;
            }
            hi.push(s);
            lo.push(c);
            zeros.push(z);
            negatives.push(neg);
        }
        Prefix { hi, lo, zeros, negatives }
    }

    fn len(&self) -> usize {
        self.hi.len() - 1
    }
}

/// A weight sequence with eagerly built prefix sums up to a capacity.
///
/// Window queries inside the capacity are O(1); queries beyond it fall back
/// to direct summation and give the same values up to rounding.
#[derive(Clone)]
pub struct WeightSequence {
    family: WeightFamily,
    prefix: Arc<Prefix>,
}

impl fmt::Debug for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WeightSequence({:?}, capacity {})", self.family, self.prefix.len())
    }
}

/// Longest window multiplied out directly by [`WeightSequence::direct_product`].
pub const DIRECT_PRODUCT_MAX: usize = 64;

/// Default number of prefix entries built on construction.
pub const DEFAULT_PREFIX_CAPACITY: usize = 1024;

impl WeightSequence {
    pub fn new(family: WeightFamily) -> WeightSequence {
        WeightSequence::with_capacity(family, DEFAULT_PREFIX_CAPACITY)
    }

    pub fn with_capacity(family: WeightFamily, capacity: usize) -> WeightSequence {
        let cap = family.index_limit().map_or(capacity, |l| l.min(capacity));
        let prefix = Arc::new(Prefix::build(&family, cap));
        WeightSequence { family, prefix }
    }

    /// Same weights with the prefix cache extended to at least `capacity`.
    pub fn extended(&self, capacity: usize) -> WeightSequence {
        let cap = self.family.index_limit().map_or(capacity, |l| l.min(capacity));
        if cap <= self.prefix.len() {
            self.clone()
        } else {
            WeightSequence::with_capacity(self.family.clone(), cap)
        }
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    pub fn capacity(&self) -> usize {
        self.prefix.len()
    }

    pub fn index_limit(&self) -> Option<usize> {
        self.family.index_limit()
    }

    /// `w_n` on the log scale.
    #[inline]
    pub fn get(&self, n: usize) -> LogReal {
        self.family.log_value(n)
    }

    pub fn value(&self, n: usize) -> f64 {
        self.family.linear_value(n)
    }

    /// `prod_{j=n}^{n+m-1} w_j` by plain multiplication for short windows,
    /// `None` when `m` is large or the product leaves the comfortable range.
    pub fn direct_product(&self, n: usize, m: usize) -> Option<f64> {
        if m > DIRECT_PRODUCT_MAX {
            return None;
        }
        let mut p = 1.0f64;
        for j in n..n + m {
            p *= self.family.linear_value(j);
            if p == 0.0 {
                return Some(0.0);
            }
            if !(libm::fabs(p) < 1e290 && libm::fabs(p) > 1e-290) {
                return None;
            }
        }
        Some(p)
    }

    /// `prod_{j=n}^{n+m-1} w_j` as a signed log value; the empty product is one.
    #[inline]
    pub fn window(&self, n: usize, m: usize) -> LogReal {
        let end = n + m;
        if m == 0 {
            return LogReal::ONE;
        }
        let p = &*self.prefix;
        if end <= p.len() {
            if p.zeros[end] != p.zeros[n] {
                return LogReal::ZERO;
            }
            let ln = (p.hi[end] - p.hi[n]) + (p.lo[end] - p.lo[n]);
            let sign = if (p.negatives[end] - p.negatives[n]) % 2 == 0 { 1 } else { -1 };
            LogReal::from_parts(sign, ln)
        } else {
            self.window_direct(n, m)
        }
    }

    /// `ln prod_{j=n}^{n+m-1} |w_j|`, `-inf` if a zero weight is in range.
    #[inline]
    pub fn ln_window(&self, n: usize, m: usize) -> f64 {
        self.window(n, m).ln_abs()
    }

    fn window_direct(&self, n: usize, m: usize) -> LogReal {
        let (mut s, mut c, mut sign) = (0.0f64, 0.0f64, 1i8);
        for j in n..n + m {
            let w = self.family.log_value(j);
            if w.is_zero() {
                return LogReal::ZERO;
            }
            sign *= w.sign();
            let v = w.ln_abs();
            let t = s + v;
            if libm::fabs(s) >= libm::fabs(v) {
                c += (s - t) + v;
            } else {
                c += (v - t) + s;
            }
            s = t;
        }
        LogReal::from_parts(sign, s + c)
    }

    /// Whether some weight with index below `len` is negative.
    pub fn has_negative_below(&self, len: usize) -> bool {
        if len <= self.prefix.len() {
            self.prefix.negatives[len] > 0
        } else {
            (0..len).any(|j| self.family.log_value(j).sign() < 0)
        }
    }

    /// Whether some weight with index below `len` is zero.
    pub fn has_zero_below(&self, len: usize) -> bool {
        if len <= self.prefix.len() {
            self.prefix.zeros[len] > 0
        } else {
            (0..len).any(|j| self.family.log_value(j).is_zero())
        }
    }

    /// Whether every weight with index below `len` is zero.
    pub fn all_zero_below(&self, len: usize) -> bool {
        if len <= self.prefix.len() {
            self.prefix.zeros[len] as usize == len
        } else {
            (0..len).all(|j| self.family.log_value(j).is_zero())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_exponents_validate() {
        for a in [
            ExponentSequence::Linear,
            ExponentSequence::Logarithmic,
            ExponentSequence::Power { theta: 0.5 },
        ] {
            a.validate(4096).unwrap();
        }
        let bad = ExponentSequence::Table(Arc::from(alloc::vec![1.0, 3.0, 2.0, 5.0]));
        assert!(matches!(bad.validate(10), Err(Error::InvalidExponent { index: 2, .. })));
        let flat = ExponentSequence::Table(Arc::from(alloc::vec![1.0, 2.0, 2.0, 2.0, 2.0]));
        assert!(matches!(flat.validate(10), Err(Error::ExponentNotDivergent { .. })));
        assert!(ExponentSequence::Power { theta: 0.0 }.validate(8).is_err());
    }

    #[test]
    fn table_past_end_is_error() {
        let t = ExponentSequence::Table(Arc::from(alloc::vec![0.5, 1.0]));
        assert_eq!(t.get(1), Ok(1.0));
        assert_eq!(t.get(2), Err(Error::IndexBeyondTable { index: 2, len: 2 }));
    }

    #[test]
    fn window_products() {
        let w = WeightSequence::new(WeightFamily::Polynomial { theta: 1.0 });
        assert!((w.window(0, 3).to_f64() - 6.0).abs() < 1e-13);
        assert!((w.window(1, 2).to_f64() - 6.0).abs() < 1e-13);
        let v = WeightSequence::new(WeightFamily::ReciprocalFactorial);
        assert!((v.window(3, 2).to_f64() - 1.0 / 12.0).abs() < 1e-15);
        assert!((v.window(0, 2).to_f64() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_and_sign_tracking() {
        let t = WeightSequence::new(WeightFamily::Table(Arc::from(alloc::vec![2.0, -1.0, 0.0, 3.0, -2.0])));
        assert_eq!(t.window(0, 2).to_f64(), -2.0);
        assert!(t.window(1, 2).is_zero());
        assert!((t.window(3, 2).to_f64() + 6.0).abs() < 1e-14);
        assert!(t.has_negative_below(2));
        assert!(!t.has_negative_below(1));
    }

    #[test]
    fn direct_fallback_matches_prefix() {
        let small = WeightSequence::with_capacity(WeightFamily::SqrtShifted, 8);
        let big = WeightSequence::with_capacity(WeightFamily::SqrtShifted, 400);
        for (n, m) in [(3, 30), (100, 200), (0, 399)] {
            let a = small.ln_window(n, m);
            let b = big.ln_window(n, m);
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }
}
