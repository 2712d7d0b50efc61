//! Köthe matrices, echelon spaces and finitely supported vectors.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::logreal::LogSum;
use crate::sequence::ExponentSequence;

type EntryFn = Arc<dyn Fn(usize, usize) -> f64 + Send + Sync>;

/// A Köthe matrix `A = (a_{n,k})`, given through `ln a_{n,k}`.
#[derive(Clone)]
pub enum KoetheMatrix {
    /// `a_{n,k} = exp(k alpha_n)`
    PowerInfinite(ExponentSequence),
    /// `a_{n,k} = exp(-alpha_n / (k + 1))`
    PowerFinite(ExponentSequence),
    /// `a_{n,k} = 1`, so every `lambda_p(A)` is the plain sequence space.
    Constant,
    /// `a_{n,k} = (n + 1)^k`
    Polynomial,
    /// Caller-supplied `ln a_{n,k}` with declared column structure.
    Custom {
        name: String,
        ln_entry: EntryFn,
        increasing_in_n: bool,
        decreasing_in_n: bool,
        index_limit: Option<usize>,
    },
}

impl fmt::Debug for KoetheMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KoetheMatrix::PowerInfinite(a) => write!(f, "PowerInfinite({a:?})"),
            KoetheMatrix::PowerFinite(a) => write!(f, "PowerFinite({a:?})"),
            KoetheMatrix::Constant => write!(f, "Constant"),
            KoetheMatrix::Polynomial => write!(f, "Polynomial"),
            KoetheMatrix::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl KoetheMatrix {
    /// `ln a_{n,k}`, `-inf` for a zero entry.
    #[inline]
    pub fn ln_entry(&self, n: usize, k: usize) -> f64 {
        match self {
            KoetheMatrix::PowerInfinite(a) => {
                if k == 0 {
                    0.0
                } else {
                    k as f64 * a.value(n)
                }
            }
            KoetheMatrix::PowerFinite(a) => -a.value(n) / (k as f64 + 1.0),
            KoetheMatrix::Constant => 0.0,
            KoetheMatrix::Polynomial => k as f64 * libm::log(n as f64 + 1.0),
            KoetheMatrix::Custom { ln_entry, .. } => ln_entry(n, k),
        }
    }

    pub fn entry(&self, n: usize, k: usize) -> f64 {
        libm::exp(self.ln_entry(n, k))
    }

    /// Every column is nondecreasing in `n`.
    pub fn columns_increasing_in_n(&self) -> bool {
        match self {
            KoetheMatrix::PowerInfinite(_) | KoetheMatrix::Constant | KoetheMatrix::Polynomial => true,
            KoetheMatrix::PowerFinite(_) => false,
            KoetheMatrix::Custom { increasing_in_n, .. } => *increasing_in_n,
        }
    }

    /// Every column is nonincreasing in `n`.
    pub fn columns_decreasing_in_n(&self) -> bool {
        match self {
            KoetheMatrix::PowerFinite(_) | KoetheMatrix::Constant => true,
            KoetheMatrix::PowerInfinite(_) | KoetheMatrix::Polynomial => false,
            KoetheMatrix::Custom { decreasing_in_n, .. } => *decreasing_in_n,
        }
    }

    /// Number of rows with defined entries, `None` when unbounded.
    pub fn index_limit(&self) -> Option<usize> {
        match self {
            KoetheMatrix::PowerInfinite(a) | KoetheMatrix::PowerFinite(a) => a.index_limit(),
            KoetheMatrix::Custom { index_limit, .. } => *index_limit,
            _ => None,
        }
    }

    /// Checks `a_{n,k} <= a_{n,k+1}` for `n < rows`, `k < cols` and that each
    /// sampled row has a positive entry.
    pub fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        let rows = self.index_limit().map_or(rows, |l| l.min(rows));
        for n in 0..rows {
            let mut positive = false;
            for k in 0..cols {
                let a = self.ln_entry(n, k);
                let b = self.ln_entry(n, k + 1);
                if a.is_nan() || b.is_nan() || a > b + 1e-12 * a.abs().max(1.0) {
                    return Err(Error::NonMonotoneMatrix { n, k });
                }
                positive |= a > f64::NEG_INFINITY || b > f64::NEG_INFINITY;
            }
            if !positive {
                return Err(Error::DegenerateRow { n });
            }
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        use alloc::format;
        match self {
            KoetheMatrix::PowerInfinite(a) => format!("exp(k*alpha_n), alpha_n = {}", a.describe()),
            KoetheMatrix::PowerFinite(a) => format!("exp(-alpha_n/(k+1)), alpha_n = {}", a.describe()),
            KoetheMatrix::Constant => "1".into(),
            KoetheMatrix::Polynomial => "(n+1)^k".into(),
            KoetheMatrix::Custom { name, .. } => name.clone(),
        }
    }
}

/// The exponent `p` of `lambda_p(A)`: `0`, a real in `[1, inf)`, or `inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PNorm {
    Zero,
    Finite(f64),
    Infinity,
}

impl PNorm {
    pub fn new(p: f64) -> Result<PNorm> {
        if p == 0.0 {
            Ok(PNorm::Zero)
        } else if p == f64::INFINITY {
            Ok(PNorm::Infinity)
        } else if p >= 1.0 && p.is_finite() {
            Ok(PNorm::Finite(p))
        } else {
            Err(Error::InvalidP(p))
        }
    }

    /// The sup-type norms `p = 0` and `p = inf` share one formula.
    pub fn is_sup(self) -> bool {
        !matches!(self, PNorm::Finite(_))
    }

    /// `p` for finite exponents, `1` for the sup norms (the exponent used in
    /// the sum-type Cesàro quantities).
    pub fn exponent(self) -> f64 {
        match self {
            PNorm::Finite(p) => p,
            _ => 1.0,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            PNorm::Zero => 0.0,
            PNorm::Finite(p) => p,
            PNorm::Infinity => f64::INFINITY,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesType {
    /// `Lambda_0(alpha)`
    Finite,
    /// `Lambda_inf(alpha)`
    Infinite,
}

/// `lambda_p(A)`, optionally known to be a power series space.
#[derive(Clone, Debug)]
pub struct SpaceSpec {
    pub matrix: KoetheMatrix,
    pub p: PNorm,
    tagged: bool,
}

impl SpaceSpec {
    /// A generic echelon space; no power series structure is assumed.
    pub fn koethe(matrix: KoetheMatrix, p: PNorm) -> SpaceSpec {
        SpaceSpec { matrix, p, tagged: false }
    }

    /// `(type, alpha)` when the space was built as a power series space.
    pub fn power_series(&self) -> Option<(SeriesType, &ExponentSequence)> {
        if !self.tagged {
            return None;
        }
        match &self.matrix {
            KoetheMatrix::PowerInfinite(a) => Some((SeriesType::Infinite, a)),
            KoetheMatrix::PowerFinite(a) => Some((SeriesType::Finite, a)),
            _ => None,
        }
    }

    pub fn index_limit(&self) -> Option<usize> {
        self.matrix.index_limit()
    }
}

/// Sample length used when validating exponent sequences.
pub const EXPONENT_SAMPLE: usize = 1 << 14;

/// The power series space `Lambda_0(alpha)` or `Lambda_inf(alpha)` realized
/// as `lambda_p` of the canonical matrix.
pub fn make_power_series_space(alpha: ExponentSequence, kind: SeriesType, p: PNorm) -> Result<SpaceSpec> {
    alpha.validate(EXPONENT_SAMPLE)?;
    let matrix = match kind {
        SeriesType::Infinite => KoetheMatrix::PowerInfinite(alpha),
        SeriesType::Finite => KoetheMatrix::PowerFinite(alpha),
    };
    Ok(SpaceSpec { matrix, p, tagged: true })
}

/// A finitely supported real sequence; entries past the stored range and at
/// negative indices are zero.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct FiniteVector {
    coeffs: Vec<f64>,
}

impl FiniteVector {
    pub fn new(mut coeffs: Vec<f64>) -> FiniteVector {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        FiniteVector { coeffs }
    }

    pub fn zero() -> FiniteVector {
        FiniteVector { coeffs: Vec::new() }
    }

    /// Length of the stored range; every entry at or past it is zero.
    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    #[inline]
    pub fn get(&self, n: usize) -> f64 {
        self.coeffs.get(n).copied().unwrap_or(0.0)
    }

    /// `x_n` for a possibly negative index.
    #[inline]
    pub fn get_signed(&self, n: isize) -> f64 {
        if n < 0 {
            0.0
        } else {
            self.get(n as usize)
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn scaled(&self, c: f64) -> FiniteVector {
        FiniteVector::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn add(&self, other: &FiniteVector) -> FiniteVector {
        let len = self.support_len().max(other.support_len());
        FiniteVector::new((0..len).map(|n| self.get(n) + other.get(n)).collect())
    }

    /// Number of nonzero coordinates.
    pub fn nnz(&self) -> usize {
        self.coeffs.iter().filter(|&&c| c != 0.0).count()
    }
}

/// The unit vector `e_r`.
pub fn basis_vector(r: usize) -> FiniteVector {
    let mut c = alloc::vec![0.0; r + 1];
    c[r] = 1.0;
    FiniteVector { coeffs: c }
}

/// `ln ||x||_{k,p}` from the logs of the terms `|x_n| a_{n,k}`.
pub(crate) fn ln_norm_of_terms<I: IntoIterator<Item = f64>>(terms: I, p: PNorm) -> f64 {
    match p {
        PNorm::Finite(q) => {
            let mut s = LogSum::new();
            for t in terms {
                s.add(q * t);
            }
            s.value() / q
        }
        _ => terms.into_iter().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// `ln ||x||_{k,p}`.
pub fn ln_seminorm(x: &FiniteVector, k: usize, space: &SpaceSpec) -> f64 {
    let terms = x.coeffs.iter().enumerate().filter(|(_, &c)| c != 0.0).map(|(n, &c)| {
        libm::log(libm::fabs(c)) + space.matrix.ln_entry(n, k)
    });
    ln_norm_of_terms(terms, space.p)
}

/// `||x||_{k,p}`: the weighted `l^p` norm for finite `p`, the weighted sup
/// norm for `p` in `{0, inf}`. Overflow saturates to `inf`.
pub fn seminorm(x: &FiniteVector, k: usize, space: &SpaceSpec) -> f64 {
    libm::exp(ln_seminorm(x, k, space))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn canonical_matrices() {
        let inf = make_power_series_space(ExponentSequence::Linear, SeriesType::Infinite, PNorm::Finite(1.0)).unwrap();
        assert!(rel(inf.matrix.entry(0, 2), 7.389_056_098_930_65) < 1e-14);
        let fin = make_power_series_space(ExponentSequence::Linear, SeriesType::Finite, PNorm::Finite(1.0)).unwrap();
        assert!(rel(fin.matrix.entry(3, 0), 0.018_315_638_888_734_18) < 1e-14);
        let s = make_power_series_space(ExponentSequence::Logarithmic, SeriesType::Infinite, PNorm::Finite(1.0)).unwrap();
        assert!(rel(s.matrix.entry(4, 3), 125.0) < 1e-13);
    }

    #[test]
    fn seminorm_examples() {
        let inf1 = make_power_series_space(ExponentSequence::Linear, SeriesType::Infinite, PNorm::Finite(1.0)).unwrap();
        assert!(rel(seminorm(&basis_vector(0), 2, &inf1), 2f64.exp()) < 1e-14);
        let infsup = SpaceSpec { p: PNorm::Infinity, ..inf1.clone() };
        let x = basis_vector(1).add(&basis_vector(2));
        assert!(rel(seminorm(&x, 1, &infsup), 3f64.exp()) < 1e-14);
        let fin = make_power_series_space(ExponentSequence::Linear, SeriesType::Finite, PNorm::Finite(1.0)).unwrap();
        let ones = FiniteVector::new(alloc::vec![1.0, 1.0, 1.0]);
        let oracle = (-1f64).exp() + (-2f64).exp() + (-3f64).exp();
        assert!(rel(seminorm(&ones, 0, &fin), oracle) < 1e-14);
    }

    #[test]
    fn basis_norm_is_entry() {
        let sp = SpaceSpec::koethe(KoetheMatrix::Polynomial, PNorm::Finite(2.0));
        for r in 0..6 {
            for k in 0..4 {
                assert!(rel(seminorm(&basis_vector(r), k, &sp), sp.matrix.entry(r, k)) < 1e-13);
            }
        }
    }

    #[test]
    fn p_validation() {
        assert!(PNorm::new(0.5).is_err());
        assert!(PNorm::new(-1.0).is_err());
        assert_eq!(PNorm::new(0.0), Ok(PNorm::Zero));
        assert_eq!(PNorm::new(f64::INFINITY), Ok(PNorm::Infinity));
    }

    #[test]
    fn power_series_rejects_bad_alpha() {
        let bad = ExponentSequence::Table(Arc::from(alloc::vec![2.0, 1.0, 3.0]));
        assert!(make_power_series_space(bad, SeriesType::Finite, PNorm::Finite(1.0)).is_err());
    }

    #[test]
    fn matrix_validation() {
        KoetheMatrix::Polynomial.validate(100, 8).unwrap();
        KoetheMatrix::PowerFinite(ExponentSequence::Linear).validate(100, 8).unwrap();
        let bad = KoetheMatrix::Custom {
            name: "decreasing in k".into(),
            ln_entry: Arc::new(|_, k| -(k as f64)),
            increasing_in_n: true,
            decreasing_in_n: true,
            index_limit: None,
        };
        assert!(matches!(bad.validate(4, 4), Err(Error::NonMonotoneMatrix { n: 0, k: 0 })));
    }
}
