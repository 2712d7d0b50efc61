//! Weighted backward and forward shifts, their iterates and Cesàro means.

use alloc::vec::Vec;

use crate::logreal::{signed_log_sum, LogReal};
use crate::sequence::WeightSequence;
use crate::space::{ln_norm_of_terms, FiniteVector, SpaceSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ShiftKind {
    /// `(B_w x)_n = w_n x_{n+1}`
    Backward,
    /// `(F_w x)_n = w_n x_{n-1}`
    Forward,
}

impl ShiftKind {
    pub fn name(self) -> &'static str {
        match self {
            ShiftKind::Backward => "backward",
            ShiftKind::Forward => "forward",
        }
    }
}

/// A weighted shift acting on a fixed echelon space.
#[derive(Clone, Debug)]
pub struct ShiftOperator {
    pub kind: ShiftKind,
    pub weights: WeightSequence,
    pub space: SpaceSpec,
}

fn ln_abs(c: f64) -> f64 {
    libm::log(libm::fabs(c))
}

impl ShiftOperator {
    pub fn new(kind: ShiftKind, weights: WeightSequence, space: SpaceSpec) -> ShiftOperator {
        ShiftOperator { kind, weights, space }
    }

    /// Largest index at which weights and matrix entries are both defined.
    pub fn index_limit(&self) -> Option<usize> {
        match (self.weights.index_limit(), self.space.index_limit()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// The same operator with weight prefix sums built up to `capacity`.
    pub fn with_capacity(&self, capacity: usize) -> ShiftOperator {
        ShiftOperator {
            kind: self.kind,
            weights: self.weights.extended(capacity),
            space: self.space.clone(),
        }
    }

    /// Window product of the `m`-th iterate that moves mass from index
    /// `src` to its image, i.e. `prod_{j=1}^m w_{src-j}` (backward) or
    /// `prod_{j=1}^m w_{src+j}` (forward). Backward images of `src < m`
    /// vanish and yield zero.
    #[inline]
    pub fn transfer(&self, src: usize, m: usize) -> LogReal {
        match self.kind {
            ShiftKind::Backward => {
                if src < m {
                    LogReal::ZERO
                } else {
                    self.weights.window(src - m, m)
                }
            }
            ShiftKind::Forward => self.weights.window(src + 1, m),
        }
    }

    /// Image index of `src` under the `m`-th iterate.
    #[inline]
    fn target(&self, src: usize, m: usize) -> Option<usize> {
        match self.kind {
            ShiftKind::Backward => src.checked_sub(m),
            ShiftKind::Forward => Some(src + m),
        }
    }

    pub fn apply(&self, x: &FiniteVector) -> FiniteVector {
        self.iterate(x, 1)
    }

    /// `T^m x` from window products; `T^0` is the identity.
    pub fn iterate(&self, x: &FiniteVector, m: usize) -> FiniteVector {
        if m == 0 {
            return x.clone();
        }
        let len = match self.kind {
            ShiftKind::Backward => x.support_len().saturating_sub(m),
            ShiftKind::Forward => x.support_len() + m,
        };
        let mut y = alloc::vec![0.0; len];
        for (src, &c) in x.coeffs().iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            if let Some(t) = self.target(src, m) {
                let start = match self.kind {
                    ShiftKind::Backward => src - m,
                    ShiftKind::Forward => src + 1,
                };
                // short windows multiplied out keep integer weights exact
                y[t] = match self.weights.direct_product(start, m) {
                    Some(p) => c * p,
                    None => (LogReal::from_f64(c) * self.transfer(src, m)).to_f64(),
                };
            }
        }
        FiniteVector::new(y)
    }

    /// `ln ||T^m x||_k`, evaluated from the re-indexed closed forms without
    /// building `T^m x`.
    pub fn ln_iterate_seminorm(&self, x: &FiniteVector, m: usize, k: usize) -> f64 {
        let a = &self.space.matrix;
        let terms = x.coeffs().iter().enumerate().filter(|(_, &c)| c != 0.0).filter_map(|(src, &c)| {
            let t = self.target(src, m)?;
            Some(ln_abs(c) + self.transfer(src, m).ln_abs() + a.ln_entry(t, k))
        });
        ln_norm_of_terms(terms, self.space.p)
    }

    pub fn iterate_seminorm(&self, x: &FiniteVector, m: usize, k: usize) -> f64 {
        libm::exp(self.ln_iterate_seminorm(x, m, k))
    }

    /// The Cesàro mean `T^[n] x = (1/n) sum_{m=1}^n T^m x`, `n >= 1`.
    pub fn cesaro_mean(&self, x: &FiniteVector, n: usize) -> FiniteVector {
        let coords = self.cesaro_coordinates(x, n);
        FiniteVector::new(coords.into_iter().map(LogReal::to_f64).collect())
    }

    /// Coordinates of `T^[n] x` on the log scale, each inner sum taken in
    /// rescaled ordinary arithmetic so signed weights cancel correctly.
    fn cesaro_coordinates(&self, x: &FiniteVector, n: usize) -> Vec<LogReal> {
        assert!(n >= 1, "Cesàro means start at n = 1");
        let len = match self.kind {
            ShiftKind::Backward => x.support_len().saturating_sub(1),
            ShiftKind::Forward => x.support_len() + n,
        };
        let ln_n = libm::log(n as f64);
        let mut buf = Vec::new();
        (0..len)
            .map(|j| {
                buf.clear();
                for m in 1..=n {
                    let src = match self.kind {
                        ShiftKind::Backward => j + m,
                        ShiftKind::Forward => match j.checked_sub(m) {
                            Some(s) => s,
                            None => break,
                        },
                    };
                    let c = x.get(src);
                    if c != 0.0 {
                        buf.push(LogReal::from_f64(c) * self.transfer(src, m));
                    }
                }
                let s = signed_log_sum(&buf);
                LogReal::from_parts(s.sign(), s.ln_abs() - ln_n)
            })
            .collect()
    }

    /// `ln ||T^[n] x||_k` from the double-sum identity.
    pub fn ln_cesaro_seminorm(&self, x: &FiniteVector, n: usize, k: usize) -> f64 {
        let a = &self.space.matrix;
        let coords = self.cesaro_coordinates(x, n);
        let terms = coords
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| c.ln_abs() + a.ln_entry(j, k));
        ln_norm_of_terms(terms, self.space.p)
    }

    pub fn cesaro_seminorm(&self, x: &FiniteVector, n: usize, k: usize) -> f64 {
        libm::exp(self.ln_cesaro_seminorm(x, n, k))
    }
}
