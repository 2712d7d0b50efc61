//! Log-gamma and factorial ratios.

/// `ln Gamma(x)` for `x > 0`.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `ln n!`
#[inline]
pub fn ln_factorial(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// `ln((n + m)! / n!)`, the log of the rising product `(n+1) ... (n+m)`.
#[inline]
pub fn ln_rising(n: usize, m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    ln_factorial(n + m) - ln_factorial(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_summed_logs() {
        let mut acc = 0.0f64;
        for n in 1..=3000usize {
            acc += (n as f64).ln();
            let g = ln_factorial(n);
            assert!((g - acc).abs() <= 1e-12 * acc.max(1.0), "n = {n}: {g} vs {acc}");
        }
        assert_eq!(ln_factorial(0), 0.0);
        assert!((ln_gamma(0.5) - 0.5 * core::f64::consts::PI.ln()).abs() < 1e-15);
    }

    #[test]
    fn rising_examples() {
        assert!((ln_rising(0, 3) - 6f64.ln()).abs() < 1e-14);
        assert!((ln_rising(2, 2) - 12f64.ln()).abs() < 1e-14);
        assert_eq!(ln_rising(7, 0), 0.0);
    }
}
