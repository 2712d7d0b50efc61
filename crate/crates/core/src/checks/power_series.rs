//! Fast paths for power series spaces: the matrix entries reduce to
//! `exp(±k alpha_n)`-type factors, so every condition becomes a statement
//! about `ln|prod w| / alpha` that is independent of `k` (or linear in it).

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::sweep::{bound, marks, limsup_along_n_plus_m, resolve_values, tail_blocks, Resolution, Series, TailEstimate, CHECKPOINTS, DOUBLED};
use super::{Outcome, Property, TruncationBudget, Verdict, Witness};
use crate::error::{Error, Result};
use crate::sequence::ExponentSequence;
use crate::shift::{ShiftKind, ShiftOperator};
use crate::space::SeriesType;

/// `x / a` for a log quantity over a positive exponent; indices where the
/// exponent vanishes are skipped (reported as `-inf`).
#[inline]
fn over(x: f64, a: f64) -> f64 {
    if x == f64::NEG_INFINITY || !(a > 0.0) {
        f64::NEG_INFINITY
    } else {
        x / a
    }
}

struct Ctx<'a> {
    op: ShiftOperator,
    ty: SeriesType,
    alpha: &'a ExponentSequence,
    n: usize,
    m: usize,
    truncated: bool,
}

impl<'a> Ctx<'a> {
    /// Budget bounds halved until `extra(n, m)` fits the index limit.
    fn new(op: &'a ShiftOperator, budget: &TruncationBudget, extra: impl Fn(usize, usize) -> usize) -> Result<Ctx<'a>> {
        let (ty, alpha) = op.space.power_series().ok_or(Error::NotPowerSeries)?;
        let (mut n, mut m) = (budget.n_max, budget.m_max);
        let mut truncated = false;
        if let Some(lim) = op.index_limit() {
            while extra(n, m) > lim && (n > 4 || m > 1) {
                n = (n / 2).max(4);
                m = (m / 2).max(1);
                truncated = true;
            }
        }
        let op = op.with_capacity(extra(n, m) + 2);
        Ok(Ctx { op, ty, alpha, n, m, truncated })
    }

    fn a(&self, n: usize) -> f64 {
        self.alpha.value(n)
    }

    /// `ln|prod_{j<m} w_{n+j}|` (backward) or `ln|prod_{j=1..m} w_{n+j}|`.
    fn lw(&self, n: usize, m: usize) -> f64 {
        match self.op.kind {
            ShiftKind::Backward => self.op.weights.ln_window(n, m),
            ShiftKind::Forward => self.op.weights.ln_window(n + 1, m),
        }
    }

    fn budget(&self, b: &TruncationBudget) -> TruncationBudget {
        TruncationBudget { n_max: self.n, m_max: self.m, ..*b }
    }

    fn finish(&self, mut v: Verdict) -> Verdict {
        if self.truncated {
            v.notes.push("budget reduced to fit the available table length".into());
        }
        v
    }
}

fn fmt_est(e: &TailEstimate) -> String {
    format!("tail block maxima {:.6}, {:.6}, {:.6}; extrapolated {:.6}", e.earlier, e.previous, e.value, e.extrapolated)
}

/// `limsup ln|w_n| / alpha_n`: finite on infinite type, `<= 0` on finite
/// type. The side condition `limsup alpha_{n+1} / alpha_n < inf` is sampled
/// and reported.
pub fn check_continuity_power_series(op: &ShiftOperator, budget: &TruncationBudget) -> Result<Verdict> {
    let c = Ctx::new(op, budget, |n, _| 2 * n + 3)?;
    let est = tail_blocks(c.n, 0, |n| over(c.op.weights.get(n).ln_abs(), c.a(n)));
    let outcome = match c.ty {
        SeriesType::Infinite => est.decide_finite(),
        SeriesType::Finite => est.decide_le(0.0, budget.stability_tol),
    };
    let side = (c.n..=2 * c.n).map(|n| c.a(n + 1) / c.a(n)).filter(|r| r.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    let mut v = Verdict::new(Property::Continuity, outcome, "limsup_n ln|w_n| / alpha_n", c.budget(budget));
    v.witness = Some(Witness { k: 0, l: 0, n: 2 * c.n, m: 1, value: est.extrapolated });
    v.notes.push(fmt_est(&est));
    v.notes.push(format!("sampled sup alpha_(n+1)/alpha_n on the top block: {side:.6}"));
    Ok(c.finish(v))
}

/// Per-`m` tail estimates of `f(n, m)` over `n`, for `m <= 2 M`.
fn per_m<F: FnMut(usize, usize) -> f64>(c: &Ctx, mut f: F) -> Vec<TailEstimate> {
    (1..=bound(c.m, DOUBLED)).map(|m| tail_blocks(c.n, 0, |n| f(n, m))).collect()
}

/// `R_j = max_{m <= bound(M, j)}` of the per-`m` limsup estimates.
fn sup_over_m(est: &[TailEstimate], m_base: usize) -> (Series, usize) {
    let mut r = [f64::NEG_INFINITY; CHECKPOINTS];
    let mut arg = 1;
    let mut best = f64::NEG_INFINITY;
    let mut j = 0;
    let mk_m_base = marks(m_base);
    for (i, e) in est.iter().enumerate() {
        let m = i + 1;
        let v = e.finite_estimate();
        if v > best || v.is_nan() {
            best = if v.is_nan() { f64::INFINITY } else { v };
            arg = m;
        }
        while j < CHECKPOINTS && mk_m_base[j] <= m {
            r[j] = best;
            j += 1;
        }
    }
    while j < CHECKPOINTS {
        r[j] = best;
        j += 1;
    }
    (r, arg)
}

/// Outcome of a value series whose finiteness is the condition. Without
/// escalation only clearly accelerating growth counts as a failure.
fn finite_outcome(r: &Series, budget: &TruncationBudget) -> (Outcome, f64) {
    let (res, trend) = resolve_values(r, budget);
    let o = match res {
        Resolution::Stable => Outcome::Holds,
        Resolution::Growing { accelerating: true, .. } => Outcome::Fails,
        _ => Outcome::Inconclusive,
    };
    (o, trend.slope_last)
}

/// `sup_m limsup_n` displays for topologizability, by kind and type.
pub fn check_topologizable_power_series(op: &ShiftOperator, budget: &TruncationBudget) -> Result<Verdict> {
    let c = Ctx::new(op, budget, |n, m| 2 * n + 2 * m + 3)?;
    let tol = budget.stability_tol;
    let kind = op.kind;
    let v = match (kind, c.ty) {
        (ShiftKind::Backward, SeriesType::Infinite) | (ShiftKind::Forward, SeriesType::Finite) | (ShiftKind::Backward, SeriesType::Finite) => {
            let est = per_m(&c, |n, m| over(c.lw(n, m), c.a(n + m)));
            let (r, arg) = sup_over_m(&est, c.m);
            let q = match kind {
                ShiftKind::Backward => "sup_m limsup_n ln|prod_{j<m} w_{n+j}| / alpha_(n+m)",
                ShiftKind::Forward => "sup_m limsup_n ln|prod_{j=1..m} w_{n+j}| / alpha_(n+m)",
            };
            let (outcome, slope, mut notes) = if c.ty == SeriesType::Infinite {
                let (o, s) = finite_outcome(&r, budget);
                (o, Some(s), Vec::new())
            } else {
                // sup over m of the limsups must not exceed 0
                let mut o = Outcome::Holds;
                for e in &est {
                    o = o.and(e.decide_le(0.0, tol));
                }
                (o, None, Vec::new())
            };
            let mut outcome = outcome;
            if kind == ShiftKind::Backward && c.ty == SeriesType::Finite {
                let top = 2 * c.n + 2 * c.m;
                let inc = |lo: usize, hi: usize| (lo..hi).map(|n| c.a(n + 1) - c.a(n)).fold(f64::NEG_INFINITY, f64::max);
                let early = inc(0, top / 2);
                let late = inc(top / 2, top);
                let bounded = late <= early * (1.0 + tol) + tol;
                if bounded {
                    notes.push(format!("alpha increments look bounded (max {late:.6}): the display is sufficient and necessary"));
                } else {
                    notes.push(format!("alpha increments grow (max {late:.6}): the display is only necessary"));
                    if outcome == Outcome::Holds {
                        outcome = Outcome::Inconclusive;
                    }
                }
            }
            let mut v = Verdict::new(Property::Topologizability, outcome, q, c.budget(budget));
            v.witness = Some(Witness { k: 0, l: 0, n: 2 * c.n, m: arg, value: r[DOUBLED] });
            v.growth_fit = slope;
            v.notes.append(&mut notes);
            v
        }
        (ShiftKind::Forward, SeriesType::Infinite) => {
            let mut outcome = Outcome::Holds;
            let mut lead = None;
            let mut fit = None;
            for k in 0..budget.k_max {
                let kf = k as f64;
                let est = per_m(&c, |n, m| over(c.lw(n, m) + kf * c.a(n + m), c.a(n)));
                let (r, arg) = sup_over_m(&est, c.m);
                let (o, s) = finite_outcome(&r, budget);
                if o != Outcome::Holds && lead.is_none() {
                    lead = Some(Witness { k, l: 0, n: 2 * c.n, m: arg, value: r[DOUBLED] });
                    fit = Some(s);
                }
                outcome = outcome.and(o);
                if o == Outcome::Fails {
                    break;
                }
            }
            let q = "sup_m limsup_n (ln|prod_{j=1..m} w_{n+j}| + k alpha_(n+m)) / alpha_n, each k";
            let mut v = Verdict::new(Property::Topologizability, outcome, q, c.budget(budget));
            v.witness = lead;
            v.growth_fit = fit;
            v
        }
    };
    Ok(c.finish(v))
}

/// Checkpoint maxima of `f(n, m)` over `n <= bound(N, j)`, `1 <= m <= bound(M, j)`.
fn sup_2d<F: FnMut(usize, usize) -> f64>(c: &Ctx, mut f: F) -> (Series, (usize, usize)) {
    let (na, mb) = (bound(c.n, DOUBLED), bound(c.m, DOUBLED));
    let mk_c_m = marks(c.m);
    let mut rows: Vec<[(f64, usize); CHECKPOINTS]> = Vec::with_capacity(na + 1);
    for n in 0..=na {
        let mut row = [(f64::NEG_INFINITY, 1); CHECKPOINTS];
        let mut cur = (f64::NEG_INFINITY, 1);
        let mut j = 0;
        for m in 1..=mb {
            let v = f(n, m);
            if v > cur.0 || v.is_nan() {
                cur = (if v.is_nan() { f64::INFINITY } else { v }, m);
            }
            while j < CHECKPOINTS && mk_c_m[j] <= m {
                row[j] = cur;
                j += 1;
            }
        }
        rows.push(row);
    }
    let mut s = [f64::NEG_INFINITY; CHECKPOINTS];
    let mut arg = (0, 1);
    for (j, sj) in s.iter_mut().enumerate() {
        for (n, row) in rows.iter().enumerate().take(bound(c.n, j) + 1) {
            if row[j].0 > *sj {
                *sj = row[j].0;
                if j == DOUBLED {
                    arg = (n, row[j].1);
                }
            }
        }
    }
    (s, arg)
}

/// Power boundedness displays; `alpha_0 > 0` is required.
pub fn check_power_bounded_power_series(op: &ShiftOperator, budget: &TruncationBudget) -> Result<Verdict> {
    let (ty, alpha) = op.space.power_series().ok_or(Error::NotPowerSeries)?;
    if !(alpha.get(0)? > 0.0) {
        return Err(Error::ZeroLeadingExponent);
    }
    let c = match ty {
        SeriesType::Infinite => Ctx::new(op, budget, |n, m| 2 * n + 2 * m + 3)?,
        SeriesType::Finite => Ctx::new(op, budget, |n, m| n + m + 3)?,
    };
    let tol = budget.stability_tol;
    let kind = op.kind;
    let mut outcome = Outcome::Holds;
    let mut lead = None;
    let mut fit = None;
    let mut notes = Vec::new();
    let q: &str = match (kind, ty) {
        (ShiftKind::Backward, SeriesType::Infinite) => {
            let (s, (n, m)) = sup_2d(&c, |n, m| over(c.lw(n, m), c.a(n + m)));
            let (o, sl) = finite_outcome(&s, budget);
            outcome = o;
            lead = Some(Witness { k: 0, l: 0, n, m, value: s[DOUBLED] });
            fit = Some(sl);
            "sup_{n,m} ln|prod_{j<m} w_{n+j}| / alpha_(n+m)"
        }
        (ShiftKind::Forward, SeriesType::Infinite) => {
            for k in 0..budget.k_max {
                let kf = k as f64;
                let (s, (n, m)) = sup_2d(&c, |n, m| over(c.lw(n, m) + kf * c.a(n + m), c.a(n)));
                let (o, sl) = finite_outcome(&s, budget);
                if o != Outcome::Holds && lead.is_none() || k + 1 == budget.k_max && lead.is_none() {
                    lead = Some(Witness { k, l: 0, n, m, value: s[DOUBLED] });
                    fit = Some(sl);
                }
                outcome = outcome.and(o);
                if o == Outcome::Fails {
                    break;
                }
            }
            "sup_{n,m} (ln|prod_{j=1..m} w_{n+j}| + k alpha_(n+m)) / alpha_n, each k"
        }
        (ShiftKind::Backward, SeriesType::Finite) => {
            for k in 0..budget.k_max {
                let kk = (k + 1) as f64;
                let est = limsup_along_n_plus_m(|n, m| over(join0(c.lw(n, m), -c.a(n) / kk), c.a(n + m)), &c.budget(budget));
                let o = est.decide_lt(0.0, tol);
                if o != Outcome::Holds && lead.is_none() {
                    lead = Some(Witness { k, l: 0, n: 0, m: c.n + c.m, value: est.extrapolated });
                    notes.push(format!("k = {k}: {}", fmt_est(&est)));
                }
                outcome = outcome.and(o);
                if o == Outcome::Fails {
                    break;
                }
            }
            "limsup_{n+m} (ln|prod_{j<m} w_{n+j}| - alpha_n/(k+1)) / alpha_(n+m) < 0, each k"
        }
        (ShiftKind::Forward, SeriesType::Finite) => {
            let est = limsup_along_n_plus_m(|n, m| over(c.lw(n, m), c.a(n + m)), &c.budget(budget));
            outcome = est.decide_le(0.0, tol);
            lead = Some(Witness { k: 0, l: 0, n: 0, m: c.n + c.m, value: est.extrapolated });
            notes.push(fmt_est(&est));
            "limsup_{n+m} ln|prod_{j=1..m} w_{n+j}| / alpha_(n+m) <= 0"
        }
    };
    let mut v = Verdict::new(Property::PowerBoundedness, outcome, q, c.budget(budget));
    v.witness = lead;
    v.growth_fit = fit;
    v.notes = notes;
    Ok(c.finish(v))
}

/// Sum of log quantities where `-inf` in the first absorbs.
#[inline]
fn join0(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        x
    } else {
        x + y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logreal::LogReal;
    use crate::sequence::{WeightFamily, WeightSequence};
    use crate::space::{make_power_series_space, KoetheMatrix, PNorm, SpaceSpec};
    use alloc::sync::Arc;

    fn small() -> TruncationBudget {
        TruncationBudget { n_max: 400, m_max: 40, k_max: 3, l_max: 6, ..TruncationBudget::default() }
    }

    fn op(kind: ShiftKind, w: WeightFamily, alpha: ExponentSequence, t: SeriesType) -> ShiftOperator {
        let s = make_power_series_space(alpha, t, PNorm::Finite(1.0)).unwrap();
        ShiftOperator::new(kind, WeightSequence::new(w), s)
    }

    fn e2alpha() -> WeightFamily {
        WeightFamily::ExpAlpha { gamma: 2.0, alpha: ExponentSequence::Linear }
    }

    #[test]
    fn continuity_examples() {
        let b = small();
        let inf = op(ShiftKind::Backward, e2alpha(), ExponentSequence::Linear, SeriesType::Infinite);
        let v = check_continuity_power_series(&inf, &b).unwrap();
        assert_eq!(v.outcome, Outcome::Holds);
        assert!((v.witness.unwrap().value - 2.0).abs() < 1e-9);
        let fin = op(ShiftKind::Backward, e2alpha(), ExponentSequence::Linear, SeriesType::Finite);
        assert_eq!(check_continuity_power_series(&fin, &b).unwrap().outcome, Outcome::Fails);
        let sq = op(ShiftKind::Backward, WeightFamily::SqrtShifted, ExponentSequence::Logarithmic, SeriesType::Infinite);
        let v = check_continuity_power_series(&sq, &b).unwrap();
        assert_eq!(v.outcome, Outcome::Holds);
        assert!((v.witness.unwrap().value - 0.5).abs() < 1e-9);
    }

    #[test]
    fn untagged_space_is_an_error() {
        let s = SpaceSpec::koethe(KoetheMatrix::PowerInfinite(ExponentSequence::Linear), PNorm::Finite(1.0));
        let o = ShiftOperator::new(ShiftKind::Backward, WeightSequence::new(WeightFamily::Constant(1.0)), s);
        assert_eq!(check_continuity_power_series(&o, &small()).unwrap_err(), Error::NotPowerSeries);
    }

    #[test]
    fn zero_leading_exponent_is_an_error() {
        let o = op(ShiftKind::Backward, WeightFamily::Constant(1.0), ExponentSequence::Logarithmic, SeriesType::Infinite);
        assert_eq!(check_power_bounded_power_series(&o, &small()).unwrap_err(), Error::ZeroLeadingExponent);
    }

    #[test]
    fn topologizable_examples() {
        let b = small();
        let d = op(ShiftKind::Backward, WeightFamily::Polynomial { theta: 1.0 }, ExponentSequence::Linear, SeriesType::Infinite);
        assert_eq!(check_topologizable_power_series(&d, &b).unwrap().outcome, Outcome::Holds);
        let sq = op(ShiftKind::Backward, WeightFamily::SqrtShifted, ExponentSequence::Logarithmic, SeriesType::Infinite);
        assert_eq!(check_topologizable_power_series(&sq, &b).unwrap().outcome, Outcome::Fails);
        let one = op(ShiftKind::Backward, WeightFamily::Constant(1.0), ExponentSequence::Linear, SeriesType::Finite);
        let v = check_topologizable_power_series(&one, &b).unwrap();
        assert_eq!(v.outcome, Outcome::Holds);
        assert!(v.notes.iter().any(|n| n.contains("sufficient and necessary")));
    }

    #[test]
    fn power_bounded_examples() {
        let b = small();
        let one = op(ShiftKind::Backward, WeightFamily::Constant(1.0), ExponentSequence::Linear, SeriesType::Infinite);
        assert_eq!(check_power_bounded_power_series(&one, &b).unwrap().outcome, Outcome::Holds);
        let vd = op(ShiftKind::Forward, WeightFamily::ReciprocalFactorial, ExponentSequence::Linear, SeriesType::Finite);
        assert_eq!(check_power_bounded_power_series(&vd, &b).unwrap().outcome, Outcome::Holds);
        let two = op(ShiftKind::Backward, WeightFamily::Constant(2.0), ExponentSequence::Linear, SeriesType::Finite);
        assert_eq!(check_power_bounded_power_series(&two, &b).unwrap().outcome, Outcome::Fails);
        let huge = WeightFamily::Custom { name: "e^(n^2)", f: Arc::new(|n| LogReal::exp((n * n) as f64)) };
        let h = op(ShiftKind::Backward, huge, ExponentSequence::Linear, SeriesType::Infinite);
        assert_eq!(check_power_bounded_power_series(&h, &b).unwrap().outcome, Outcome::Fails);
    }
}
