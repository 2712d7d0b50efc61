//! Truncated sweeps of running suprema and the rules that turn them into
//! three-valued outcomes.
//!
//! A sweep records the running supremum `S_j` (on the log scale) over the
//! region scaled by `t_j = 2^{(j-4)/4}`, `j = 0..=8`. `t_4 = 1` is the
//! nominal budget and `t_8 = 2` the doubled one. A supremum is *stable* when
//! doubling changes it by less than the stability tolerance, and *growing*
//! when the least-squares slope of `S` against `ln t` over the upper half of
//! the checkpoints exceeds the growth tolerance.

use alloc::vec::Vec;

use super::{Outcome, TruncationBudget, Witness};

pub const CHECKPOINTS: usize = 9;
pub const NOMINAL: usize = 4;
pub const DOUBLED: usize = 8;

pub type Series = [f64; CHECKPOINTS];

/// Scale factor of checkpoint `j`.
pub fn fraction(j: usize) -> f64 {
    libm::exp2((j as f64 - NOMINAL as f64) / 4.0)
}

/// Index bound of checkpoint `j` for a base bound.
pub fn bound(base: usize, j: usize) -> usize {
    let b = libm::ceil(base as f64 * fraction(j)) as usize;
    b.max(1)
}

/// All checkpoint bounds of a base bound, for use inside hot loops.
pub fn marks(base: usize) -> [usize; CHECKPOINTS] {
    core::array::from_fn(|j| bound(base, j))
}

/// Least-squares slope of `s[j]` against `ln t_j` over `lo..=hi`. Points at
/// `-inf` are skipped; any `+inf` gives `+inf`.
pub fn fitted_slope(s: &Series, lo: usize, hi: usize) -> f64 {
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for j in lo..=hi {
        if s[j] == f64::INFINITY {
            return f64::INFINITY;
        }
        if s[j].is_finite() {
            pts.push((libm::log(fraction(j)), s[j]));
        }
    }
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Trend {
    /// `S` at the nominal budget.
    pub nominal: f64,
    /// `S` at the doubled budget.
    pub doubled: f64,
    pub slope_prev: f64,
    pub slope_last: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Resolution {
    Stable,
    /// `accelerating`: the increments of `S` at least double when `t`
    /// doubles (growth at least exponential in the index).
    /// `persistent`: the fitted slope did not collapse between the two
    /// halves of the sweep.
    Growing { accelerating: bool, persistent: bool },
    Unresolved,
}

impl Resolution {
    pub fn is_stable(self) -> bool {
        matches!(self, Resolution::Stable)
    }
}

pub fn trend(s: &Series) -> Trend {
    Trend {
        nominal: s[NOMINAL],
        doubled: s[DOUBLED],
        slope_prev: fitted_slope(s, 0, NOMINAL),
        slope_last: fitted_slope(s, NOMINAL, DOUBLED),
    }
}

/// Change of a log-scale supremum under doubling, `-inf` when both ends vanish.
fn log_change(from: f64, to: f64) -> f64 {
    if to == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else if from == f64::NEG_INFINITY || to == f64::INFINITY {
        f64::INFINITY
    } else {
        to - from
    }
}

/// Whether doubling moved the log supremum by less than `ln(1 + tol)`.
pub fn stable_change(from: f64, to: f64, tol: f64) -> bool {
    log_change(from, to) <= libm::log1p(tol)
}

pub fn resolve(s: &Series, budget: &TruncationBudget) -> (Resolution, Trend) {
    let t = trend(s);
    if stable_change(s[NOMINAL], s[DOUBLED], budget.stability_tol) {
        return (Resolution::Stable, t);
    }
    if s[DOUBLED] == f64::INFINITY {
        return (Resolution::Growing { accelerating: true, persistent: true }, t);
    }
    if t.slope_last > budget.growth_tol {
        let d1 = s[NOMINAL] - s[0];
        let d2 = s[DOUBLED] - s[NOMINAL];
        let accelerating = d1 > 0.0 && d2 >= 1.9 * d1;
        let persistent = t.slope_last >= 0.5 * t.slope_prev;
        return (Resolution::Growing { accelerating, persistent }, t);
    }
    (Resolution::Unresolved, t)
}

/// Resolution of a sweep whose entries are plain values rather than logs
/// (the power series displays). Stability is relative to `max(1, |R|)`;
/// growth is measured on `ln R` once `R` is positive.
pub fn resolve_values(r: &Series, budget: &TruncationBudget) -> (Resolution, Trend) {
    let logs = r.map(|v| if v > 0.0 { libm::log(v) } else { f64::NEG_INFINITY });
    let t = Trend {
        nominal: r[NOMINAL],
        doubled: r[DOUBLED],
        slope_prev: fitted_slope(&logs, 0, NOMINAL),
        slope_last: fitted_slope(&logs, NOMINAL, DOUBLED),
    };
    if r[DOUBLED] == f64::INFINITY || r.iter().any(|v| v.is_nan()) {
        return (Resolution::Growing { accelerating: true, persistent: true }, t);
    }
    let scale = r[NOMINAL].abs().max(1.0);
    if r[DOUBLED] - r[NOMINAL] <= budget.stability_tol * scale {
        return (Resolution::Stable, t);
    }
    if r[NOMINAL] > 0.0 && t.slope_last > budget.growth_tol {
        let d1 = r[NOMINAL] - r[0];
        let d2 = r[DOUBLED] - r[NOMINAL];
        let accelerating = d1 > 0.0 && d2 >= 1.9 * d1;
        let persistent = t.slope_last >= 0.5 * t.slope_prev;
        return (Resolution::Growing { accelerating, persistent }, t);
    }
    (Resolution::Unresolved, t)
}

/// Limsup estimate of a sequence from the maxima over three consecutive
/// dyadic blocks, the last one being the top of the sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailEstimate {
    /// Maximum over the top block.
    pub value: f64,
    pub previous: f64,
    pub earlier: f64,
    /// Aitken extrapolation of the block maxima: finite when the increments
    /// contract geometrically, `-inf` when they decrease without
    /// contracting, `+inf` when they grow without contracting.
    pub extrapolated: f64,
}

/// Relative change per doubling below which a block trend is ignored when
/// extrapolating to infinity: a log-slope of 0.1 per doubling for steps that
/// merely fail to shrink, 0.05 for steps that grow by half or more.
const MATERIAL_STEP: f64 = 0.1 * core::f64::consts::LN_2;
const MATERIAL_STEP_ACCEL: f64 = 0.05 * core::f64::consts::LN_2;
const ACCEL_RATIO: f64 = 1.5;

/// Largest multiple of the last increment added by the extrapolation
/// (reached at a contraction ratio of 3/4).
const AITKEN_CAP: f64 = 3.0;

impl TailEstimate {
    pub fn from_blocks(earlier: f64, previous: f64, value: f64) -> TailEstimate {
        let extrapolated = if value == f64::INFINITY {
            f64::INFINITY
        } else if value == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else if !(earlier.is_finite() && previous.is_finite()) {
            value
        } else {
            let d1 = previous - earlier;
            let d2 = value - previous;
            if d1 == 0.0 || d2 == 0.0 {
                value
            } else {
                let q = d2 / d1;
                // non-shrinking increments only mean divergence when they are
                // not negligible next to the value itself
                let scale = libm::fmax(1.0, libm::fabs(value));
                let step = if q >= ACCEL_RATIO { MATERIAL_STEP_ACCEL } else { MATERIAL_STEP };
                let material = libm::fabs(d2) > step * scale;
                if q > 0.0 && q < 1.0 {
                    // slow contraction makes the geometric tail unreliable
                    value + d2 * libm::fmin(q / (1.0 - q), AITKEN_CAP)
                } else if q >= 1.0 && d2 < 0.0 && material {
                    f64::NEG_INFINITY
                } else if q >= 1.0 && d2 > 0.0 && material {
                    f64::INFINITY
                } else {
                    value
                }
            }
        };
        TailEstimate { value, previous, earlier, extrapolated }
    }

    /// The last block maximum is still clearly below the previous one, as
    /// for `1 / ln n`, whose limit no extrapolation from three dyadic blocks
    /// pins down. Such a tail never certifies a failure.
    fn still_falling(&self, tol: f64) -> bool {
        self.value.is_finite()
            && self.previous.is_finite()
            && self.value - self.previous < -tol * libm::fmax(libm::fabs(self.value), tol)
    }

    /// `limsup <= threshold` within `tol`.
    pub fn decide_le(&self, threshold: f64, tol: f64) -> Outcome {
        if self.extrapolated <= threshold + tol && self.value < f64::INFINITY {
            Outcome::Holds
        } else if self.extrapolated > threshold + tol && self.value > threshold + tol && !self.still_falling(tol) {
            Outcome::Fails
        } else {
            Outcome::Inconclusive
        }
    }

    /// `limsup < threshold`, decided only outside a `tol` band.
    pub fn decide_lt(&self, threshold: f64, tol: f64) -> Outcome {
        if self.extrapolated < threshold - tol && self.value < f64::INFINITY {
            Outcome::Holds
        } else if self.extrapolated > threshold + tol && !self.still_falling(tol) {
            Outcome::Fails
        } else {
            Outcome::Inconclusive
        }
    }

    /// `limsup < inf`. An extrapolated divergence counts only once the tail
    /// is positive: a negative tail climbing with non-shrinking steps (like
    /// `-ln n / n^0.3`) may still level off below zero.
    pub fn decide_finite(&self) -> Outcome {
        if self.value == f64::INFINITY {
            Outcome::Fails
        } else if self.value.is_nan() {
            Outcome::Inconclusive
        } else if self.extrapolated == f64::INFINITY {
            if self.value > 0.0 {
                Outcome::Fails
            } else {
                Outcome::Inconclusive
            }
        } else {
            Outcome::Holds
        }
    }

    /// For finiteness questions: `+inf` when [`Self::decide_finite`] fails,
    /// else the extrapolated limit of a falling tail and the top block
    /// maximum of a rising one. Overshooting extrapolations of slowly
    /// rising tails would otherwise read as growth along another axis.
    pub fn finite_estimate(&self) -> f64 {
        match self.decide_finite() {
            Outcome::Holds | Outcome::Inconclusive => libm::fmin(self.value, self.extrapolated),
            Outcome::Fails => f64::INFINITY,
        }
    }
}

/// Block maxima of `f` over `[top/4, top/2)`, `[top/2, top)` and `[top, 2 top]`.
pub fn tail_blocks<F: FnMut(usize) -> f64>(top: usize, lo_limit: usize, mut f: F) -> TailEstimate {
    let top = top.max(4);
    let mut block = |lo: usize, hi: usize| {
        let mut m = f64::NEG_INFINITY;
        for n in lo.max(lo_limit)..hi {
            let v = f(n);
            if v > m || v.is_nan() {
                m = v;
            }
        }
        m
    };
    let e = block(top / 4, top / 2);
    let p = block(top / 2, top);
    let v = block(top, 2 * top + 1);
    TailEstimate::from_blocks(e, p, v)
}

/// Estimate of the superior limit along `n + m` of a doubly indexed array
/// (`n >= 0`, `m >= 1`): the maximum over all anti-diagonals `n + m = d` in
/// the top dyadic block `d` in `[D/2, D]`, `D = N_max + M_max`, with the two
/// preceding blocks as trend evidence.
pub fn limsup_along_n_plus_m<F: FnMut(usize, usize) -> f64>(mut f: F, budget: &TruncationBudget) -> TailEstimate {
    let d_top = (budget.n_max + budget.m_max).max(8);
    let mut diag = |d: usize| {
        let mut m = f64::NEG_INFINITY;
        for n in 0..d {
            let v = f(n, d - n);
            if v > m || v.is_nan() {
                m = v;
            }
        }
        m
    };
    let mut block = |lo: usize, hi: usize| {
        let mut m = f64::NEG_INFINITY;
        for d in lo.max(1)..hi {
            let v = diag(d);
            if v > m || v.is_nan() {
                m = v;
            }
        }
        m
    };
    let e = block(d_top / 8, d_top / 4);
    let p = block(d_top / 4, d_top / 2);
    let v = block(d_top / 2, d_top + 1);
    TailEstimate::from_blocks(e, p, v)
}

/// Outcome of one `(k, l)` evaluation of a sweep problem.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Eval {
    pub res: Resolution,
    pub trend: Trend,
    pub witness: Witness,
    /// Doubling the index axis alone moved the supremum.
    pub unstable_a: bool,
    /// Doubling the iterate axis alone moved the supremum.
    pub unstable_b: bool,
}

/// A family of truncated suprema indexed by `(k, l)`, swept over an index
/// axis `a` (base `N_max`) and optionally an iterate axis `b` (base `M_max`).
pub(crate) trait Problem {
    fn two_axes(&self) -> bool;
    /// Largest index touched for the given base bounds.
    fn horizon(&self, a: usize, b: usize) -> usize;
    fn eval(&mut self, k: usize, l: usize, a: usize, b: usize) -> Eval;
}

/// Result of the `l`-search for one seminorm index `k`.
#[derive(Clone, Debug)]
pub(crate) struct KSearch {
    pub k: usize,
    pub outcome: Outcome,
    pub l: Option<usize>,
    pub witness: Option<Witness>,
    pub slope: Option<f64>,
    pub a_used: usize,
    pub b_used: usize,
    pub truncated: bool,
    pub note: Option<&'static str>,
}

pub(crate) const NOTE_DRIFT: &str = "the smallest stable l grows with the budget: no l independent of the truncation";
pub(crate) const NOTE_UNVERIFIED: &str = "certifying l not re-verified at a larger budget";
pub(crate) const NOTE_L_SENSITIVE: &str = "growth slows markedly as l increases: an l beyond L_max may still bound it";

/// Whether the growth at `l = L_max` is less than half of that at `L_max / 2`.
/// Rates like `c + 1/(l+1)` with small `c < 0` turn negative past `L_max`.
fn slows_with_l<P: Problem>(p: &mut P, top: &Eval, k: usize, lmax: usize, a: usize, b: usize) -> bool {
    if lmax < 2 {
        return false;
    }
    let half = p.eval(k, lmax / 2, a, b).trend.slope_last;
    let s = top.trend.slope_last;
    half.is_finite() && s.is_finite() && half > 0.0 && s < 0.5 * half
}

/// Searches `l` in `0..=L_max` for one `k`, escalating the budget (doubling
/// only the unstable axes) up to `max_escalations` times.
///
/// `l = L_max` is tried first at every level: the suprema are pointwise
/// nonincreasing in `l`, so if it does not stabilize no smaller `l` is
/// expected to. Fails is declared for `k` when every `l` grows, either
/// accelerating at any level or persistently at the final level.
///
/// A stable `l` also has to survive the budget: the smallest stable `l` is
/// recomputed after doubling every axis, and Holds needs it to agree with
/// the value two doublings earlier. A growth onset near `e^l` (factorial
/// against exponential) moves by at least one `l` over two doublings, so
/// such drift is caught; drift that persists to the last level is a
/// failure, since no finite `l` works on the untruncated index set.
pub(crate) fn search_k<P: Problem>(p: &mut P, budget: &TruncationBudget, k: usize, limit: Option<usize>) -> KSearch {
    let lmax = budget.l_max;
    let (mut base_a, mut base_b) = (budget.n_max, budget.m_max);
    let mut truncated = false;
    if let Some(lim) = limit {
        while p.horizon(base_a, base_b) > lim && (base_a > 1 || base_b > 1) {
            base_a = (base_a / 2).max(1);
            base_b = (base_b / 2).max(1);
            truncated = true;
        }
    }
    let fits = |p: &P, a: usize, b: usize| limit.map_or(true, |lim| p.horizon(a, b) <= lim);
    let two = p.two_axes();
    let max_esc = budget.max_escalations;
    let (mut la, mut lb) = (0u32, 0u32);
    let mut history: Vec<usize> = Vec::new();
    let mut below: Option<Eval> = None;
    loop {
        let a = base_a << la;
        let b = base_b << lb;
        let top = p.eval(k, lmax, a, b);
        let mk = |outcome, l, e: &Eval, note| KSearch {
            k,
            outcome,
            l,
            witness: Some(e.witness),
            slope: Some(e.trend.slope_last),
            a_used: a,
            b_used: b,
            truncated,
            note,
        };
        if top.res.is_stable() {
            let mut found = (lmax, top);
            for l in 0..lmax {
                let e = p.eval(k, l, a, b);
                if e.res.is_stable() {
                    found = (l, e);
                    break;
                }
                below = Some(e);
            }
            let (l_star, e) = found;
            history.push(l_star);
            let h = history.len();
            if h >= 3 && history[h - 1] == history[h - 3] {
                return mk(Outcome::Holds, Some(l_star), &e, None);
            }
            let can = la < max_esc && (!two || lb < max_esc) && fits(p, a * 2, if two { b * 2 } else { b });
            if !can {
                // a drift is a failure only if l* moved more than once and was
                // still moving at the last level; a single move may settle
                let rises = history.windows(2).filter(|w| w[1] > w[0]).count();
                if rises >= 2 && history[h - 1] > history[h - 2] {
                    let w = below.as_ref().unwrap_or(&e);
                    return mk(Outcome::Fails, None, w, Some(NOTE_DRIFT));
                }
                if rises >= 1 {
                    return mk(Outcome::Inconclusive, None, &e, Some(NOTE_DRIFT));
                }
                let note = if h == 1 { Some(NOTE_UNVERIFIED) } else { None };
                return mk(Outcome::Holds, Some(l_star), &e, note);
            }
            la += 1;
            if two {
                lb += 1;
            }
            continue;
        }
        let all_l = |p: &mut P, pred: &dyn Fn(Resolution) -> bool| (0..lmax).all(|l| pred(p.eval(k, l, a, b).res));
        if let Resolution::Growing { accelerating: true, .. } = top.res {
            let acc = |r: Resolution| matches!(r, Resolution::Growing { accelerating: true, .. });
            if all_l(p, &acc) {
                if slows_with_l(p, &top, k, lmax, a, b) {
                    return mk(Outcome::Inconclusive, None, &top, Some(NOTE_L_SENSITIVE));
                }
                return mk(Outcome::Fails, None, &top, None);
            }
        }
        let (mut want_a, mut want_b) = if two { (top.unstable_a, top.unstable_b) } else { (true, false) };
        if !want_a && !want_b {
            want_a = true;
            want_b = two;
        }
        let can_a = want_a && la < max_esc && fits(p, a * 2, if want_b && lb < max_esc { b * 2 } else { b });
        let can_b = want_b && lb < max_esc && fits(p, if can_a { a * 2 } else { a }, b * 2);
        if !can_a && !can_b {
            if let Resolution::Growing { persistent: true, .. } = top.res {
                let grow = |r: Resolution| matches!(r, Resolution::Growing { persistent: true, .. });
                if all_l(p, &grow) {
                    if slows_with_l(p, &top, k, lmax, a, b) {
                        return mk(Outcome::Inconclusive, None, &top, Some(NOTE_L_SENSITIVE));
                    }
                    return mk(Outcome::Fails, None, &top, None);
                }
            }
            return mk(Outcome::Inconclusive, None, &top, None);
        }
        if can_a {
            la += 1;
        }
        if can_b {
            lb += 1;
        }
    }
}

/// Running search over every `k < K_max`; stops at the first failing `k`.
pub(crate) fn search_all<P: Problem>(p: &mut P, budget: &TruncationBudget, limit: Option<usize>) -> Vec<KSearch> {
    let mut out = Vec::new();
    for k in 0..budget.k_max {
        let r = search_k(p, budget, k, limit);
        let fails = r.outcome == Outcome::Fails;
        out.push(r);
        if fails {
            break;
        }
    }
    out
}
