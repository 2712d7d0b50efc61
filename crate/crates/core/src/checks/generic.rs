//! Checks that apply to any Köthe matrix.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::grid::Grid;
use super::sweep::{
    bound, marks, resolve, search_all, stable_change, tail_blocks, Eval, KSearch, Problem, Resolution, Series,
    CHECKPOINTS, DOUBLED, NOMINAL,
};
use super::{Certificate, Outcome, Property, TruncationBudget, Verdict, Witness};
use crate::logreal::{ln_ratio, LogSum};
use crate::shift::{ShiftKind, ShiftOperator};
use crate::space::{PNorm, SpaceSpec};

fn ncols(b: &TruncationBudget) -> usize {
    b.k_max.max(b.l_max + 1)
}

/// `v + u` for log quantities where `-inf` (a vanishing factor) absorbs.
#[inline]
fn join(v: f64, u: f64) -> f64 {
    if v == f64::NEG_INFINITY || u == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        v + u
    }
}

/// Running maxima of `f(n)` for `n` in `lo..=bound(a, 8)`, recorded at every
/// checkpoint, with the argmax at the doubled budget.
fn series_1d<F: FnMut(usize) -> f64>(a: usize, lo: usize, mut f: F) -> (Series, usize) {
    let mut s = [f64::NEG_INFINITY; CHECKPOINTS];
    let (mut best, mut arg) = (f64::NEG_INFINITY, lo);
    let mut j = 0;
    let mk_a = marks(a);
    for n in lo..=mk_a[DOUBLED] {
        let v = f(n);
        if v > best || v.is_nan() {
            best = if v.is_nan() { f64::INFINITY } else { v };
            arg = n;
        }
        while j < CHECKPOINTS && mk_a[j] <= n {
            s[j] = best;
            j += 1;
        }
    }
    while j < CHECKPOINTS {
        s[j] = best;
        j += 1;
    }
    (s, arg)
}

/// Number of leading indices on which a budget sweep touches the weights.
fn sample_len(op: &ShiftOperator, budget: &TruncationBudget) -> usize {
    let h = 2 * budget.n_max + 2 * budget.m_max + 3;
    op.index_limit().map_or(h, |l| l.min(h))
}

fn assemble(property: Property, quantity: String, budget: &TruncationBudget, results: &[KSearch]) -> Verdict {
    let fails = results.iter().find(|r| r.outcome == Outcome::Fails);
    let all_hold = results.len() == budget.k_max && results.iter().all(|r| r.outcome == Outcome::Holds);
    let outcome = if fails.is_some() {
        Outcome::Fails
    } else if all_hold {
        Outcome::Holds
    } else {
        Outcome::Inconclusive
    };
    let mut used = *budget;
    used.n_max = results.iter().map(|r| r.a_used).max().unwrap_or(budget.n_max);
    used.m_max = results.iter().map(|r| r.b_used).max().unwrap_or(budget.m_max);
    let mut v = Verdict::new(property, outcome, quantity, used);
    let lead = fails.or_else(|| results.iter().find(|r| r.outcome == Outcome::Inconclusive));
    if let Some(r) = lead {
        v.witness = r.witness;
        v.growth_fit = r.slope;
    } else {
        // largest certified supremum
        v.witness = results
            .iter()
            .filter_map(|r| r.witness)
            .filter(|w| !w.value.is_nan())
            .reduce(|a, b| if b.value > a.value { b } else { a });
        v.growth_fit = results.iter().filter_map(|r| r.slope).filter(|s| s.is_finite()).reduce(f64::max);
    }
    v.certificates = results.iter().map(|r| Certificate { k: r.k, outcome: r.outcome, l: r.l }).collect();
    if results.iter().any(|r| r.truncated) {
        v.notes.push("budget reduced to fit the available table length".into());
    }
    for r in results {
        if let Some(n) = r.note {
            v.notes.push(format!("k = {}: {n}", r.k));
        }
    }
    v
}

// ---------------------------------------------------------------- continuity

struct Continuity<'a> {
    op: &'a ShiftOperator,
    budget: TruncationBudget,
    grid: Option<Grid>,
}

impl Problem for Continuity<'_> {
    fn two_axes(&self) -> bool {
        false
    }

    fn horizon(&self, a: usize, _b: usize) -> usize {
        2 * a + 3
    }

    fn eval(&mut self, k: usize, l: usize, a: usize, b: usize) -> Eval {
        let h = self.horizon(a, b);
        Grid::ensure(&mut self.grid, self.op, h, ncols(&self.budget));
        let g = self.grid.as_ref().unwrap();
        let kind = self.op.kind;
        let lo = if kind == ShiftKind::Forward { 1 } else { 0 };
        let (s, n) = series_1d(a, lo, |n| match kind {
            ShiftKind::Backward => ln_ratio(g.w(n, 1) + g.a(n, k), g.a(n + 1, l)),
            ShiftKind::Forward => ln_ratio(g.w(n, 1) + g.a(n, k), g.a(n - 1, l)),
        });
        let (res, trend) = resolve(&s, &self.budget);
        let witness = Witness { k, l, n, m: 1, value: s[DOUBLED] };
        Eval { res, trend, witness, unstable_a: true, unstable_b: false }
    }
}

/// `|w_n| a_{n,k} <= C a_{n+1,l}` (backward) or `|w_n| a_{n,k} <= C a_{n-1,l}`
/// (forward), for every `k` and some `l`.
pub fn check_continuity(op: &ShiftOperator, budget: &TruncationBudget) -> Verdict {
    let mut p = Continuity { op, budget: *budget, grid: None };
    let results = search_all(&mut p, budget, op.index_limit());
    let q = match op.kind {
        ShiftKind::Backward => "sup_n |w_n| a(n,k) / a(n+1,l)",
        ShiftKind::Forward => "sup_n |w_n| a(n,k) / a(n-1,l)",
    };
    assemble(Property::Continuity, q.into(), budget, &results)
}

// ------------------------------------------------------------- iterate ratio

/// `ln(|prod| a_{.,k} / a_{.,l})` for the `m`-th iterate at index `n`.
#[inline]
fn iterate_ratio(g: &Grid, kind: ShiftKind, n: usize, m: usize, k: usize, l: usize) -> f64 {
    match kind {
        ShiftKind::Backward => ln_ratio(g.w(n, m) + g.a(n, k), g.a(n + m, l)),
        ShiftKind::Forward => ln_ratio(g.w(n + 1, m) + g.a(n + m, k), g.a(n, l)),
    }
}

// ------------------------------------------------------------- topologizable

struct Topologizable<'a> {
    op: &'a ShiftOperator,
    budget: TruncationBudget,
    grid: Option<Grid>,
}

impl Problem for Topologizable<'_> {
    fn two_axes(&self) -> bool {
        false
    }

    fn horizon(&self, a: usize, _b: usize) -> usize {
        2 * a + self.budget.m_max + 3
    }

    /// One `l` has to serve every `m <= M_max`. The largest `m` usually
    /// grows first, so `m` runs downwards and the first growing `m` decides.
    fn eval(&mut self, k: usize, l: usize, a: usize, b: usize) -> Eval {
        let h = self.horizon(a, b);
        Grid::ensure(&mut self.grid, self.op, h, ncols(&self.budget));
        let g = self.grid.as_ref().unwrap();
        let kind = self.op.kind;
        let mut unresolved = None;
        let mut best: Option<Eval> = None;
        for m in (1..=self.budget.m_max).rev() {
            let (s, n) = series_1d(a, 0, |n| iterate_ratio(g, kind, n, m, k, l));
            let (res, trend) = resolve(&s, &self.budget);
            let e = Eval { res, trend, witness: Witness { k, l, n, m, value: s[DOUBLED] }, unstable_a: true, unstable_b: false };
            match res {
                Resolution::Growing { .. } => return e,
                Resolution::Unresolved => {
                    unresolved.get_or_insert(e);
                }
                Resolution::Stable => {
                    if best.as_ref().map_or(true, |b| e.witness.value > b.witness.value) {
                        best = Some(e);
                    }
                }
            }
        }
        let mut e = unresolved.or(best).expect("m_max >= 1");
        e.unstable_a = !e.res.is_stable();
        e
    }
}

/// For every `k` one `l` with `sup_n |prod_{j<m} w_{n+j}| a(n,k) / a(n+m,l)`
/// finite for each `m <= M_max` (forward: the mirrored ratio).
pub fn check_topologizable(op: &ShiftOperator, budget: &TruncationBudget) -> Verdict {
    let mut p = Topologizable { op, budget: *budget, grid: None };
    let results = search_all(&mut p, budget, op.index_limit());
    let q = match op.kind {
        ShiftKind::Backward => "sup_n |prod_{j<m} w_{n+j}| a(n,k) / a(n+m,l), each m <= M_max",
        ShiftKind::Forward => "sup_n |prod_{j=1..m} w_{n+j}| a(n+m,k) / a(n,l), each m <= M_max",
    };
    assemble(Property::Topologizability, q.into(), budget, &results)
}

// ------------------------------------------------------------ power bounded

struct PowerBounded<'a> {
    op: &'a ShiftOperator,
    budget: TruncationBudget,
    grid: Option<Grid>,
}

/// `max_{n <= na} v[n] + max_{n < d <= n + mb} u[d]` via a monotone deque.
/// Returns the value and the maximizing `(n, d)`.
fn window_max(u: &[f64], v: &[f64], na: usize, mb: usize) -> (f64, usize, usize) {
    let mut dq: VecDeque<usize> = VecDeque::new();
    let mut next = 1;
    let mut best = (f64::NEG_INFINITY, 0, 1);
    for n in 0..=na {
        while next <= n + mb {
            while dq.back().is_some_and(|&b| u[b] <= u[next]) {
                dq.pop_back();
            }
            dq.push_back(next);
            next += 1;
        }
        while dq.front().is_some_and(|&f| f <= n) {
            dq.pop_front();
        }
        let d = *dq.front().expect("window is nonempty");
        let val = join(v[n], u[d]);
        if val > best.0 {
            best = (val, n, d);
        }
    }
    best
}

impl PowerBounded<'_> {
    /// Region maxima over `n <= bound(a, ja)`, `1 <= m <= bound(b, jb)`.
    fn regions(&self, g: &Grid, k: usize, l: usize, a: usize, b: usize, cells: &[(usize, usize)]) -> Vec<(f64, usize, usize)> {
        let na = bound(a, DOUBLED);
        let mb = bound(b, DOUBLED);
        let top = na + mb;
        let kind = self.op.kind;
        if !g.op.weights.has_zero_below(top + 2) {
            // log products split as prefix differences, so the sup over m
            // is a sliding-window maximum in d = n + m
            let pre = |d: usize| g.w(0, d);
            let (u, v): (Vec<f64>, Vec<f64>) = match kind {
                ShiftKind::Backward => (
                    (0..=top).map(|d| ln_ratio(pre(d), g.a(d, l))).collect(),
                    (0..=na).map(|n| g.a(n, k) - pre(n)).collect(),
                ),
                ShiftKind::Forward => (
                    (0..=top).map(|d| pre(d + 1) + g.a(d, k)).collect(),
                    (0..=na).map(|n| ln_ratio(-pre(n + 1), g.a(n, l))).collect(),
                ),
            };
            return cells
                .iter()
                .map(|&(ja, jb)| {
                    let (val, n, d) = window_max(&u, &v, bound(a, ja), bound(b, jb));
                    (val, n, d - n)
                })
                .collect();
        }
        // zero weights: direct evaluation with per-row checkpoint maxima
        let mk_b = marks(b);
        let mut rows: Vec<[(f64, usize); CHECKPOINTS]> = Vec::with_capacity(na + 1);
        for n in 0..=na {
            let mut row = [(f64::NEG_INFINITY, 1); CHECKPOINTS];
            let mut cur = (f64::NEG_INFINITY, 1);
            let mut j = 0;
            for m in 1..=mb {
                let val = iterate_ratio(g, kind, n, m, k, l);
                if val > cur.0 {
                    cur = (val, m);
                }
                while j < CHECKPOINTS && mk_b[j] <= m {
                    row[j] = cur;
                    j += 1;
                }
            }
            rows.push(row);
        }
        cells
            .iter()
            .map(|&(ja, jb)| {
                let mut best = (f64::NEG_INFINITY, 0, 1);
                for (n, row) in rows.iter().enumerate().take(bound(a, ja) + 1) {
                    if row[jb].0 > best.0 {
                        best = (row[jb].0, n, row[jb].1);
                    }
                }
                best
            })
            .collect()
    }
}

impl Problem for PowerBounded<'_> {
    fn two_axes(&self) -> bool {
        true
    }

    fn horizon(&self, a: usize, b: usize) -> usize {
        2 * a + 2 * b + 3
    }

    fn eval(&mut self, k: usize, l: usize, a: usize, b: usize) -> Eval {
        let h = self.horizon(a, b);
        Grid::ensure(&mut self.grid, self.op, h, ncols(&self.budget));
        let g = self.grid.as_ref().unwrap();
        let mut cells: Vec<(usize, usize)> = (0..CHECKPOINTS).map(|j| (j, j)).collect();
        cells.push((DOUBLED, NOMINAL));
        cells.push((NOMINAL, DOUBLED));
        let r = self.regions(g, k, l, a, b, &cells);
        let mut s = [0.0; CHECKPOINTS];
        for j in 0..CHECKPOINTS {
            s[j] = r[j].0;
        }
        let (res, trend) = resolve(&s, &self.budget);
        let (v, n, m) = r[DOUBLED];
        let tol = self.budget.stability_tol;
        Eval {
            res,
            trend,
            witness: Witness { k, l, n, m, value: v },
            unstable_a: !stable_change(s[NOMINAL], r[CHECKPOINTS].0, tol),
            unstable_b: !stable_change(s[NOMINAL], r[CHECKPOINTS + 1].0, tol),
        }
    }
}

/// For every `k` one `l` with the joint sup over `(n, m)` of the iterate
/// ratio finite.
pub fn check_power_bounded(op: &ShiftOperator, budget: &TruncationBudget) -> Verdict {
    let mut p = PowerBounded { op, budget: *budget, grid: None };
    let results = search_all(&mut p, budget, op.index_limit());
    let q = match op.kind {
        ShiftKind::Backward => "sup_{n,m} |prod_{j<m} w_{n+j}| a(n,k) / a(n+m,l)",
        ShiftKind::Forward => "sup_{n,m} |prod_{j=1..m} w_{n+j}| a(n+m,k) / a(n,l)",
    };
    assemble(Property::PowerBoundedness, q.into(), budget, &results)
}

// ------------------------------------------------------------------- Cesàro

/// Which Cesàro-type supremum to evaluate:
/// `sup_{r,n} S / (n a(r,l)^power)` where `S` sums `(|prod| a(.,k))^power`
/// over `m = 1..=n`, or with `signed` the absolute value of the plain signed
/// sum (`power` must then be 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CesaroQuantity {
    pub power: f64,
    pub signed: bool,
}

impl CesaroQuantity {
    pub const PLAIN: CesaroQuantity = CesaroQuantity { power: 1.0, signed: false };
    pub const SIGNED: CesaroQuantity = CesaroQuantity { power: 1.0, signed: true };

    fn describe(&self, kind: ShiftKind) -> String {
        let (prod, a) = match kind {
            ShiftKind::Backward => ("prod_{s=1..m} w_{r-s}", "a(r-m,k)"),
            ShiftKind::Forward => ("prod_{s=1..m} w_{r+s}", "a(r+m,k)"),
        };
        if self.signed {
            format!("sup_{{r,n}} |sum_{{m<=n}} ({prod}) {a}| / (n a(r,l))")
        } else if self.power == 1.0 {
            format!("sup_{{r,n}} sum_{{m<=n}} |{prod}| {a} / (n a(r,l))")
        } else {
            let p = self.power;
            format!("sup_{{r,n}} sum_{{m<=n}} (|{prod}| {a})^{p} / (n a(r,l)^{p})")
        }
    }
}

/// Running signed sum of log-scale terms, rescaled to its largest term,
/// together with the best `|sum| / n` seen so far on the same scale.
struct Running {
    scale: f64,
    sum: f64,
    best: f64,
    best_n: usize,
    inf: bool,
}

impl Running {
    fn new() -> Running {
        Running { scale: f64::NEG_INFINITY, sum: 0.0, best: 0.0, best_n: 1, inf: false }
    }

    #[inline]
    fn add(&mut self, sign: i8, ln: f64) {
        if sign == 0 || ln == f64::NEG_INFINITY || self.inf {
            return;
        }
        if ln == f64::INFINITY || ln.is_nan() {
            self.inf = true;
            return;
        }
        let s = f64::from(sign);
        if ln > self.scale {
            let f = libm::exp(self.scale - ln);
            self.sum = self.sum * f + s;
            self.best *= f;
            self.scale = ln;
        } else {
            self.sum += s * libm::exp(ln - self.scale);
        }
    }

    /// Offers `|sum| / n` as a candidate.
    #[inline]
    fn offer(&mut self, n: usize) {
        let v = libm::fabs(self.sum) / n as f64;
        if v > self.best {
            self.best = v;
            self.best_n = n;
        }
    }

    /// `(ln max |sum|/n, argmax n)`.
    fn best(&self) -> (f64, usize) {
        if self.inf {
            (f64::INFINITY, self.best_n)
        } else if self.best == 0.0 {
            (f64::NEG_INFINITY, self.best_n)
        } else {
            (self.scale + libm::log(self.best), self.best_n)
        }
    }
}

/// Linear-domain counterpart of [`Running`] for rows whose consecutive
/// terms differ by a known factor. The current term and the sum carry
/// separate log scales, so one multiply-add per term suffices.
struct Chain {
    t: f64,
    t_ln: f64,
    sum: f64,
    sum_ln: f64,
    /// `exp(t_ln - sum_ln)`
    f: f64,
    best: f64,
    best_n: usize,
}

const CHAIN_BIG: f64 = 1e100;
/// Largest `|ln factor|` a chain accepts, so `t * factor` stays finite.
const CHAIN_MAX_STEP: f64 = 400.0;

impl Chain {
    fn start(ln: f64) -> Chain {
        Chain { t: 1.0, t_ln: ln, sum: 0.0, sum_ln: ln, f: 1.0, best: 0.0, best_n: 1 }
    }

    fn rescale_sum(&mut self) {
        let d = self.t_ln - self.sum_ln;
        if d > 600.0 {
            // everything so far is negligible next to the current term
            let g = libm::exp(-d);
            self.sum *= g;
            self.best *= g;
            self.sum_ln = self.t_ln;
            self.f = 1.0;
        } else {
            self.f = libm::exp(d);
        }
    }

    #[inline]
    fn step(&mut self, factor: f64) {
        self.t *= factor;
        let a = libm::fabs(self.t);
        if a > CHAIN_BIG || (a < 1.0 / CHAIN_BIG && a != 0.0) {
            self.t_ln += libm::log(a);
            self.t = if self.t > 0.0 { 1.0 } else { -1.0 };
            self.rescale_sum();
        }
        self.sum += self.t * self.f;
        let s = libm::fabs(self.sum);
        if s > CHAIN_BIG {
            self.sum /= s;
            self.best /= s;
            self.sum_ln += libm::log(s);
            self.f = libm::exp(self.t_ln - self.sum_ln);
        }
    }

    /// Offers `|sum| / n`; `best` holds the `|sum|` of the best candidate,
    /// so the comparison needs no division.
    #[inline]
    fn offer(&mut self, n: usize) {
        let v = libm::fabs(self.sum);
        if v * self.best_n as f64 > self.best * n as f64 {
            self.best = v;
            self.best_n = n;
        }
    }

    fn best(&self) -> (f64, usize) {
        if self.best == 0.0 {
            (f64::NEG_INFINITY, self.best_n)
        } else {
            (self.sum_ln + libm::log(self.best / self.best_n as f64), self.best_n)
        }
    }
}

/// Per-`k` table: for each `r`, the checkpoint maxima over the count `n` of
/// `ln S(r, n) - ln n`, with the maximizing `n`.
struct CesaroTable {
    key: (usize, usize, usize),
    best: Vec<[(f64, usize); CHECKPOINTS]>,
}

struct Cesaro<'a> {
    op: &'a ShiftOperator,
    budget: TruncationBudget,
    q: CesaroQuantity,
    grid: Option<Grid>,
    table: Option<CesaroTable>,
}

impl Cesaro<'_> {
    fn build(&mut self, k: usize, a: usize, b: usize) {
        if self.table.as_ref().is_some_and(|t| t.key == (k, a, b)) {
            return;
        }
        let best = match self.build_chained(k, a, b) {
            Some(best) => best,
            None => self.build_logs(k, a, b),
        };
        self.table = Some(CesaroTable { key: (k, a, b), best });
    }

    /// The table term by term on the log scale.
    fn build_logs(&self, k: usize, a: usize, b: usize) -> Vec<[(f64, usize); CHECKPOINTS]> {
        let g = self.grid.as_ref().unwrap();
        let (na, mb) = (bound(a, DOUBLED), bound(b, DOUBLED));
        let mk_b = marks(b);
        let p = self.q.power;
        let kind = self.op.kind;
        let signed = self.q.signed;
        let mut best = Vec::with_capacity(na + 1);
        for r in 0..=na {
            let mut acc = Running::new();
            let mut row = [(f64::NEG_INFINITY, 1); CHECKPOINTS];
            let mut j = 0;
            for n in 1..=mb {
                // backward terms vanish once the shift runs past index 0
                if kind == ShiftKind::Backward && n > r {
                    break;
                }
                let (src, wn) = match kind {
                    ShiftKind::Backward => (r - n, g.op.weights.window(r - n, n)),
                    ShiftKind::Forward => (r + n, g.op.weights.window(r + 1, n)),
                };
                let ln = wn.ln_abs() + g.a(src, k);
                if signed {
                    acc.add(wn.sign(), ln);
                } else {
                    acc.add(wn.sign().abs(), p * ln);
                }
                acc.offer(n);
                while j < CHECKPOINTS && mk_b[j] <= n {
                    row[j] = acc.best();
                    j += 1;
                }
            }
            let last = acc.best();
            while j < CHECKPOINTS {
                row[j] = last;
                j += 1;
            }
            best.push(row);
        }
        best
    }

    /// The table from step factors: the term for count `n` is the term for
    /// `n - 1` times `w_j a(j,k) / a(j -+ 1,k)` at the newly reached index
    /// `j`. `None` when a factor is not representable (zero matrix entries,
    /// steps beyond `exp(400)`), which sends the build down the log path.
    fn build_chained(&self, k: usize, a: usize, b: usize) -> Option<Vec<[(f64, usize); CHECKPOINTS]>> {
        let g = self.grid.as_ref().unwrap();
        let (na, mb) = (bound(a, DOUBLED), bound(b, DOUBLED));
        let mk_b = marks(b);
        let kind = self.op.kind;
        let p = self.q.power;
        let top = match kind {
            ShiftKind::Backward => na,
            ShiftKind::Forward => na + mb + 1,
        };
        let mut factor = Vec::with_capacity(top);
        for j in 0..top {
            let prev = match kind {
                ShiftKind::Backward => j + 1,
                ShiftKind::Forward => j.saturating_sub(1),
            };
            let (aj, ap) = (g.a(j, k), g.a(prev, k));
            if !aj.is_finite() || !ap.is_finite() {
                return None;
            }
            let w = g.op.weights.get(j);
            if w.is_zero() {
                factor.push(0.0);
                continue;
            }
            let ln = p * (w.ln_abs() + aj - ap);
            if !(libm::fabs(ln) <= CHAIN_MAX_STEP) {
                return None;
            }
            let sign = if self.q.signed { f64::from(w.sign()) } else { 1.0 };
            factor.push(sign * libm::exp(ln));
        }
        let mut best = Vec::with_capacity(na + 1);
        for r in 0..=na {
            let mut acc = Chain::start(p * g.a(r, k));
            let mut row = [(f64::NEG_INFINITY, 1); CHECKPOINTS];
            let mut j = 0;
            for n in 1..=mb {
                let idx = match kind {
                    ShiftKind::Backward if n > r => break,
                    ShiftKind::Backward => r - n,
                    ShiftKind::Forward => r + n,
                };
                acc.step(factor[idx]);
                acc.offer(n);
                while j < CHECKPOINTS && mk_b[j] <= n {
                    row[j] = acc.best();
                    j += 1;
                }
            }
            let last = acc.best();
            while j < CHECKPOINTS {
                row[j] = last;
                j += 1;
            }
            best.push(row);
        }
        Some(best)
    }

    fn region(&self, l: usize, a: usize, ja: usize, jb: usize) -> (f64, usize, usize) {
        let g = self.grid.as_ref().unwrap();
        let t = self.table.as_ref().unwrap();
        let mut best = (f64::NEG_INFINITY, 0, 1);
        for r in 0..=bound(a, ja) {
            let (v, n) = t.best[r][jb];
            let val = ln_ratio(v, self.q.power * g.a(r, l));
            if val > best.0 || val.is_nan() {
                best = (val, r, n);
            }
        }
        best
    }
}

impl Problem for Cesaro<'_> {
    fn two_axes(&self) -> bool {
        true
    }

    fn horizon(&self, a: usize, b: usize) -> usize {
        2 * a + 2 * b + 3
    }

    fn eval(&mut self, k: usize, l: usize, a: usize, b: usize) -> Eval {
        let h = self.horizon(a, b);
        let before = self.grid.as_ref().map(|g| g.horizon);
        Grid::ensure(&mut self.grid, self.op, h, ncols(&self.budget));
        if before != self.grid.as_ref().map(|g| g.horizon) {
            self.table = None;
        }
        self.build(k, a, b);
        let mut s = [0.0; CHECKPOINTS];
        for (j, sj) in s.iter_mut().enumerate() {
            *sj = self.region(l, a, j, j).0;
        }
        let (res, trend) = resolve(&s, &self.budget);
        let (v, r, n) = self.region(l, a, DOUBLED, DOUBLED);
        let tol = self.budget.stability_tol;
        Eval {
            res,
            trend,
            witness: Witness { k, l, n: r, m: n, value: v },
            unstable_a: !stable_change(s[NOMINAL], self.region(l, a, DOUBLED, NOMINAL).0, tol),
            unstable_b: !stable_change(s[NOMINAL], self.region(l, a, NOMINAL, DOUBLED).0, tol),
        }
    }
}

fn cesaro_sweep(op: &ShiftOperator, budget: &TruncationBudget, q: CesaroQuantity) -> Verdict {
    let mut p = Cesaro { op, budget: *budget, q, grid: None, table: None };
    let results = search_all(&mut p, budget, op.index_limit());
    assemble(Property::CesaroBoundedness, q.describe(op.kind), budget, &results)
}

/// `ln` of the Cesàro-type quotient at a single `(k, l, r, n)`, computed
/// directly.
pub fn cesaro_bound_ln(op: &ShiftOperator, q: CesaroQuantity, k: usize, l: usize, r: usize, n: usize) -> f64 {
    let a = &op.space.matrix;
    let mut plain = LogSum::new();
    let mut signed = Running::new();
    for m in 1..=n {
        let (src, wn) = match op.kind {
            ShiftKind::Backward if m > r => break,
            ShiftKind::Backward => (r - m, op.weights.window(r - m, m)),
            ShiftKind::Forward => (r + m, op.weights.window(r + 1, m)),
        };
        let ln = wn.ln_abs() + a.ln_entry(src, k);
        if q.signed {
            signed.add(wn.sign(), ln);
        } else {
            plain.add(q.power * ln);
        }
    }
    let s = if q.signed {
        signed.offer(1);
        signed.best().0
    } else {
        plain.value()
    };
    ln_ratio(s - libm::log(n as f64), q.power * a.ln_entry(r, l))
}

/// Cesàro boundedness. Nonnegative weights with `p` in `{0, 1, inf}` get the
/// exact characterization; otherwise a sufficient condition and a necessary
/// one are swept separately and combined.
pub fn check_cesaro_bounded(op: &ShiftOperator, budget: &TruncationBudget) -> Verdict {
    let nonneg = !op.weights.has_negative_below(sample_len(op, budget));
    let p = op.space.p;
    if nonneg && (p.is_sup() || p == PNorm::Finite(1.0)) {
        return cesaro_sweep(op, budget, CesaroQuantity::PLAIN)
            .note("nonnegative weights: the swept supremum characterizes Cesàro boundedness");
    }
    let suff = cesaro_sweep(op, budget, CesaroQuantity { power: p.exponent(), signed: false })
        .note("sufficient condition");
    let nec = cesaro_sweep(op, budget, CesaroQuantity::SIGNED).note("necessary condition");
    let outcome = Outcome::sandwich(suff.outcome, nec.outcome);
    let lead = if outcome == Outcome::Fails { &nec } else { &suff };
    let mut v = Verdict::new(Property::CesaroBoundedness, outcome, lead.quantity.clone(), lead.budget);
    v.witness = lead.witness;
    v.growth_fit = lead.growth_fit;
    v.certificates = lead.certificates.clone();
    if outcome == Outcome::Inconclusive {
        v.notes.push("sufficient condition not certified and necessary condition not refuted".into());
    }
    v.components = vec![suff, nec];
    v
}

// ------------------------------------------------------------ forward limit

/// `ln(|prod_{s=1}^n w_{r+s}| a(r+n,k) / n)`.
pub fn forward_limit_ln(op: &ShiftOperator, r: usize, k: usize, n: usize) -> f64 {
    join(op.weights.ln_window(r + 1, n), op.space.matrix.ln_entry(r + n, k)) - libm::log(n as f64)
}

/// `lim_n |prod_{s=1}^n w_{r+s}| a(r+n,k) / n = 0` for `r <= K_max` and
/// `k < K_max`, judged by the slope of the log against `ln n` on the block
/// `[M, 2M]`, doubling `M` while the slope is not clearly negative.
fn check_forward_limit(op: &ShiftOperator, budget: &TruncationBudget) -> Verdict {
    let q = "lim_n |prod_{s=1..n} w_{r+s}| a(r+n,k) / n";
    let tol = budget.growth_tol;
    let max_top = budget.m_max << budget.max_escalations;
    let cap = budget.k_max + 2 * max_top + 3;
    let op = op.with_capacity(op.index_limit().map_or(cap, |l| l.min(cap)));
    let mut certs = Vec::new();
    let mut outcome = Outcome::Holds;
    let mut witness = None;
    let mut fit = None;
    let mut used = budget.m_max;
    'outer: for r in 0..=budget.k_max {
        for k in 0..budget.k_max {
            let mut res = Outcome::Inconclusive;
            for lvl in 0..=budget.max_escalations {
                let top = budget.m_max << lvl;
                if op.index_limit().is_some_and(|lim| r + 2 * top + 1 > lim) {
                    break;
                }
                used = used.max(top);
                let step = (top / 64).max(1);
                let mut pts: Vec<(f64, f64)> = Vec::new();
                let mut last = (f64::NEG_INFINITY, top);
                let mut n = top;
                while n <= 2 * top {
                    let v = forward_limit_ln(&op, r, k, n);
                    if v == f64::INFINITY || v.is_nan() {
                        pts.clear();
                        last = (f64::INFINITY, n);
                        break;
                    }
                    if v.is_finite() {
                        pts.push((libm::log(n as f64), v));
                    }
                    last = (v, n);
                    n += step;
                }
                if last.0 == f64::INFINITY {
                    res = Outcome::Fails;
                    witness = Some(Witness { k, l: 0, n: r, m: last.1, value: last.0 });
                    break;
                }
                if pts.len() < 2 {
                    // every sampled term vanishes
                    res = Outcome::Holds;
                    break;
                }
                let slope = slope_of(&pts);
                fit = Some(slope);
                if slope < -tol {
                    res = Outcome::Holds;
                    break;
                }
                if lvl == budget.max_escalations && slope > tol {
                    res = Outcome::Fails;
                    witness = Some(Witness { k, l: 0, n: r, m: last.1, value: last.0 });
                }
            }
            certs.push(Certificate { k, outcome: res, l: None });
            outcome = outcome.and(res);
            if res == Outcome::Fails {
                break 'outer;
            }
        }
    }
    let mut b = *budget;
    b.m_max = used;
    let mut v = Verdict::new(Property::MeanErgodicity, outcome, q, b);
    v.witness = witness;
    v.growth_fit = fit;
    v.certificates = certs;
    v
}

fn slope_of(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

// ------------------------------------------------------------------- Montel

/// Heuristic Montel check: for each `k` some `l > k` with
/// `a(n,k) / a(n,l) -> 0` along the whole index sweep.
pub fn check_montel(space: &SpaceSpec, budget: &TruncationBudget) -> Verdict {
    let q = "inf_n a(n,k) / a(n,l) = 0";
    if space.power_series().is_some() {
        return Verdict::new(Property::MontelSpace, Outcome::Holds, q, *budget)
            .note("power series spaces are Montel");
    }
    let a = &space.matrix;
    let mut top = budget.n_max;
    let mut truncated = false;
    if let Some(lim) = space.index_limit() {
        while 2 * top + 1 > lim && top > 4 {
            top /= 2;
            truncated = true;
        }
    }
    let small = libm::log(budget.stability_tol);
    let mut certs = Vec::new();
    let mut outcome = Outcome::Holds;
    let mut witness = None;
    for k in 0..budget.k_max {
        let mut found = None;
        let mut constant = true;
        let mut last = None;
        for l in k + 1..=budget.l_max.max(k + 1) {
            let f = |n: usize| ln_ratio(a.ln_entry(n, k), a.ln_entry(n, l));
            let est = tail_blocks(top, 0, f);
            if est.value < small && est.value <= est.previous && est.previous <= est.earlier {
                found = Some(l);
                break;
            }
            let g0 = f(0);
            let flat = (0..=2 * top).all(|n| {
                let g = f(n);
                g == g0 || libm::fabs(g - g0) <= 1e-12 * libm::fabs(g0).max(1.0)
            });
            constant &= flat;
            last = Some(Witness { k, l, n: 2 * top, m: 0, value: est.value });
        }
        let res = match found {
            Some(_) => Outcome::Holds,
            None if constant => Outcome::Fails,
            None => Outcome::Inconclusive,
        };
        certs.push(Certificate { k, outcome: res, l: found });
        if res != Outcome::Holds && witness.is_none() {
            witness = last;
        }
        outcome = outcome.and(res);
        if res == Outcome::Fails {
            break;
        }
    }
    let mut b = *budget;
    b.n_max = top;
    let mut v = Verdict::new(Property::MontelSpace, outcome, q, b);
    v.witness = witness;
    v.certificates = certs;
    if outcome == Outcome::Inconclusive {
        v.notes.push("no vanishing ratio found; leaning Fails".into());
    }
    if truncated {
        v.notes.push("budget reduced to fit the available table length".into());
    }
    v
}

// ----------------------------------------------------------- mean ergodicity

/// Mean ergodicity with nonnegative weights: on Montel spaces with `p` in
/// `{0, 1, inf}` the Cesàro characterization (plus, for forward shifts, the
/// vanishing of `T^n e_r / n`); for `1 < p < inf` a sufficient and a
/// necessary condition.
pub fn check_mean_ergodic(op: &ShiftOperator, budget: &TruncationBudget) -> Verdict {
    let cesaro = check_cesaro_bounded(op, budget);
    let montel = check_montel(&op.space, budget);
    mean_ergodic_from(op, budget, &cesaro, &montel)
}

pub(crate) fn mean_ergodic_from(op: &ShiftOperator, budget: &TruncationBudget, cesaro: &Verdict, montel: &Verdict) -> Verdict {
    let len = sample_len(op, budget);
    if op.weights.all_zero_below(len) {
        return Verdict::new(Property::MeanErgodicity, Outcome::Holds, "zero operator", *budget)
            .note("all sampled weights vanish");
    }
    if op.weights.has_negative_below(len) {
        return Verdict::new(Property::MeanErgodicity, Outcome::Inconclusive, cesaro.quantity.clone(), *budget)
            .note("negative weights: no characterization available");
    }
    let limit = match op.kind {
        ShiftKind::Forward => Some(check_forward_limit(op, budget)),
        ShiftKind::Backward => None,
    };
    let lim_out = limit.as_ref().map_or(Outcome::Holds, |l| l.outcome);
    let with_limit = |o: Outcome| o.and(lim_out);

    let reflexive = matches!(op.space.p, PNorm::Finite(p) if p > 1.0);
    let (outcome, lead, note): (Outcome, &Verdict, Option<&str>) = if reflexive && cesaro.components.len() == 2 {
        let suff = with_limit(cesaro.components[0].outcome);
        let nec = with_limit(cesaro.components[1].outcome);
        let o = Outcome::sandwich(suff, nec);
        let lead = if o == Outcome::Fails && cesaro.components[1].outcome == Outcome::Fails {
            &cesaro.components[1]
        } else {
            &cesaro.components[0]
        };
        (o, lead, Some("reflexive case: sufficient and necessary conditions"))
    } else if montel.outcome == Outcome::Holds {
        (with_limit(cesaro.outcome), cesaro, Some("Montel case: Cesàro characterization"))
    } else {
        // mean ergodic operators are Cesàro bounded and T^n x / n -> 0
        let o = if with_limit(cesaro.outcome) == Outcome::Fails { Outcome::Fails } else { Outcome::Inconclusive };
        (o, cesaro, Some("space not certified Montel: only necessary conditions apply"))
    };

    let mut v = Verdict::new(Property::MeanErgodicity, outcome, lead.quantity.clone(), lead.budget);
    v.witness = lead.witness;
    v.growth_fit = lead.growth_fit;
    v.certificates = lead.certificates.clone();
    if let Some(n) = note {
        v.notes.push(n.into());
    }
    if let Some(l) = limit {
        if l.outcome == Outcome::Fails {
            v.witness = l.witness;
            v.growth_fit = l.growth_fit;
            v.notes.push("T^n e_r / n does not vanish".into());
        }
        v.components.push(l);
    }
    v.components.insert(0, cesaro.clone());
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::{ExponentSequence, WeightFamily, WeightSequence};
    use crate::space::{make_power_series_space, KoetheMatrix, SeriesType};

    fn small() -> TruncationBudget {
        TruncationBudget { n_max: 200, m_max: 40, k_max: 3, l_max: 6, ..TruncationBudget::default() }
    }

    fn op(kind: ShiftKind, w: WeightFamily, t: SeriesType) -> ShiftOperator {
        let s = make_power_series_space(ExponentSequence::Linear, t, PNorm::Finite(1.0)).unwrap();
        ShiftOperator::new(kind, WeightSequence::new(w), s)
    }

    #[test]
    fn window_max_matches_brute_force() {
        let u: Vec<f64> = (0..40).map(|d| ((d * 7 % 11) as f64).sin()).collect();
        let v: Vec<f64> = (0..30).map(|n| ((n * 5 % 13) as f64).cos()).collect();
        let (na, mb) = (20, 9);
        let mut brute = f64::NEG_INFINITY;
        for n in 0..=na {
            for d in n + 1..=n + mb {
                brute = brute.max(v[n] + u[d]);
            }
        }
        assert_eq!(window_max(&u, &v, na, mb).0, brute);
    }

    #[test]
    fn continuity_examples() {
        let b = small();
        let d = op(ShiftKind::Backward, WeightFamily::Polynomial { theta: 1.0 }, SeriesType::Infinite);
        assert_eq!(check_continuity(&d, &b).outcome, Outcome::Holds);
        let z = op(ShiftKind::Backward, WeightFamily::Constant(0.0), SeriesType::Finite);
        assert_eq!(check_continuity(&z, &b).outcome, Outcome::Holds);
        // w_n = exp(e^n)
        let f = WeightFamily::Custom { name: "exp-exp", f: alloc::sync::Arc::new(|n| crate::LogReal::exp(libm::exp(n as f64))) };
        let x = op(ShiftKind::Backward, f, SeriesType::Infinite);
        assert_eq!(check_continuity(&x, &b).outcome, Outcome::Fails);
    }

    #[test]
    fn unit_weights_topologizable_with_l_equal_k() {
        let o = op(ShiftKind::Backward, WeightFamily::Constant(1.0), SeriesType::Infinite);
        let v = check_topologizable(&o, &small());
        assert_eq!(v.outcome, Outcome::Holds);
        for k in 0..3 {
            assert_eq!(v.certified_l(k), Some(k));
        }
    }

    #[test]
    fn doubling_weights_not_power_bounded_on_disc() {
        let o = op(ShiftKind::Backward, WeightFamily::Constant(2.0), SeriesType::Finite);
        let v = check_power_bounded(&o, &small());
        assert_eq!(v.outcome, Outcome::Fails);
        assert!(v.witness.is_some());
    }

    #[test]
    fn separable_and_direct_power_bounded_agree() {
        // a single zero weight far out forces the direct path
        let table: alloc::sync::Arc<[f64]> = (0..4000).map(|n| if n == 3999 { 0.0 } else { 1.0 / (n.max(1) as f64) }).collect();
        let b = small();
        let f1 = op(ShiftKind::Forward, WeightFamily::ReciprocalFactorial, SeriesType::Infinite);
        let f2 = op(ShiftKind::Forward, WeightFamily::Table(table), SeriesType::Infinite);
        let (v1, v2) = (check_power_bounded(&f1, &b), check_power_bounded(&f2, &b));
        assert_eq!(v1.outcome, v2.outcome);
        let (w1, w2) = (v1.witness.unwrap(), v2.witness.unwrap());
        assert!((w1.value - w2.value).abs() < 1e-9);
    }

    #[test]
    fn cesaro_table_matches_direct() {
        let o = op(ShiftKind::Backward, WeightFamily::Polynomial { theta: 1.0 }, SeriesType::Infinite);
        let b = small();
        let mut p = Cesaro { op: &o, budget: b, q: CesaroQuantity::PLAIN, grid: None, table: None };
        let e = p.eval(0, 0, 8, 4);
        let w = e.witness;
        let direct = cesaro_bound_ln(&o, CesaroQuantity::PLAIN, 0, 0, w.n, w.m);
        assert!((direct - w.value).abs() < 1e-9 * direct.abs().max(1.0));
    }

    #[test]
    fn chained_table_matches_logs() {
        let b = small();
        let cases = [
            (op(ShiftKind::Backward, WeightFamily::Polynomial { theta: 1.0 }, SeriesType::Infinite), CesaroQuantity::PLAIN),
            (op(ShiftKind::Forward, WeightFamily::ReciprocalFactorial, SeriesType::Infinite), CesaroQuantity::PLAIN),
            (op(ShiftKind::Forward, WeightFamily::Constant(-1.0), SeriesType::Finite), CesaroQuantity::SIGNED),
            (op(ShiftKind::Backward, WeightFamily::Constant(-0.5), SeriesType::Finite), CesaroQuantity::SIGNED),
            (op(ShiftKind::Backward, WeightFamily::SqrtShifted, SeriesType::Infinite), CesaroQuantity { power: 2.0, signed: false }),
            (
                op(ShiftKind::Forward, WeightFamily::Table(vec![1.0, 2.0, 0.0, 3.0].into_iter().chain((0..400).map(|i| 1.0 + i as f64 * 0.01)).collect()), SeriesType::Infinite),
                CesaroQuantity::PLAIN,
            ),
        ];
        for (o, q) in cases {
            let mut p = Cesaro { op: &o, budget: b, q, grid: None, table: None };
            let h = p.horizon(40, 20);
            Grid::ensure(&mut p.grid, &o, h, ncols(&b));
            for k in [0, 3] {
                let fast = p.build_chained(k, 40, 20).expect("representable factors");
                let slow = p.build_logs(k, 40, 20);
                for (fr, sr) in fast.iter().zip(&slow) {
                    for (x, y) in fr.iter().zip(sr) {
                        let ok = (x.0 == y.0) || (x.0 - y.0).abs() <= 1e-11 * y.0.abs().max(1.0);
                        assert!(ok && x.1 == y.1, "{o:?} k={k}: {x:?} vs {y:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn cesaro_examples() {
        let b = small();
        let unit = op(ShiftKind::Backward, WeightFamily::Constant(1.0), SeriesType::Infinite);
        assert_eq!(check_cesaro_bounded(&unit, &b).outcome, Outcome::Holds);
        let d = op(ShiftKind::Backward, WeightFamily::Polynomial { theta: 1.0 }, SeriesType::Infinite);
        assert_eq!(check_cesaro_bounded(&d, &b).outcome, Outcome::Fails);
        let z = op(ShiftKind::Backward, WeightFamily::Constant(0.0), SeriesType::Infinite);
        assert_eq!(check_cesaro_bounded(&z, &b).outcome, Outcome::Holds);
    }

    #[test]
    fn montel_examples() {
        let b = small();
        let ps = make_power_series_space(ExponentSequence::Linear, SeriesType::Infinite, PNorm::Finite(1.0)).unwrap();
        assert_eq!(check_montel(&ps, &b).outcome, Outcome::Holds);
        let c = SpaceSpec::koethe(KoetheMatrix::Constant, PNorm::Finite(1.0));
        assert_eq!(check_montel(&c, &b).outcome, Outcome::Fails);
        let poly = SpaceSpec::koethe(KoetheMatrix::Polynomial, PNorm::Finite(1.0));
        let v = check_montel(&poly, &b);
        assert_eq!(v.outcome, Outcome::Holds);
        assert_eq!(v.certified_l(0), Some(1));
    }

    #[test]
    fn mean_ergodic_examples() {
        let b = small();
        let unit = op(ShiftKind::Backward, WeightFamily::Constant(1.0), SeriesType::Infinite);
        assert_eq!(check_mean_ergodic(&unit, &b).outcome, Outcome::Holds);
        let d = op(ShiftKind::Backward, WeightFamily::Polynomial { theta: 1.0 }, SeriesType::Finite);
        assert_eq!(check_mean_ergodic(&d, &b).outcome, Outcome::Fails);
        let z = SpaceSpec::koethe(KoetheMatrix::Constant, PNorm::Finite(1.0));
        let zo = ShiftOperator::new(ShiftKind::Forward, WeightSequence::new(WeightFamily::Constant(0.0)), z);
        assert_eq!(check_mean_ergodic(&zo, &b).outcome, Outcome::Holds);
    }
}
