//! Brute-force dynamics: seminorm trajectories of iterates and Cesàro
//! means, and a coarse convergence classifier that knows nothing about the
//! condition checkers.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::checks::{forward_limit_ln, full_report, Outcome, Property, PropertyReport, TruncationBudget, Verdict};
use crate::shift::{ShiftKind, ShiftOperator};
use crate::space::{basis_vector, ln_seminorm, FiniteVector};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub n: usize,
    pub k: usize,
    /// `||T^[n] x||_k`
    pub cesaro: f64,
    /// `||(1/n) T^n x||_k`
    pub power_over_n: f64,
    /// Support length of `T^n x`.
    pub support_width: usize,
}

#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    pub kind: ShiftKind,
    pub x0: FiniteVector,
    pub k_list: Vec<usize>,
    pub n_max: usize,
    /// Ordered by `n`, then by position in `k_list`.
    pub rows: Vec<TrajectoryRow>,
}

impl TrajectoryRecord {
    fn column(&self, k: usize, f: impl Fn(&TrajectoryRow) -> f64) -> Vec<f64> {
        self.rows.iter().filter(|r| r.k == k).map(f).collect()
    }

    pub fn cesaro_series(&self, k: usize) -> Vec<f64> {
        self.column(k, |r| r.cesaro)
    }

    pub fn power_over_n_series(&self, k: usize) -> Vec<f64> {
        self.column(k, |r| r.power_over_n)
    }

    /// `||T^n x||_k`
    pub fn power_series(&self, k: usize) -> Vec<f64> {
        self.column(k, |r| r.power_over_n * r.n as f64)
    }
}

/// Every step is evaluated from the closed forms on its own, so rounding
/// does not accumulate along the trajectory. Overflow shows up as `inf`.
pub fn run_trajectory(op: &ShiftOperator, x0: &FiniteVector, k_list: &[usize], n_max: usize) -> TrajectoryRecord {
    assert!(n_max >= 2, "trajectories need at least two steps");
    let op = op.with_capacity(x0.support_len() + n_max + 1);
    let mut rows = Vec::with_capacity(n_max * k_list.len());
    for n in 1..=n_max {
        let width = op.iterate(x0, n).support_len();
        let ln_n = libm::log(n as f64);
        for &k in k_list {
            rows.push(TrajectoryRow {
                n,
                k,
                cesaro: op.cesaro_seminorm(x0, n, k),
                power_over_n: libm::exp(op.ln_iterate_seminorm(x0, n, k) - ln_n),
                support_width: width,
            });
        }
    }
    TrajectoryRecord { kind: op.kind, x0: x0.clone(), k_list: k_list.to_vec(), n_max, rows }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConvergenceClass {
    ConvergesToZero,
    ConvergesToNonzero,
    Bounded,
    Diverges,
    Inconclusive,
}

impl ConvergenceClass {
    pub fn name(self) -> &'static str {
        match self {
            ConvergenceClass::ConvergesToZero => "ConvergesToZero",
            ConvergenceClass::ConvergesToNonzero => "ConvergesToNonzero",
            ConvergenceClass::Bounded => "Bounded",
            ConvergenceClass::Diverges => "Diverges",
            ConvergenceClass::Inconclusive => "Inconclusive",
        }
    }

    /// Anything but divergence or an undecided series.
    pub fn is_bounded(self) -> bool {
        !matches!(self, ConvergenceClass::Diverges | ConvergenceClass::Inconclusive)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Classification {
    pub class: ConvergenceClass,
    /// Envelope growth exponent: `v_n ~ n^rate` between the second and last blocks.
    pub rate: f64,
}

pub const DEFAULT_TOL: f64 = 1e-6;
/// Slopes within this band count as flat.
const FLAT: f64 = 0.05;
/// Relative spread of the last block below which the series has settled.
const SETTLED: f64 = 1e-3;

/// Growth rate of the envelope: log-ratio of the maxima of the second and
/// fourth blocks over the log-ratio of their midpoints. Block maxima keep
/// bounded oscillation from reading as a trend.
fn envelope_rate(v: &[f64], b: usize) -> f64 {
    let max = |s: &[f64]| s.iter().copied().fold(0.0, f64::max);
    let early = max(&v[b..2 * b]);
    let late = max(&v[v.len() - b..]);
    let span = libm::log((v.len() as f64 - 0.5 * b as f64 + 0.5) / (1.5 * b as f64 + 0.5));
    match (early > 0.0, late > 0.0) {
        (true, true) => libm::log(late / early) / span,
        (false, true) => f64::INFINITY,
        (_, false) => f64::NEG_INFINITY,
    }
}

/// Classifies `v_1, v_2, ...` by comparing the first and last blocks of
/// length `len / 4` and by the growth rate of the block maxima.
pub fn classify_series(v: &[f64], tol: f64) -> Classification {
    let undecided = Classification { class: ConvergenceClass::Inconclusive, rate: f64::NAN };
    if v.len() < 8 || v.iter().any(|x| x.is_nan() || *x < 0.0) {
        return undecided;
    }
    if v.iter().any(|x| x.is_infinite()) {
        return Classification { class: ConvergenceClass::Diverges, rate: f64::INFINITY };
    }
    let b = v.len() / 4;
    let max = |s: &[f64]| s.iter().copied().fold(0.0, f64::max);
    let first = max(&v[..b]);
    let last_block = &v[v.len() - b..];
    let last = max(last_block);
    if last == 0.0 {
        return Classification { class: ConvergenceClass::ConvergesToZero, rate: f64::NEG_INFINITY };
    }
    let rate = envelope_rate(v, b);
    let class = if last < tol * first || rate < -FLAT {
        ConvergenceClass::ConvergesToZero
    } else if rate > FLAT {
        if last > first {
            ConvergenceClass::Diverges
        } else {
            ConvergenceClass::Inconclusive
        }
    } else {
        let low = last_block.iter().copied().fold(f64::INFINITY, f64::min);
        if (last - low) <= SETTLED * last {
            ConvergenceClass::ConvergesToNonzero
        } else {
            ConvergenceClass::Bounded
        }
    };
    Classification { class, rate }
}

/// Cesàro trajectory class per `k`.
pub fn classify(traj: &TrajectoryRecord, tol: f64) -> Vec<(usize, Classification)> {
    traj.k_list.iter().map(|&k| (k, classify_series(&traj.cesaro_series(k), tol))).collect()
}

/// `(prod_{s=1}^n w_{r+s}) a(r+n,k) / n` for `n = 1..=n_max`.
pub fn forward_limit_sequence(op: &ShiftOperator, r: usize, k: usize, n_max: usize) -> Vec<f64> {
    let op = op.with_capacity(r + n_max + 2);
    (1..=n_max).map(|n| libm::exp(forward_limit_ln(&op, r, k, n))).collect()
}

/// The fixed probe vectors `e_0, e_3, e_10, e_0 + e_3/2 + e_7/4`.
pub fn probe_vectors() -> Vec<(String, FiniteVector)> {
    let mut mixed = alloc::vec![0.0; 8];
    mixed[0] = 1.0;
    mixed[3] = 0.5;
    mixed[7] = 0.25;
    alloc::vec![
        ("e_0".into(), basis_vector(0)),
        ("e_3".into(), basis_vector(3)),
        ("e_10".into(), basis_vector(10)),
        ("e_0+e_3/2+e_7/4".into(), FiniteVector::new(mixed)),
    ]
}

#[derive(Clone, Debug)]
pub struct Probe {
    pub label: String,
    pub k: usize,
    /// Seminorm index of the normalization, for the basis sweeps.
    pub l: Option<usize>,
    pub class: Classification,
}

#[derive(Clone, Debug, Default)]
pub struct CrossValidation {
    pub probes: Vec<Probe>,
    /// A checker Holds contradicted by a diverging probe.
    pub hard_mismatches: Vec<String>,
    /// A checker Fails without a diverging probe to show it.
    pub soft_notes: Vec<String>,
}

/// Steps per trajectory and basis sweep length used by [`cross_validate`].
pub const CROSS_STEPS: usize = 96;
const CROSS_K: usize = 4;

/// Runs [`full_report`] and compares it with simulated trajectories.
pub fn cross_validate(op: &ShiftOperator, budget: &TruncationBudget) -> CrossValidation {
    let report = full_report(op, budget);
    cross_validate_report(op, &report, budget, CROSS_STEPS)
}

/// Sweep over `r = 1..=steps` of `||T^[r] e_r||_k / ||e_r||_l` (`cesaro`)
/// or `||T^r e_r||_k / ||e_r||_l`: bounded for every `k` with a suitable `l`
/// exactly when the family is equicontinuous on the basis.
fn basis_sweep(op: &ShiftOperator, cesaro: bool, k: usize, l: usize, steps: usize) -> Vec<f64> {
    (1..=steps)
        .map(|r| {
            let e = basis_vector(r);
            let num = if cesaro { op.ln_cesaro_seminorm(&e, r, k) } else { op.ln_iterate_seminorm(&e, r, k) };
            let den = ln_seminorm(&e, l, &op.space);
            if num == f64::NEG_INFINITY {
                0.0
            } else {
                libm::exp(num - den)
            }
        })
        .collect()
}

/// The certified `l` when the checker says Holds; otherwise `l = k`, the
/// normalization under which a failure is quickest to show.
fn normalization(v: &Verdict, k: usize, budget: &TruncationBudget) -> usize {
    if v.outcome == Outcome::Holds {
        v.certified_l(k).unwrap_or(budget.l_max)
    } else {
        k
    }
}

/// Compares a report with trajectories of the probe vectors and with basis
/// sweeps at the certified `(k, l)` pairs. Mismatches are listed, never
/// resolved.
pub fn cross_validate_report(
    op: &ShiftOperator,
    report: &PropertyReport,
    budget: &TruncationBudget,
    steps: usize,
) -> CrossValidation {
    let mut out = CrossValidation::default();
    let mut steps = steps.max(8);
    if let Some(lim) = op.index_limit() {
        // forward iterates of the widest probe must stay inside tables
        steps = steps.min(lim.saturating_sub(12) / 2).max(8);
    }
    let op = op.with_capacity(2 * steps + 16);
    let ks: Vec<usize> = (0..budget.k_max.min(CROSS_K)).collect();
    let me = report.get(Property::MeanErgodicity);
    let cb = report.get(Property::CesaroBoundedness);
    let pb = report.get(Property::PowerBoundedness);

    let mut cesaro_diverges = false;
    let mut power_diverges = false;
    for (label, x) in probe_vectors() {
        let traj = run_trajectory(&op, &x, &ks, steps);
        for &k in &ks {
            let c = classify_series(&traj.cesaro_series(k), DEFAULT_TOL);
            let p = classify_series(&traj.power_series(k), DEFAULT_TOL);
            if c.class == ConvergenceClass::Diverges {
                cesaro_diverges = true;
                if me.outcome == Outcome::Holds {
                    out.hard_mismatches.push(format!("mean ergodic Holds but the Cesàro means of {label} diverge in k = {k}"));
                }
            }
            if p.class == ConvergenceClass::Diverges {
                power_diverges = true;
                if pb.outcome == Outcome::Holds {
                    out.hard_mismatches.push(format!("power bounded Holds but the iterates of {label} diverge in k = {k}"));
                }
            }
            out.probes.push(Probe { label: format!("cesaro {label}"), k, l: None, class: c });
            out.probes.push(Probe { label: format!("power {label}"), k, l: None, class: p });
        }
    }

    for &k in &ks {
        for (cesaro, v) in [(true, cb), (false, pb)] {
            let l = normalization(v, k, budget);
            let c = classify_series(&basis_sweep(&op, cesaro, k, l, steps), DEFAULT_TOL);
            let what = if cesaro { "Cesàro" } else { "power" };
            if c.class == ConvergenceClass::Diverges {
                if cesaro {
                    cesaro_diverges = true;
                } else {
                    power_diverges = true;
                }
                if v.outcome == Outcome::Holds {
                    out.hard_mismatches.push(format!(
                        "{} Holds with l = {l} for k = {k} but the {what} basis sweep diverges",
                        v.property.name()
                    ));
                }
            }
            out.probes.push(Probe { label: format!("{what} basis sweep"), k, l: Some(l), class: c });
        }
    }

    if (me.outcome == Outcome::Fails || cb.outcome == Outcome::Fails) && !cesaro_diverges {
        out.soft_notes.push("Cesàro failure not visible on the probes".into());
    }
    if pb.outcome == Outcome::Fails && !power_diverges {
        out.soft_notes.push("power boundedness failure not visible on the probes".into());
    }
    out
}
