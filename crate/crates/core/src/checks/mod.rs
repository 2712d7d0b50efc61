//! Property checks for weighted shifts over finite truncation budgets.
//!
//! Each condition has the shape "for every `k` there is `l` with a finite
//! supremum" or a limsup comparison. The checks sweep truncated index grids
//! and return [`Verdict`]s: `Holds` needs a supremum that is stable under
//! doubling the budget for every tested `k`, `Fails` needs growth for some
//! `k` and every tested `l`, and anything else is `Inconclusive`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::shift::ShiftOperator;

mod generic;
mod grid;
mod power_series;
pub mod sweep;

pub use generic::{
    cesaro_bound_ln, check_cesaro_bounded, check_continuity, check_mean_ergodic, check_montel,
    check_power_bounded, check_topologizable, forward_limit_ln, CesaroQuantity,
};
pub use power_series::{
    check_continuity_power_series, check_power_bounded_power_series, check_topologizable_power_series,
};
pub use sweep::{limsup_along_n_plus_m, TailEstimate};

/// Bounds and tolerances of a truncated evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationBudget {
    /// Index bound (sweeps reach `2 N_max` for the doubling test).
    pub n_max: usize,
    /// Iterate / Cesàro-count bound.
    pub m_max: usize,
    /// Seminorm indices `k < K_max` are tested.
    pub k_max: usize,
    /// Witness indices `l <= L_max` are searched.
    pub l_max: usize,
    /// Log-scale slope above which a supremum counts as growing.
    pub growth_tol: f64,
    /// Relative change under doubling below which a supremum counts as stable.
    pub stability_tol: f64,
    /// How many times an unresolved sweep may double its unstable axes.
    pub max_escalations: u32,
}

impl Default for TruncationBudget {
    fn default() -> Self {
        TruncationBudget {
            n_max: 2000,
            m_max: 200,
            k_max: 8,
            l_max: 32,
            growth_tol: 0.05,
            stability_tol: 0.01,
            max_escalations: 3,
        }
    }
}

impl TruncationBudget {
    pub fn validate(&self) -> Result<()> {
        if self.n_max < 1 || self.m_max < 1 || self.k_max < 1 {
            return Err(Error::InvalidParameter("budget bounds must be at least 1"));
        }
        if !(self.growth_tol > 0.0) || !(self.stability_tol > 0.0) {
            return Err(Error::InvalidParameter("budget tolerances must be positive"));
        }
        Ok(())
    }

    /// Budget with `N_max` and `M_max` scaled by `factor` (at least 1 each).
    pub fn scaled(&self, factor: f64) -> TruncationBudget {
        let s = |v: usize| (libm::round(v as f64 * factor) as usize).max(1);
        TruncationBudget { n_max: s(self.n_max), m_max: s(self.m_max), ..*self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Holds,
    Fails,
    Inconclusive,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Holds => "Holds",
            Outcome::Fails => "Fails",
            Outcome::Inconclusive => "Inconclusive",
        }
    }

    /// Conjunction: Fails dominates, Holds needs both.
    pub fn and(self, other: Outcome) -> Outcome {
        match (self, other) {
            (Outcome::Fails, _) | (_, Outcome::Fails) => Outcome::Fails,
            (Outcome::Holds, Outcome::Holds) => Outcome::Holds,
            _ => Outcome::Inconclusive,
        }
    }

    /// A sufficient condition and a necessary one bracketing a property.
    pub fn sandwich(sufficient: Outcome, necessary: Outcome) -> Outcome {
        if sufficient == Outcome::Holds {
            Outcome::Holds
        } else if necessary == Outcome::Fails {
            Outcome::Fails
        } else {
            Outcome::Inconclusive
        }
    }

    pub fn is_definite(self) -> bool {
        self != Outcome::Inconclusive
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Property {
    Continuity,
    Topologizability,
    PowerBoundedness,
    CesaroBoundedness,
    MeanErgodicity,
    MontelSpace,
}

impl Property {
    pub const ALL: [Property; 6] = [
        Property::Continuity,
        Property::Topologizability,
        Property::PowerBoundedness,
        Property::CesaroBoundedness,
        Property::MeanErgodicity,
        Property::MontelSpace,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Continuity => "continuity",
            Property::Topologizability => "topologizability",
            Property::PowerBoundedness => "power_boundedness",
            Property::CesaroBoundedness => "cesaro_boundedness",
            Property::MeanErgodicity => "mean_ergodicity",
            Property::MontelSpace => "montel_space",
        }
    }
}

/// Where a supremum was attained. `value` is on the log scale unless the
/// quantity itself is a ratio of logs (power series displays).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Witness {
    pub k: usize,
    pub l: usize,
    pub n: usize,
    pub m: usize,
    pub value: f64,
}

/// Per-`k` outcome of an `l`-search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Certificate {
    pub k: usize,
    pub outcome: Outcome,
    /// Certifying `l`, present when the outcome is Holds.
    pub l: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub property: Property,
    pub outcome: Outcome,
    pub quantity: String,
    pub witness: Option<Witness>,
    pub growth_fit: Option<f64>,
    /// Budget actually swept, after escalation.
    pub budget: TruncationBudget,
    pub certificates: Vec<Certificate>,
    pub notes: Vec<String>,
    pub components: Vec<Verdict>,
}

impl Verdict {
    pub fn new(property: Property, outcome: Outcome, quantity: impl Into<String>, budget: TruncationBudget) -> Verdict {
        Verdict {
            property,
            outcome,
            quantity: quantity.into(),
            witness: None,
            growth_fit: None,
            budget,
            certificates: Vec::new(),
            notes: Vec::new(),
            components: Vec::new(),
        }
    }

    pub fn note(mut self, s: impl Into<String>) -> Verdict {
        self.notes.push(s.into());
        self
    }

    /// Certifying `l` for `k`, if recorded.
    pub fn certified_l(&self, k: usize) -> Option<usize> {
        self.certificates.iter().find(|c| c.k == k).and_then(|c| c.l)
    }
}

/// Verdicts for all properties of one operator.
#[derive(Clone, Debug)]
pub struct PropertyReport {
    pub continuity: Verdict,
    pub topologizability: Verdict,
    pub power_boundedness: Verdict,
    pub cesaro_boundedness: Verdict,
    pub mean_ergodicity: Verdict,
    pub montel_space: Verdict,
    /// Power bounded = Holds is not paired with topologizable = Fails.
    pub power_bounded_implies_topologizable: bool,
    /// Mean ergodic = Holds is not paired with Cesàro bounded = Fails.
    pub mean_ergodic_implies_cesaro_bounded: bool,
    /// Generic checks and power series fast paths never gave opposite
    /// definite outcomes.
    pub specialization_agreement: bool,
}

impl PropertyReport {
    pub fn get(&self, p: Property) -> &Verdict {
        match p {
            Property::Continuity => &self.continuity,
            Property::Topologizability => &self.topologizability,
            Property::PowerBoundedness => &self.power_boundedness,
            Property::CesaroBoundedness => &self.cesaro_boundedness,
            Property::MeanErgodicity => &self.mean_ergodicity,
            Property::MontelSpace => &self.montel_space,
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.power_bounded_implies_topologizable && self.mean_ergodic_implies_cesaro_bounded
    }
}

/// Merges a generic verdict with a fast-path verdict for the same property:
/// a definite outcome wins over Inconclusive, opposite definite outcomes
/// give Inconclusive and clear `agree`.
fn combine(generic: Verdict, fast: Verdict, agree: &mut bool) -> Verdict {
    let (outcome, lead, note) = match (generic.outcome, fast.outcome) {
        (g, f) if g == f => (g, &generic, None),
        (Outcome::Inconclusive, f) => (f, &fast, None),
        (g, Outcome::Inconclusive) => (g, &generic, None),
        _ => {
            *agree = false;
            (Outcome::Inconclusive, &generic, Some("generic sweep and power series criterion disagree"))
        }
    };
    let mut v = Verdict::new(generic.property, outcome, lead.quantity.clone(), lead.budget);
    v.witness = lead.witness;
    v.growth_fit = lead.growth_fit;
    v.certificates = if generic.certificates.is_empty() { fast.certificates.clone() } else { generic.certificates.clone() };
    if let Some(n) = note {
        v.notes.push(n.into());
    }
    v.components = alloc::vec![generic, fast];
    v
}

fn reconcile(stronger: &mut Verdict, weaker: &mut Verdict) {
    if stronger.outcome == Outcome::Holds && weaker.outcome == Outcome::Fails {
        let msg = alloc::format!(
            "{} = Holds contradicted {} = Fails under the budget; both set to Inconclusive",
            stronger.property.name(),
            weaker.property.name()
        );
        for v in [stronger, weaker] {
            v.outcome = Outcome::Inconclusive;
            v.notes.push(msg.clone());
        }
    }
}

/// Runs every check, power series fast paths alongside the generic sweeps
/// on tagged spaces, and records implication consistency.
pub fn full_report(op: &ShiftOperator, budget: &TruncationBudget) -> PropertyReport {
    let mut agree = true;
    let tagged = op.space.power_series().is_some();

    let mut continuity = check_continuity(op, budget);
    if tagged {
        if let Ok(fast) = check_continuity_power_series(op, budget) {
            continuity = combine(continuity, fast, &mut agree);
        }
    }

    let mut topologizability = check_topologizable(op, budget);
    if tagged {
        if let Ok(fast) = check_topologizable_power_series(op, budget) {
            topologizability = combine(topologizability, fast, &mut agree);
        }
    }

    let mut power_boundedness = check_power_bounded(op, budget);
    if tagged {
        match check_power_bounded_power_series(op, budget) {
            Ok(fast) => power_boundedness = combine(power_boundedness, fast, &mut agree),
            Err(e) => power_boundedness.notes.push(alloc::format!("power series criterion skipped: {e}")),
        }
    }

    if continuity.outcome == Outcome::Fails {
        let msg = "operator is not continuous; the characterizations assume continuity";
        topologizability.notes.push(msg.into());
        power_boundedness.notes.push(msg.into());
    }

    let mut cesaro_boundedness = check_cesaro_bounded(op, budget);
    let montel_space = check_montel(&op.space, budget);
    let mut mean_ergodicity = generic::mean_ergodic_from(op, budget, &cesaro_boundedness, &montel_space);

    // a Holds paired with a Fails it implies away means one of the two is a
    // truncation artefact, and nothing says which
    reconcile(&mut power_boundedness, &mut topologizability);
    reconcile(&mut mean_ergodicity, &mut cesaro_boundedness);

    let power_bounded_implies_topologizable =
        !(power_boundedness.outcome == Outcome::Holds && topologizability.outcome == Outcome::Fails);
    let mean_ergodic_implies_cesaro_bounded =
        !(mean_ergodicity.outcome == Outcome::Holds && cesaro_boundedness.outcome == Outcome::Fails);

    PropertyReport {
        continuity,
        topologizability,
        power_boundedness,
        cesaro_boundedness,
        mean_ergodicity,
        montel_space,
        power_bounded_implies_topologizable,
        mean_ergodic_implies_cesaro_bounded,
        specialization_agreement: agree,
    }
}
