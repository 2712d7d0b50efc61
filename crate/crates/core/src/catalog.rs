//! Classical operators on spaces of holomorphic functions and on `s`,
//! written as weighted shifts, with closed-form window products and the
//! verdicts they are known to have.

use alloc::string::String;
use alloc::vec::Vec;

use crate::checks::{full_report, Outcome, Property, PropertyReport, TruncationBudget};
use crate::gamma::ln_rising;
use crate::sequence::{ExponentSequence, WeightFamily, WeightSequence};
use crate::shift::{ShiftKind, ShiftOperator};
use crate::space::{make_power_series_space, PNorm, SeriesType, SpaceSpec};

/// Closed form of `ln |window product|` for an entry's weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogProductForm {
    /// `w = 1`
    Unit,
    /// `+-(ln Gamma(n+m+1) - ln Gamma(n+1))`
    Factorial { negated: bool },
    /// Half of the factorial form.
    HalfFactorial,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub op: ShiftOperator,
    /// Expected outcome per property.
    pub expected: Vec<(Property, Outcome)>,
    pub form: LogProductForm,
    pub notes: Vec<&'static str>,
}

impl CatalogEntry {
    pub fn expected(&self, p: Property) -> Option<Outcome> {
        self.expected.iter().find(|(q, _)| *q == p).map(|&(_, o)| o)
    }
}

fn space(alpha: ExponentSequence, ty: SeriesType) -> SpaceSpec {
    make_power_series_space(alpha, ty, PNorm::Finite(1.0)).expect("builtin exponent sequences are valid")
}

fn entire() -> SpaceSpec {
    space(ExponentSequence::Linear, SeriesType::Infinite)
}

fn disc() -> SpaceSpec {
    space(ExponentSequence::Linear, SeriesType::Finite)
}

fn rapidly_decreasing() -> SpaceSpec {
    space(ExponentSequence::Logarithmic, SeriesType::Infinite)
}

fn shift(kind: ShiftKind, w: WeightFamily, space: SpaceSpec) -> ShiftOperator {
    ShiftOperator::new(kind, WeightSequence::new(w), space)
}

fn verdicts(list: [Outcome; 6]) -> Vec<(Property, Outcome)> {
    Property::ALL.iter().copied().zip(list).collect()
}

const NOTE_DISC_DELTA: &str = "on the disc the iterates map z^m to 1 while sup_{|z|<=rho} |z^m| -> 0, and \
     coefficient sequences of subexponential growth have divergent Cesàro means at index 0; the difference \
     quotient is neither power bounded nor mean ergodic there";
const NOTE_TOPOLOGIZABLE_STATEMENT: &str = "the statement of the classical result calls these shifts \
     topologizable while its proof shows they are not; the verdicts here follow the proof";
const NOTE_NAMING: &str = "named by shift kind rather than by annihilation/creation labels";

/// The eight built-in entries, in a fixed order.
pub fn catalog_entries() -> Vec<CatalogEntry> {
    use Outcome::{Fails as F, Holds as H};
    // Order of Property::ALL: continuity, topologizability, power
    // boundedness, Cesàro boundedness, mean ergodicity, Montel.
    alloc::vec![
        CatalogEntry {
            name: "delta0-infinite",
            description: "difference quotient (f(z) - f(0))/z on H(C)",
            op: shift(ShiftKind::Backward, WeightFamily::Constant(1.0), entire()),
            expected: verdicts([H, H, H, H, H, H]),
            form: LogProductForm::Unit,
            notes: alloc::vec![],
        },
        CatalogEntry {
            name: "delta0-finite",
            description: "difference quotient (f(z) - f(0))/z on H(D)",
            op: shift(ShiftKind::Backward, WeightFamily::Constant(1.0), disc()),
            expected: verdicts([H, H, F, F, F, H]),
            form: LogProductForm::Unit,
            notes: alloc::vec![NOTE_DISC_DELTA],
        },
        CatalogEntry {
            name: "volterra-infinite",
            description: "Volterra operator f -> int_0^z f on H(C)",
            op: shift(ShiftKind::Forward, WeightFamily::ReciprocalFactorial, entire()),
            expected: verdicts([H, H, H, H, H, H]),
            form: LogProductForm::Factorial { negated: true },
            notes: alloc::vec![],
        },
        CatalogEntry {
            name: "volterra-finite",
            description: "Volterra operator f -> int_0^z f on H(D)",
            op: shift(ShiftKind::Forward, WeightFamily::ReciprocalFactorial, disc()),
            expected: verdicts([H, H, H, H, H, H]),
            form: LogProductForm::Factorial { negated: true },
            notes: alloc::vec![],
        },
        CatalogEntry {
            name: "ddz-infinite",
            description: "differentiation d/dz on H(C)",
            op: shift(ShiftKind::Backward, WeightFamily::Polynomial { theta: 1.0 }, entire()),
            expected: verdicts([H, H, F, F, F, H]),
            form: LogProductForm::Factorial { negated: false },
            notes: alloc::vec![],
        },
        CatalogEntry {
            name: "ddz-finite",
            description: "differentiation d/dz on H(D)",
            op: shift(ShiftKind::Backward, WeightFamily::Polynomial { theta: 1.0 }, disc()),
            expected: verdicts([H, H, F, F, F, H]),
            form: LogProductForm::Factorial { negated: false },
            notes: alloc::vec![],
        },
        CatalogEntry {
            name: "sqrt-backward-s",
            description: "backward shift with weights sqrt(n+1) on s (annihilation-like)",
            op: shift(ShiftKind::Backward, WeightFamily::SqrtShifted, rapidly_decreasing()),
            expected: verdicts([H, F, F, F, F, H]),
            form: LogProductForm::HalfFactorial,
            notes: alloc::vec![NOTE_TOPOLOGIZABLE_STATEMENT, NOTE_NAMING],
        },
        CatalogEntry {
            name: "sqrt-forward-s",
            description: "forward shift with weights sqrt(n) on s (creation-like)",
            op: shift(ShiftKind::Forward, WeightFamily::Sqrt, rapidly_decreasing()),
            expected: verdicts([H, F, F, F, F, H]),
            form: LogProductForm::HalfFactorial,
            notes: alloc::vec![NOTE_TOPOLOGIZABLE_STATEMENT, NOTE_NAMING],
        },
    ]
}

pub fn find_entry(name: &str) -> Option<CatalogEntry> {
    catalog_entries().into_iter().find(|e| e.name == name)
}

/// `ln |prod of the window|` in closed form: `prod_{j=n}^{n+m-1} w_j` for
/// backward entries, `prod_{j=1}^{m} w_{n+j}` for forward ones.
pub fn analytic_log_product(entry: &CatalogEntry, n: usize, m: usize) -> f64 {
    match (entry.form, entry.op.kind) {
        (LogProductForm::Unit, _) => 0.0,
        // backward (j+1) over j = n..n+m-1 and forward 1/j over j = n+1..n+m
        // are the same rising product
        (LogProductForm::Factorial { negated }, _) => {
            let v = ln_rising(n, m);
            if negated {
                -v
            } else {
                v
            }
        }
        (LogProductForm::HalfFactorial, _) => 0.5 * ln_rising(n, m),
    }
}

/// The same window from the operator's prefix sums.
pub fn prefix_log_product(entry: &CatalogEntry, n: usize, m: usize) -> f64 {
    match entry.op.kind {
        ShiftKind::Backward => entry.op.weights.ln_window(n, m),
        ShiftKind::Forward => entry.op.weights.ln_window(n + 1, m),
    }
}

#[derive(Clone, Debug)]
pub struct Mismatch {
    pub property: Property,
    pub expected: Outcome,
    pub found: Outcome,
}

#[derive(Clone, Debug)]
pub struct EntryCheck {
    pub name: &'static str,
    pub report: PropertyReport,
    /// Definite outcomes opposite to the expected ones.
    pub contradictions: Vec<Mismatch>,
    /// Inconclusive where a definite outcome was expected.
    pub warnings: Vec<Mismatch>,
    /// Implication violations inside the report itself.
    pub inconsistencies: Vec<String>,
}

impl EntryCheck {
    pub fn is_ok(&self) -> bool {
        self.contradictions.is_empty() && self.inconsistencies.is_empty()
    }
}

pub fn verify_entry(entry: &CatalogEntry, budget: &TruncationBudget) -> EntryCheck {
    let report = full_report(&entry.op, budget);
    let mut contradictions = Vec::new();
    let mut warnings = Vec::new();
    for &(property, expected) in &entry.expected {
        let found = report.get(property).outcome;
        let m = Mismatch { property, expected, found };
        if found == Outcome::Inconclusive && expected != Outcome::Inconclusive {
            warnings.push(m);
        } else if found.is_definite() && found != expected {
            contradictions.push(m);
        }
    }
    let mut inconsistencies = Vec::new();
    if !report.power_bounded_implies_topologizable {
        inconsistencies.push("power bounded but not topologizable".into());
    }
    if !report.mean_ergodic_implies_cesaro_bounded {
        inconsistencies.push("mean ergodic but not Cesàro bounded".into());
    }
    EntryCheck { name: entry.name, report, contradictions, warnings, inconsistencies }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::basis_vector;

    #[test]
    fn eight_distinct_entries() {
        let e = catalog_entries();
        assert_eq!(e.len(), 8);
        for (i, a) in e.iter().enumerate() {
            assert_eq!(a.expected.len(), 6);
            assert!(e[i + 1..].iter().all(|b| b.name != a.name));
        }
        assert!(find_entry("volterra-infinite").is_some());
        assert!(find_entry("nope").is_none());
    }

    #[test]
    fn log_product_examples() {
        let ddz = find_entry("ddz-infinite").unwrap();
        assert!((analytic_log_product(&ddz, 0, 3) - 1.791759469228055).abs() < 1e-12);
        let v = find_entry("volterra-finite").unwrap();
        assert!((analytic_log_product(&v, 2, 2) - (1.0f64 / 12.0).ln()).abs() < 1e-12);
        let s = find_entry("sqrt-backward-s").unwrap();
        assert!((analytic_log_product(&s, 0, 4) - 0.5 * 24f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn analytic_matches_prefix_sums() {
        for e in catalog_entries() {
            let op = e.op.with_capacity(520);
            let e = CatalogEntry { op, ..e };
            for n in 0..500 {
                for m in 1..=(500 - n) {
                    let a = analytic_log_product(&e, n, m);
                    let b = prefix_log_product(&e, n, m);
                    assert!((a - b).abs() <= 1e-9, "{} n={n} m={m}: {a} vs {b}", e.name);
                }
            }
        }
    }

    #[test]
    fn ddz_thrice_on_z_cubed() {
        let e = find_entry("ddz-infinite").unwrap();
        let y = e.op.iterate(&basis_vector(3), 3);
        assert_eq!(y.coeffs(), &[6.0]);
        let mut z = basis_vector(3);
        for _ in 0..3 {
            z = e.op.apply(&z);
        }
        assert_eq!(z.coeffs(), &[6.0]);
    }
}
