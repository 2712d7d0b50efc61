//! Deterministic JSON: fields in declaration order, floats with 17
//! significant digits, non-finite floats as the strings `"inf"`, `"-inf"`,
//! `"nan"`.

use std::io::{self, Write};

use serde::{Serialize, Serializer};
use serde_json::ser::{Formatter, PrettyFormatter};
use shiftlab_core::checks::{Certificate, PropertyReport, TruncationBudget, Verdict, Witness};
use shiftlab_core::{PNorm, ShiftOperator};

/// `{:.16e}`: one leading digit plus sixteen.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

/// A float that survives JSON when it is not finite.
#[derive(Clone, Copy, Debug)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&fmt_f64(self.0))
        }
    }
}

struct Fixed17(PrettyFormatter<'static>);

impl Formatter for Fixed17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(fmt_f64(v).as_bytes())
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fixed17(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("report views serialize infallibly");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

#[derive(Serialize)]
pub struct BudgetJson {
    n_max: usize,
    m_max: usize,
    k_max: usize,
    l_max: usize,
    growth_tol: Num,
    stability_tol: Num,
    max_escalations: u32,
}

impl From<&TruncationBudget> for BudgetJson {
    fn from(b: &TruncationBudget) -> Self {
        BudgetJson {
            n_max: b.n_max,
            m_max: b.m_max,
            k_max: b.k_max,
            l_max: b.l_max,
            growth_tol: Num(b.growth_tol),
            stability_tol: Num(b.stability_tol),
            max_escalations: b.max_escalations,
        }
    }
}

#[derive(Serialize)]
pub struct WitnessJson {
    k: usize,
    l: usize,
    n: usize,
    m: usize,
    value: Num,
}

impl From<&Witness> for WitnessJson {
    fn from(w: &Witness) -> Self {
        WitnessJson { k: w.k, l: w.l, n: w.n, m: w.m, value: Num(w.value) }
    }
}

#[derive(Serialize)]
pub struct CertificateJson {
    k: usize,
    outcome: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    l: Option<usize>,
}

impl From<&Certificate> for CertificateJson {
    fn from(c: &Certificate) -> Self {
        CertificateJson { k: c.k, outcome: c.outcome.name(), l: c.l }
    }
}

#[derive(Serialize)]
pub struct VerdictJson {
    property: &'static str,
    outcome: &'static str,
    quantity: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<WitnessJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    growth_fit: Option<Num>,
    budget: BudgetJson,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    certificates: Vec<CertificateJson>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    notes: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    components: Vec<VerdictJson>,
}

impl From<&Verdict> for VerdictJson {
    fn from(v: &Verdict) -> Self {
        VerdictJson {
            property: v.property.name(),
            outcome: v.outcome.name(),
            quantity: v.quantity.clone(),
            witness: v.witness.as_ref().map(WitnessJson::from),
            growth_fit: v.growth_fit.map(Num),
            budget: (&v.budget).into(),
            certificates: v.certificates.iter().map(CertificateJson::from).collect(),
            notes: v.notes.clone(),
            components: v.components.iter().map(VerdictJson::from).collect(),
        }
    }
}

#[derive(Serialize)]
pub struct OperatorJson {
    kind: &'static str,
    weights: String,
    matrix: String,
    p: String,
    power_series: bool,
}

fn p_name(p: PNorm) -> String {
    match p {
        PNorm::Zero => "0".into(),
        PNorm::Infinity => "inf".into(),
        PNorm::Finite(v) => format!("{v}"),
    }
}

impl From<&ShiftOperator> for OperatorJson {
    fn from(op: &ShiftOperator) -> Self {
        OperatorJson {
            kind: op.kind.name(),
            weights: op.weights.family().describe(),
            matrix: op.space.matrix.describe(),
            p: p_name(op.space.p),
            power_series: op.space.power_series().is_some(),
        }
    }
}

#[derive(Serialize)]
pub struct ConsistencyJson {
    power_bounded_implies_topologizable: bool,
    mean_ergodic_implies_cesaro_bounded: bool,
    specialization_agreement: bool,
}

#[derive(Serialize)]
pub struct ReportJson {
    verdicts: Vec<VerdictJson>,
    consistency: ConsistencyJson,
}

impl From<&PropertyReport> for ReportJson {
    fn from(r: &PropertyReport) -> Self {
        ReportJson {
            verdicts: shiftlab_core::checks::Property::ALL.iter().map(|&p| r.get(p).into()).collect(),
            consistency: ConsistencyJson {
                power_bounded_implies_topologizable: r.power_bounded_implies_topologizable,
                mean_ergodic_implies_cesaro_bounded: r.mean_ergodic_implies_cesaro_bounded,
                specialization_agreement: r.specialization_agreement,
            },
        }
    }
}

#[derive(Serialize)]
pub struct ExpectationJson {
    pub property: &'static str,
    pub expected: &'static str,
    pub found: &'static str,
    pub contradiction: bool,
}

#[derive(Serialize)]
pub struct AnalyzeJson {
    pub operator: OperatorJson,
    pub report: ReportJson,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub expectations: Vec<ExpectationJson>,
}
