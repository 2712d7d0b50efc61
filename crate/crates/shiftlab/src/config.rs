//! Run configuration: a TOML file with `[space]`, `[weight]`, `[shift]` and
//! optional `[budget]`, `[expect]`, `[output]` sections. Table paths are
//! resolved relative to the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;
use shiftlab_core::checks::{Outcome, Property, TruncationBudget};
use shiftlab_core::{
    make_power_series_space, ExponentSequence, KoetheMatrix, PNorm, SeriesType, ShiftKind, ShiftOperator, SpaceSpec,
    WeightFamily, WeightSequence,
};

use crate::table::read_table;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("{}:{line}: {msg}", path.display())]
    Table { path: PathBuf, line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] shiftlab_core::Error),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    space: RawSpace,
    weight: RawWeight,
    shift: RawShift,
    #[serde(default)]
    budget: RawBudget,
    #[serde(default)]
    expect: BTreeMap<String, String>,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawP {
    Num(f64),
    Word(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpace {
    family: String,
    #[serde(rename = "type")]
    ty: Option<String>,
    alpha: Option<String>,
    theta: Option<f64>,
    alpha_table: Option<PathBuf>,
    matrix: Option<String>,
    p: Option<RawP>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeight {
    family: String,
    c: Option<f64>,
    theta: Option<f64>,
    gamma: Option<f64>,
    alpha: Option<String>,
    alpha_theta: Option<f64>,
    alpha_table: Option<PathBuf>,
    table: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawShift {
    kind: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBudget {
    n_max: Option<usize>,
    m_max: Option<usize>,
    k_max: Option<usize>,
    l_max: Option<usize>,
    growth_tol: Option<f64>,
    stability_tol: Option<f64>,
    max_escalations: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    json: Option<PathBuf>,
    csv: Option<PathBuf>,
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub op: ShiftOperator,
    pub budget: TruncationBudget,
    /// Declared outcomes, in property order.
    pub expect: Vec<(Property, Outcome)>,
    pub json_out: Option<PathBuf>,
    pub csv_out: Option<PathBuf>,
}

pub fn parse_outcome(s: &str) -> Option<Outcome> {
    match s.to_ascii_lowercase().as_str() {
        "holds" => Some(Outcome::Holds),
        "fails" => Some(Outcome::Fails),
        "inconclusive" => Some(Outcome::Inconclusive),
        _ => None,
    }
}

fn parse_property(s: &str) -> Option<Property> {
    Property::ALL.into_iter().find(|p| p.name() == s)
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn exponent(name: Option<&str>, theta: Option<f64>, table: Option<&Path>, base: &Path) -> Result<ExponentSequence, ConfigError> {
    match name {
        Some("linear") => Ok(ExponentSequence::Linear),
        Some("log") | Some("logarithmic") => Ok(ExponentSequence::Logarithmic),
        Some("power") => match theta {
            Some(theta) => Ok(ExponentSequence::Power { theta }),
            None => invalid("alpha = \"power\" needs theta"),
        },
        Some("table") => match table {
            Some(t) => Ok(ExponentSequence::Table(Arc::from(read_table(&resolve(base, t))?))),
            None => invalid("alpha = \"table\" needs alpha_table"),
        },
        Some(other) => invalid(format!("unknown alpha {other:?} (linear, log, power, table)")),
        None => invalid("missing alpha"),
    }
}

fn p_norm(p: Option<&RawP>) -> Result<PNorm, ConfigError> {
    match p {
        None => Ok(PNorm::Finite(1.0)),
        Some(RawP::Num(v)) => Ok(PNorm::new(*v)?),
        Some(RawP::Word(w)) => match w.as_str() {
            "inf" | "infinity" => Ok(PNorm::Infinity),
            "0" | "zero" => Ok(PNorm::Zero),
            other => invalid(format!("unknown p {other:?}")),
        },
    }
}

fn build_space(s: &RawSpace, base: &Path) -> Result<SpaceSpec, ConfigError> {
    let p = p_norm(s.p.as_ref())?;
    match s.family.as_str() {
        "power-series" => {
            let ty = match s.ty.as_deref() {
                Some("finite") => SeriesType::Finite,
                Some("infinite") => SeriesType::Infinite,
                Some(other) => return invalid(format!("unknown space type {other:?} (finite, infinite)")),
                None => return invalid("power-series space needs type"),
            };
            let alpha = exponent(s.alpha.as_deref(), s.theta, s.alpha_table.as_deref(), base)?;
            Ok(make_power_series_space(alpha, ty, p)?)
        }
        "koethe-custom" => {
            let m = match s.matrix.as_deref() {
                Some("constant") => KoetheMatrix::Constant,
                Some("polynomial") => KoetheMatrix::Polynomial,
                Some(other) => return invalid(format!("unknown matrix {other:?} (constant, polynomial)")),
                None => return invalid("koethe-custom space needs matrix"),
            };
            Ok(SpaceSpec::koethe(m, p))
        }
        other => invalid(format!("unknown space family {other:?} (power-series, koethe-custom)")),
    }
}

fn need(v: Option<f64>, what: &str) -> Result<f64, ConfigError> {
    v.ok_or_else(|| ConfigError::Invalid(format!("weight family needs {what}")))
}

fn build_weight(w: &RawWeight, space: &SpaceSpec, base: &Path) -> Result<WeightFamily, ConfigError> {
    Ok(match w.family.as_str() {
        "constant" => WeightFamily::Constant(need(w.c, "c")?),
        "polynomial" => WeightFamily::Polynomial { theta: need(w.theta, "theta")? },
        "exp-alpha" => {
            let gamma = need(w.gamma, "gamma")?;
            // without its own alpha the weight uses the space's exponents
            let alpha = match (w.alpha.as_deref(), space.power_series()) {
                (None, Some((_, a))) => a.clone(),
                (name, _) => exponent(name, w.alpha_theta, w.alpha_table.as_deref(), base)?,
            };
            WeightFamily::ExpAlpha { gamma, alpha }
        }
        "reciprocal-factorial" => WeightFamily::ReciprocalFactorial,
        "sqrt-shifted" => WeightFamily::SqrtShifted,
        "sqrt" => WeightFamily::Sqrt,
        "table" => match &w.table {
            Some(t) => WeightFamily::Table(Arc::from(read_table(&resolve(base, t))?)),
            None => return invalid("weight family \"table\" needs table"),
        },
        other => {
            return invalid(format!(
                "unknown weight family {other:?} (constant, polynomial, exp-alpha, reciprocal-factorial, sqrt-shifted, sqrt, table)"
            ))
        }
    })
}

fn build_budget(b: &RawBudget) -> Result<TruncationBudget, ConfigError> {
    let d = TruncationBudget::default();
    let budget = TruncationBudget {
        n_max: b.n_max.unwrap_or(d.n_max),
        m_max: b.m_max.unwrap_or(d.m_max),
        k_max: b.k_max.unwrap_or(d.k_max),
        l_max: b.l_max.unwrap_or(d.l_max),
        growth_tol: b.growth_tol.unwrap_or(d.growth_tol),
        stability_tol: b.stability_tol.unwrap_or(d.stability_tol),
        max_escalations: b.max_escalations.unwrap_or(d.max_escalations),
    };
    budget.validate()?;
    Ok(budget)
}

impl RunConfig {
    pub fn from_str(text: &str, path: &Path) -> Result<RunConfig, ConfigError> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse { path: path.to_path_buf(), source: e })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let space = build_space(&raw.space, base)?;
        let weight = build_weight(&raw.weight, &space, base)?;
        let kind = match raw.shift.kind.as_str() {
            "backward" => ShiftKind::Backward,
            "forward" => ShiftKind::Forward,
            other => return invalid(format!("unknown shift kind {other:?} (backward, forward)")),
        };
        let budget = build_budget(&raw.budget)?;
        let mut expect = Vec::new();
        for (k, v) in &raw.expect {
            let p = parse_property(k).ok_or_else(|| ConfigError::Invalid(format!("unknown property {k:?} in [expect]")))?;
            let o = parse_outcome(v).ok_or_else(|| ConfigError::Invalid(format!("unknown outcome {v:?} for {k}")))?;
            expect.push((p, o));
        }
        expect.sort_by_key(|(p, _)| Property::ALL.iter().position(|q| q == p));
        Ok(RunConfig {
            op: ShiftOperator::new(kind, WeightSequence::new(weight), space),
            budget,
            expect,
            json_out: raw.output.json.map(|p| resolve(base, &p)),
            csv_out: raw.output.csv.map(|p| resolve(base, &p)),
        })
    }

    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io { path: path.to_path_buf(), source: e })?;
        RunConfig::from_str(&text, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DELTA: &str = r#"
[space]
family = "power-series"
type = "infinite"
alpha = "linear"

[weight]
family = "constant"
c = 1.0

[shift]
kind = "backward"

[budget]
n_max = 64

[expect]
power_boundedness = "Holds"
continuity = "holds"
"#;

    #[test]
    fn parses_and_applies_defaults() {
        let c = RunConfig::from_str(DELTA, Path::new("x/run.toml")).unwrap();
        assert_eq!(c.op.kind, ShiftKind::Backward);
        assert_eq!(c.budget.n_max, 64);
        assert_eq!(c.budget.m_max, TruncationBudget::default().m_max);
        assert_eq!(c.expect, vec![(Property::Continuity, Outcome::Holds), (Property::PowerBoundedness, Outcome::Holds)]);
        assert!(c.op.space.power_series().is_some());
        assert_eq!(c.op.space.p, PNorm::Finite(1.0));
    }

    #[test]
    fn rejects_unknown_names() {
        for (from, to) in [
            ("kind = \"backward\"", "kind = \"sideways\""),
            ("family = \"constant\"", "family = \"cubic\""),
            ("alpha = \"linear\"", "alpha = \"quadratic\""),
            ("continuity = \"holds\"", "continuity = \"maybe\""),
            ("n_max = 64", "n_max = 64\nm_maximum = 3"),
            ("n_max = 64", "n_max = 0"),
        ] {
            let text = DELTA.replace(from, to);
            assert!(RunConfig::from_str(&text, Path::new("run.toml")).is_err(), "{to}");
        }
    }

    #[test]
    fn missing_table_names_the_file() {
        let text = DELTA.replace("alpha = \"linear\"", "alpha = \"table\"\nalpha_table = \"nope.txt\"");
        let e = RunConfig::from_str(&text, Path::new("/tmp/cfg/run.toml")).unwrap_err();
        assert!(e.to_string().contains("/tmp/cfg/nope.txt"), "{e}");
    }

    #[test]
    fn exp_alpha_defaults_to_space_exponents() {
        let text = DELTA
            .replace("family = \"constant\"\nc = 1.0", "family = \"exp-alpha\"\ngamma = -1.0")
            .replace("alpha = \"linear\"", "alpha = \"power\"\ntheta = 0.5");
        let c = RunConfig::from_str(&text, Path::new("run.toml")).unwrap();
        match c.op.weights.family() {
            WeightFamily::ExpAlpha { alpha: ExponentSequence::Power { theta }, .. } => assert_eq!(*theta, 0.5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn p_words() {
        let inf = DELTA.replace("alpha = \"linear\"", "alpha = \"linear\"\np = \"inf\"");
        assert_eq!(RunConfig::from_str(&inf, Path::new("r")).unwrap().op.space.p, PNorm::Infinity);
        let two = DELTA.replace("alpha = \"linear\"", "alpha = \"linear\"\np = 2");
        assert_eq!(RunConfig::from_str(&two, Path::new("r")).unwrap().op.space.p, PNorm::Finite(2.0));
    }
}
