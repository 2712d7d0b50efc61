use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;
use shiftlab_core::catalog::{catalog_entries, find_entry, verify_entry, CatalogEntry, EntryCheck, Mismatch};
use shiftlab_core::checks::{full_report, Outcome, Property, PropertyReport, TruncationBudget};
use shiftlab_core::simulator::{classify, cross_validate_report, run_trajectory, TrajectoryRecord, CROSS_STEPS, DEFAULT_TOL};
use shiftlab_core::FiniteVector;

use crate::config::{ConfigError, RunConfig};
use crate::json::{self, AnalyzeJson, BudgetJson, ExpectationJson, Num, OperatorJson, ReportJson};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
}

/// What a finished command reports back to `main`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// A definite outcome opposite to a declared or catalogued one.
    Contradiction,
}

fn write_out(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Write { path: path.to_path_buf(), source: e })?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Write { path: path.to_path_buf(), source: e })
}

/// Worker count: `SHIFTLAB_THREADS` if set to a positive integer, else the
/// available parallelism.
pub fn worker_count() -> usize {
    let avail = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var("SHIFTLAB_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok()) {
        Some(n) if n >= 1 => n,
        _ => avail,
    }
}

/// `f` over `items` on up to `threads` workers; results keep input order.
pub fn par_map<T: Sync, R: Send>(items: &[T], threads: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let threads = threads.clamp(1, items.len().max(1));
    if threads == 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                slots.lock().unwrap()[i] = Some(r);
            });
        }
    });
    slots.into_inner().unwrap().into_iter().map(|r| r.expect("every slot filled")).collect()
}

fn short(o: Outcome) -> &'static str {
    match o {
        Outcome::Holds => "H",
        Outcome::Fails => "F",
        Outcome::Inconclusive => "?",
    }
}

fn summary_line(report: &PropertyReport) -> String {
    Property::ALL.iter().map(|&p| format!("{}={}", p.name(), report.get(p).outcome)).collect::<Vec<_>>().join(" ")
}

pub fn analyze(config: &Path, out: Option<&Path>) -> Result<Status, CliError> {
    let cfg = RunConfig::load(config)?;
    let report = full_report(&cfg.op, &cfg.budget);
    let expectations: Vec<ExpectationJson> = cfg
        .expect
        .iter()
        .map(|&(p, want)| {
            let found = report.get(p).outcome;
            ExpectationJson {
                property: p.name(),
                expected: want.name(),
                found: found.name(),
                contradiction: found.is_definite() && want.is_definite() && found != want,
            }
        })
        .collect();
    let status = if expectations.iter().any(|e| e.contradiction) { Status::Contradiction } else { Status::Ok };
    let doc = AnalyzeJson { operator: (&cfg.op).into(), report: (&report).into(), expectations };
    let text = json::to_string(&doc);
    match out.map(Path::to_path_buf).or(cfg.json_out) {
        Some(path) => {
            write_out(&path, &text)?;
            println!("{}", summary_line(&report));
        }
        None => print!("{text}"),
    }
    for e in doc.expectations.iter().filter(|e| e.contradiction) {
        eprintln!("contradiction: {} expected {}, found {}", e.property, e.expected, e.found);
    }
    Ok(status)
}

#[derive(Serialize)]
struct PairJson {
    property: &'static str,
    outcome: &'static str,
}

#[derive(Serialize)]
struct MismatchJson {
    property: &'static str,
    expected: &'static str,
    found: &'static str,
}

impl From<&Mismatch> for MismatchJson {
    fn from(m: &Mismatch) -> Self {
        MismatchJson { property: m.property.name(), expected: m.expected.name(), found: m.found.name() }
    }
}

#[derive(Serialize)]
struct CrossJson {
    hard_mismatches: Vec<String>,
    soft_notes: Vec<String>,
}

#[derive(Serialize)]
struct EntryJson {
    name: &'static str,
    description: &'static str,
    operator: OperatorJson,
    expected: Vec<PairJson>,
    report: ReportJson,
    contradictions: Vec<MismatchJson>,
    warnings: Vec<MismatchJson>,
    inconsistencies: Vec<String>,
    cross_validation: CrossJson,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    notes: Vec<&'static str>,
}

#[derive(Serialize)]
struct CatalogJson {
    budget_scale: Num,
    budget: BudgetJson,
    entries: Vec<EntryJson>,
    contradictions: usize,
}

struct EntryRun {
    check: EntryCheck,
    hard: Vec<String>,
    soft: Vec<String>,
}

fn run_entry(e: &CatalogEntry, budget: &TruncationBudget) -> EntryRun {
    let check = verify_entry(e, budget);
    let x = cross_validate_report(&e.op, &check.report, budget, CROSS_STEPS);
    EntryRun { check, hard: x.hard_mismatches, soft: x.soft_notes }
}

pub fn catalog(entry: Option<&str>, scale: f64, out: Option<&Path>) -> Result<Status, CliError> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(CliError::Usage(format!("--budget-scale must be positive, got {scale}")));
    }
    let entries = match entry {
        Some(name) => vec![find_entry(name).ok_or_else(|| {
            let names: Vec<_> = catalog_entries().iter().map(|e| e.name).collect();
            CliError::Usage(format!("unknown catalog entry {name:?} (one of {})", names.join(", ")))
        })?],
        None => catalog_entries(),
    };
    let budget = TruncationBudget::default().scaled(scale);
    let runs = par_map(&entries, worker_count(), |e| run_entry(e, &budget));

    let mut rows = Vec::new();
    let mut total = 0;
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "{:<20} cont top  pb   cb   me   mont  contradictions", "entry");
    for (e, r) in entries.iter().zip(&runs) {
        let c = &r.check;
        total += c.contradictions.len() + c.inconsistencies.len() + r.hard.len();
        let cells: Vec<String> = Property::ALL
            .iter()
            .map(|&p| {
                let found = c.report.get(p).outcome;
                let want = e.expected(p).unwrap_or(Outcome::Inconclusive);
                let mark = if found.is_definite() && found != want { "!" } else { "" };
                format!("{:<4}", format!("{}{}", short(found), mark))
            })
            .collect();
        let _ = writeln!(stdout, "{:<20} {} {}", e.name, cells.join(" "), c.contradictions.len());
        rows.push(EntryJson {
            name: e.name,
            description: e.description,
            operator: (&e.op).into(),
            expected: e.expected.iter().map(|&(p, o)| PairJson { property: p.name(), outcome: o.name() }).collect(),
            report: (&c.report).into(),
            contradictions: c.contradictions.iter().map(MismatchJson::from).collect(),
            warnings: c.warnings.iter().map(MismatchJson::from).collect(),
            inconsistencies: c.inconsistencies.clone(),
            cross_validation: CrossJson { hard_mismatches: r.hard.clone(), soft_notes: r.soft.clone() },
            notes: e.notes.clone(),
        });
    }
    let _ = writeln!(stdout, "{} entries, {} contradictions", rows.len(), total);
    drop(stdout);
    let doc = CatalogJson { budget_scale: Num(scale), budget: (&budget).into(), entries: rows, contradictions: total };
    if let Some(path) = out {
        write_out(path, &json::to_string(&doc))?;
    }
    Ok(if total == 0 { Status::Ok } else { Status::Contradiction })
}

/// `e:R` for the basis vector `e_R`, or a comma list of `index:coef`.
pub fn parse_x0(spec: &str) -> Result<FiniteVector, CliError> {
    let bad = |why: String| CliError::Usage(format!("bad --x0 {spec:?}: {why}"));
    let spec = spec.trim();
    if let Some(r) = spec.strip_prefix("e:") {
        let r: usize = r.trim().parse().map_err(|_| bad("expected e:R with an integer R".into()))?;
        return Ok(shiftlab_core::basis_vector(r));
    }
    let mut coeffs = Vec::new();
    for item in spec.split(',') {
        let (i, c) = item.split_once(':').ok_or_else(|| bad(format!("{item:?} is not index:coef")))?;
        let i: usize = i.trim().parse().map_err(|_| bad(format!("bad index {i:?}")))?;
        let c: f64 = c.trim().parse().map_err(|_| bad(format!("bad coefficient {c:?}")))?;
        if !c.is_finite() {
            return Err(bad(format!("coefficient {c} is not finite")));
        }
        if coeffs.len() <= i {
            coeffs.resize(i + 1, 0.0);
        }
        coeffs[i] += c;
    }
    Ok(FiniteVector::new(coeffs))
}

pub fn trajectory_csv(t: &TrajectoryRecord) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "k", "cesaro_seminorm", "power_over_n_seminorm", "support_width"]).expect("in-memory write");
    for r in &t.rows {
        w.write_record([
            r.n.to_string(),
            r.k.to_string(),
            json::fmt_f64(r.cesaro),
            json::fmt_f64(r.power_over_n),
            r.support_width.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv writes UTF-8")
}

pub fn simulate(config: &Path, x0: &str, n_max: usize, out: Option<&Path>) -> Result<Status, CliError> {
    if n_max < 8 {
        return Err(CliError::Usage(format!("--n-max must be at least 8, got {n_max}")));
    }
    let cfg = RunConfig::load(config)?;
    let x = parse_x0(x0)?;
    if let Some(lim) = cfg.op.index_limit() {
        let need = x.support_len() + n_max + 1;
        if need > lim {
            return Err(CliError::Usage(format!("trajectory needs indices up to {need}, tables end at {lim}")));
        }
    }
    let ks: Vec<usize> = (0..cfg.budget.k_max).collect();
    let t = run_trajectory(&cfg.op, &x, &ks, n_max);
    let csv = trajectory_csv(&t);
    let classes = classify(&t, DEFAULT_TOL);
    let lines: Vec<String> =
        classes.iter().map(|(k, c)| format!("k={k} {} rate={}", c.class.name(), json::fmt_f64(c.rate))).collect();
    match out.map(Path::to_path_buf).or(cfg.csv_out) {
        Some(path) => {
            write_out(&path, &csv)?;
            for l in &lines {
                println!("{l}");
            }
        }
        None => {
            print!("{csv}");
            for l in &lines {
                eprintln!("{l}");
            }
        }
    }
    Ok(Status::Ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn x0_grammar() {
        assert_eq!(parse_x0("e:3").unwrap(), shiftlab_core::basis_vector(3));
        assert_eq!(parse_x0("0:1, 3:0.5,7:0.25").unwrap().coeffs(), &[1.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.25]);
        assert_eq!(parse_x0("2:1,2:1").unwrap().coeffs(), &[0.0, 0.0, 2.0]);
        for bad in ["e:x", "3", "a:1", "1:b", "", "1:inf"] {
            assert!(parse_x0(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn par_map_keeps_order() {
        let v: Vec<usize> = (0..37).collect();
        assert_eq!(par_map(&v, 4, |x| x * x), v.iter().map(|x| x * x).collect::<Vec<_>>());
        assert_eq!(par_map(&v[..0], 3, |x| *x), Vec::<usize>::new());
    }
}
