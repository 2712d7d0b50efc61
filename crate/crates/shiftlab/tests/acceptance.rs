//! Acceptance criteria, one test each. Every test writes a single
//! `PASS`/`FAIL` line to stderr (unbuffered, so it shows without
//! `--nocapture`). Heavy criteria run one at a time so that their wall-clock
//! limits are measured without contention.

use std::io::Write;
use std::process::Command;
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use shiftlab_core::catalog::find_entry;
use shiftlab_core::checks::{
    cesaro_bound_ln, check_cesaro_bounded, check_continuity, check_continuity_power_series, full_report, CesaroQuantity,
    Outcome, Property, TruncationBudget,
};
use shiftlab_core::simulator::forward_limit_sequence;
use shiftlab_core::space::ln_seminorm;
use shiftlab_core::{
    make_power_series_space, ExponentSequence, FiniteVector, PNorm, SeriesType, ShiftKind, ShiftOperator, WeightFamily,
    WeightSequence,
};

fn serial() -> MutexGuard<'static, ()> {
    static LOCK: Mutex<()> = Mutex::new(());
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(id: u32, ok: bool, detail: &str) {
    let line = format!("criterion {id}: {} {detail}\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(ok, "criterion {id} failed: {detail}");
}

fn catalog_run(threads: &str) -> (Vec<u8>, Duration, i32) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("catalog.json");
    let t = Instant::now();
    let o = Command::new(env!("CARGO_BIN_EXE_shiftlab"))
        .args(["catalog", "--out", out.to_str().unwrap()])
        .env("SHIFTLAB_THREADS", threads)
        .output()
        .expect("spawn shiftlab");
    let dt = t.elapsed();
    (std::fs::read(&out).unwrap_or_default(), dt, o.status.code().unwrap_or(-1))
}

/// The default catalog, run once per test binary.
fn catalog() -> &'static (Vec<u8>, Duration, i32) {
    static RUN: OnceLock<(Vec<u8>, Duration, i32)> = OnceLock::new();
    RUN.get_or_init(|| {
        let _g = serial();
        catalog_run("1")
    })
}

fn catalog_json() -> Value {
    serde_json::from_slice(&catalog().0).expect("catalog JSON")
}

fn entry<'a>(doc: &'a Value, name: &str) -> &'a Value {
    doc["entries"].as_array().unwrap().iter().find(|e| e["name"] == name).unwrap()
}

fn outcome<'a>(e: &'a Value, property: &str) -> &'a str {
    let v = e["report"]["verdicts"].as_array().unwrap().iter().find(|v| v["property"] == property).unwrap();
    v["outcome"].as_str().unwrap()
}

fn random_op(rng: &mut ChaCha8Rng, families: &[&str], alphas: &[ExponentSequence]) -> ShiftOperator {
    let kind = if rng.gen() { ShiftKind::Backward } else { ShiftKind::Forward };
    let w = match families[rng.gen_range(0..families.len())] {
        "constant" => WeightFamily::Constant(rng.gen_range(-2.0..2.0)),
        "polynomial" => WeightFamily::Polynomial { theta: rng.gen_range(0.0..2.0) },
        "sqrt" => WeightFamily::Sqrt,
        "sqrt-shifted" => WeightFamily::SqrtShifted,
        "reciprocal-factorial" => WeightFamily::ReciprocalFactorial,
        "exp-alpha" => WeightFamily::ExpAlpha { gamma: rng.gen_range(-1.0..1.0), alpha: ExponentSequence::Logarithmic },
        other => unreachable!("{other}"),
    };
    let ty = if rng.gen() { SeriesType::Infinite } else { SeriesType::Finite };
    let alpha = alphas[rng.gen_range(0..alphas.len())].clone();
    let p = [PNorm::Finite(1.0), PNorm::Finite(2.0), PNorm::Infinity][rng.gen_range(0..3)];
    ShiftOperator::new(kind, WeightSequence::new(w), make_power_series_space(alpha, ty, p).unwrap())
}

fn random_vector(rng: &mut ChaCha8Rng) -> FiniteVector {
    let len = rng.gen_range(1..=8);
    let mut c: Vec<f64> = (0..len).map(|_| if rng.gen_bool(0.8) { rng.gen_range(-4.0..4.0) } else { 0.0 }).collect();
    c[len - 1] = 1.0;
    FiniteVector::new(c)
}

const ORACLE_FAMILIES: [&str; 5] = ["constant", "polynomial", "sqrt", "sqrt-shifted", "reciprocal-factorial"];

/// Relative error of two log-scale values, `|e^{a-b} - 1|`; equal infinities agree.
fn ln_rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).exp_m1().abs()
    }
}

#[test]
fn criterion_1_closed_forms_match_the_oracle() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let alphas = [ExponentSequence::Linear, ExponentSequence::Logarithmic];
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let op = random_op(&mut rng, &ORACLE_FAMILIES, &alphas);
        let x = random_vector(&mut rng);
        let m = rng.gen_range(1..=50);
        let n = rng.gen_range(1..=50);
        let k = rng.gen_range(0..=6);
        let it = ln_rel(op.ln_iterate_seminorm(&x, m, k), ln_seminorm(&op.iterate(&x, m), k, &op.space));
        let ce = ln_rel(op.ln_cesaro_seminorm(&x, n, k), ln_seminorm(&op.cesaro_mean(&x, n), k, &op.space));
        worst = worst.max(it).max(ce);
    }
    let dt = t.elapsed();
    let ok = worst <= 1e-10 && dt < Duration::from_secs(10);
    report(1, ok, &format!("500 cases, worst relative error {worst:.3e} (limit 1e-10), {:.2} s (limit 10 s)", dt.as_secs_f64()));
}

#[test]
fn criterion_2_cesaro_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let alphas = [ExponentSequence::Linear, ExponentSequence::Logarithmic];
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let op = random_op(&mut rng, &ORACLE_FAMILIES, &alphas);
        let x = random_vector(&mut rng);
        let n = rng.gen_range(2..=50);
        let lhs = op.iterate(&x, n);
        let now = op.cesaro_mean(&x, n);
        let before = op.cesaro_mean(&x, n - 1);
        let c = (n - 1) as f64 / n as f64;
        let len = lhs.support_len().max(now.support_len()).max(before.support_len());
        for j in 0..len {
            let (a, b, p) = (lhs.get(j) / n as f64, now.get(j), c * before.get(j));
            let scale = a.abs().max(b.abs()).max(p.abs());
            if scale > 0.0 {
                worst = worst.max((a - (b - p)).abs() / scale);
            }
        }
    }
    report(2, worst <= 1e-12, &format!("200 cases, worst coordinate error {worst:.3e} relative to the largest term (limit 1e-12)"));
}

#[test]
fn criterion_3_catalog_verdict_table() {
    let (_, dt, code) = catalog();
    let doc = catalog_json();
    let mut bad = Vec::new();
    let mut want = |name: &str, property: &str, ok: &dyn Fn(&str) -> bool, what: &str| {
        let found = outcome(entry(&doc, name), property);
        if !ok(found) {
            bad.push(format!("{name} {property} = {found}, want {what}"));
        }
    };
    let holds = |o: &str| o == "Holds";
    let fails = |o: &str| o == "Fails";
    let not_holds = |o: &str| o != "Holds";
    for name in ["delta0-infinite", "delta0-finite", "volterra-infinite", "volterra-finite"] {
        want(name, "power_boundedness", &holds, "Holds");
        want(name, "mean_ergodicity", &holds, "Holds");
    }
    for name in ["ddz-infinite", "ddz-finite"] {
        want(name, "topologizability", &holds, "Holds");
        want(name, "mean_ergodicity", &fails, "Fails");
        want(name, "power_boundedness", &not_holds, "not Holds");
    }
    for name in ["sqrt-backward-s", "sqrt-forward-s"] {
        want(name, "topologizability", &fails, "Fails");
    }
    let contradictions = doc["contradictions"].as_u64().unwrap();
    let ok = bad.is_empty() && contradictions == 0 && *code == 0 && *dt < Duration::from_secs(60);
    report(
        3,
        ok,
        &format!(
            "{contradictions} catalog contradictions, exit {code}, {:.1} s (limit 60 s); table mismatches: [{}]",
            dt.as_secs_f64(),
            bad.join("; ")
        ),
    );
}

#[test]
fn criterion_4_continuity_gates() {
    let _g = serial();
    let budget = TruncationBudget::default();
    let mut bad = Vec::new();
    for alpha in [ExponentSequence::Linear, ExponentSequence::Logarithmic] {
        for (gamma, ty, want) in [
            (2.0, SeriesType::Infinite, Outcome::Holds),
            (2.0, SeriesType::Finite, Outcome::Fails),
            (-1.0, SeriesType::Infinite, Outcome::Holds),
            (-1.0, SeriesType::Finite, Outcome::Holds),
        ] {
            let w = WeightFamily::ExpAlpha { gamma, alpha: alpha.clone() };
            let space = make_power_series_space(alpha.clone(), ty, PNorm::Finite(1.0)).unwrap();
            let op = ShiftOperator::new(ShiftKind::Backward, WeightSequence::new(w), space);
            let generic = check_continuity(&op, &budget).outcome;
            let fast = check_continuity_power_series(&op, &budget).unwrap().outcome;
            if generic != want || fast != want {
                bad.push(format!("exp({gamma} alpha) on {ty:?} alpha = {}: {generic} / {fast}", alpha.describe()));
            }
        }
    }
    let space = make_power_series_space(ExponentSequence::Logarithmic, SeriesType::Infinite, PNorm::Finite(1.0)).unwrap();
    let op = ShiftOperator::new(ShiftKind::Backward, WeightSequence::new(WeightFamily::SqrtShifted), space);
    let est = check_continuity_power_series(&op, &budget).unwrap().witness.unwrap().value;
    let ok = bad.is_empty() && (est - 0.5).abs() <= 0.02;
    report(4, ok, &format!("gate mismatches: [{}]; limsup estimate for sqrt(n+1) over ln(n+1): {est:.6} (want 0.5 +- 0.02)", bad.join("; ")));
}

#[test]
fn criterion_5_divergence_detection() {
    let _g = serial();
    let e = find_entry("ddz-infinite").unwrap();
    let budget = TruncationBudget::default();
    let op = e.op.with_capacity(budget.n_max + budget.m_max + 2);
    let mut best = (f64::NEG_INFINITY, 0, 0);
    for r in 1..=64 {
        for n in 1..=64 {
            let v = cesaro_bound_ln(&op, CesaroQuantity::PLAIN, 0, 0, r, n);
            if v > best.0 {
                best = (v, r, n);
            }
        }
    }
    let first = (1..=64).find(|&r| cesaro_bound_ln(&op, CesaroQuantity::PLAIN, 0, 0, r, r) > 1e6f64.ln());
    let v = check_cesaro_bounded(&e.op, &budget);
    let ok = best.0 > 1e6f64.ln() && v.outcome == Outcome::Fails && v.witness.is_some();
    report(
        5,
        ok,
        &format!(
            "max over r, n <= 64 at k = l = 0 is e^{:.1} (r = {}, n = {}), first r with value > 1e6: {:?}; checker {} with witness {:?}",
            best.0, best.1, best.2, first, v.outcome, v.witness
        ),
    );
}

#[test]
fn criterion_6_implication_consistency() {
    let doc = catalog_json();
    let mut bad = Vec::new();
    let consistent = |pb: &str, top: &str, me: &str, cb: &str| !(pb == "Holds" && top == "Fails") && !(me == "Holds" && cb == "Fails");
    for e in doc["entries"].as_array().unwrap() {
        let o = |p| outcome(e, p);
        if !consistent(o("power_boundedness"), o("topologizability"), o("mean_ergodicity"), o("cesaro_boundedness")) {
            bad.push(e["name"].as_str().unwrap().to_owned());
        }
    }
    let _g = serial();
    let budget = TruncationBudget { n_max: 256, m_max: 32, k_max: 4, l_max: 12, max_escalations: 2, ..TruncationBudget::default() };
    let families = ["constant", "polynomial", "sqrt", "sqrt-shifted", "reciprocal-factorial", "exp-alpha"];
    let alphas = [ExponentSequence::Linear, ExponentSequence::Logarithmic, ExponentSequence::Power { theta: 0.5 }];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..50 {
        let op = random_op(&mut rng, &families, &alphas);
        let r = full_report(&op, &budget);
        let o = |p| r.get(p).outcome.name();
        let ok = consistent(
            o(Property::PowerBoundedness),
            o(Property::Topologizability),
            o(Property::MeanErgodicity),
            o(Property::CesaroBoundedness),
        );
        if !ok {
            bad.push(format!("random #{i}: {op:?}"));
        }
    }
    report(6, bad.is_empty(), &format!("8 catalog entries and 50 random operators, violations: [{}]", bad.join("; ")));
}

#[test]
fn criterion_7_simulator_cross_validation() {
    let doc = catalog_json();
    let mut hard = Vec::new();
    for e in doc["entries"].as_array().unwrap() {
        for m in e["cross_validation"]["hard_mismatches"].as_array().unwrap() {
            hard.push(format!("{}: {}", e["name"].as_str().unwrap(), m.as_str().unwrap()));
        }
    }
    let mut worst: f64 = 0.0;
    for name in ["volterra-infinite", "volterra-finite"] {
        let e = find_entry(name).unwrap();
        for r in 0..=5 {
            for k in 0..=3 {
                worst = worst.max(forward_limit_sequence(&e.op, r, k, 200)[199]);
            }
        }
    }
    let ok = hard.is_empty() && worst < 1e-8;
    report(7, ok, &format!("hard mismatches: [{}]; largest Volterra limit term at n = 200: {worst:.3e} (limit 1e-8)", hard.join("; ")));
}

#[test]
fn criterion_8_catalog_is_deterministic() {
    let first = &catalog().0;
    let (second, _, _) = {
        let _g = serial();
        catalog_run("3")
    };
    let ok = !first.is_empty() && *first == second;
    report(8, ok, &format!("two catalog runs (1 and 3 workers), {} and {} bytes, identical: {}", first.len(), second.len(), *first == second));
}
