//! One PASS/FAIL line per acceptance criterion. Tolerances are fixed here;
//! a criterion that does not hold is reported and fails the test.

mod common;

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use proptest::test_runner::{TestCaseError, TestRunner};
use proptest::strategy::Strategy;

use common::*;
use maxsing::builder::{limit_point, FamilyAdapter, FamilySpec, Phi, RunStatus, SequenceTrace};
use maxsing::geometry::{dist_sq, primitive, rat, Rat, Subspace};
use maxsing::quadric::QuadraticForm;
use maxsing::verifier::{bruteforce_audit, check_conditions, exponent_report, spanning_check, DEFAULT_COST_LIMIT};

const PREC: u32 = 64;

struct Run {
    name: &'static str,
    trace: SequenceTrace,
    adapter: FamilyAdapter,
    elapsed: Duration,
}

fn gen(name: &'static str, adapter: FamilyAdapter, phi: Phi, steps: usize) -> Run {
    let t0 = Instant::now();
    let out = build(&adapter, phi, steps);
    Run { name, trace: out.trace, adapter, elapsed: t0.elapsed() }
}

fn status(t: &SequenceTrace) -> String {
    match &t.status {
        RunStatus::Complete => format!("{} of {} points", t.len(), t.steps_requested),
        RunStatus::BudgetExhausted { reason } | RunStatus::Failed { reason } => {
            format!("stopped at {} of {} points ({reason})", t.len(), t.steps_requested)
        }
    }
}

/// Conditions (a)-(d) and the step bound at every index, exact.
fn conditions_hold(t: &SequenceTrace) -> (bool, String) {
    let c = check_conditions(t).unwrap();
    let bound_all = c.indices.iter().filter(|a| a.index >= 2 && a.index < t.len()).all(|a| a.step_bound == Some(true));
    let ok = c.passed && bound_all;
    (ok, c.first_failure.unwrap_or_else(|| "conditions ok".into()))
}

fn witnesses_sound(run: &Run) -> bool {
    let map = run.adapter.map().unwrap();
    run.trace.entries.iter().all(|e| {
        e.witness
            .as_ref()
            .and_then(|w| map.evaluate_scaled(w).ok())
            .and_then(|p| primitive(&p).ok())
            .is_some_and(|p| p == e.point)
    })
}

fn line(results: &mut Vec<bool>, n: usize, ok: bool, detail: String) {
    println!("criterion {n}: {} : {detail}", if ok { "PASS" } else { "FAIL" });
    results.push(ok);
}

fn criterion_1(runs: &[Run]) -> (bool, String) {
    let r = &runs[0];
    let (cond, msg) = conditions_hold(&r.trace);
    let ok = r.trace.is_complete() && r.trace.len() == 12 && cond && r.elapsed < Duration::from_secs(60);
    (ok, format!("{}: {}, {msg}, {:.2?}", r.name, status(&r.trace), r.elapsed))
}

fn criterion_2(runs: &[Run]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for r in &runs[1..3] {
        let (cond, msg) = conditions_hold(&r.trace);
        let sound = witnesses_sound(r);
        ok &= r.trace.is_complete() && r.trace.len() == 8 && cond && sound;
        parts.push(format!("{}: {}, {msg}, witnesses sound {sound}", r.name, status(&r.trace)));
    }
    (ok, parts.join("; "))
}

fn criterion_3(runs: &[Run]) -> (bool, String) {
    let r = &runs[0];
    let t0 = Instant::now();
    let bf = bruteforce_audit(&r.trace, 25, PREC, DEFAULT_COST_LIMIT).unwrap();
    let elapsed = t0.elapsed();
    let worst = bf.domination.iter().max_by(|a, b| (&a.d_hi / &a.phi_hi).cmp(&(&b.d_hi / &b.phi_hi))).unwrap();
    let ok = bf.passed && !bf.domination.is_empty() && elapsed < Duration::from_secs(600);
    let detail = format!(
        "{} ({} points), X in [{}, 25], {} candidates, tightest X = {} with d_hi/phi_hi = {:.4}, {:.2?}",
        r.name,
        r.trace.len(),
        bf.domination[0].x,
        bf.profile.candidates,
        worst.x,
        maxsing::geometry::rat_to_f64(&(&worst.d_hi / &worst.phi_hi)),
        elapsed
    );
    (ok, detail)
}

fn criterion_4(runs: &[Run]) -> (bool, String) {
    let tol = Rat::new(BigInt::from(1), BigInt::from(1) << 64usize);
    let million = rat(1_000_000, 1);
    let mut checked = 0;
    let mut ok = true;
    let mut parts = Vec::new();
    for r in runs.iter().filter(|r| r.trace.phi == Phi::LogOverX && r.trace.len() >= 3) {
        let rep = exponent_report(&r.trace, PREC).unwrap();
        for rec in rep.records.iter().filter(|rec| rec.x_lo >= million) {
            let bound = rec.phi_exponent_hi.clone().unwrap();
            let good = rec.lambda_lb >= &bound - &tol && rec.lambda_lb >= rat(80, 100);
            ok &= good;
            checked += 1;
            parts.push(format!(
                "{} i={} lambda_lb {} vs bound {}",
                r.name,
                rec.index,
                maxsing::geometry::rat_to_decimal(&rec.lambda_lb, 6),
                maxsing::geometry::rat_to_decimal(&bound, 6)
            ));
        }
    }
    (ok && checked > 0, format!("{checked} records with X_i >= 1e6: {}", parts.join(", ")))
}

fn criterion_5(all: &[&SequenceTrace]) -> (bool, String) {
    let mut ok = true;
    let mut steps = 0;
    for t in all {
        let pts = t.points();
        for i in 1..pts.len().saturating_sub(1) {
            let prev = dist_sq(&pts[i], &pts[i - 1]).unwrap();
            let next = dist_sq(&pts[i + 1], &pts[i]).unwrap();
            ok &= next * rat(9, 1) <= prev;
            steps += 1;
        }
        if t.len() >= 3 {
            let lim = limit_point(t).unwrap();
            let n = t.len();
            ok &= lim.radius_sq == rat(9, 4) * dist_sq(&pts[n - 1], &pts[n - 2]).unwrap();
        }
    }
    (ok, format!("{} traces, {steps} telescoping steps, radius formula checked", all.len()))
}

fn criterion_6(runs: &[Run]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for r in &runs[..3] {
        let t = &r.trace;
        let last = t.steps_requested.saturating_sub(t.ambient_dim);
        let mut bad = Vec::new();
        for i0 in 2..=last {
            // an index past the end of a short trace has no tail to span
            let spans = i0 <= t.len() && spanning_check(t, i0).unwrap();
            if !spans {
                bad.push(i0);
            }
        }
        ok &= bad.is_empty();
        parts.push(format!("{}: i0 in 2..={last}, failing {bad:?}", r.name));
    }
    (ok, parts.join("; "))
}

fn criterion_7() -> (bool, String) {
    let form = QuadraticForm::split4();
    let alphas = [v(&[1, 0, 0, 0]), v(&[0, 0, 1, 0]), v(&[1, -1, 1, 1])];
    // {x1 = 0} = e0⊥, {x3 = 0} = e2⊥, {-x0 + x1 + x2 + x3 = 0} = (1,-1,1,1)⊥
    let hs = [v(&[0, 1, 0, 0]), v(&[0, 0, 0, 1]), v(&[-1, 1, 1, 1])].map(|f| Subspace::kernel(&f).unwrap());
    // α ∉ H gives 0; α ∈ H = α⊥ gives 2; α ∈ H ≠ α⊥ gives 1
    let expected = [[2u8, 1, 0], [1, 2, 0], [0, 0, 2]];
    let mut got = [[0u8; 3]; 3];
    for (i, a) in alphas.iter().enumerate() {
        let p = primitive(a).unwrap();
        for (j, h) in hs.iter().enumerate() {
            got[i][j] = form.s_h(h, &p).unwrap();
        }
    }
    (got == expected, format!("matrix {got:?}, expected {expected:?}"))
}

fn suite<S: Strategy>(seed: u64, s: S, f: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let mut runner = TestRunner::new(fixed(CASES, seed));
    runner.run(&s, f).map_err(|e| e.to_string())
}

fn criterion_8() -> (bool, String) {
    let results = [
        ("dist_sq scale invariance", suite(0x0d15, dist_scale_strategy(), dist_scale_property)),
        ("multilinearity", suite(0x3117, multilinear_strategy(), multilinear_property)),
        ("witness soundness", suite(0x5eed, witness_strategy(), witness_property)),
        ("interval refinement", suite(0x7ef1, refinement_strategy(), refinement_property)),
        ("D(λx) = λD(x)", suite(0x9f17, primitive_filter_strategy(), primitive_filter_property)),
    ];
    let ok = results.iter().all(|(_, r)| r.is_ok());
    let detail = results
        .iter()
        .map(|(n, r)| match r {
            Ok(()) => format!("{n} ok"),
            Err(e) => format!("{n} FAILED ({e})"),
        })
        .collect::<Vec<_>>()
        .join(", ");
    (ok, format!("{CASES} cases each: {detail}"))
}

#[test]
fn acceptance() {
    let runs = vec![
        gen("split4 log3x", FamilyAdapter::split4(), log3x(), 12),
        gen("G(2,4) log3x", adapter(FamilySpec::Grassmann { n: 4, k: 2 }), log3x(), 8),
        gen("prodforms(2,3) log3x", adapter(FamilySpec::Prodforms { n: 2, k: 3 }), log3x(), 8),
    ];
    // power-law runs: not part of the criteria runs, audited alongside for criterion 5
    let extra = vec![
        gen("split4 pow 1/3", FamilyAdapter::split4(), pow(1, 3), 12),
        gen("G(2,4) pow 1/3", adapter(FamilySpec::Grassmann { n: 4, k: 2 }), pow(1, 3), 8),
        gen("prodforms(2,3) pow 1/3", adapter(FamilySpec::Prodforms { n: 2, k: 3 }), pow(1, 3), 8),
    ];
    for r in &extra {
        let (cond, msg) = conditions_hold(&r.trace);
        println!("info: {}: {}, audit {}, {msg}", r.name, status(&r.trace), if cond { "ok" } else { "failed" });
    }

    let mut results = Vec::new();
    let (ok, d) = criterion_1(&runs);
    line(&mut results, 1, ok, d);
    let (ok, d) = criterion_2(&runs);
    line(&mut results, 2, ok, d);
    let (ok, d) = criterion_3(&runs);
    line(&mut results, 3, ok, d);
    let (ok, d) = criterion_4(&runs);
    line(&mut results, 4, ok, d);
    let all: Vec<&SequenceTrace> = runs.iter().chain(&extra).map(|r| &r.trace).collect();
    let (ok, d) = criterion_5(&all);
    line(&mut results, 5, ok, d);
    let (ok, d) = criterion_6(&runs);
    line(&mut results, 6, ok, d);
    let (ok, d) = criterion_7();
    line(&mut results, 7, ok, d);
    let (ok, d) = criterion_8();
    line(&mut results, 8, ok, d);

    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "criteria not met: {failed:?}");
}
