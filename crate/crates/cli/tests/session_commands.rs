use std::f64::consts::FRAC_PI_4;

use proptest::prelude::*;
use vcalc_cli::{
    export_json, repl_eval_line, run_lines, Kind, Num, OutputRecord, Seen, SessionState,
};
use vcalc_core::context::Context;

fn run(lines: &[&str]) -> Vec<OutputRecord> {
    let mut state = SessionState::default();
    let mut out = Vec::new();
    run_lines(&mut state, lines.iter().copied(), &mut |r, _| {
        out.push(r.clone())
    });
    out
}

fn last(lines: &[&str]) -> OutputRecord {
    run(lines).pop().expect("a record")
}

#[test]
fn reduced_integral_of_the_spike_is_a_quarter_pi() {
    let rec = last(&["let psi(ξ) = ∞/(1+∞^2*ξ^2)", "reduce int psi from 0 to ∂"]);
    assert_eq!(rec.kind, Kind::Value);
    let v = rec.payload.value.unwrap().0;
    assert!((v - FRAC_PI_4).abs() <= 1e-12, "{v}");
    let json = export_json(&rec);
    assert!(json.contains("\"value\":7.85398163397448"), "{json}");
}

#[test]
fn square_root_of_delta_is_near_zero() {
    let rec = last(&["near sqrt(∂) 0"]);
    assert_eq!(rec.kind, Kind::Verdict);
    assert_eq!(rec.payload.outcome.as_deref(), Some("holds"));
    assert!(rec.payload.mode.is_some());
    let json: serde_json::Value = serde_json::from_str(&export_json(&rec)).unwrap();
    assert_eq!(json["kind"], "verdict");
    assert_eq!(json["payload"]["outcome"], "holds");
}

#[test]
fn infinity_is_not_reducible() {
    let rec = last(&["reduce ∞"]);
    assert_eq!(rec.kind, Kind::Error);
    assert_eq!(
        rec.payload.message.as_deref(),
        Some("not reducible: diverges to +∞")
    );
}

#[test]
fn built_ins_cannot_be_rebound() {
    for line in [
        "let ∞ = 2",
        "let ∂ = 1",
        "let π = 3",
        "let pi = 3",
        "let sin(ξ) = ξ",
        "let from = 1",
    ] {
        let rec = last(&[line]);
        assert_eq!(rec.kind, Kind::Error, "{line}");
        assert!(rec.payload.message.unwrap().contains("built in"), "{line}");
    }
}

#[test]
fn input_errors_never_end_the_session() {
    let recs = run(&[
        "1 +",
        "int psi from 0",
        "bogus(∂)",
        "let x = 2",
        "x * ∞ / ∞",
    ]);
    assert_eq!(recs.len(), 5);
    assert!(recs[..3]
        .iter()
        .all(|r| r.kind == Kind::Error && !r.payload.message.as_deref().unwrap().is_empty()));
    assert_eq!(recs[4].payload.value, Some(Num(2.0)));
}

#[test]
fn names_substitute_into_expressions() {
    let recs = run(&[
        "let a = 1 + ∂",
        "let f(x) = x^2",
        "let s(k) = k / ∞",
        "eq f(a) - 1, 2*∂ + ∂^2",
        "eq s(∞), 1",
        "let g = diff f",
        "eq g(3), 6",
    ]);
    for r in &recs[3..] {
        if r.kind == Kind::Verdict {
            assert_eq!(r.payload.outcome.as_deref(), Some("holds"), "{}", r.input);
        } else {
            assert_eq!(r.kind, Kind::Definition, "{r}");
        }
    }
}

#[test]
fn evidence_holds_the_values_actually_computed() {
    let rec = last(&["reduce (∞ + 1) / (2*∞ + 3) + sin(∞) / ∞^3"]);
    assert!(!rec.evidence.is_empty());
    for ev in &rec.evidence {
        let n = ev.index as f64;
        let want = (n + 1.0) / (2.0 * n + 3.0) + n.sin() / n.powi(3);
        match &ev.seen {
            Some(Seen::Value(Num(x))) => {
                assert!((x - want).abs() <= 1e-15, "{}: {x} vs {want}", ev.index)
            }
            other => panic!("index {}: {other:?}", ev.index),
        }
    }
}

#[test]
fn checks_are_tallied() {
    let mut state = SessionState::default();
    let mut recs = Vec::new();
    let lines = [
        "check 1 + 1 => 2",
        "check near ∂, 0 => fails",
        "check reduce ∞ => error",
    ];
    run_lines(&mut state, lines, &mut |r, _| recs.push(r.clone()));
    assert_eq!(recs[0].kind, Kind::Value);
    assert_eq!(recs[1].kind, Kind::Error);
    assert!(recs[1]
        .payload
        .message
        .as_deref()
        .unwrap()
        .starts_with("check failed"));
    assert!(recs[2].payload.check.as_ref().unwrap().passed);
    let summary = state.summary().unwrap();
    assert_eq!(summary.kind, Kind::Summary);
    assert_eq!(
        summary.payload.message.as_deref(),
        Some("1 of 3 checks failed")
    );
}

#[test]
fn config_changes_reach_the_snapshot() {
    let recs = run(&[
        ":config schedule 4,3,8",
        ":config tol 1e-6",
        ":config quad-tol 1e-9",
        "∂",
        ":config tol -1",
    ]);
    let snap = &recs[3];
    assert_eq!(
        (
            snap.schedule.start,
            snap.schedule.growth,
            snap.schedule.stages
        ),
        (4, Num(3.0), 8)
    );
    assert_eq!(snap.tolerances.tol, Num(1e-6));
    assert_eq!(snap.tolerances.quad_abs, Num(1e-9));
    assert_eq!(recs[4].kind, Kind::Error);
}

#[test]
fn quit_stops_the_run() {
    let recs = run(&["1", ":quit", "2"]);
    assert_eq!(recs.len(), 1);
}

#[test]
fn state_threads_through_line_evaluation() {
    let state = SessionState::new(Context::default());
    let (state, rec) = repl_eval_line(state, "let y = ∞");
    assert_eq!(rec.unwrap().kind, Kind::Definition);
    let (_, rec) = repl_eval_line(state, "cmp y, 1000");
    assert_eq!(rec.unwrap().payload.outcome.as_deref(), Some("greater"));
    let (_, rec) = repl_eval_line(SessionState::default(), "   # only a comment");
    assert!(rec.is_none());
}

#[test]
fn every_record_round_trips_through_json() {
    let src = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../scripts/examples.vc"
    ))
    .unwrap();
    let mut state = SessionState::default();
    let mut recs = Vec::new();
    run_lines(&mut state, src.lines(), &mut |r, _| recs.push(r.clone()));
    recs.push(state.summary().unwrap());
    for rec in recs {
        let json = export_json(&rec);
        assert!(!json.contains('\n'));
        let back: OutputRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rec);
        let fields: serde_json::Value = serde_json::from_str(&json).unwrap();
        for key in [
            "input",
            "kind",
            "payload",
            "evidence",
            "schedule",
            "tolerances",
        ] {
            assert!(fields.get(key).is_some(), "{key} missing in {json}");
        }
    }
}

proptest! {
    #[test]
    fn numbers_round_trip_exactly(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        let text = serde_json::to_string(&Num(x)).unwrap();
        let mantissa = text.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
        prop_assert_eq!(mantissa.len(), 17);
        let back: Num = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.0.to_bits(), x.to_bits());
    }
}
