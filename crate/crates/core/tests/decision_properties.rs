mod common;

use common::{ctx, relation_corpus};
use proptest::prelude::*;
use vcalc_core::context::{Execution, SamplingSchedule};
use vcalc_core::decision::{
    brute_force_window, eventually, Mode, Observation, Outcome, Predicate, Verdict,
};

/// Checks a verdict against exhaustive observation of the index range.
fn confirm(name: &str, pred: &Predicate<'_>, v: &Verdict, schedule: &SamplingSchedule) {
    match v.outcome {
        Outcome::Holds => {
            let w = v.witness.expect("witness");
            let window = brute_force_window(pred, w, 4 * w).unwrap();
            let bad = window.iter().find(|(_, o)| !o.is_true());
            assert!(bad.is_none(), "{name}: Holds from {w} but {bad:?}");
        }
        Outcome::Fails if v.mode == Mode::Sampled => {
            let window = brute_force_window(pred, 1, 4 * schedule.max_index()).unwrap();
            for s in schedule.stage_starts() {
                assert!(
                    window.iter().any(|(n, o)| *n >= s && !o.is_true()),
                    "{name}: Fails but no violation past {s}"
                );
            }
        }
        _ => {}
    }
}

#[test]
fn corpus_verdicts_are_sound() {
    let c = ctx();
    for rel in relation_corpus() {
        let v = eventually(&rel.pred, &c.schedule, c.execution);
        confirm(rel.name, &rel.pred, &v, &c.schedule);
    }
}

#[test]
fn execution_modes_agree_on_the_corpus() {
    let c = ctx();
    for rel in relation_corpus() {
        let p = eventually(&rel.pred, &c.schedule, Execution::Parallel);
        let s = eventually(&rel.pred, &c.schedule, Execution::Sequential);
        assert_eq!(p, s, "{}", rel.name);
    }
}

#[test]
fn expected_outcomes() {
    let c = ctx();
    let outcome = |name: &str| {
        let rel = relation_corpus()
            .into_iter()
            .find(|r| r.name == name)
            .unwrap();
        eventually(&rel.pred, &c.schedule, c.execution).outcome
    };
    assert_eq!(outcome("n > 5"), Outcome::Holds);
    assert_eq!(outcome("n < 100"), Outcome::Fails);
    assert_eq!(outcome("sin n > 0"), Outcome::Unknown);
    assert_eq!(outcome("∂ < 0.001"), Outcome::Holds);
    assert_eq!(outcome("periodic true, false"), Outcome::Fails);
}

proptest! {
    #[test]
    fn threshold_predicates_are_sound(t in 1u64..40_000) {
        let c = ctx();
        let pred = Predicate::new(move |n| Observation::from_bool(n > t));
        let v = eventually(&pred, &c.schedule, c.execution);
        confirm("n > t", &pred, &v, &c.schedule);
        prop_assert_eq!(v.outcome == Outcome::Holds, t < c.schedule.stage_starts()[10]);
    }

    #[test]
    fn modular_predicates_are_sound(m in 2u64..12, r in 0u64..12) {
        let c = ctx();
        let pred = Predicate::new(move |n| Observation::from_bool(n % m != r % m));
        let v = eventually(&pred, &c.schedule, c.execution);
        prop_assert_ne!(v.outcome, Outcome::Holds);
        confirm("n mod m", &pred, &v, &c.schedule);
    }

    #[test]
    fn periodic_patterns_are_exact(cycle in prop::collection::vec(any::<bool>(), 1..8)) {
        let c = ctx();
        let obs: Vec<Observation> = cycle.iter().map(|b| Observation::from_bool(*b)).collect();
        let v = eventually(&Predicate::periodic(obs), &c.schedule, c.execution);
        prop_assert_eq!(v.mode, Mode::Symbolic);
        prop_assert_eq!(v.outcome == Outcome::Holds, cycle.iter().all(|b| *b));
        prop_assert_eq!(v.outcome == Outcome::Fails, !cycle.iter().all(|b| *b));
    }
}
