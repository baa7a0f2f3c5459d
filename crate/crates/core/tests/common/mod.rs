//! Helpers shared by the integration tests.
#![allow(dead_code)]

use proptest::prelude::*;
use rand::Rng;
use vcalc_core::context::Context;
use vcalc_core::decision::{Observation, Predicate};
use vcalc_core::expr::{self, parse, simplify, Bindings, Expr, UnaryOp, Value};
use vcalc_core::vfunc::VirtualFunction;
use vcalc_core::vnum::{self, VirtualNumber};

pub fn ctx() -> Context {
    Context::default()
}

/// A virtual number from source, simplified.
pub fn num(src: &str) -> VirtualNumber {
    VirtualNumber::from_expr_unchecked(simplify(&parse(src).unwrap())).unwrap()
}

pub fn func(src: &str) -> VirtualFunction {
    VirtualFunction::from_expr(parse(src).unwrap()).unwrap()
}

/// Direct evaluation of an unsimplified expression, used as an oracle.
pub fn oracle(src: &str, n: u64, x: f64) -> Option<f64> {
    let e = parse(src).unwrap();
    expr::evaluate_at(&e, &Bindings::at_index(n).with_arg(x))
        .ok()?
        .as_f64()
}

/// `|a − b| ≤ rel·scale + floor`, with `scale = max(|a|, |b|, extra)`.
pub fn close(a: f64, b: f64, rel: f64, extra: f64, floor: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(extra) + floor
}

/// A finite real, or `None` for undefined, overflowed or unusable values.
pub fn finite(v: Value) -> Option<f64> {
    v.as_f64().filter(|x| x.is_finite())
}

const LEAVES: [&str; 7] = ["ξ", "ξ", "ξ", "∞", "∂", "2", "0.5"];

/// A random total expression over `ξ` and `∞` of bounded depth. Quotients
/// take the form `a / (1 + b²)` so that members have no poles.
pub fn random_expr(rng: &mut impl Rng, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return parse(LEAVES[rng.gen_range(0..LEAVES.len())]).unwrap();
    }
    let sub = |rng: &mut _| random_expr(rng, depth - 1);
    match rng.gen_range(0..9) {
        0 => Expr::add(sub(rng), sub(rng)),
        1 => Expr::sub(sub(rng), sub(rng)),
        2 => Expr::mul(sub(rng), sub(rng)),
        3 => {
            let den = Expr::add(Expr::num(1.0), Expr::pow(sub(rng), Expr::num(2.0)));
            Expr::div(sub(rng), den)
        }
        4 => Expr::pow(sub(rng), Expr::num(rng.gen_range(2..4) as f64)),
        5 => Expr::unary(UnaryOp::Sin, sub(rng)),
        6 => Expr::unary(UnaryOp::Cos, sub(rng)),
        7 => Expr::unary(UnaryOp::Arctan, sub(rng)),
        _ => Expr::unary(UnaryOp::Exp, Expr::unary(UnaryOp::Sin, sub(rng))),
    }
}

/// Proptest strategy for the same expression shapes as [`random_expr`].
pub fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop::sample::select(LEAVES.to_vec()).prop_map(|s| parse(s).unwrap());
    leaf.prop_recursive(3, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| {
                Expr::div(a, Expr::add(Expr::num(1.0), Expr::pow(b, Expr::num(2.0))))
            }),
            (inner.clone(), 2u32..4).prop_map(|(a, k)| Expr::pow(a, Expr::num(k as f64))),
            inner.clone().prop_map(|a| Expr::unary(UnaryOp::Sin, a)),
            inner.clone().prop_map(|a| Expr::unary(UnaryOp::Cos, a)),
            inner.clone().prop_map(|a| Expr::unary(UnaryOp::Arctan, a)),
            inner.prop_map(|a| Expr::unary(UnaryOp::Exp, Expr::unary(UnaryOp::Sin, a))),
        ]
    })
}

/// A named predicate on the index.
pub struct Relation {
    pub name: &'static str,
    pub pred: Predicate<'static>,
}

fn index_relation(name: &'static str, f: impl Fn(u64) -> bool + Sync + Send + 'static) -> Relation {
    Relation {
        name,
        pred: Predicate::new(move |n| Observation::from_bool(f(n))),
    }
}

/// `a < b` index-wise between two number sources.
fn less(name: &'static str, a: &str, b: &str) -> Relation {
    let (a, b) = (num(a), num(b));
    Relation {
        name,
        pred: Predicate::new(
            move |n| match (a.value_at(n).as_f64(), b.value_at(n).as_f64()) {
                (Some(x), Some(y)) => Observation::from_bool(x < y),
                _ => Observation::Undefined,
            },
        ),
    }
}

/// Index-wise agreement of two number sources.
fn agree(name: &'static str, a: VirtualNumber, b: VirtualNumber) -> Relation {
    Relation {
        name,
        pred: Predicate::new(move |n| match (a.f64_at(n), b.f64_at(n)) {
            (Some(x), Some(y)) => Observation::from_bool(x == y),
            _ => Observation::Undefined,
        }),
    }
}

/// Relations whose eventual truth the decision engine is asked about.
pub fn relation_corpus() -> Vec<Relation> {
    vec![
        index_relation("n > 5", |n| n > 5),
        index_relation("n < 100", |n| n < 100),
        index_relation("n > 20000", |n| n > 20000),
        index_relation("n is even", |n| n % 2 == 0),
        index_relation("n is not a multiple of 3", |n| n % 3 != 0),
        index_relation("sin n > 0", |n| (n as f64).sin() > 0.0),
        index_relation("ln n > 9", |n| (n as f64).ln() > 9.0),
        index_relation("n² > 1000 n", |n| n * n > 1000 * n),
        index_relation("1/n < 1e-3", |n| 1.0 / (n as f64) < 1e-3),
        index_relation("1/n > 1e-3", |n| 1.0 / (n as f64) > 1e-3),
        Relation {
            name: "periodic all true",
            pred: Predicate::periodic(vec![Observation::True]),
        },
        Relation {
            name: "periodic true, false",
            pred: Predicate::periodic(vec![Observation::True, Observation::False]),
        },
        less("∂ < 0.001", "∂", "0.001"),
        less("e^(-∞²) < ∂", "e^(-∞^2)", "∂"),
        less("sqrt(∂) < 0.01", "sqrt(∂)", "0.01"),
        less("∞ < 1000000", "∞", "1000000"),
        less("(-1)^∞ < 0", "(-1)^∞", "0"),
        less("1 - ∂ < 1", "1 - ∂", "1"),
        agree(
            "periodic[1, 2] = 1",
            VirtualNumber::periodic(vec![1.0, 2.0]).unwrap(),
            VirtualNumber::lift(1.0),
        ),
        agree(
            "(1 + ∂)² = 1 + 2∂ + ∂²",
            num("(1 + ∂)^2"),
            vnum::add(&num("1 + 2 * ∂"), &num("∂^2")),
        ),
    ]
}
