mod common;

use common::{arb_expr, close, ctx, finite, func};
use proptest::prelude::*;
use vcalc_core::corpus;
use vcalc_core::expr::BinaryOp;
use vcalc_core::vfunc::{
    compose, defined_at, derivative, evaluate, function_equal, invert, is_continuous, pointwise,
    VirtualFunction,
};
use vcalc_core::vnum::VirtualNumber;

/// `lhs` and `rhs` agree at `(n, x)` wherever both are finite and moderate.
fn agree_at(
    lhs: &VirtualFunction,
    rhs: &VirtualFunction,
    scale: f64,
    n: u64,
    x: f64,
) -> Result<(), String> {
    let (Some(l), Some(r)) = (
        finite(lhs.member_value(n, x)),
        finite(rhs.member_value(n, x)),
    ) else {
        return Ok(());
    };
    if l.abs().max(r.abs()) > 1e12 || close(l, r, 1e-6, scale, 1e-12) {
        Ok(())
    } else {
        Err(format!("{lhs} vs {rhs} at ({n}, {x}): {l} vs {r}"))
    }
}

fn family(e: vcalc_core::expr::Expr) -> VirtualFunction {
    VirtualFunction::from_expr(e).unwrap()
}

fn at(f: &VirtualFunction, n: u64, x: f64) -> f64 {
    finite(f.member_value(n, x)).unwrap_or(0.0)
}

#[test]
fn elementary_compositions_are_continuous() {
    let c = ctx();
    let parts = ["sin(ξ)", "e^ξ", "ξ^2 + 1", "arctan(∞ * ξ)", corpus::PSI];
    for a in parts {
        for b in parts {
            let (f, g) = (func(a), func(b));
            assert!(is_continuous(&compose(&f, &g), &c).holds(), "{a} ∘ {b}");
            assert!(
                is_continuous(&pointwise(BinaryOp::Add, &f, &g), &c).holds(),
                "{a} + {b}"
            );
            assert!(
                is_continuous(&pointwise(BinaryOp::Mul, &f, &g), &c).holds(),
                "{a} · {b}"
            );
        }
    }
}

#[test]
fn inverse_undoes_the_function() {
    let c = ctx();
    let f = func("ξ^3 + ∂ * ξ");
    let inv = invert(
        &f,
        &VirtualNumber::lift(-2.0),
        &VirtualNumber::lift(2.0),
        &c,
    )
    .unwrap();
    let round = compose(&inv, &f);
    for n in [1u64, 10, 1000] {
        for x in [-1.5, -0.2, 0.0, 0.7, 1.9] {
            let y = round.member_value(n, x).as_f64().unwrap();
            assert!((y - x).abs() < 1e-9, "{n}, {x}: {y}");
        }
    }
    assert!(invert(
        &func("ξ^2"),
        &VirtualNumber::lift(-1.0),
        &VirtualNumber::lift(1.0),
        &c
    )
    .is_err());
}

#[test]
fn interleaving_with_empty_slots_is_empty() {
    let c = ctx();
    let id = VirtualFunction::identity();
    let mixed = VirtualFunction::interleaved(vec![id.clone(), VirtualFunction::empty()]).unwrap();
    assert!(mixed.is_empty());
    assert!(function_equal(&mixed, &VirtualFunction::empty(), &c).holds());
    let both = VirtualFunction::interleaved(vec![id.clone(), func("ξ")]).unwrap();
    assert!(function_equal(&both, &id, &c).holds());
}

fn corpus_family() -> impl Strategy<Value = VirtualFunction> {
    prop_oneof![
        Just(corpus::phi()),
        Just(corpus::psi()),
        Just(corpus::chi()),
        Just(corpus::kappa()),
        Just(corpus::power()),
        arb_expr().prop_map(family),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn sum_rule(f in arb_expr(), g in arb_expr(), n in 1u64..9, x in -1.5f64..1.5) {
        let (f, g) = (family(f), family(g));
        let (df, dg) = (derivative(&f), derivative(&g));
        let lhs = derivative(&pointwise(BinaryOp::Add, &f, &g));
        let rhs = pointwise(BinaryOp::Add, &df, &dg);
        let scale = at(&df, n, x).abs() + at(&dg, n, x).abs();
        prop_assert!(agree_at(&lhs, &rhs, scale, n, x).is_ok(), "{:?}", agree_at(&lhs, &rhs, scale, n, x));
    }

    #[test]
    fn product_rule(f in arb_expr(), g in arb_expr(), n in 1u64..9, x in -1.5f64..1.5) {
        let (f, g) = (family(f), family(g));
        let (df, dg) = (derivative(&f), derivative(&g));
        let lhs = derivative(&pointwise(BinaryOp::Mul, &f, &g));
        let rhs = pointwise(
            BinaryOp::Add,
            &pointwise(BinaryOp::Mul, &df, &g),
            &pointwise(BinaryOp::Mul, &f, &dg),
        );
        let scale = (at(&df, n, x) * at(&g, n, x)).abs() + (at(&f, n, x) * at(&dg, n, x)).abs();
        prop_assert!(agree_at(&lhs, &rhs, scale, n, x).is_ok(), "{:?}", agree_at(&lhs, &rhs, scale, n, x));
    }

    #[test]
    fn chain_rule(f in arb_expr(), g in arb_expr(), n in 1u64..9, x in -1.5f64..1.5) {
        let (f, g) = (family(f), family(g));
        let lhs = derivative(&compose(&f, &g));
        let rhs = pointwise(BinaryOp::Mul, &compose(&derivative(&f), &g), &derivative(&g));
        prop_assert!(agree_at(&lhs, &rhs, 0.0, n, x).is_ok(), "{:?}", agree_at(&lhs, &rhs, 0.0, n, x));
    }

    #[test]
    fn evaluation_interleaves(f in corpus_family(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let c = ctx();
        let (la, lb) = (VirtualNumber::lift(a), VirtualNumber::lift(b));
        prop_assume!(defined_at(&f, &la, &c).holds() && defined_at(&f, &lb, &c).holds());
        let v = evaluate(&f, &VirtualNumber::periodic(vec![a, b]).unwrap(), &c).unwrap();
        for n in (1..=40).chain(c.schedule.stage_starts()) {
            let x = if n % 2 == 1 { a } else { b };
            let (got, want) = (v.value_at(n).as_f64(), f.member_value(n, x).as_f64());
            prop_assert_eq!(got.map(f64::to_bits), want.map(f64::to_bits), "index {}", n);
        }
    }
}
