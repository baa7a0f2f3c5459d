mod common;

use common::{close, ctx, func, num};
use proptest::prelude::*;
use vcalc_core::corpus;
use vcalc_core::expr::{parse, BinaryOp};
use vcalc_core::vfunc::{pointwise, VirtualFunction};
use vcalc_core::vintegral::{
    antiderivative, ftc_check, integrable_between, integrate, reduce_integral, FtcForm,
};
use vcalc_core::vnum::{self, end_equal, VirtualNumber};
use vcalc_core::vseq::{riemann_sum_integral, Tag};

fn integrands() -> Vec<VirtualFunction> {
    vec![
        corpus::psi(),
        corpus::chi(),
        corpus::kappa(),
        func("sin(ξ)"),
        func("e^(∂ * ξ)"),
        func("ξ^2 - ∞ * ξ"),
        func("sin(ξ^2)"),
        func("1 / (1 + ξ^4)"),
    ]
}

fn limit_strategy() -> impl Strategy<Value = VirtualNumber> {
    (-128i32..=128, 0..3).prop_map(|(k, shape)| {
        let r = k as f64 / 64.0;
        match shape {
            0 => VirtualNumber::lift(r),
            1 => num(&format!("{r} + ∂")),
            _ => num(&format!("{r} * ∂")),
        }
    })
}

#[test]
fn degenerate_interval_is_zero() {
    let c = ctx();
    for f in integrands() {
        for a in [
            VirtualNumber::lift(0.5),
            VirtualNumber::delta(),
            num("1 - ∂"),
        ] {
            let v = integrate(&f, &a, &a, &c).unwrap();
            assert!(
                end_equal(&v, &VirtualNumber::lift(0.0), &c).holds(),
                "{f} at {a}: {v}"
            );
        }
    }
}

#[test]
fn sums_and_products_stay_integrable() {
    let c = ctx();
    let (a, b) = (VirtualNumber::lift(-1.0), VirtualNumber::lift(1.5));
    let all = integrands();
    for f in &all {
        for g in &all {
            for op in [BinaryOp::Add, BinaryOp::Mul] {
                let h = pointwise(op, f, g);
                assert!(integrable_between(&h, &a, &b, &c).holds(), "{h}");
            }
        }
    }
}

#[test]
fn primitive_form_on_the_rule_table() {
    let c = ctx();
    let (a, b) = (VirtualNumber::lift(0.25), num("2 - ∂"));
    for src in [
        "ξ^3",
        "cos(∞ * ξ)",
        "e^(-ξ)",
        "1 / ξ",
        "sqrt(ξ)",
        "2^ξ",
        "1 / (4 + ξ^2)",
    ] {
        let f = func(src);
        assert!(antiderivative(&f).is_ok(), "{src}");
        let r = ftc_check(&f, &a, &b, FtcForm::Primitive, &c).unwrap();
        assert!(r.verdict.holds(), "{src}: {}", r.verdict);
    }
}

#[test]
fn riemann_sums_agree_with_integrals() {
    let c = ctx();
    for (src, a, b) in [
        ("ξ^2", 0.0, 1.0),
        ("sin(ξ)", -1.0, 2.0),
        ("e^ξ", 0.0, 1.0),
        ("1 / (1 + ξ^2)", -3.0, 3.0),
    ] {
        let rs = riemann_sum_integral(&parse(src).unwrap(), a, b, Tag::Right, &c).unwrap();
        let sum = vnum::reduce(&rs, &c).unwrap();
        let lift = VirtualFunction::lift_function(parse(src).unwrap()).unwrap();
        let int =
            reduce_integral(&lift, &VirtualNumber::lift(a), &VirtualNumber::lift(b), &c).unwrap();
        assert!((sum - int).abs() <= 1e-5, "{src}: {sum} vs {int}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn additivity_and_orientation(
        which in 0usize..8,
        a in limit_strategy(),
        b in limit_strategy(),
        g in limit_strategy(),
    ) {
        let c = ctx();
        let f = &integrands()[which];
        let whole = integrate(f, &a, &g, &c).unwrap();
        let (left, right) = (integrate(f, &a, &b, &c).unwrap(), integrate(f, &b, &g, &c).unwrap());
        let back = integrate(f, &g, &a, &c).unwrap();
        for n in c.schedule.stage_starts() {
            let (w, l, r, k) = (
                whole.f64_at(n).unwrap(),
                left.f64_at(n).unwrap(),
                right.f64_at(n).unwrap(),
                back.f64_at(n).unwrap(),
            );
            prop_assert!(close(w, l + r, 1e-8, l.abs() + r.abs(), 1e-12), "{} at {}: {} vs {} + {}", f, n, w, l, r);
            prop_assert_eq!(k, -w);
        }
    }
}
