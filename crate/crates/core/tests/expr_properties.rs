mod common;

use common::{arb_expr, close, finite};
use proptest::prelude::*;
use vcalc_core::corpus;
use vcalc_core::expr::{
    breakpoints, differentiate, evaluate_at, parse, render, simplify, Bindings, Expr, Var,
};
use vcalc_core::vfunc::central_difference;

fn at(e: &Expr, n: u64, x: f64) -> Option<f64> {
    finite(evaluate_at(e, &Bindings::at_index(n).with_arg(x)).ok()?)
}

#[test]
fn corpus_round_trips() {
    for (name, src) in corpus::NAMED {
        let e = parse(src).unwrap();
        assert_eq!(parse(&render(&e)).unwrap(), e, "{name}");
        let s = simplify(&e);
        assert_eq!(parse(&render(&s)).unwrap(), s, "{name} simplified");
    }
}

const PIECEWISE: [&str; 4] = [
    corpus::CHI,
    "piecewise(ξ < 1 : 0 ; default : 1)",
    "piecewise(ξ^2 < ∂ : 1 ; default : 0)",
    "piecewise(ξ ≥ 3 * ∂ : ∞ ; default : -1)",
];

#[test]
fn breakpoints_cover_every_jump() {
    let h = 1e-4;
    for src in PIECEWISE {
        let e = parse(src).unwrap();
        let bps = breakpoints(&e, Var::Arg);
        assert!(bps.is_complete(), "{src}");
        for n in [1u64, 3, 8, 16] {
            let points: Vec<f64> = bps.exprs().iter().filter_map(|p| at(p, n, 0.0)).collect();
            let mut x = -2.0;
            while x < 2.0 {
                let (a, b) = (at(&e, n, x).unwrap(), at(&e, n, x + h).unwrap());
                if (a - b).abs() > 0.1 {
                    assert!(
                        points
                            .iter()
                            .any(|p| *p >= x - 1e-12 && *p <= x + h + 1e-12),
                        "{src} at n = {n}: jump in [{x}, {}] not among {points:?}",
                        x + h
                    );
                }
                x += h;
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn render_parse_round_trip(e in arb_expr()) {
        prop_assert_eq!(parse(&render(&e)).unwrap(), e);
    }

    #[test]
    fn simplify_is_idempotent(e in arb_expr()) {
        let once = simplify(&e);
        prop_assert_eq!(simplify(&once), once);
    }

    #[test]
    fn simplify_preserves_values(e in arb_expr(), n in 1u64..20, x in -1.5f64..1.5) {
        if let Some(v) = at(&e, n, x) {
            prop_assume!(v.abs() < 1e12);
            let s = simplify(&e);
            let w = at(&s, n, x);
            prop_assert!(w.is_some(), "{} undefined at ({}, {}) after simplify to {}", e, n, x, s);
            prop_assert!(close(v, w.unwrap(), 1e-9, 1.0, 0.0), "{} vs {}: {} vs {:?}", e, s, v, w);
        }
    }

    #[test]
    fn derivative_matches_finite_differences(e in arb_expr(), n in 1u64..6, x in -1.5f64..1.5) {
        let d = differentiate(&e, Var::Arg);
        let b = Bindings::at_index(n);
        let fd = central_difference(|t| evaluate_at(&e, &b.clone().with_arg(t)).unwrap(), x);
        if let (Some(exact), Some(approx)) = (at(&d, n, x), finite(fd)) {
            prop_assume!(exact.abs() < 1e6);
            // the difference step is ~1e-6, so allow truncation and cancellation error
            prop_assert!(close(exact, approx, 1e-4, 1.0, 0.0), "d/dξ {} = {} at ({}, {}): {} vs {}", e, d, n, x, exact, approx);
        }
    }
}
