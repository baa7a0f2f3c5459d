mod common;

use common::{ctx, num};
use proptest::prelude::*;
use vcalc_core::decision::Mode;
use vcalc_core::expr::parse;
use vcalc_core::vnum::{self, end_equal, VirtualNumber};
use vcalc_core::vseq::{fine_partition, is_fine_partition, partial_sum, term, VirtualSequence};

fn seq(src: &str) -> VirtualSequence {
    VirtualSequence::from_expr(parse(src).unwrap()).unwrap()
}

const SEQUENCES: [&str; 6] = ["∂", "k", "k^2 * ∂^3", "sin(k) / ∞", "1 / k^2", "(-1)^k"];

#[test]
fn partial_sums_telescope() {
    let c = ctx();
    for src in SEQUENCES {
        let s = seq(src);
        for (k, km1) in [
            ("∞", "∞ - 1"),
            ("2 * ∞", "2 * ∞ - 1"),
            ("∞ + 3", "∞ + 2"),
            ("5", "4"),
        ] {
            let (k, km1) = (num(k), num(km1));
            let d = vnum::sub(
                &partial_sum(&s, &k, &c).unwrap(),
                &partial_sum(&s, &km1, &c).unwrap(),
            );
            let t = term(&s, &k, &c).unwrap();
            let v = end_equal(&d, &t, &c);
            assert!(v.holds(), "{src} at {k}: {d} vs {t}: {v}");
        }
    }
}

#[test]
fn fine_partition_mesh_is_exact() {
    let c = ctx();
    for (a, b) in [(0.0, 1.0), (-2.0, 3.0), (1.5, 1.75)] {
        let s = fine_partition(a, b).unwrap();
        let gap = vnum::sub(
            &term(&s, &num("∞ + 1"), &c).unwrap(),
            &term(&s, &VirtualNumber::infinity(), &c).unwrap(),
        );
        let want = vnum::mul(&VirtualNumber::lift(b - a), &VirtualNumber::delta());
        let v = end_equal(&gap, &want, &c);
        assert!(
            v.holds() && v.mode == Mode::Symbolic,
            "[{a}, {b}]: {gap}: {v}"
        );
        assert!(is_fine_partition(&s, a, b, &c).holds());
    }
}

proptest! {
    #[test]
    fn member_sums_match_naive_sums(p in 0u32..3, scale in -4.0f64..4.0, n in 1u64..200, count in 0u64..400) {
        let s = VirtualSequence::from_expr(parse(&format!("{scale} * k^{p} / ∞")).unwrap()).unwrap();
        let naive: f64 = (1..=count).map(|k| scale * (k as f64).powi(p as i32) / n as f64).sum();
        let got = s.member_sum(n, count).as_f64().unwrap();
        prop_assert!((got - naive).abs() <= 1e-12 * naive.abs().max(1.0), "{} vs {}", got, naive);
    }
}
