use super::ast::{BinaryOp, Branch, Expr, UnaryOp, Var};
use super::simplify::simplify;

/// Symbolic derivative with respect to `wrt`, simplified.
///
/// Every other variable is a constant. Piecewise nodes differentiate branch by
/// branch with guards kept as they are; what happens exactly on a guard
/// boundary is decided by the caller.
pub fn differentiate(e: &Expr, wrt: Var) -> Expr {
    simplify(&derive(e, wrt))
}

/// Unsimplified derivative.
pub(crate) fn derive(e: &Expr, wrt: Var) -> Expr {
    if !e.contains_var(wrt) {
        return Expr::num(0.0);
    }
    match e {
        Expr::Num(_) | Expr::Const(_) => Expr::num(0.0),
        Expr::Var(v) => Expr::num(if *v == wrt { 1.0 } else { 0.0 }),
        Expr::Unary(op, u) => {
            let du = derive(u, wrt);
            let u = (**u).clone();
            let outer = match op {
                UnaryOp::Neg => return Expr::neg(du),
                UnaryOp::Abs => Expr::div(u.clone(), Expr::unary(UnaryOp::Abs, u)),
                UnaryOp::Sqrt => Expr::div(
                    Expr::num(1.0),
                    Expr::mul(Expr::num(2.0), Expr::unary(UnaryOp::Sqrt, u)),
                ),
                UnaryOp::Exp => Expr::unary(UnaryOp::Exp, u),
                UnaryOp::Ln => Expr::div(Expr::num(1.0), u),
                UnaryOp::Sin => Expr::unary(UnaryOp::Cos, u),
                UnaryOp::Cos => Expr::neg(Expr::unary(UnaryOp::Sin, u)),
                UnaryOp::Tan => Expr::div(
                    Expr::num(1.0),
                    Expr::pow(Expr::unary(UnaryOp::Cos, u), Expr::num(2.0)),
                ),
                UnaryOp::Arctan => Expr::div(
                    Expr::num(1.0),
                    Expr::add(Expr::num(1.0), Expr::pow(u, Expr::num(2.0))),
                ),
            };
            Expr::mul(outer, du)
        }
        Expr::Binary(op, a, b) => {
            let (da, db) = (derive(a, wrt), derive(b, wrt));
            let (a, b) = ((**a).clone(), (**b).clone());
            match op {
                BinaryOp::Add => Expr::add(da, db),
                BinaryOp::Sub => Expr::sub(da, db),
                BinaryOp::Mul => {
                    if da.is_num(0.0) {
                        Expr::mul(a, db)
                    } else if db.is_num(0.0) {
                        Expr::mul(da, b)
                    } else {
                        Expr::add(Expr::mul(da, b), Expr::mul(a, db))
                    }
                }
                BinaryOp::Div => {
                    if !b.contains_var(wrt) {
                        Expr::div(da, b)
                    } else {
                        Expr::div(
                            Expr::sub(Expr::mul(da, b.clone()), Expr::mul(a, db)),
                            Expr::pow(b, Expr::num(2.0)),
                        )
                    }
                }
                BinaryOp::Pow => {
                    if !b.contains_var(wrt) {
                        // c · u^(c−1) · u'
                        let reduced = match b.as_num() {
                            Some(c) => Expr::num(c - 1.0),
                            None => Expr::sub(b.clone(), Expr::num(1.0)),
                        };
                        Expr::mul(Expr::mul(b, Expr::pow(a, reduced)), da)
                    } else if !a.contains_var(wrt) {
                        // a^v · ln a · v'
                        let ln_a = Expr::unary(UnaryOp::Ln, a.clone());
                        Expr::mul(Expr::mul(Expr::pow(a, b), ln_a), db)
                    } else {
                        // u^v · (v' ln u + v u'/u)
                        let ln_a = Expr::unary(UnaryOp::Ln, a.clone());
                        Expr::mul(
                            Expr::pow(a.clone(), b.clone()),
                            Expr::add(Expr::mul(db, ln_a), Expr::div(Expr::mul(b, da), a)),
                        )
                    }
                }
            }
        }
        Expr::Piecewise { branches, default } => Expr::Piecewise {
            branches: branches
                .iter()
                .map(|br| Branch {
                    guard: br.guard.clone(),
                    value: derive(&br.value, wrt),
                })
                .collect(),
            default: default.as_ref().map(|d| Box::new(derive(d, wrt))),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::super::eval::{eval, Bindings};
    use super::super::parse;
    use super::*;

    fn d(src: &str) -> Expr {
        differentiate(&parse(src).unwrap(), Var::Arg)
    }

    #[test]
    fn identity() {
        assert_eq!(d("ξ"), Expr::num(1.0));
    }

    #[test]
    fn power_family() {
        assert_eq!(d("∂ * ξ^∞ + ∞^2"), simplify(&parse("ξ^(∞ - 1)").unwrap()));
    }

    #[test]
    fn constant_family() {
        assert_eq!(d("∞"), Expr::num(0.0));
    }

    #[test]
    fn psi_derivative_values() {
        let got = d("∞ / (1 + ∞^2 * ξ^2)");
        let want = parse("-2 * ∞^3 * ξ / (1 + ∞^2 * ξ^2)^2").unwrap();
        for (n, x) in [(1u64, 0.3), (5, -0.7), (12, 0.01), (40, 1.5)] {
            let b = Bindings::at_index(n).with_arg(x);
            let (g, w) = (
                eval(&got, &b).as_f64().unwrap(),
                eval(&want, &b).as_f64().unwrap(),
            );
            assert!(
                (g - w).abs() <= 1e-12 * w.abs().max(1.0),
                "{n} {x}: {g} vs {w}"
            );
        }
    }

    #[test]
    fn piecewise_keeps_guards() {
        let e = d("piecewise(ξ < 0 : -ξ ; default : ξ^2)");
        let Expr::Piecewise { branches, default } = e else {
            panic!("not piecewise")
        };
        assert_eq!(branches[0].guard.lhs, Expr::arg());
        assert_eq!(branches[0].value, Expr::num(-1.0));
        assert_eq!(*default.unwrap(), simplify(&parse("2 * ξ").unwrap()));
    }
}
