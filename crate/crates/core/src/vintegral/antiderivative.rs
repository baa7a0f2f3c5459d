//! Rule-table antiderivatives in `ξ`, with `∞` treated as a constant.

use crate::expr::{differentiate, sign_of, simplify, BinaryOp, Expr, UnaryOp, Var};

const X: Var = Var::Arg;

fn free(e: &Expr) -> bool {
    !e.contains_var(X)
}

/// A particular antiderivative of `e`, or `None` outside the rule table.
///
/// Inner arguments may be linear in `ξ`; `1/(c₀ + c₂ξ²)` with positive
/// coefficients integrates to an arctangent.
pub fn antiderivative_expr(e: &Expr) -> Option<Expr> {
    prim(&simplify(e)).map(|p| simplify(&p))
}

/// Slope of `u` when `u` is linear in `ξ` with a nonzero slope.
fn slope(u: &Expr) -> Option<Expr> {
    let d = differentiate(u, X);
    (free(&d) && !d.is_num(0.0)).then_some(d)
}

fn prim(e: &Expr) -> Option<Expr> {
    if free(e) {
        return Some(Expr::mul(e.clone(), Expr::arg()));
    }
    match e {
        Expr::Var(_) => Some(Expr::div(
            Expr::pow(Expr::arg(), Expr::num(2.0)),
            Expr::num(2.0),
        )),
        Expr::Unary(op, u) => {
            let u = &**u;
            match op {
                UnaryOp::Neg => Some(Expr::neg(prim(u)?)),
                UnaryOp::Sqrt => power(u, &Expr::num(0.5)),
                UnaryOp::Exp => {
                    let a = slope(u)?;
                    Some(Expr::div(Expr::unary(UnaryOp::Exp, u.clone()), a))
                }
                UnaryOp::Sin => {
                    let a = slope(u)?;
                    Some(Expr::neg(Expr::div(
                        Expr::unary(UnaryOp::Cos, u.clone()),
                        a,
                    )))
                }
                UnaryOp::Cos => {
                    let a = slope(u)?;
                    Some(Expr::div(Expr::unary(UnaryOp::Sin, u.clone()), a))
                }
                _ => None,
            }
        }
        Expr::Binary(op, a, b) => {
            let (a, b) = (&**a, &**b);
            match op {
                BinaryOp::Add => Some(Expr::add(prim(a)?, prim(b)?)),
                BinaryOp::Sub => Some(Expr::sub(prim(a)?, prim(b)?)),
                BinaryOp::Mul if free(a) => Some(Expr::mul(a.clone(), prim(b)?)),
                BinaryOp::Mul if free(b) => Some(Expr::mul(prim(a)?, b.clone())),
                BinaryOp::Mul => {
                    let mut factors = Vec::new();
                    flatten_product(e, &mut factors);
                    let (consts, deps): (Vec<&Expr>, Vec<&Expr>) =
                        factors.into_iter().partition(|f| free(f));
                    if deps.len() != 1 || consts.is_empty() {
                        return None;
                    }
                    let c = consts.into_iter().cloned().reduce(Expr::mul)?;
                    Some(Expr::mul(c, prim(deps[0])?))
                }
                BinaryOp::Div if free(b) => Some(Expr::div(prim(a)?, b.clone())),
                BinaryOp::Div if free(a) => Some(Expr::mul(a.clone(), reciprocal(b)?)),
                BinaryOp::Pow if free(b) => power(a, b),
                BinaryOp::Pow if free(a) => {
                    // a^u = e^(u ln a)
                    let s = slope(b)?;
                    let ln_a = Expr::unary(UnaryOp::Ln, a.clone());
                    Some(Expr::div(e.clone(), Expr::mul(s, ln_a)))
                }
                _ => None,
            }
        }
        _ => None,
    }
}

fn flatten_product<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
    match e {
        Expr::Binary(BinaryOp::Mul, a, b) => {
            flatten_product(a, out);
            flatten_product(b, out);
        }
        _ => out.push(e),
    }
}

/// `∫ u^c` for `u` linear in `ξ` and `c` free of `ξ`.
fn power(u: &Expr, c: &Expr) -> Option<Expr> {
    let a = slope(u)?;
    if c.is_num(-1.0) {
        return Some(Expr::div(log_abs(u), a));
    }
    let c1 = match c.as_num() {
        Some(v) => Expr::num(v + 1.0),
        None => Expr::add(c.clone(), Expr::num(1.0)),
    };
    Some(Expr::div(
        Expr::pow(u.clone(), c1.clone()),
        Expr::mul(c1, a),
    ))
}

fn log_abs(u: &Expr) -> Expr {
    Expr::unary(UnaryOp::Ln, Expr::unary(UnaryOp::Abs, u.clone()))
}

/// `∫ 1/b`.
fn reciprocal(b: &Expr) -> Option<Expr> {
    if let Some(a) = slope(b) {
        return Some(Expr::div(log_abs(b), a));
    }
    match b {
        Expr::Binary(BinaryOp::Pow, u, c) if free(c) => {
            return power(u, &simplify(&Expr::neg((**c).clone())));
        }
        Expr::Unary(UnaryOp::Sqrt, u) => return power(u, &Expr::num(-0.5)),
        Expr::Unary(UnaryOp::Exp, u) => {
            return prim(&Expr::unary(UnaryOp::Exp, Expr::neg((**u).clone())));
        }
        _ => {}
    }
    // c₀ + c₂ξ² with c₀, c₂ > 0
    let d1 = differentiate(b, X);
    let d2 = differentiate(&d1, X);
    if !free(&d2) || d2.is_num(0.0) {
        return None;
    }
    if !simplify(&d1.substitute(X, &Expr::num(0.0))).is_num(0.0) {
        return None;
    }
    let c2 = simplify(&Expr::div(d2, Expr::num(2.0)));
    let c0 = simplify(&b.substitute(X, &Expr::num(0.0)));
    if !(sign_of(&c2).is_positive() && sign_of(&c0).is_positive()) {
        return None;
    }
    let k = Expr::unary(UnaryOp::Sqrt, Expr::div(c2.clone(), c0.clone()));
    let norm = Expr::unary(UnaryOp::Sqrt, Expr::mul(c2, c0));
    Some(Expr::div(
        Expr::unary(UnaryOp::Arctan, Expr::mul(k, Expr::arg())),
        norm,
    ))
}
