use super::ast::{BinaryOp, Expr, UnaryOp, Var};
use super::simplify::{sign_of, simplify, SignInfo};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BreakpointKind {
    /// Boundary of a piecewise guard.
    Guard,
    /// Zero of a denominator.
    Pole,
    /// Zero of the argument of `ln`, `sqrt`, `|·|` or a fractional power.
    Branch,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Breakpoint {
    pub at: Expr,
    pub kind: BreakpointKind,
}

/// Candidate points of discontinuity or non-smoothness, as expressions in `∞`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Breakpoints {
    pub points: Vec<Breakpoint>,
    /// Conditions whose solutions could not be written down, such as poles
    /// of `tan` or guards that are not invertible in the variable.
    pub unresolved: Vec<Expr>,
}

impl Breakpoints {
    pub fn exprs(&self) -> Vec<Expr> {
        self.points.iter().map(|p| p.at.clone()).collect()
    }

    pub fn of_kind(&self, kind: BreakpointKind) -> Vec<Expr> {
        self.points
            .iter()
            .filter(|p| p.kind == kind)
            .map(|p| p.at.clone())
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.unresolved.is_empty()
    }

    fn add(&mut self, at: Expr, kind: BreakpointKind) {
        let at = simplify(&at);
        if !self.points.iter().any(|p| p.at == at) {
            self.points.push(Breakpoint { at, kind });
        }
    }

    fn add_roots(&mut self, lhs: &Expr, rhs: &Expr, wrt: Var, kind: BreakpointKind) {
        match solve_equation(lhs, rhs, wrt) {
            Some(roots) => {
                for r in roots {
                    self.add(r, kind);
                }
            }
            None => {
                let cond = simplify(&Expr::sub(lhs.clone(), rhs.clone()));
                if !self.unresolved.contains(&cond) {
                    self.unresolved.push(cond);
                }
            }
        }
    }
}

/// Finite superset of the points where `e` may fail to be continuous or
/// smooth in `wrt`.
pub fn breakpoints(e: &Expr, wrt: Var) -> Breakpoints {
    let mut out = Breakpoints::default();
    walk(e, wrt, false, &mut out);
    out
}

fn walk(e: &Expr, wrt: Var, in_guard: bool, out: &mut Breakpoints) {
    if !e.contains_var(wrt) {
        return;
    }
    let zero = Expr::num(0.0);
    match e {
        Expr::Num(_) | Expr::Const(_) | Expr::Var(_) => {}
        Expr::Unary(op, a) => {
            match op {
                UnaryOp::Ln | UnaryOp::Sqrt => out.add_roots(a, &zero, wrt, BreakpointKind::Branch),
                UnaryOp::Abs if !in_guard => out.add_roots(a, &zero, wrt, BreakpointKind::Branch),
                UnaryOp::Tan => {
                    let c = simplify(&Expr::unary(UnaryOp::Cos, (**a).clone()));
                    if !out.unresolved.contains(&c) {
                        out.unresolved.push(c);
                    }
                }
                _ => {}
            }
            walk(a, wrt, in_guard, out);
        }
        Expr::Binary(op, a, b) => {
            match op {
                BinaryOp::Div if b.contains_var(wrt) => {
                    out.add_roots(b, &zero, wrt, BreakpointKind::Pole)
                }
                BinaryOp::Pow if a.contains_var(wrt) => {
                    let smooth = b.as_num().is_some_and(|n| n >= 0.0 && n.fract() == 0.0);
                    if !smooth {
                        let kind = if b.as_num().is_some_and(|n| n < 0.0) {
                            BreakpointKind::Pole
                        } else {
                            BreakpointKind::Branch
                        };
                        out.add_roots(a, &zero, wrt, kind);
                    }
                }
                _ => {}
            }
            walk(a, wrt, in_guard, out);
            walk(b, wrt, in_guard, out);
        }
        Expr::Piecewise { branches, default } => {
            for br in branches {
                let g = &br.guard;
                if g.lhs.contains_var(wrt) || g.rhs.contains_var(wrt) {
                    out.add_roots(&g.lhs, &g.rhs, wrt, BreakpointKind::Guard);
                }
                walk(&g.lhs, wrt, true, out);
                walk(&g.rhs, wrt, true, out);
                walk(&br.value, wrt, in_guard, out);
            }
            if let Some(d) = default {
                walk(d, wrt, in_guard, out);
            }
        }
    }
}

/// Solutions of `lhs = rhs` in `wrt`, or `None` when the equation is not
/// solvable by inverting a chain of elementary operations.
pub(crate) fn solve_equation(lhs: &Expr, rhs: &Expr, wrt: Var) -> Option<Vec<Expr>> {
    match (lhs.contains_var(wrt), rhs.contains_var(wrt)) {
        (false, false) => Some(Vec::new()),
        (true, false) => invert(lhs, rhs.clone(), wrt),
        (false, true) => invert(rhs, lhs.clone(), wrt),
        (true, true) => {
            let diff = simplify(&Expr::sub(lhs.clone(), rhs.clone()));
            invert(&diff, Expr::num(0.0), wrt)
        }
    }
}

fn invert(e: &Expr, target: Expr, wrt: Var) -> Option<Vec<Expr>> {
    let free = |x: &Expr| !x.contains_var(wrt);
    match e {
        Expr::Var(v) if *v == wrt => Some(vec![target]),
        Expr::Unary(op, a) => {
            let a = &**a;
            match op {
                UnaryOp::Neg => invert(a, Expr::neg(target), wrt),
                UnaryOp::Abs => match sign_of(&simplify(&target)) {
                    SignInfo::Negative => Some(Vec::new()),
                    SignInfo::Zero => invert(a, target, wrt),
                    _ => {
                        let mut r = invert(a, target.clone(), wrt)?;
                        r.extend(invert(a, Expr::neg(target), wrt)?);
                        Some(r)
                    }
                },
                UnaryOp::Sqrt => match sign_of(&simplify(&target)) {
                    SignInfo::Negative => Some(Vec::new()),
                    _ => invert(a, Expr::pow(target, Expr::num(2.0)), wrt),
                },
                UnaryOp::Exp => match sign_of(&simplify(&target)) {
                    SignInfo::Negative | SignInfo::Zero | SignInfo::NonPos => Some(Vec::new()),
                    _ => invert(a, Expr::unary(UnaryOp::Ln, target), wrt),
                },
                UnaryOp::Ln => invert(a, Expr::unary(UnaryOp::Exp, target), wrt),
                UnaryOp::Arctan => invert(a, Expr::unary(UnaryOp::Tan, target), wrt),
                UnaryOp::Sin | UnaryOp::Cos | UnaryOp::Tan => None,
            }
        }
        Expr::Binary(op, a, b) => {
            let (a, b) = (&**a, &**b);
            match op {
                BinaryOp::Add if free(b) => invert(a, Expr::sub(target, b.clone()), wrt),
                BinaryOp::Add if free(a) => invert(b, Expr::sub(target, a.clone()), wrt),
                BinaryOp::Sub if free(b) => invert(a, Expr::add(target, b.clone()), wrt),
                BinaryOp::Sub if free(a) => invert(b, Expr::sub(a.clone(), target), wrt),
                BinaryOp::Mul if free(b) => invert(a, Expr::div(target, b.clone()), wrt),
                BinaryOp::Mul if free(a) => invert(b, Expr::div(target, a.clone()), wrt),
                BinaryOp::Div if free(b) => invert(a, Expr::mul(target, b.clone()), wrt),
                BinaryOp::Div if free(a) => {
                    if simplify(&target).is_num(0.0) {
                        Some(Vec::new())
                    } else {
                        invert(b, Expr::div(a.clone(), target), wrt)
                    }
                }
                BinaryOp::Pow if free(b) => invert_power(a, b, target, wrt),
                BinaryOp::Pow if free(a) => invert(
                    b,
                    Expr::div(
                        Expr::unary(UnaryOp::Ln, target),
                        Expr::unary(UnaryOp::Ln, a.clone()),
                    ),
                    wrt,
                ),
                _ => None,
            }
        }
        _ => None,
    }
}

fn invert_power(base: &Expr, exp: &Expr, target: Expr, wrt: Var) -> Option<Vec<Expr>> {
    let t = simplify(&target);
    let sign = sign_of(&t);
    if sign == SignInfo::Zero {
        return invert(base, t, wrt);
    }
    let n = exp.as_num();
    let integral = n.is_some_and(|n| n.fract() == 0.0);
    let recip = match n {
        Some(n) => Expr::num(1.0 / n),
        None => Expr::div(Expr::num(1.0), exp.clone()),
    };
    let root = |t: Expr| Expr::pow(t, recip.clone());
    let even = n.is_some_and(|n| integral && (n / 2.0).fract() == 0.0);
    if integral && !even {
        // odd power: a single real root of either sign
        return match sign {
            SignInfo::Positive | SignInfo::NonNeg => invert(base, root(t), wrt),
            SignInfo::Negative | SignInfo::NonPos => {
                invert(base, Expr::neg(root(Expr::neg(t))), wrt)
            }
            _ => None,
        };
    }
    if matches!(sign, SignInfo::Negative) {
        return Some(Vec::new());
    }
    if even {
        let mut r = invert(base, root(t.clone()), wrt)?;
        r.extend(invert(base, Expr::neg(root(t)), wrt)?);
        Some(r)
    } else {
        invert(base, root(t), wrt)
    }
}
