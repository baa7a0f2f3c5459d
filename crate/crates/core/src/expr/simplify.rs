//! Rule-based simplification.
//!
//! The rule list is fixed:
//!
//! * sums are flattened, like terms combined and constants folded, with the
//!   constant term written last;
//! * products are flattened into a numeric coefficient times powers of bases;
//!   powers of one base are merged when the base is positive or all exponents
//!   are integer literals of one sign, so `∂ * ∞` becomes `1`;
//! * integer-literal powers distribute over products, `sqrt(x)` is `x^(1/2)`
//!   and `exp(x)` is `e^x` while merging;
//! * unary functions of literals fold, with exact values at multiples of `π`;
//! * `exp(ln x)`, `ln(exp x)`, `|x|` and nested powers reduce when the sign
//!   analysis allows it;
//! * piecewise branches with constant guards are pruned.
//!
//! No rule enlarges or shrinks the set of bindings where an expression is
//! defined: `x / x` stays as it is unless `x` is known to be nonzero.

use std::cmp::Ordering;

use super::ast::{canonical_cmp, BinaryOp, Branch, Constant, Expr, Guard, UnaryOp, Var};
use super::eval::{eval, Bindings};
use super::value::Value;

const MAX_PASSES: usize = 16;
const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// Simplifies to a fixpoint of the rule list.
pub fn simplify(e: &Expr) -> Expr {
    let mut cur = e.clone();
    for _ in 0..MAX_PASSES {
        let next = step(&cur);
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

/// Coarse sign information for an expression over all admissible bindings
/// (`∞` and `k` range over naturals, `ξ` over reals).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignInfo {
    Positive,
    Negative,
    Zero,
    NonNeg,
    NonPos,
    Unknown,
}

impl SignInfo {
    pub fn is_positive(self) -> bool {
        self == SignInfo::Positive
    }

    pub fn is_nonneg(self) -> bool {
        matches!(self, SignInfo::Positive | SignInfo::Zero | SignInfo::NonNeg)
    }

    fn is_nonpos(self) -> bool {
        matches!(self, SignInfo::Negative | SignInfo::Zero | SignInfo::NonPos)
    }

    pub fn is_strict(self) -> bool {
        matches!(self, SignInfo::Positive | SignInfo::Negative)
    }

    fn of_num(v: f64) -> SignInfo {
        if v > 0.0 {
            SignInfo::Positive
        } else if v < 0.0 {
            SignInfo::Negative
        } else if v == 0.0 {
            SignInfo::Zero
        } else {
            SignInfo::Unknown
        }
    }

    fn flip(self) -> SignInfo {
        match self {
            SignInfo::Positive => SignInfo::Negative,
            SignInfo::Negative => SignInfo::Positive,
            SignInfo::NonNeg => SignInfo::NonPos,
            SignInfo::NonPos => SignInfo::NonNeg,
            s => s,
        }
    }

    fn add(self, o: SignInfo) -> SignInfo {
        use SignInfo::*;
        match (self, o) {
            (Zero, s) | (s, Zero) => s,
            (Positive, Positive) | (Positive, NonNeg) | (NonNeg, Positive) => Positive,
            (NonNeg, NonNeg) => NonNeg,
            (Negative, Negative) | (Negative, NonPos) | (NonPos, Negative) => Negative,
            (NonPos, NonPos) => NonPos,
            _ => Unknown,
        }
    }

    fn mul(self, o: SignInfo) -> SignInfo {
        use SignInfo::*;
        match (self, o) {
            (Zero, _) | (_, Zero) => Zero,
            (Unknown, _) | (_, Unknown) => Unknown,
            (a, b) => {
                let neg = a.is_nonpos() != b.is_nonpos();
                let strict = a.is_strict() && b.is_strict();
                match (neg, strict) {
                    (false, true) => Positive,
                    (false, false) => NonNeg,
                    (true, true) => Negative,
                    (true, false) => NonPos,
                }
            }
        }
    }
}

/// Sign of `e` wherever it is defined.
pub fn sign_of(e: &Expr) -> SignInfo {
    use SignInfo::*;
    match e {
        Expr::Num(v) => SignInfo::of_num(*v),
        Expr::Const(_) => Positive,
        Expr::Var(Var::Index) | Expr::Var(Var::Position) => Positive,
        Expr::Var(Var::Arg) => Unknown,
        Expr::Unary(op, a) => {
            let s = sign_of(a);
            match op {
                UnaryOp::Neg => s.flip(),
                UnaryOp::Abs | UnaryOp::Sqrt => {
                    if s.is_strict() {
                        Positive
                    } else if s == Zero {
                        Zero
                    } else {
                        NonNeg
                    }
                }
                UnaryOp::Exp => Positive,
                UnaryOp::Arctan => s,
                UnaryOp::Ln => match &**a {
                    Expr::Var(Var::Index) | Expr::Var(Var::Position) => NonNeg,
                    _ => Unknown,
                },
                UnaryOp::Sin | UnaryOp::Cos | UnaryOp::Tan => Unknown,
            }
        }
        Expr::Binary(op, a, b) => {
            let (sa, sb) = (sign_of(a), sign_of(b));
            match op {
                BinaryOp::Add => sa.add(sb),
                BinaryOp::Sub => sa.add(sb.flip()),
                BinaryOp::Mul => sa.mul(sb),
                BinaryOp::Div => {
                    if sb == Zero {
                        Unknown
                    } else {
                        sa.mul(sb)
                    }
                }
                BinaryOp::Pow => {
                    if sa == Positive {
                        return Positive;
                    }
                    match b.as_num() {
                        Some(n) if n == 0.0 => Positive,
                        Some(n) if n.fract() == 0.0 && (n / 2.0).fract() == 0.0 => {
                            if sa.is_strict() {
                                Positive
                            } else {
                                NonNeg
                            }
                        }
                        Some(n) if n.fract() == 0.0 => sa,
                        _ if sa.is_nonneg() => NonNeg,
                        _ => Unknown,
                    }
                }
            }
        }
        Expr::Piecewise { .. } => Unknown,
    }
}

/// Whether `e` is defined at every admissible binding.
pub fn is_total(e: &Expr) -> bool {
    match e {
        Expr::Num(_) | Expr::Const(_) | Expr::Var(_) => true,
        Expr::Unary(op, a) => {
            is_total(a)
                && match op {
                    UnaryOp::Sqrt => sign_of(a).is_nonneg(),
                    UnaryOp::Ln => sign_of(a).is_positive(),
                    UnaryOp::Tan => is_constant(a) && eval(e, &Bindings::new()).is_defined(),
                    _ => true,
                }
        }
        Expr::Binary(op, a, b) => {
            is_total(a)
                && is_total(b)
                && match op {
                    BinaryOp::Div => sign_of(b).is_strict(),
                    BinaryOp::Pow => {
                        let sa = sign_of(a);
                        sa.is_positive()
                            || b.as_num().is_some_and(|n| {
                                (n.fract() == 0.0 && (n >= 0.0 || sa.is_strict()))
                                    || (n > 0.0 && sa.is_nonneg())
                            })
                            || is_natural_valued(b)
                    }
                    _ => true,
                }
        }
        Expr::Piecewise { branches, default } => {
            default.as_ref().is_some_and(|d| is_total(d))
                && branches.iter().all(|br| {
                    is_total(&br.guard.lhs) && is_total(&br.guard.rhs) && is_total(&br.value)
                })
        }
    }
}

/// Whether `e` takes only natural values (including zero), such as `∞ + 1`
/// or `2 * k`.
fn is_natural_valued(e: &Expr) -> bool {
    match e {
        Expr::Var(Var::Index) | Expr::Var(Var::Position) => true,
        Expr::Num(v) => *v >= 0.0 && is_integer(*v),
        Expr::Binary(BinaryOp::Add | BinaryOp::Mul, a, b) => {
            is_natural_valued(a) && is_natural_valued(b)
        }
        Expr::Binary(BinaryOp::Sub, a, b) => {
            // ∞ - 1 and k - 1 are natural since both start at 1
            matches!(**a, Expr::Var(Var::Index) | Expr::Var(Var::Position)) && b.is_num(1.0)
        }
        _ => false,
    }
}

fn step(e: &Expr) -> Expr {
    let e = match e {
        Expr::Num(_) | Expr::Const(_) | Expr::Var(_) => return e.clone(),
        Expr::Unary(op, a) => unary_rules(*op, step(a)),
        Expr::Binary(op, a, b) => Expr::binary(*op, step(a), step(b)),
        Expr::Piecewise { branches, default } => prune_piecewise(
            branches
                .iter()
                .map(|br| Branch {
                    guard: Guard {
                        lhs: step(&br.guard.lhs),
                        rel: br.guard.rel,
                        rhs: step(&br.guard.rhs),
                    },
                    value: step(&br.value),
                })
                .collect(),
            default.as_ref().map(|d| step(d)),
        ),
    };
    match &e {
        Expr::Binary(..) | Expr::Unary(UnaryOp::Neg | UnaryOp::Sqrt | UnaryOp::Exp, _) => {
            normalize_sum(&e)
        }
        _ => e,
    }
}

/// Largest number of terms [`expand`] will produce.
const MAX_EXPANDED_TERMS: usize = 64;

/// Simplification after distributing products, quotients and small integer
/// powers over sums. Used by equality tests, where `(∞ + 1)/∞ − 1` must
/// reduce to `∂`; the plain normal form keeps quotients of sums intact.
pub fn expand(e: &Expr) -> Expr {
    let s = simplify(e);
    match distribute(&s) {
        Some(terms) => simplify(&sum_of(terms)),
        None => s,
    }
}

fn sum_of(terms: Vec<Expr>) -> Expr {
    terms
        .into_iter()
        .reduce(Expr::add)
        .unwrap_or(Expr::Num(0.0))
}

/// Additive terms of `e` after distribution, or `None` past the size cap.
fn distribute(e: &Expr) -> Option<Vec<Expr>> {
    let out = match e {
        Expr::Binary(BinaryOp::Add, a, b) => {
            let mut t = distribute(a)?;
            t.extend(distribute(b)?);
            t
        }
        Expr::Binary(BinaryOp::Sub, a, b) => {
            let mut t = distribute(a)?;
            t.extend(distribute(b)?.into_iter().map(Expr::neg));
            t
        }
        Expr::Unary(UnaryOp::Neg, a) => distribute(a)?.into_iter().map(Expr::neg).collect(),
        Expr::Binary(BinaryOp::Mul, a, b) => {
            let (ta, tb) = (distribute(a)?, distribute(b)?);
            if ta.len() * tb.len() > MAX_EXPANDED_TERMS {
                return None;
            }
            ta.iter()
                .flat_map(|x| tb.iter().map(move |y| Expr::mul(x.clone(), y.clone())))
                .collect()
        }
        Expr::Binary(BinaryOp::Div, a, b) => distribute(a)?
            .into_iter()
            .map(|x| Expr::div(x, (**b).clone()))
            .collect(),
        Expr::Binary(BinaryOp::Pow, a, k) => match k.as_num() {
            Some(m) if (2.0..=4.0).contains(&m) && m.fract() == 0.0 => {
                let base = distribute(a)?;
                let mut acc = base.clone();
                for _ in 1..m as usize {
                    if acc.len() * base.len() > MAX_EXPANDED_TERMS {
                        return None;
                    }
                    acc = acc
                        .iter()
                        .flat_map(|x| base.iter().map(move |y| Expr::mul(x.clone(), y.clone())))
                        .collect();
                }
                acc
            }
            _ => vec![e.clone()],
        },
        _ => vec![e.clone()],
    };
    (out.len() <= MAX_EXPANDED_TERMS).then_some(out)
}

// ---------------------------------------------------------------------------
// unary rules

fn is_constant(e: &Expr) -> bool {
    e.variables().is_empty()
}

/// `Some(m)` when `e` is exactly `m·π` for a literal `m`.
fn pi_multiple(e: &Expr) -> Option<f64> {
    match e {
        Expr::Const(Constant::Pi) => Some(1.0),
        Expr::Num(v) if *v == 0.0 => Some(0.0),
        Expr::Unary(UnaryOp::Neg, a) => pi_multiple(a).map(|m| -m),
        Expr::Binary(BinaryOp::Mul, a, b) => match (a.as_num(), b.as_num()) {
            (Some(c), _) => pi_multiple(b).map(|m| c * m),
            (_, Some(c)) => pi_multiple(a).map(|m| c * m),
            _ => None,
        },
        Expr::Binary(BinaryOp::Div, a, b) => b.as_num().and_then(|d| pi_multiple(a).map(|m| m / d)),
        _ => None,
    }
}

fn is_integer(v: f64) -> bool {
    v.fract() == 0.0 && v.is_finite()
}

fn special_trig(op: UnaryOp, a: &Expr) -> Option<f64> {
    let m = pi_multiple(a)?;
    let half_odd = is_integer(m - 0.5);
    match op {
        UnaryOp::Sin if is_integer(m) => Some(0.0),
        UnaryOp::Sin if half_odd => Some(if (m - 0.5).rem_euclid(2.0) == 0.0 {
            1.0
        } else {
            -1.0
        }),
        UnaryOp::Cos if is_integer(m) => Some(if m.rem_euclid(2.0) == 0.0 { 1.0 } else { -1.0 }),
        UnaryOp::Cos if half_odd => Some(0.0),
        UnaryOp::Tan if is_integer(m) => Some(0.0),
        _ => None,
    }
}

fn unary_rules(op: UnaryOp, a: Expr) -> Expr {
    if let Some(v) = special_trig(op, &a) {
        return Expr::num(v);
    }
    if let Some(x) = a.as_num() {
        let folded = match op {
            UnaryOp::Neg => Some(-x),
            UnaryOp::Abs => Some(x.abs()),
            UnaryOp::Sqrt if x >= 0.0 => {
                let r = x.sqrt();
                (r * r == x).then_some(r)
            }
            UnaryOp::Ln if x == 1.0 => Some(0.0),
            UnaryOp::Exp if x == 0.0 => Some(1.0),
            UnaryOp::Sin | UnaryOp::Tan | UnaryOp::Arctan if x == 0.0 => Some(0.0),
            UnaryOp::Cos if x == 0.0 => Some(1.0),
            _ => None,
        };
        if let Some(v) = folded {
            return Expr::num(v);
        }
        // transcendental of a literal: fold when well away from zero
        let r = eval(&Expr::unary(op, a.clone()), &Bindings::new());
        if let Value::Real { value, .. } = r {
            if value.abs() > 1e-8 && op != UnaryOp::Sqrt {
                return Expr::num(value);
            }
        }
    }
    match (op, &a) {
        (UnaryOp::Exp, Expr::Unary(UnaryOp::Ln, x)) if sign_of(x).is_positive() => (**x).clone(),
        (UnaryOp::Ln, Expr::Unary(UnaryOp::Exp, x)) => (**x).clone(),
        (UnaryOp::Ln, Expr::Const(Constant::E)) => Expr::num(1.0),
        (UnaryOp::Abs, Expr::Unary(UnaryOp::Neg, x)) => Expr::unary(UnaryOp::Abs, (**x).clone()),
        (UnaryOp::Abs, Expr::Unary(UnaryOp::Abs, _)) => a,
        (UnaryOp::Abs, x) if sign_of(x).is_nonneg() => a,
        (UnaryOp::Abs, x) if sign_of(x).is_nonpos() => Expr::neg(a),
        _ => Expr::unary(op, a),
    }
}

fn prune_piecewise(branches: Vec<Branch>, default: Option<Expr>) -> Expr {
    let mut kept = Vec::new();
    let mut default = default;
    for br in branches {
        if is_constant(&br.guard.lhs) && is_constant(&br.guard.rhs) {
            let l = eval(&br.guard.lhs, &Bindings::new());
            let r = eval(&br.guard.rhs, &Bindings::new());
            if let Some(ord) = l.compare(&r) {
                if br.guard.rel.accepts(ord) {
                    default = Some(br.value);
                    break;
                }
                continue;
            }
        }
        kept.push(br);
    }
    if kept.is_empty() {
        if let Some(d) = default {
            return d;
        }
    }
    Expr::Piecewise {
        branches: kept,
        default: default.map(Box::new),
    }
}

// ---------------------------------------------------------------------------
// sums

#[derive(Clone, Debug, PartialEq)]
struct Factor {
    base: Expr,
    exp: Expr,
}

#[derive(Clone, Debug)]
struct Term {
    coef: f64,
    mag: f64,
    factors: Vec<Factor>,
}

fn snap(sum: f64, mag: f64) -> f64 {
    if sum.abs() <= 4.0 * UNIT_ROUNDOFF * mag {
        0.0
    } else {
        sum
    }
}

fn collect_sum(e: &Expr, sign: f64, terms: &mut Vec<Term>, constant: &mut (f64, f64)) {
    match e {
        Expr::Binary(BinaryOp::Add, a, b) => {
            collect_sum(a, sign, terms, constant);
            collect_sum(b, sign, terms, constant);
        }
        Expr::Binary(BinaryOp::Sub, a, b) => {
            collect_sum(a, sign, terms, constant);
            collect_sum(b, -sign, terms, constant);
        }
        Expr::Unary(UnaryOp::Neg, a) => collect_sum(a, -sign, terms, constant),
        Expr::Num(v) => {
            constant.0 += sign * v;
            constant.1 += v.abs();
        }
        _ => {
            let (coef, factors) = normalize_product(e);
            if factors.is_empty() {
                constant.0 += sign * coef;
                constant.1 += coef.abs();
                return;
            }
            let c = sign * coef;
            match terms.iter_mut().find(|t| t.factors == factors) {
                Some(t) => {
                    t.coef += c;
                    t.mag += c.abs();
                }
                None => terms.push(Term {
                    coef: c,
                    mag: c.abs(),
                    factors,
                }),
            }
        }
    }
}

fn factors_cmp(a: &[Factor], b: &[Factor]) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let o = canonical_cmp(&x.base, &y.base).then_with(|| canonical_cmp(&x.exp, &y.exp));
        if o != Ordering::Equal {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

fn normalize_sum(e: &Expr) -> Expr {
    let mut terms = Vec::new();
    let mut constant = (0.0, 0.0);
    collect_sum(e, 1.0, &mut terms, &mut constant);
    let constant = snap(constant.0, constant.1);
    let mut kept: Vec<Term> = Vec::new();
    for mut t in terms {
        t.coef = snap(t.coef, t.mag);
        if t.coef == 0.0 && t.factors.iter().all(|f| factor_is_total(f)) {
            continue;
        }
        kept.push(t);
    }
    kept.sort_by(|a, b| factors_cmp(&a.factors, &b.factors));

    let mut acc: Option<Expr> = None;
    for t in &kept {
        acc = Some(match acc {
            None => build_term(t.coef, &t.factors),
            Some(prev) if t.coef < 0.0 => Expr::sub(prev, build_term(-t.coef, &t.factors)),
            Some(prev) => Expr::add(prev, build_term(t.coef, &t.factors)),
        });
    }
    match acc {
        None => Expr::num(constant),
        Some(prev) if constant > 0.0 => Expr::add(prev, Expr::num(constant)),
        Some(prev) if constant < 0.0 => Expr::sub(prev, Expr::num(-constant)),
        Some(prev) => prev,
    }
}

// ---------------------------------------------------------------------------
// products

fn factor_is_total(f: &Factor) -> bool {
    is_total(&Expr::pow(f.base.clone(), f.exp.clone()))
}

fn scale_exponent(exp: &Expr, m: f64) -> Expr {
    if m == 1.0 {
        return exp.clone();
    }
    match exp.as_num() {
        Some(v) => Expr::num(v * m + 0.0),
        None => simplify(&Expr::mul(Expr::num(m), exp.clone())),
    }
}

struct Product {
    coef: f64,
    factors: Vec<Factor>,
}

impl Product {
    fn push(&mut self, base: Expr, exp: Expr) {
        self.factors.push(Factor { base, exp });
    }

    // `m` is the integer (or one-half, for square roots) power applied to `e`.
    fn collect(&mut self, e: &Expr, m: f64) {
        match e {
            Expr::Num(v) => {
                let r = v.powf(m);
                if r.is_finite() && (r != 0.0 || *v == 0.0) && !(*v == 0.0 && m < 0.0) {
                    self.coef *= r;
                } else {
                    self.push(e.clone(), Expr::num(m));
                }
            }
            Expr::Unary(UnaryOp::Neg, a) => {
                if is_integer(m) {
                    if (m / 2.0).fract() != 0.0 {
                        self.coef = -self.coef;
                    }
                    self.collect(a, m);
                } else {
                    self.push(e.clone(), Expr::num(m));
                }
            }
            Expr::Binary(BinaryOp::Mul, a, b) if is_integer(m) => {
                self.collect(a, m);
                self.collect(b, m);
            }
            // a reciprocal moves `b` out of a denominator, so it must be nonzero
            Expr::Binary(BinaryOp::Div, a, b)
                if is_integer(m) && (m > 0.0 || sign_of(b).is_strict()) =>
            {
                self.collect(a, m);
                self.collect(b, -m);
            }
            Expr::Binary(BinaryOp::Pow, base, exp) => match exp.as_num() {
                Some(n) if is_integer(n) && n != 0.0 && is_integer(m) => self.collect(base, n * m),
                _ => {
                    if m == 1.0 {
                        self.push_power(base, exp);
                    } else if sign_of(base).is_positive() {
                        self.push_power(base, &scale_exponent(exp, m));
                    } else {
                        self.push(e.clone(), Expr::num(m));
                    }
                }
            },
            Expr::Unary(UnaryOp::Sqrt, a) => {
                if m == 1.0 {
                    self.push_power(a, &Expr::num(0.5));
                } else if sign_of(a).is_nonneg() {
                    self.push((**a).clone(), Expr::num(0.5 * m));
                } else {
                    self.push(e.clone(), Expr::num(m));
                }
            }
            Expr::Unary(UnaryOp::Exp, a) => {
                self.push(Expr::Const(Constant::E), scale_exponent(a, m));
            }
            _ => self.push(e.clone(), Expr::num(m)),
        }
    }

    fn push_power(&mut self, base: &Expr, exp: &Expr) {
        match base {
            Expr::Unary(UnaryOp::Exp, a) => {
                let prod = simplify(&Expr::mul((**a).clone(), exp.clone()));
                self.push(Expr::Const(Constant::E), prod);
            }
            Expr::Binary(BinaryOp::Pow, inner, a) if sign_of(inner).is_positive() => {
                let prod = simplify(&Expr::mul((**a).clone(), exp.clone()));
                self.push_power(inner, &prod);
            }
            Expr::Unary(UnaryOp::Sqrt, inner) if sign_of(inner).is_nonneg() => {
                let prod = simplify(&Expr::mul(Expr::num(0.5), exp.clone()));
                self.push((**inner).clone(), prod);
            }
            _ => self.push(base.clone(), exp.clone()),
        }
    }
}

fn integer_exponent(e: &Expr) -> Option<f64> {
    e.as_num().filter(|v| is_integer(*v))
}

/// Splits a product into a numeric coefficient and merged, sorted factors.
fn normalize_product(e: &Expr) -> (f64, Vec<Factor>) {
    let mut p = Product {
        coef: 1.0,
        factors: Vec::new(),
    };
    p.collect(e, 1.0);

    // group equal bases, preserving first-occurrence order
    let mut groups: Vec<(Expr, Vec<Expr>)> = Vec::new();
    for f in p.factors {
        match groups.iter_mut().find(|(b, _)| *b == f.base) {
            Some((_, exps)) => exps.push(f.exp),
            None => groups.push((f.base, vec![f.exp])),
        }
    }

    let mut out = Vec::new();
    for (base, exps) in groups {
        let positive = sign_of(&base).is_positive();
        let ints: Option<Vec<f64>> = exps.iter().map(integer_exponent).collect();
        let mergeable = positive
            || ints
                .as_ref()
                .is_some_and(|v| v.iter().all(|x| *x > 0.0) || v.iter().all(|x| *x < 0.0));
        if mergeable && exps.len() > 1 {
            let total = exps.into_iter().reduce(Expr::add).unwrap();
            out.push(Factor {
                base,
                exp: simplify(&total),
            });
        } else {
            out.extend(exps.into_iter().map(|exp| Factor {
                base: base.clone(),
                exp,
            }));
        }
    }

    let mut coef = p.coef;
    out.retain(|f| {
        if f.exp.is_num(0.0) && is_total(&f.base) {
            return false;
        }
        if let (Some(b), Some(x)) = (f.base.as_num(), f.exp.as_num()) {
            let r = b.powf(x);
            if r.is_finite() && r != 0.0 && b > 0.0 {
                coef *= r;
                return false;
            }
        }
        true
    });
    out.sort_by(|a, b| canonical_cmp(&a.base, &b.base).then_with(|| canonical_cmp(&a.exp, &b.exp)));
    (coef, out)
}

fn build_factor(base: &Expr, exp: &Expr) -> Expr {
    if exp.is_num(1.0) {
        return base.clone();
    }
    if matches!(base, Expr::Const(Constant::E)) {
        return Expr::unary(UnaryOp::Exp, exp.clone());
    }
    if exp.is_num(0.5) {
        return Expr::unary(UnaryOp::Sqrt, base.clone());
    }
    Expr::pow(base.clone(), exp.clone())
}

/// Small-denominator rational equal to `c`, as `(numerator, denominator)`.
fn as_rational(c: f64) -> Option<(f64, f64)> {
    (1..=64).map(f64::from).find_map(|q| {
        let p = (c * q).round();
        (p.abs() < 1e15 && p / q == c).then_some((p, q))
    })
}

fn product_of(items: Vec<Expr>) -> Expr {
    items
        .into_iter()
        .reduce(Expr::mul)
        .unwrap_or(Expr::Num(1.0))
}

fn build_term(coef: f64, factors: &[Factor]) -> Expr {
    let mut num = Vec::new();
    let mut den = Vec::new();
    for f in factors {
        match f.exp.as_num() {
            Some(v) if v < 0.0 => den.push(build_factor(&f.base, &Expr::num(-v))),
            _ => num.push(build_factor(&f.base, &f.exp)),
        }
    }
    let (p, q) = as_rational(coef).unwrap_or((coef, 1.0));
    if num.is_empty() && p < 0.0 && !den.is_empty() {
        return Expr::neg(build_term(-coef, factors));
    }
    let numerator = if num.is_empty() {
        Expr::num(p)
    } else if p == 1.0 {
        product_of(num)
    } else if p == -1.0 {
        Expr::neg(product_of(num))
    } else {
        product_of(std::iter::once(Expr::num(p)).chain(num).collect())
    };
    if q == 1.0 && den.is_empty() {
        return numerator;
    }
    let denominator = if q == 1.0 {
        product_of(den)
    } else {
        product_of(std::iter::once(Expr::num(q)).chain(den).collect())
    };
    Expr::div(numerator, denominator)
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn s(src: &str) -> Expr {
        simplify(&parse(src).unwrap())
    }

    fn same(a: &str, b: &str) {
        assert_eq!(s(a), s(b), "{a} vs {b}: {} / {}", s(a), s(b));
    }

    #[test]
    fn expansion() {
        assert_eq!(expand(&parse("(∞ + 1) / ∞ - 1").unwrap()), s("∂"));
        assert_eq!(
            expand(&parse("(1 + ∂)^2 - 1 - 2 * ∂ - ∂^2").unwrap()),
            Expr::num(0.0)
        );
        let e = expand(&parse("(ξ + 1) / ξ - 1").unwrap());
        assert_eq!(eval(&e, &Bindings::new().with_arg(0.0)), Value::NotDefined);
    }

    #[test]
    fn nested_quotient() {
        same("-∞ / (2 / ∞)", "-∞^2 / 2");
        let e = s("1 / (1 / ξ)");
        assert_eq!(eval(&e, &Bindings::new().with_arg(0.0)), Value::NotDefined);
    }

    #[test]
    fn delta_times_infinity() {
        assert_eq!(s("∂ * ∞"), Expr::num(1.0));
        assert_eq!(s("∞ * ∂"), Expr::num(1.0));
    }

    #[test]
    fn derivative_shape_closes() {
        same("∂ * ∞ * ξ^(∞ - 1) + 0", "ξ^(∞-1)");
        assert_eq!(s("∂ * ∞ * ξ^(∞ - 1) + 0").to_string(), "ξ^(∞ - 1)");
    }

    #[test]
    fn identities() {
        assert_eq!(s("ξ * 1"), parse("ξ").unwrap());
        assert_eq!(s("ξ + 0"), parse("ξ").unwrap());
        assert_eq!(s("ξ * 0"), Expr::num(0.0));
        assert_eq!(s("2 + 3 * 4"), Expr::num(14.0));
        assert_eq!(s("ξ - ξ"), Expr::num(0.0));
    }

    #[test]
    fn zero_factor_keeps_partial_domain() {
        let e = s("0 * (1 / ξ)");
        assert_ne!(e, Expr::num(0.0));
        assert_eq!(eval(&e, &Bindings::new().with_arg(0.0)), Value::NotDefined);
    }

    #[test]
    fn removable_quotient_is_kept() {
        let e = s("ξ / ξ");
        assert_eq!(eval(&e, &Bindings::new().with_arg(0.0)), Value::NotDefined);
        assert_eq!(s("∞ / ∞"), Expr::num(1.0));
    }

    #[test]
    fn phi_at_special_points() {
        same("e^(0^2 - ∞^2) / cos(π * ∂ * 0)", "e^(-∞^2)");
        assert_eq!(s("e^(∞^2 - ∞^2) / cos(π * ∂ * ∞)"), Expr::num(-1.0));
    }

    #[test]
    fn exp_log_rules() {
        assert_eq!(s("ln(exp(ξ))"), parse("ξ").unwrap());
        assert_eq!(s("exp(ln(∞))"), parse("∞").unwrap());
        assert_eq!(s("exp(ln(ξ))"), parse("exp(ln(ξ))").unwrap());
        same("exp(ξ) * exp(2 * ξ)", "exp(3 * ξ)");
    }

    #[test]
    fn sqrt_rules() {
        same("sqrt(∞) * sqrt(∞)", "∞");
        same("sqrt(∂)^2", "∂");
        same("sqrt(∞^2)", "∞");
        let e = s("sqrt(ξ)^2");
        assert_eq!(eval(&e, &Bindings::new().with_arg(-1.0)), Value::NotDefined);
    }

    #[test]
    fn rational_coefficients() {
        assert_eq!(s("-(∞^2) / 2").to_string(), "-∞^2 / 2");
        assert_eq!(s("1 - ∂").to_string(), "-∂ + 1");
    }

    #[test]
    fn constant_guards_prune() {
        assert_eq!(s("piecewise(1 < 2 : ξ ; default : 0)"), parse("ξ").unwrap());
        assert_eq!(s("piecewise(3 < 2 : ξ ; default : 0)"), Expr::num(0.0));
    }

    #[test]
    fn sign_analysis() {
        assert_eq!(sign_of(&parse("∞^2 + 1").unwrap()), SignInfo::Positive);
        assert_eq!(sign_of(&parse("-∂").unwrap()), SignInfo::Negative);
        assert_eq!(sign_of(&parse("ξ^2").unwrap()), SignInfo::NonNeg);
        assert!(is_total(&parse("∞ / (1 + ∞^2 * ξ^2)").unwrap()));
        assert!(!is_total(&parse("1 / ξ").unwrap()));
    }

    #[test]
    fn idempotent_on_examples() {
        for src in [
            "e^(ξ^2 - ∞^2) / cos(π * ∂ * ξ)",
            "∞ / (1 + ∞^2 * ξ^2)",
            "-2 * ∞^3 * ξ / (1 + ∞^2 * ξ^2)^2",
            "piecewise(|ξ| < ∂ : ∞/2 ; default : 0)",
            "(ξ + 1)^2 - ξ^(1/3) * 3",
            "0 * ln(ξ) + 2 * 0.1 * ξ",
        ] {
            let once = s(src);
            assert_eq!(simplify(&once), once, "{src}");
        }
    }
}
