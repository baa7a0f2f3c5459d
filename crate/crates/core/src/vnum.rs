//! Virtual numbers: real sequences up to eventual agreement.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::context::Context;
use crate::decision::{
    eventually, limit, limit_periodic, LimitReport, LimitResult, Observation, Outcome, Predicate,
    Verdict,
};
use crate::expr::{self, eval, simplify, BinaryOp, Bindings, Expr, Value, Var};

/// Index-wise computation backing a rule-defined number.
pub type IndexRule = Arc<dyn Fn(u64) -> Value + Send + Sync>;

#[derive(Clone)]
pub enum Repr {
    /// An expression in `∞` only.
    IndexExpr(Expr),
    /// A finite list of reals repeated from index 1.
    Periodic(Vec<f64>),
    /// An arbitrary computation, with a label for display.
    Rule { label: String, f: IndexRule },
}

#[derive(Clone)]
pub struct VirtualNumber {
    repr: Repr,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum VnumError {
    #[error("a virtual number may only depend on ∞, found {0}")]
    ForeignVariable(&'static str),
    #[error("periodic list is empty")]
    EmptyPeriodic,
    #[error("{0} is undefined at infinitely many indices")]
    Undefined(String),
}

/// Why [`reduce`] could not produce a real.
#[derive(Clone, Debug, Error, PartialEq)]
#[error("not reducible: {0}")]
pub struct NotReducible(pub LimitResult);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Magnitude {
    Infinitesimal,
    FiniteAppreciable,
    Infinite,
    Indeterminate,
}

impl Magnitude {
    pub fn name(self) -> &'static str {
        match self {
            Magnitude::Infinitesimal => "infinitesimal",
            Magnitude::FiniteAppreciable => "finite-appreciable",
            Magnitude::Infinite => "infinite",
            Magnitude::Indeterminate => "indeterminate",
        }
    }
}

impl VirtualNumber {
    /// The class of the constant sequence `(r, r, r, …)`.
    pub fn lift(r: f64) -> VirtualNumber {
        VirtualNumber {
            repr: Repr::Periodic(vec![r]),
        }
    }

    /// `∞`, the class of `(1, 2, 3, …)`.
    pub fn infinity() -> VirtualNumber {
        VirtualNumber {
            repr: Repr::IndexExpr(Expr::index()),
        }
    }

    /// `∂ = 1/∞`.
    pub fn delta() -> VirtualNumber {
        VirtualNumber {
            repr: Repr::IndexExpr(Expr::delta()),
        }
    }

    /// Number given by an expression in `∞`. Rejected if the expression is
    /// undefined at infinitely many indices as far as sampling can tell.
    pub fn from_expr(e: Expr, ctx: &Context) -> Result<VirtualNumber, VnumError> {
        let n = VirtualNumber::from_expr_unchecked(e)?;
        let Repr::IndexExpr(e) = &n.repr else {
            unreachable!()
        };
        if expr::is_total(e) {
            return Ok(n);
        }
        let defined = eventually(
            &Predicate::new(|i| Observation::from_bool(n.value_at(i).is_defined())),
            &ctx.schedule,
            ctx.execution,
        );
        if defined.fails() {
            return Err(VnumError::Undefined(e.to_string()));
        }
        Ok(n)
    }

    /// Number given by an expression in `∞`, without the definedness probe.
    pub fn from_expr_unchecked(e: Expr) -> Result<VirtualNumber, VnumError> {
        for v in e.variables() {
            if v != Var::Index {
                return Err(VnumError::ForeignVariable(v.symbol()));
            }
        }
        Ok(VirtualNumber {
            repr: Repr::IndexExpr(e),
        })
    }

    pub fn periodic(values: Vec<f64>) -> Result<VirtualNumber, VnumError> {
        if values.is_empty() {
            return Err(VnumError::EmptyPeriodic);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(VnumError::Undefined(format!("{values:?}")));
        }
        Ok(VirtualNumber {
            repr: Repr::Periodic(values),
        })
    }

    pub fn rule(
        label: impl Into<String>,
        f: impl Fn(u64) -> Value + Send + Sync + 'static,
    ) -> VirtualNumber {
        VirtualNumber {
            repr: Repr::Rule {
                label: label.into(),
                f: Arc::new(f),
            },
        }
    }

    pub fn repr(&self) -> &Repr {
        &self.repr
    }

    /// The representative as an expression in `∞`, when it has one.
    /// Constant periodic lists count as literals.
    pub fn as_expr(&self) -> Option<Expr> {
        match &self.repr {
            Repr::IndexExpr(e) => Some(e.clone()),
            Repr::Periodic(v) if v.len() == 1 => Some(Expr::num(v[0])),
            _ => None,
        }
    }

    pub fn is_rule(&self) -> bool {
        matches!(self.repr, Repr::Rule { .. })
    }

    /// Value of the representative at index `n ≥ 1`.
    pub fn value_at(&self, n: u64) -> Value {
        match &self.repr {
            Repr::IndexExpr(e) => eval(e, &Bindings::at_index(n)),
            Repr::Periodic(v) => Value::exact(v[((n - 1) as usize) % v.len()]),
            Repr::Rule { f, .. } => f(n),
        }
    }

    pub fn f64_at(&self, n: u64) -> Option<f64> {
        self.value_at(n).as_f64()
    }

    fn index_fn(&self) -> IndexRule {
        let me = self.clone();
        Arc::new(move |n| me.value_at(n))
    }
}

impl fmt::Display for VirtualNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::IndexExpr(e) => write!(f, "{e}"),
            Repr::Periodic(v) if v.len() == 1 => f.write_str(&expr::format_number(v[0])),
            Repr::Periodic(v) => {
                let parts: Vec<String> = v.iter().map(|x| expr::format_number(*x)).collect();
                write!(f, "periodic({})", parts.join(", "))
            }
            Repr::Rule { label, .. } => f.write_str(label),
        }
    }
}

impl fmt::Debug for VirtualNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VirtualNumber({self})")
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

const MAX_CYCLE: usize = 4096;

fn apply(op: BinaryOp, a: &Value, b: &Value) -> Value {
    match op {
        BinaryOp::Add => a.add(b),
        BinaryOp::Sub => a.sub(b),
        BinaryOp::Mul => a.mul(b),
        BinaryOp::Div => a.div(b),
        BinaryOp::Pow => a.pow(b),
    }
}

/// Index-wise arithmetic.
pub fn arith(op: BinaryOp, a: &VirtualNumber, b: &VirtualNumber) -> VirtualNumber {
    if let (Repr::Periodic(x), Repr::Periodic(y)) = (&a.repr, &b.repr) {
        let len = x.len() / gcd(x.len(), y.len()) * y.len();
        if len <= MAX_CYCLE {
            let vals: Option<Vec<f64>> = (0..len)
                .map(|i| {
                    let v = apply(
                        op,
                        &Value::exact(x[i % x.len()]),
                        &Value::exact(y[i % y.len()]),
                    );
                    match v {
                        Value::Real { value, .. } => Some(value),
                        _ => None,
                    }
                })
                .collect();
            if let Some(vals) = vals {
                return VirtualNumber {
                    repr: Repr::Periodic(vals),
                };
            }
        }
    }
    let symbolic = !a.is_rule() && !b.is_rule();
    if symbolic {
        if let (Some(x), Some(y)) = (a.as_expr(), b.as_expr()) {
            return VirtualNumber {
                repr: Repr::IndexExpr(simplify(&Expr::binary(op, x, y))),
            };
        }
    }
    let label = format!("({a}) {} ({b})", op_symbol(op));
    let (fa, fb) = (a.index_fn(), b.index_fn());
    VirtualNumber::rule(label, move |n| apply(op, &fa(n), &fb(n)))
}

fn op_symbol(op: BinaryOp) -> &'static str {
    match op {
        BinaryOp::Add => "+",
        BinaryOp::Sub => "-",
        BinaryOp::Mul => "*",
        BinaryOp::Div => "/",
        BinaryOp::Pow => "^",
    }
}

pub fn add(a: &VirtualNumber, b: &VirtualNumber) -> VirtualNumber {
    arith(BinaryOp::Add, a, b)
}

pub fn sub(a: &VirtualNumber, b: &VirtualNumber) -> VirtualNumber {
    arith(BinaryOp::Sub, a, b)
}

pub fn mul(a: &VirtualNumber, b: &VirtualNumber) -> VirtualNumber {
    arith(BinaryOp::Mul, a, b)
}

pub fn div(a: &VirtualNumber, b: &VirtualNumber) -> VirtualNumber {
    arith(BinaryOp::Div, a, b)
}

pub fn pow(a: &VirtualNumber, b: &VirtualNumber) -> VirtualNumber {
    arith(BinaryOp::Pow, a, b)
}

/// `−a`, exact at every index. Expressions are wrapped, not simplified.
pub fn neg(a: &VirtualNumber) -> VirtualNumber {
    let repr = match &a.repr {
        Repr::IndexExpr(e) => Repr::IndexExpr(Expr::neg(e.clone())),
        Repr::Periodic(v) => Repr::Periodic(v.iter().map(|x| -x).collect()),
        Repr::Rule { label, f } => {
            let f = f.clone();
            Repr::Rule {
                label: format!("-({label})"),
                f: Arc::new(move |n| f(n).neg()),
            }
        }
    };
    VirtualNumber { repr }
}

/// The repeating cycle of a periodic number or of an index-free constant.
fn cycle(a: &VirtualNumber) -> Option<Vec<f64>> {
    match &a.repr {
        Repr::Periodic(x) => Some(x.clone()),
        Repr::IndexExpr(e) if !e.contains_var(Var::Index) => eval(e, &Bindings::new())
            .as_f64()
            .filter(|v| v.is_finite())
            .map(|v| vec![v]),
        _ => None,
    }
}

/// Both cycles stretched to a common length, when at least one side is
/// genuinely periodic.
fn periodic_pair(a: &VirtualNumber, b: &VirtualNumber) -> Option<(Vec<f64>, Vec<f64>)> {
    if !matches!(a.repr, Repr::Periodic(_)) && !matches!(b.repr, Repr::Periodic(_)) {
        return None;
    }
    let (x, y) = (cycle(a)?, cycle(b)?);
    let len = x.len() / gcd(x.len(), y.len()) * y.len();
    (len <= MAX_CYCLE).then(|| {
        (
            (0..len).map(|i| x[i % x.len()]).collect(),
            (0..len).map(|i| y[i % y.len()]).collect(),
        )
    })
}

/// The simplified difference `a − b` when both sides are expressions,
/// expanded when that is needed to reach a constant.
fn symbolic_difference(a: &VirtualNumber, b: &VirtualNumber) -> Option<Expr> {
    if a.is_rule() || b.is_rule() {
        return None;
    }
    let d = simplify(&Expr::sub(a.as_expr()?, b.as_expr()?));
    if d.as_num().is_some() {
        return Some(d);
    }
    let x = expr::expand(&d);
    Some(if x.as_num().is_some() { x } else { d })
}

fn cmp_predicate<'a>(
    a: &'a VirtualNumber,
    b: &'a VirtualNumber,
    accept: impl Fn(std::cmp::Ordering) -> bool + Send + Sync + 'a,
) -> Predicate<'a> {
    Predicate::new(move |n| {
        let (x, y) = (a.value_at(n), b.value_at(n));
        if !x.is_defined() || !y.is_defined() {
            return Observation::Undefined;
        }
        match x.compare(&y) {
            Some(o) => Observation::from_bool(accept(o)),
            None => Observation::Undefined,
        }
    })
}

/// Whether `a` and `b` agree at every index from some point on.
pub fn end_equal(a: &VirtualNumber, b: &VirtualNumber, ctx: &Context) -> Verdict {
    if let Some((x, y)) = periodic_pair(a, b) {
        let cycle = x
            .iter()
            .zip(&y)
            .map(|(p, q)| Observation::from_bool(p == q))
            .collect();
        return eventually(&Predicate::periodic(cycle), &ctx.schedule, ctx.execution);
    }
    if let Some(d) = symbolic_difference(a, b) {
        if d.is_num(0.0) {
            return Verdict::symbolic(Outcome::Holds);
        }
        if let Some(v) = d.as_num() {
            if v.is_finite() {
                return Verdict::symbolic(Outcome::Fails);
            }
        }
    }
    eventually(
        &cmp_predicate(a, b, |o| o == std::cmp::Ordering::Equal),
        &ctx.schedule,
        ctx.execution,
    )
}

/// Eventual order relations between two numbers. Both `less` and
/// `greater` may fail when the representatives oscillate.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderVerdicts {
    pub less: Verdict,
    pub less_eq: Verdict,
    pub greater: Verdict,
    pub greater_eq: Verdict,
}

pub fn end_compare(a: &VirtualNumber, b: &VirtualNumber, ctx: &Context) -> OrderVerdicts {
    use std::cmp::Ordering::*;
    if let Some((x, y)) = periodic_pair(a, b) {
        let rel = |f: fn(f64, f64) -> bool| {
            let cycle = x
                .iter()
                .zip(&y)
                .map(|(p, q)| Observation::from_bool(f(*p, *q)))
                .collect();
            eventually(&Predicate::periodic(cycle), &ctx.schedule, ctx.execution)
        };
        return OrderVerdicts {
            less: rel(|p, q| p < q),
            less_eq: rel(|p, q| p <= q),
            greater: rel(|p, q| p > q),
            greater_eq: rel(|p, q| p >= q),
        };
    }
    if let Some(d) = symbolic_difference(b, a) {
        use expr::SignInfo::*;
        let s = expr::sign_of(&d);
        let known = |v: bool| Verdict::symbolic_bool(v);
        match s {
            Positive if expr::is_total(&d) => {
                return OrderVerdicts {
                    less: known(true),
                    less_eq: known(true),
                    greater: known(false),
                    greater_eq: known(false),
                }
            }
            Negative if expr::is_total(&d) => {
                return OrderVerdicts {
                    less: known(false),
                    less_eq: known(false),
                    greater: known(true),
                    greater_eq: known(true),
                }
            }
            Zero => {
                return OrderVerdicts {
                    less: known(false),
                    less_eq: known(true),
                    greater: known(false),
                    greater_eq: known(true),
                }
            }
            _ => {}
        }
    }
    let run = |accept: fn(std::cmp::Ordering) -> bool| {
        eventually(&cmp_predicate(a, b, accept), &ctx.schedule, ctx.execution)
    };
    OrderVerdicts {
        less: run(|o| o == Less),
        less_eq: run(|o| o != Greater),
        greater: run(|o| o == Greater),
        greater_eq: run(|o| o != Less),
    }
}

/// Limit of the representative, with the samples it rests on.
pub fn limit_of(a: &VirtualNumber, ctx: &Context) -> LimitReport {
    match &a.repr {
        Repr::Periodic(v) => LimitReport {
            result: limit_periodic(v),
            evidence: v
                .iter()
                .enumerate()
                .map(|(i, x)| (i as u64 + 1, Observation::Value(*x)))
                .collect(),
        },
        Repr::IndexExpr(e) if !e.contains_var(Var::Index) => {
            let v = eval(e, &Bindings::new());
            let result = match v.as_f64() {
                Some(x) => LimitResult::Converges {
                    value: x,
                    error: v.error_bound(),
                },
                None => LimitResult::Unknown,
            };
            LimitReport {
                result,
                evidence: Vec::new(),
            }
        }
        _ => {
            let f = a.index_fn();
            limit(&move |n| f(n), ctx)
        }
    }
}

/// `a ≈ b`: the difference tends to zero.
pub fn near(a: &VirtualNumber, b: &VirtualNumber, ctx: &Context) -> Verdict {
    let d = sub(a, b);
    if let Some(e) = d.as_expr() {
        if e.is_num(0.0) {
            return Verdict::symbolic(Outcome::Holds);
        }
    }
    let symbolic = matches!(d.repr, Repr::Periodic(_))
        || matches!(&d.repr, Repr::IndexExpr(e) if !e.contains_var(Var::Index));
    let report = limit_of(&d, ctx);
    let outcome = match report.result {
        LimitResult::Converges { value, .. } => {
            if value.abs() <= ctx.tol {
                Outcome::Holds
            } else {
                Outcome::Fails
            }
        }
        LimitResult::DivergesTo(_) | LimitResult::NoLimit => Outcome::Fails,
        LimitResult::Unknown => Outcome::Unknown,
    };
    let mut v = if symbolic {
        Verdict::symbolic(outcome)
    } else {
        Verdict {
            outcome,
            witness: None,
            evidence: Vec::new(),
            mode: crate::decision::Mode::Sampled,
        }
    };
    v.evidence = report.evidence;
    v
}

/// `a ~ b`: near but not end-equal.
pub fn adjacent(a: &VirtualNumber, b: &VirtualNumber, ctx: &Context) -> Verdict {
    let n = near(a, b, ctx);
    let e = end_equal(a, b, ctx);
    n.and(e.negate())
}

/// The real a number is near, if any.
pub fn reduce(a: &VirtualNumber, ctx: &Context) -> Result<f64, NotReducible> {
    match limit_of(a, ctx).result {
        LimitResult::Converges { value, .. } => Ok(value),
        other => Err(NotReducible(other)),
    }
}

pub fn classify(a: &VirtualNumber, ctx: &Context) -> Magnitude {
    if near(a, &VirtualNumber::lift(0.0), ctx).holds() {
        return Magnitude::Infinitesimal;
    }
    match limit_of(a, ctx).result {
        LimitResult::DivergesTo(_) => Magnitude::Infinite,
        LimitResult::Converges { value, .. } if value.abs() > ctx.tol => {
            Magnitude::FiniteAppreciable
        }
        _ => {
            // bounded away from 0 and from infinity on the tail of the schedule
            let stages = ctx.schedule.stages();
            let tail: Vec<u64> = stages[stages.len() / 2..]
                .iter()
                .flatten()
                .copied()
                .collect();
            let mags: Option<Vec<f64>> = tail.iter().map(|n| a.f64_at(*n).map(f64::abs)).collect();
            match mags {
                Some(m) if !m.is_empty() => {
                    let lo = m.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = m.iter().copied().fold(0.0, f64::max);
                    if lo > 1e-3 && hi < 1e6 {
                        Magnitude::FiniteAppreciable
                    } else {
                        Magnitude::Indeterminate
                    }
                }
                _ => Magnitude::Indeterminate,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn ctx() -> Context {
        Context::default()
    }

    fn num(src: &str) -> VirtualNumber {
        VirtualNumber::from_expr(parse(src).unwrap(), &ctx()).unwrap()
    }

    fn pm2() -> VirtualNumber {
        VirtualNumber::periodic(vec![-2.0, 2.0]).unwrap()
    }

    #[test]
    fn constructors() {
        assert!(matches!(VirtualNumber::lift(2.0).repr(), Repr::Periodic(v) if v == &vec![2.0]));
        assert_eq!(VirtualNumber::infinity().f64_at(7), Some(7.0));
        assert_eq!(VirtualNumber::delta().as_expr(), Some(Expr::delta()));
        assert_eq!(pm2().f64_at(1), Some(-2.0));
        assert!(VirtualNumber::from_expr(parse("ξ").unwrap(), &ctx()).is_err());
        assert!(VirtualNumber::periodic(vec![]).is_err());
        assert!(VirtualNumber::from_expr(parse("ln(-∞)").unwrap(), &ctx()).is_err());
    }

    #[test]
    fn arithmetic() {
        let c = ctx();
        let one = VirtualNumber::lift(1.0);
        let p = mul(&VirtualNumber::delta(), &VirtualNumber::infinity());
        assert!(end_equal(&p, &one, &c).holds());
        let q = sub(&one, &VirtualNumber::delta());
        assert_eq!(q.f64_at(4), Some(0.75));
        let sq = pow(&VirtualNumber::infinity(), &VirtualNumber::lift(2.0));
        assert_eq!(sq.f64_at(9), Some(81.0));
    }

    #[test]
    fn equality() {
        let c = ctx();
        let v = end_equal(&pm2(), &VirtualNumber::lift(2.0), &c);
        assert!(v.fails());
        let r = VirtualNumber::rule("sin(n)/n", |n| Value::exact((n as f64).sin() / n as f64));
        assert!(end_equal(&VirtualNumber::lift(0.0), &r, &c).fails());
    }

    #[test]
    fn order() {
        let c = ctx();
        let o = end_compare(&VirtualNumber::delta(), &VirtualNumber::lift(0.001), &c);
        assert!(o.less.holds());
        let o = end_compare(&VirtualNumber::lift(0.0), &VirtualNumber::delta(), &c);
        assert!(o.less.holds());
        let o = end_compare(&pm2(), &VirtualNumber::lift(0.0), &c);
        assert!(o.less.fails() && o.greater.fails());
    }

    #[test]
    fn nearness() {
        let c = ctx();
        assert!(near(&num("sqrt(∂)"), &VirtualNumber::lift(0.0), &c).holds());
        assert!(near(&num("1 - ∂"), &VirtualNumber::lift(1.0), &c).holds());
        assert!(adjacent(&VirtualNumber::delta(), &VirtualNumber::lift(0.0), &c).holds());
        assert!(adjacent(&VirtualNumber::lift(1.0), &VirtualNumber::lift(1.0), &c).fails());
        assert!(adjacent(&VirtualNumber::infinity(), &VirtualNumber::lift(0.0), &c).fails());
    }

    #[test]
    fn reduction_and_classes() {
        let c = ctx();
        assert!((reduce(&num("1 - ∂"), &c).unwrap() - 1.0).abs() < 1e-8);
        assert!(matches!(
            reduce(&VirtualNumber::infinity(), &c),
            Err(NotReducible(LimitResult::DivergesTo(_)))
        ));
        assert_eq!(reduce(&pm2(), &c), Err(NotReducible(LimitResult::NoLimit)));
        assert_eq!(reduce(&VirtualNumber::lift(0.1), &c), Ok(0.1));
        assert_eq!(
            classify(&VirtualNumber::delta(), &c),
            Magnitude::Infinitesimal
        );
        assert_eq!(classify(&num("∞^2"), &c), Magnitude::Infinite);
        assert_eq!(classify(&num("2 + ∂"), &c), Magnitude::FiniteAppreciable);
        assert_eq!(classify(&pm2(), &c), Magnitude::FiniteAppreciable);
    }
}
