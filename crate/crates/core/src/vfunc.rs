//! Virtual functions: sequences of real functions applied index by index.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::context::Context;
use crate::decision::{eventually, Observation, Outcome, Predicate, Verdict};
use crate::expr::{
    self, differentiate, eval, is_total, simplify, BinaryOp, Bindings, BreakpointKind, Expr, Value,
    Var,
};
use crate::vnum::{Repr, VirtualNumber};

/// Member `f_n` of a rule-defined family, evaluated at `x`.
pub type MemberRule = Arc<dyn Fn(u64, f64) -> Value + Send + Sync>;

#[derive(Clone)]
pub enum Family {
    /// An expression in `∞` and `ξ`.
    Expr(Expr),
    /// Branchwise derivative of a piecewise family. On a guard boundary of
    /// `primal` the value is kept only if the primal member is continuous
    /// there and the one-sided derivatives agree.
    Derived {
        expr: Expr,
        primal: Expr,
    },
    Rule {
        label: String,
        f: MemberRule,
    },
    /// Members taken cyclically from the listed families.
    Interleaved(Vec<VirtualFunction>),
    /// The function with empty domain.
    Empty,
}

#[derive(Clone)]
pub struct VirtualFunction {
    family: Family,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum VfuncError {
    #[error("a virtual function may only depend on ∞ and ξ, found {0}")]
    ForeignVariable(&'static str),
    #[error("a lifted real function cannot depend on ∞")]
    DependsOnIndex,
    #[error("{function} is not defined at {point}")]
    NotDefined { function: String, point: String },
    #[error("not strictly monotone on the bracket at index {0}")]
    NotMonotone(u64),
    #[error("interleaving needs at least one family")]
    EmptyInterleave,
}

/// Relative agreement required by sampled function equality.
pub const EQUALITY_TOL: f64 = 1e-9;

const BOUNDARY_TOL: f64 = 1e-9;
const LADDER_STEPS: i32 = 4;
const DERIVATIVE_AGREEMENT: f64 = 1e-6;

impl VirtualFunction {
    /// Family given by an expression in `∞` and `ξ`.
    pub fn from_expr(e: Expr) -> Result<VirtualFunction, VfuncError> {
        for v in e.variables() {
            if v == Var::Position {
                return Err(VfuncError::ForeignVariable(v.symbol()));
            }
        }
        Ok(VirtualFunction {
            family: Family::Expr(e),
        })
    }

    /// The constant family `⟨f, f, …⟩` of a real function.
    pub fn lift_function(e: Expr) -> Result<VirtualFunction, VfuncError> {
        if e.contains_var(Var::Index) {
            return Err(VfuncError::DependsOnIndex);
        }
        VirtualFunction::from_expr(e)
    }

    pub fn identity() -> VirtualFunction {
        VirtualFunction {
            family: Family::Expr(Expr::arg()),
        }
    }

    pub fn empty() -> VirtualFunction {
        VirtualFunction {
            family: Family::Empty,
        }
    }

    pub fn rule(
        label: impl Into<String>,
        f: impl Fn(u64, f64) -> Value + Send + Sync + 'static,
    ) -> VirtualFunction {
        VirtualFunction {
            family: Family::Rule {
                label: label.into(),
                f: Arc::new(f),
            },
        }
    }

    /// Family whose member at index `n` is the member of `slots[(n-1) % len]`.
    /// An empty slot recurs forever, so such a family has empty domain.
    pub fn interleaved(slots: Vec<VirtualFunction>) -> Result<VirtualFunction, VfuncError> {
        if slots.is_empty() {
            return Err(VfuncError::EmptyInterleave);
        }
        if slots.iter().any(VirtualFunction::is_empty) {
            return Ok(VirtualFunction::empty());
        }
        if slots.len() == 1 {
            return Ok(slots.into_iter().next().unwrap());
        }
        Ok(VirtualFunction {
            family: Family::Interleaved(slots),
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn is_empty(&self) -> bool {
        matches!(self.family, Family::Empty)
    }

    pub fn as_expr(&self) -> Option<&Expr> {
        match &self.family {
            Family::Expr(e) => Some(e),
            _ => None,
        }
    }

    /// Value of the member `f_n` at `x`.
    pub fn member_value(&self, n: u64, x: f64) -> Value {
        match &self.family {
            Family::Expr(e) => eval(e, &Bindings::at_index(n).with_arg(x)),
            Family::Derived { expr, primal } => {
                if on_guard_boundary(primal, n, x) && !boundary_derivable(expr, primal, n, x) {
                    return Value::NotDefined;
                }
                eval(expr, &Bindings::at_index(n).with_arg(x))
            }
            Family::Rule { f, .. } => f(n, x),
            Family::Interleaved(slots) => slots[slot(n, slots.len())].member_value(n, x),
            Family::Empty => Value::NotDefined,
        }
    }

    fn member_at_point(&self, n: u64, point: &VirtualNumber) -> Value {
        match point.value_at(n).as_f64() {
            Some(x) => self.member_value(n, x),
            None => Value::NotDefined,
        }
    }

    /// Whether `f_n` is continuous at `x`, with `Undefined` off the domain.
    pub fn member_continuous(&self, n: u64, x: f64) -> Observation {
        let fx = self.member_value(n, x);
        if !fx.is_defined() {
            return Observation::Undefined;
        }
        match &self.family {
            Family::Expr(e) | Family::Derived { expr: e, .. } => {
                if e.contains_piecewise() && on_guard_boundary(e, n, x) {
                    Observation::from_bool(ladder_continuous(|t| self.member_value(n, t), x))
                } else {
                    Observation::True
                }
            }
            Family::Interleaved(slots) => slots[slot(n, slots.len())].member_continuous(n, x),
            Family::Rule { .. } => {
                Observation::from_bool(ladder_continuous(|t| self.member_value(n, t), x))
            }
            Family::Empty => Observation::Undefined,
        }
    }
}

fn slot(n: u64, len: usize) -> usize {
    ((n - 1) % len as u64) as usize
}

/// Whether some guard of `e` has equal sides at `(n, x)`.
fn on_guard_boundary(e: &Expr, n: u64, x: f64) -> bool {
    let b = Bindings::at_index(n).with_arg(x);
    e.guards().iter().any(
        |g| match (expr::eval_f64(&g.lhs, &b), expr::eval_f64(&g.rhs, &b)) {
            (Some(l), Some(r)) => (l - r).abs() <= BOUNDARY_TOL * l.abs().max(r.abs()) + 1e-12,
            _ => false,
        },
    )
}

fn ladder_scale(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.abs()
    }
}

/// One-sided limit test on a shrinking step ladder `h = s·10^-(6+k)`.
/// Continuous when the last deviation is negligible or the deviations
/// shrink at least fivefold per decade.
fn ladder_continuous(f: impl Fn(f64) -> Value, x: f64) -> bool {
    let Some(fx) = f(x).as_f64() else {
        return false;
    };
    let s = ladder_scale(x);
    let mut devs = Vec::with_capacity(LADDER_STEPS as usize);
    for k in 0..LADDER_STEPS {
        let h = s * 10f64.powi(-(6 + k));
        let mut d: f64 = 0.0;
        for t in [x - h, x + h] {
            if let Some(v) = f(t).as_f64() {
                d = d.max((v - fx).abs());
            }
        }
        devs.push(d);
    }
    let last = *devs.last().unwrap();
    if last <= 1e-8 * fx.abs().max(1.0) {
        return true;
    }
    devs.windows(2).all(|w| w[1] <= w[0] / 5.0)
}

fn boundary_derivable(derived: &Expr, primal: &Expr, n: u64, x: f64) -> bool {
    let at = |e: &Expr, t: f64| eval(e, &Bindings::at_index(n).with_arg(t));
    if !ladder_continuous(|t| at(primal, t), x) {
        return false;
    }
    let h = ladder_scale(x) * 1e-9;
    match (at(derived, x - h).as_f64(), at(derived, x + h).as_f64()) {
        (Some(l), Some(r)) => (l - r).abs() <= DERIVATIVE_AGREEMENT * l.abs().max(r.abs()).max(1.0),
        _ => true,
    }
}

impl fmt::Display for VirtualFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Expr(e) | Family::Derived { expr: e, .. } => write!(f, "ξ ↦ {e}"),
            Family::Rule { label, .. } => f.write_str(label),
            Family::Interleaved(slots) => {
                let parts: Vec<String> = slots.iter().map(|s| s.to_string()).collect();
                write!(f, "⟨{}, …⟩", parts.join(", "))
            }
            Family::Empty => f.write_str("Ø"),
        }
    }
}

impl fmt::Debug for VirtualFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VirtualFunction({self})")
    }
}

/// Symbolic member expression with the argument replaced by the number.
fn substituted(phi: &VirtualFunction, point: &VirtualNumber) -> Option<Expr> {
    let e = phi.as_expr()?;
    if point.is_rule() {
        return None;
    }
    Some(simplify(&e.substitute(Var::Arg, &point.as_expr()?)))
}

/// Whether `point` is eventually in the domain of `phi`.
pub fn defined_at(phi: &VirtualFunction, point: &VirtualNumber, ctx: &Context) -> Verdict {
    if phi.is_empty() {
        return Verdict::symbolic(Outcome::Fails);
    }
    if let Some(e) = substituted(phi, point) {
        if is_total(&e) {
            return Verdict::symbolic(Outcome::Holds);
        }
        if !e.contains_var(Var::Index) {
            return Verdict::symbolic_bool(eval(&e, &Bindings::new()).is_defined());
        }
    }
    eventually(
        &Predicate::new(|n| Observation::from_bool(phi.member_at_point(n, point).is_defined())),
        &ctx.schedule,
        ctx.execution,
    )
}

fn not_defined(phi: &VirtualFunction, point: &VirtualNumber) -> VfuncError {
    VfuncError::NotDefined {
        function: phi.to_string(),
        point: point.to_string(),
    }
}

/// `phi(point)`, the class of `f_n(x_n)`.
pub fn evaluate(
    phi: &VirtualFunction,
    point: &VirtualNumber,
    ctx: &Context,
) -> Result<VirtualNumber, VfuncError> {
    if defined_at(phi, point, ctx).fails() {
        return Err(not_defined(phi, point));
    }
    Ok(evaluate_unchecked(phi, point))
}

/// `phi(point)` without the domain check; undefined indices stay undefined.
pub fn evaluate_unchecked(phi: &VirtualFunction, point: &VirtualNumber) -> VirtualNumber {
    if let Some(e) = substituted(phi, point) {
        if let Ok(v) = VirtualNumber::from_expr_unchecked(e) {
            return v;
        }
    }
    if let (Some(e), Repr::Periodic(xs)) = (phi.as_expr(), point.repr()) {
        if !e.contains_var(Var::Index) {
            let vals: Option<Vec<f64>> = xs
                .iter()
                .map(|x| match eval(e, &Bindings::new().with_arg(*x)) {
                    Value::Real { value, .. } => Some(value),
                    _ => None,
                })
                .collect();
            if let Some(Ok(v)) = vals.map(VirtualNumber::periodic) {
                return v;
            }
        }
    }
    let (f, x) = (phi.clone(), point.clone());
    VirtualNumber::rule(format!("({phi})({point})"), move |n| {
        f.member_at_point(n, &x)
    })
}

/// `outer ∘ inner`, defined where `inner` is and its value is in the domain of `outer`.
pub fn compose(outer: &VirtualFunction, inner: &VirtualFunction) -> VirtualFunction {
    if outer.is_empty() || inner.is_empty() {
        return VirtualFunction::empty();
    }
    if let (Some(o), Some(i)) = (outer.as_expr(), inner.as_expr()) {
        return VirtualFunction {
            family: Family::Expr(simplify(&o.substitute(Var::Arg, i))),
        };
    }
    let (o, i) = (outer.clone(), inner.clone());
    VirtualFunction::rule(format!("({outer}) ∘ ({inner})"), move |n, x| {
        match i.member_value(n, x).as_f64() {
            Some(y) => o.member_value(n, y),
            None => Value::NotDefined,
        }
    })
}

fn apply(op: BinaryOp, a: &Value, b: &Value) -> Value {
    match op {
        BinaryOp::Add => a.add(b),
        BinaryOp::Sub => a.sub(b),
        BinaryOp::Mul => a.mul(b),
        BinaryOp::Div => a.div(b),
        BinaryOp::Pow => a.pow(b),
    }
}

/// Index-wise algebra; the domain is the intersection plus whatever the
/// operation itself excludes.
pub fn pointwise(op: BinaryOp, a: &VirtualFunction, b: &VirtualFunction) -> VirtualFunction {
    if a.is_empty() || b.is_empty() {
        return VirtualFunction::empty();
    }
    if let (Some(x), Some(y)) = (a.as_expr(), b.as_expr()) {
        return VirtualFunction {
            family: Family::Expr(simplify(&Expr::binary(op, x.clone(), y.clone()))),
        };
    }
    let (fa, fb) = (a.clone(), b.clone());
    VirtualFunction::rule(format!("({a}) {op:?} ({b})"), move |n, x| {
        apply(op, &fa.member_value(n, x), &fb.member_value(n, x))
    })
}

const MONOTONE_PROBES: usize = 33;

/// Index-wise inverse on the bracket `[lo, hi]`, computed by bisection.
/// Each member must be strictly monotone on its bracket; this is checked
/// at the schedule indices.
pub fn invert(
    phi: &VirtualFunction,
    lo: &VirtualNumber,
    hi: &VirtualNumber,
    ctx: &Context,
) -> Result<VirtualFunction, VfuncError> {
    for n in ctx.schedule.indices() {
        let (Some(a), Some(b)) = (lo.f64_at(n), hi.f64_at(n)) else {
            return Err(VfuncError::NotMonotone(n));
        };
        let ys: Option<Vec<f64>> = (0..MONOTONE_PROBES)
            .map(|i| {
                let t = a + (b - a) * i as f64 / (MONOTONE_PROBES - 1) as f64;
                phi.member_value(n, t).as_f64()
            })
            .collect();
        let Some(ys) = ys else {
            return Err(VfuncError::NotMonotone(n));
        };
        let up = ys.windows(2).all(|w| w[1] > w[0]);
        let down = ys.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(VfuncError::NotMonotone(n));
        }
    }
    let (f, lo, hi) = (phi.clone(), lo.clone(), hi.clone());
    Ok(VirtualFunction::rule(
        format!("inverse of ({phi})"),
        move |n, y| {
            let (Some(a), Some(b)) = (lo.f64_at(n), hi.f64_at(n)) else {
                return Value::NotDefined;
            };
            bisect(|t| f.member_value(n, t).as_f64(), y, a.min(b), a.max(b))
        },
    ))
}

fn bisect(f: impl Fn(f64) -> Option<f64>, y: f64, mut a: f64, mut b: f64) -> Value {
    let (Some(fa), Some(fb)) = (f(a), f(b)) else {
        return Value::NotDefined;
    };
    let increasing = fb > fa;
    let (lo, hi) = if increasing { (fa, fb) } else { (fb, fa) };
    if y < lo || y > hi {
        return Value::NotDefined;
    }
    if y == fa {
        return Value::exact(a);
    }
    if y == fb {
        return Value::exact(b);
    }
    while b - a > 1e-12 * a.abs().max(b.abs()).max(1.0) {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let Some(fm) = f(m) else {
            return Value::NotDefined;
        };
        if (fm < y) == increasing {
            a = m;
        } else {
            b = m;
        }
    }
    Value::approx(0.5 * (a + b), 0.5 * (b - a))
}

const CONSTANCY_PROBES: [f64; 5] = [-2.5, -0.75, 0.4, 1.3, 3.1];

/// Whether every member is a constant function.
pub fn is_constant(phi: &VirtualFunction, ctx: &Context) -> Verdict {
    match &phi.family {
        // vacuously: no member has two points to disagree on
        Family::Empty => return Verdict::symbolic(Outcome::Holds),
        Family::Expr(e) if !simplify(e).contains_var(Var::Arg) => {
            return Verdict::symbolic(Outcome::Holds)
        }
        _ => {}
    }
    eventually(
        &Predicate::new(|n| {
            let vals: Vec<Value> = CONSTANCY_PROBES
                .iter()
                .map(|x| phi.member_value(n, *x))
                .filter(Value::is_defined)
                .collect();
            if vals.is_empty() {
                return Observation::Undefined;
            }
            Observation::from_bool(vals.iter().all(|v| values_match(v, &vals[0], EQUALITY_TOL)))
        }),
        &ctx.schedule,
        ctx.execution,
    )
}

fn values_match(a: &Value, b: &Value, rel: f64) -> bool {
    match (a, b) {
        (Value::Real { value: x, err: ex }, Value::Real { value: y, err: ey }) => {
            (x - y).abs() <= ex + ey + rel * x.abs().max(y.abs()).max(1.0)
        }
        (Value::NotDefined, Value::NotDefined) => true,
        _ => a.approx_eq(b).unwrap_or(false),
    }
}

/// Whether `phi` is continuous at `point`.
pub fn continuous_at(
    phi: &VirtualFunction,
    point: &VirtualNumber,
    ctx: &Context,
) -> Result<Verdict, VfuncError> {
    let defined = defined_at(phi, point, ctx);
    if defined.fails() {
        return Err(not_defined(phi, point));
    }
    // elementary members are continuous on their whole domain
    if let Some(e) = phi.as_expr() {
        if !e.contains_piecewise() {
            return Ok(defined);
        }
    }
    Ok(eventually(
        &Predicate::new(|n| match point.f64_at(n) {
            Some(x) => phi.member_continuous(n, x),
            None => Observation::Undefined,
        }),
        &ctx.schedule,
        ctx.execution,
    ))
}

const PROBE_POINTS: [f64; 7] = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0];

/// Whether `phi` is continuous at every point of its domain.
pub fn is_continuous(phi: &VirtualFunction, ctx: &Context) -> Verdict {
    match &phi.family {
        Family::Empty => Verdict::symbolic(Outcome::Holds),
        Family::Expr(e) if !e.contains_piecewise() => Verdict::symbolic(Outcome::Holds),
        Family::Expr(e) | Family::Derived { expr: e, .. } => {
            let bps = expr::breakpoints(e, Var::Arg);
            let mut verdict = Verdict::symbolic(Outcome::Holds);
            for at in bps.of_kind(BreakpointKind::Guard) {
                let Ok(point) = VirtualNumber::from_expr_unchecked(at) else {
                    return Verdict::unknown(Vec::new());
                };
                if defined_at(phi, &point, ctx).fails() {
                    continue;
                }
                let v =
                    continuous_at(phi, &point, ctx).unwrap_or_else(|_| Verdict::unknown(vec![]));
                verdict = verdict.and(v);
                if verdict.fails() {
                    return verdict;
                }
            }
            if !bps.is_complete() && verdict.holds() {
                return Verdict::unknown(verdict.evidence);
            }
            verdict
        }
        Family::Interleaved(slots) => slots
            .iter()
            .map(|s| is_continuous(s, ctx))
            .reduce(Verdict::and)
            .unwrap(),
        Family::Rule { .. } => {
            let mut verdict = Verdict::symbolic(Outcome::Holds);
            for x in PROBE_POINTS {
                if let Ok(v) = continuous_at(phi, &VirtualNumber::lift(x), ctx) {
                    verdict = verdict.and(v);
                }
            }
            // sampled points never establish continuity everywhere
            if verdict.holds() {
                Verdict::unknown(verdict.evidence)
            } else {
                verdict
            }
        }
    }
}

/// Index-wise derivative `(f'_1, f'_2, …)`.
pub fn derivative(phi: &VirtualFunction) -> VirtualFunction {
    let family = match &phi.family {
        Family::Expr(e) if !e.contains_piecewise() => Family::Expr(differentiate(e, Var::Arg)),
        Family::Expr(e) | Family::Derived { expr: e, .. } => Family::Derived {
            expr: differentiate(e, Var::Arg),
            primal: e.clone(),
        },
        Family::Rule { label, .. } => {
            let f = phi.clone();
            Family::Rule {
                label: format!("({label})'"),
                f: Arc::new(move |n, x| central_difference(|t| f.member_value(n, t), x)),
            }
        }
        Family::Interleaved(slots) => Family::Interleaved(slots.iter().map(derivative).collect()),
        Family::Empty => Family::Empty,
    };
    VirtualFunction { family }
}

/// Symmetric difference quotient with step `max(1e-8, 1e-6·|x|)`.
pub fn central_difference(f: impl Fn(f64) -> Value, x: f64) -> Value {
    let h = (1e-6 * x.abs()).max(1e-8);
    match (f(x - h).as_f64(), f(x).as_f64(), f(x + h).as_f64()) {
        (Some(l), Some(_), Some(r)) => {
            let d = (r - l) / (2.0 * h);
            Value::approx(d, (r.abs() + l.abs()) * f64::EPSILON / h + h * d.abs())
        }
        _ => Value::NotDefined,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Differentiability {
    NotDerivable,
    DerivableOnly,
    Differentiable,
}

impl Differentiability {
    pub fn name(self) -> &'static str {
        match self {
            Differentiability::NotDerivable => "not derivable",
            Differentiability::DerivableOnly => "derivable only",
            Differentiability::Differentiable => "differentiable",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DifferentiabilityReport {
    pub derivable: Verdict,
    pub differentiable: Verdict,
}

impl DifferentiabilityReport {
    /// The status, when both verdicts are decided.
    pub fn status(&self) -> Option<Differentiability> {
        match (self.derivable.outcome, self.differentiable.outcome) {
            (Outcome::Fails, _) => Some(Differentiability::NotDerivable),
            (Outcome::Holds, Outcome::Holds) => Some(Differentiability::Differentiable),
            (Outcome::Holds, Outcome::Fails) => Some(Differentiability::DerivableOnly),
            _ => None,
        }
    }
}

/// Derivable means the derivative is defined at the point; differentiable
/// additionally asks the derivative to be continuous there.
pub fn differentiability_status(
    phi: &VirtualFunction,
    point: &VirtualNumber,
    ctx: &Context,
) -> Result<DifferentiabilityReport, VfuncError> {
    if defined_at(phi, point, ctx).fails() {
        return Err(not_defined(phi, point));
    }
    let d = derivative(phi);
    let derivable = defined_at(&d, point, ctx);
    let differentiable = if derivable.fails() {
        Verdict::symbolic(Outcome::Fails)
    } else {
        let cont = continuous_at(&d, point, ctx).unwrap_or_else(|_| Verdict::unknown(vec![]));
        derivable.clone().and(cont)
    };
    Ok(DifferentiabilityReport {
        derivable,
        differentiable,
    })
}

fn argument_grid(n: u64) -> Vec<f64> {
    let d = 1.0 / n as f64;
    vec![
        -2.0,
        -1.0,
        -0.5,
        -0.1,
        0.0,
        0.1,
        0.5,
        1.0,
        2.0,
        -d,
        d,
        -0.5 * d,
        0.5 * d,
    ]
}

/// Same domain and same values, up to the identification of all
/// functions with empty domain.
pub fn function_equal(a: &VirtualFunction, b: &VirtualFunction, ctx: &Context) -> Verdict {
    function_equal_within(a, b, EQUALITY_TOL, ctx)
}

pub fn function_equal_within(
    a: &VirtualFunction,
    b: &VirtualFunction,
    rel: f64,
    ctx: &Context,
) -> Verdict {
    if a.is_empty() && b.is_empty() {
        return Verdict::symbolic(Outcome::Holds);
    }
    if let (Some(x), Some(y)) = (a.as_expr(), b.as_expr()) {
        let (sx, sy) = (simplify(x), simplify(y));
        if sx == sy {
            return Verdict::symbolic(Outcome::Holds);
        }
        if is_total(&sx) && is_total(&sy) && simplify(&Expr::sub(sx, sy)).is_num(0.0) {
            return Verdict::symbolic(Outcome::Holds);
        }
    }
    // sampled agreement on a grid is evidence, not proof
    eventually(
        &Predicate::new(|n| {
            Observation::from_bool(
                argument_grid(n)
                    .into_iter()
                    .all(|x| values_match(&a.member_value(n, x), &b.member_value(n, x), rel)),
            )
        }),
        &ctx.schedule,
        ctx.execution,
    )
}
