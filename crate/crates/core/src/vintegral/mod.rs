//! Virtual integrals: index-wise Riemann integrals between virtual limits.

mod antiderivative;
pub mod quadrature;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::context::Context;
use crate::decision::{eventually, LimitResult, Mode, Observation, Outcome, Predicate, Verdict};
use crate::exec::map_indices;
use crate::expr::{self, simplify, Bindings, BreakpointKind, Expr, Value, Var};
use crate::vfunc::{self, derivative, Family, VirtualFunction};
use crate::vnum::{self, NotReducible, VirtualNumber};

pub use antiderivative::antiderivative_expr;
pub use quadrature::{QuadResult, QuadratureError};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum IntegralError {
    #[error("{function} is not integrable between {from} and {to}")]
    NotIntegrable {
        function: String,
        from: String,
        to: String,
    },
    #[error("quadrature failed at index {index}: {source}")]
    Quadrature { index: u64, source: QuadratureError },
    #[error(transparent)]
    NotReducible(#[from] NotReducible),
    #[error("no primitive in the rule table for {0}")]
    Unsupported(String),
}

/// Name of the generic additive constant in a primitive.
pub const GENERIC_CONSTANT: &str = "κ";

/// `∫ φ = particular + κ`.
#[derive(Clone, Debug)]
pub struct Primitive {
    pub particular: VirtualFunction,
    pub constant: &'static str,
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.particular.as_expr() {
            Some(e) => write!(f, "{e} + {}", self.constant),
            None => write!(f, "{} + {}", self.particular, self.constant),
        }
    }
}

/// The rule-table primitive of an expression family.
pub fn antiderivative(phi: &VirtualFunction) -> Result<Primitive, IntegralError> {
    let unsupported = || IntegralError::Unsupported(phi.to_string());
    let e = phi.as_expr().ok_or_else(unsupported)?;
    let p = antiderivative_expr(e).ok_or_else(unsupported)?;
    Ok(Primitive {
        particular: VirtualFunction::from_expr(p).map_err(|_| unsupported())?,
        constant: GENERIC_CONSTANT,
    })
}

/// Whether `psi' = phi`.
pub fn primitive_check(psi: &VirtualFunction, phi: &VirtualFunction, ctx: &Context) -> Verdict {
    vfunc::function_equal(&derivative(psi), phi, ctx)
}

/// Member expression used for presplitting, if the family has one.
fn member_expr(phi: &VirtualFunction, n: u64) -> Option<&Expr> {
    match phi.family() {
        Family::Expr(e) | Family::Derived { expr: e, .. } => Some(e),
        Family::Interleaved(slots) => {
            member_expr(&slots[((n - 1) % slots.len() as u64) as usize], n)
        }
        _ => None,
    }
}

/// Breakpoints of the member at index `n`, as reals.
fn member_breakpoints(phi: &VirtualFunction, n: u64, kinds: &[BreakpointKind]) -> Vec<f64> {
    let Some(e) = member_expr(phi, n) else {
        return Vec::new();
    };
    let b = Bindings::at_index(n);
    expr::breakpoints(e, Var::Arg)
        .points
        .iter()
        .filter(|p| kinds.contains(&p.kind))
        .filter_map(|p| expr::eval_f64(&p.at, &b))
        .collect()
}

const ALL_KINDS: [BreakpointKind; 3] = [
    BreakpointKind::Guard,
    BreakpointKind::Pole,
    BreakpointKind::Branch,
];

/// Adaptive quadrature of the member `f_n` over `[a, b]`.
pub fn integrate_member(
    phi: &VirtualFunction,
    n: u64,
    a: f64,
    b: f64,
    ctx: &Context,
) -> Result<QuadResult, QuadratureError> {
    let splits = if ctx.quadrature.presplit {
        member_breakpoints(phi, n, &ALL_KINDS)
    } else {
        Vec::new()
    };
    let f = |x: f64| phi.member_value(n, x).as_f64();
    quadrature::integrate(&f, a, b, &splits, &ctx.quadrature)
}

const GRID: usize = 64;

/// Per-index integrability: no pole on the closed interval and the member
/// defined at every interior grid point.
fn member_integrable(phi: &VirtualFunction, n: u64, a: f64, b: f64) -> bool {
    if a == b {
        return true;
    }
    let (lo, hi) = (a.min(b), a.max(b));
    let poles = member_breakpoints(phi, n, &[BreakpointKind::Pole]);
    if poles.iter().any(|p| *p >= lo && *p <= hi) {
        return false;
    }
    let mut probes: Vec<f64> = (1..GRID)
        .map(|i| lo + (hi - lo) * i as f64 / GRID as f64)
        .collect();
    // the midpoints between breakpoints catch domain gaps narrower than the grid
    let mut cuts = member_breakpoints(phi, n, &ALL_KINDS);
    cuts.retain(|c| *c > lo && *c < hi);
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    probes.extend(cuts.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    probes
        .iter()
        .all(|x| phi.member_value(n, *x).as_f64().is_some())
}

fn limits_at(alpha: &VirtualNumber, beta: &VirtualNumber, n: u64) -> Option<(f64, f64)> {
    Some((alpha.f64_at(n)?, beta.f64_at(n)?))
}

/// Whether `phi` is integrable between `alpha` and `beta`.
pub fn integrable_between(
    phi: &VirtualFunction,
    alpha: &VirtualNumber,
    beta: &VirtualNumber,
    ctx: &Context,
) -> Verdict {
    if phi.is_empty() {
        return Verdict::symbolic(Outcome::Fails);
    }
    if let Some(e) = phi.as_expr() {
        // defined and continuous everywhere, hence on any interval
        let bps = expr::breakpoints(e, Var::Arg);
        if !e.contains_piecewise()
            && expr::is_total(e)
            && bps.points.is_empty()
            && bps.is_complete()
        {
            return Verdict::symbolic(Outcome::Holds);
        }
    }
    eventually(
        &Predicate::new(|n| match limits_at(alpha, beta, n) {
            Some((a, b)) => Observation::from_bool(member_integrable(phi, n, a, b)),
            None => Observation::Undefined,
        }),
        &ctx.schedule,
        ctx.execution,
    )
}

fn not_integrable(
    phi: &VirtualFunction,
    alpha: &VirtualNumber,
    beta: &VirtualNumber,
) -> IntegralError {
    IntegralError::NotIntegrable {
        function: phi.to_string(),
        from: alpha.to_string(),
        to: beta.to_string(),
    }
}

/// `∫_α^β φ`: exact from the primitive when the rule table applies (and,
/// unless the integrand is total, quadrature agrees with it), otherwise
/// index-wise quadrature.
pub fn integrate(
    phi: &VirtualFunction,
    alpha: &VirtualNumber,
    beta: &VirtualNumber,
    ctx: &Context,
) -> Result<VirtualNumber, IntegralError> {
    // one canonical orientation, so reversed limits negate exactly
    if reversed(alpha, beta, ctx) {
        return integrate(phi, beta, alpha, ctx).map(|v| vnum::neg(&v));
    }
    let integrable = integrable_between(phi, alpha, beta, ctx);
    if integrable.fails() {
        return Err(not_integrable(phi, alpha, beta));
    }
    // a total continuous integrand has a continuous rule-table primitive
    let trusted = integrable.holds() && integrable.mode == Mode::Symbolic;
    if let Some(v) = symbolic_integral(phi, alpha, beta, trusted, ctx) {
        return Ok(v);
    }
    integrate_numeric(phi, alpha, beta, ctx)
}

/// Whether the limits are in descending order, judged at the last sampled
/// index; ties fall back to the rendered forms.
fn reversed(alpha: &VirtualNumber, beta: &VirtualNumber, ctx: &Context) -> bool {
    let n = ctx.schedule.max_index();
    match (alpha.f64_at(n), beta.f64_at(n)) {
        (Some(a), Some(b)) if a != b => a > b,
        _ => alpha.to_string() > beta.to_string(),
    }
}

fn symbolic_difference(
    phi: &VirtualFunction,
    alpha: &VirtualNumber,
    beta: &VirtualNumber,
) -> Option<Expr> {
    let prim = antiderivative_expr(phi.as_expr()?)?;
    let (a, b) = (alpha.as_expr()?, beta.as_expr()?);
    if alpha.is_rule() || beta.is_rule() {
        return None;
    }
    if a == b {
        return Some(Expr::num(0.0));
    }
    Some(simplify(&Expr::sub(
        prim.substitute(Var::Arg, &b),
        prim.substitute(Var::Arg, &a),
    )))
}

/// Primitive difference, kept only where it is defined and matches
/// quadrature at a few schedule indices. The cross-check guards against a
/// primitive that is not valid across the whole interval.
fn symbolic_integral(
    phi: &VirtualFunction,
    alpha: &VirtualNumber,
    beta: &VirtualNumber,
    trusted: bool,
    ctx: &Context,
) -> Option<VirtualNumber> {
    let diff = symbolic_difference(phi, alpha, beta)?;
    let candidate = VirtualNumber::from_expr_unchecked(diff).ok()?;
    if trusted {
        return Some(candidate);
    }
    let starts = ctx.schedule.stage_starts();
    let picks = [starts[0], starts[starts.len() / 2], *starts.last()?];
    let agree = map_indices(ctx.execution, &picks, |n| {
        let Some(sym) = candidate.f64_at(n) else {
            return false;
        };
        let Some((a, b)) = limits_at(alpha, beta, n) else {
            return false;
        };
        match integrate_member(phi, n, a, b, ctx) {
            Ok(q) => (sym - q.value).abs() <= (1e-6 * sym.abs()).max(10.0 * q.error).max(1e-9),
            Err(QuadratureError::NotConverged { .. }) => true,
            Err(QuadratureError::Undefined(_)) => false,
        }
    });
    agree.into_iter().all(|ok| ok).then_some(candidate)
}

type Cache = Arc<Mutex<HashMap<u64, Value>>>;

fn numeric_value(
    phi: &VirtualFunction,
    alpha: &VirtualNumber,
    beta: &VirtualNumber,
    n: u64,
    ctx: &Context,
) -> Result<Value, QuadratureError> {
    let Some((a, b)) = limits_at(alpha, beta, n) else {
        return Ok(Value::NotDefined);
    };
    if a == b {
        return Ok(Value::exact(0.0));
    }
    integrate_member(phi, n, a, b, ctx).map(|q| Value::approx(q.value, q.error))
}

/// `∫_α^β φ` by index-wise quadrature. The schedule indices are computed
/// up front, so a failure there is reported with its index.
pub fn integrate_numeric(
    phi: &VirtualFunction,
    alpha: &VirtualNumber,
    beta: &VirtualNumber,
    ctx: &Context,
) -> Result<VirtualNumber, IntegralError> {
    let indices = ctx.schedule.indices();
    let probed = map_indices(ctx.execution, &indices, |n| {
        numeric_value(phi, alpha, beta, n, ctx)
    });
    let mut cache = HashMap::with_capacity(indices.len());
    for (n, r) in indices.iter().zip(probed) {
        match r {
            Ok(v) => {
                cache.insert(*n, v);
            }
            Err(source) => return Err(IntegralError::Quadrature { index: *n, source }),
        }
    }
    let cache: Cache = Arc::new(Mutex::new(cache));
    let (f, a, b, c) = (phi.clone(), alpha.clone(), beta.clone(), ctx.clone());
    let label = format!("∫[{alpha}, {beta}] ({phi})");
    Ok(VirtualNumber::rule(label, move |n| {
        if let Some(v) = cache.lock().unwrap().get(&n) {
            return *v;
        }
        let v = match numeric_value(&f, &a, &b, n, &c) {
            Ok(v) => v,
            Err(QuadratureError::NotConverged { value, error }) => Value::approx(value, error),
            Err(QuadratureError::Undefined(_)) => Value::NotDefined,
        };
        cache.lock().unwrap().insert(n, v);
        v
    }))
}

/// The real number the integral is near.
pub fn reduce_integral(
    phi: &VirtualFunction,
    alpha: &VirtualNumber,
    beta: &VirtualNumber,
    ctx: &Context,
) -> Result<f64, IntegralError> {
    let v = integrate(phi, alpha, beta, ctx)?;
    Ok(vnum::reduce(&v, ctx)?)
}

/// Relative agreement required by the accumulated-integral form.
pub const FTC_TOL: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FtcForm {
    /// The derivative of `ξ ↦ ∫_α^ξ φ` is `φ`.
    Accumulated,
    /// `∫_α^β φ = Ψ(β) − Ψ(α)` for a primitive `Ψ`.
    Primitive,
}

#[derive(Clone, Debug)]
pub struct FtcReport {
    pub verdict: Verdict,
    pub lhs: VirtualNumber,
    pub rhs: VirtualNumber,
}

/// Checks either form of the fundamental theorem. For the accumulated form
/// `beta` is the point at which the derivative is taken.
pub fn ftc_check(
    phi: &VirtualFunction,
    alpha: &VirtualNumber,
    beta: &VirtualNumber,
    form: FtcForm,
    ctx: &Context,
) -> Result<FtcReport, IntegralError> {
    match form {
        FtcForm::Accumulated => {
            ftc_accumulated(phi, alpha, &VirtualFunction::identity(), beta, ctx)
        }
        FtcForm::Primitive => {
            let diff = symbolic_difference(phi, alpha, beta)
                .ok_or_else(|| IntegralError::Unsupported(phi.to_string()))?;
            let rhs = VirtualNumber::from_expr_unchecked(diff)
                .map_err(|_| IntegralError::Unsupported(phi.to_string()))?;
            if integrable_between(phi, alpha, beta, ctx).fails() {
                return Err(not_integrable(phi, alpha, beta));
            }
            let lhs = integrate_numeric(phi, alpha, beta, ctx)?;
            let verdict = agreement(&lhs, &rhs, 1e-8, ctx);
            Ok(FtcReport { verdict, lhs, rhs })
        }
    }
}

fn agreement(lhs: &VirtualNumber, rhs: &VirtualNumber, rel: f64, ctx: &Context) -> Verdict {
    eventually(
        &Predicate::new(|n| match (lhs.value_at(n), rhs.value_at(n)) {
            (Value::Real { value: l, err }, Value::Real { value: r, .. }) => {
                Observation::from_bool((l - r).abs() <= err + rel * r.abs().max(1.0))
            }
            _ => Observation::Undefined,
        }),
        &ctx.schedule,
        ctx.execution,
    )
}

/// `d/dξ ∫_α^{u(ξ)} φ(τ) dτ = φ(u(ξ))·u'(ξ)` at `point`.
///
/// The left side is the symmetric difference quotient of the accumulated
/// integral. By additivity it equals `(1/2h)∫_{u(x−h)}^{u(x+h)} f_n`, which
/// is integrated directly instead of subtracting two large integrals.
pub fn ftc_accumulated(
    phi: &VirtualFunction,
    lower: &VirtualNumber,
    upper: &VirtualFunction,
    point: &VirtualNumber,
    ctx: &Context,
) -> Result<FtcReport, IntegralError> {
    let upper_at_point = vfunc::evaluate_unchecked(upper, point);
    if integrable_between(phi, lower, &upper_at_point, ctx).fails() {
        return Err(not_integrable(phi, lower, &upper_at_point));
    }
    let (f, u, x0) = (phi.clone(), upper.clone(), point.clone());
    let qctx = ctx.clone();
    let lhs = VirtualNumber::rule(
        format!("d/dξ ∫[{lower}, u(ξ)] ({phi}) at {point}"),
        move |n| {
            let Some(x) = x0.f64_at(n) else {
                return Value::NotDefined;
            };
            let h = (1e-6 * x.abs()).max(1e-8);
            let (Some(ul), Some(ur)) = (
                u.member_value(n, x - h).as_f64(),
                u.member_value(n, x + h).as_f64(),
            ) else {
                return Value::NotDefined;
            };
            match integrate_member(&f, n, ul, ur, &qctx) {
                Ok(q) => Value::approx(q.value / (2.0 * h), q.error / (2.0 * h)),
                Err(_) => Value::NotDefined,
            }
        },
    );
    let chain = vfunc::pointwise(
        expr::BinaryOp::Mul,
        &vfunc::compose(phi, upper),
        &derivative(upper),
    );
    let rhs = vfunc::evaluate_unchecked(&chain, point);
    let verdict = agreement(&lhs, &rhs, FTC_TOL, ctx);
    Ok(FtcReport { verdict, lhs, rhs })
}

/// The reduction status of an integral, for reporting.
pub fn reducibility(
    phi: &VirtualFunction,
    alpha: &VirtualNumber,
    beta: &VirtualNumber,
    ctx: &Context,
) -> Result<LimitResult, IntegralError> {
    let v = integrate(phi, alpha, beta, ctx)?;
    Ok(vnum::limit_of(&v, ctx).result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::vnum::end_equal;

    fn ctx() -> Context {
        Context::default()
    }

    fn f(src: &str) -> VirtualFunction {
        VirtualFunction::from_expr(parse(src).unwrap()).unwrap()
    }

    fn n(src: &str) -> VirtualNumber {
        VirtualNumber::from_expr_unchecked(parse(src).unwrap()).unwrap()
    }

    const PSI: &str = "∞ / (1 + ∞^2 * ξ^2)";

    #[test]
    fn integrability() {
        let c = ctx();
        assert!(integrable_between(
            &f(PSI),
            &VirtualNumber::lift(0.0),
            &VirtualNumber::delta(),
            &c
        )
        .holds());
        let chi = f("piecewise(|ξ| < ∂ : ∞ / 2 ; |ξ| ≥ ∂ : 0)");
        let (m1, p1) = (VirtualNumber::lift(-1.0), VirtualNumber::lift(1.0));
        assert!(integrable_between(&chi, &m1, &p1, &c).holds());
        assert!(integrable_between(&f("1/ξ"), &m1, &p1, &c).fails());
        assert!(integrate(&f("1/ξ"), &m1, &p1, &c).is_err());
    }

    #[test]
    fn worked_integrals() {
        let c = ctx();
        let quarter = integrate(
            &f(PSI),
            &VirtualNumber::lift(0.0),
            &VirtualNumber::delta(),
            &c,
        )
        .unwrap();
        assert!(end_equal(
            &quarter,
            &VirtualNumber::lift(std::f64::consts::FRAC_PI_4),
            &c
        )
        .holds());
        let inv_sq = integrate(
            &f("ξ^(-2)"),
            &VirtualNumber::lift(1.0),
            &VirtualNumber::infinity(),
            &c,
        )
        .unwrap();
        assert!(end_equal(&inv_sq, &n("1 - ∂"), &c).holds());
        assert!(
            (reduce_integral(
                &f("ξ^(-2)"),
                &VirtualNumber::lift(1.0),
                &VirtualNumber::infinity(),
                &c
            )
            .unwrap()
                - 1.0)
                .abs()
                < 1e-8
        );
        let root = integrate(
            &f("ξ^(-1/2)"),
            &VirtualNumber::delta(),
            &VirtualNumber::lift(1.0),
            &c,
        )
        .unwrap();
        assert!(end_equal(&root, &n("2 - 2 * sqrt(∂)"), &c).holds());
        let r = reduce_integral(
            &f("1"),
            &VirtualNumber::lift(0.0),
            &VirtualNumber::infinity(),
            &c,
        );
        assert!(matches!(
            r,
            Err(IntegralError::NotReducible(NotReducible(
                LimitResult::DivergesTo(_)
            )))
        ));
    }

    #[test]
    fn numeric_path_matches() {
        let c = ctx();
        let q = integrate_numeric(
            &f(PSI),
            &VirtualNumber::lift(0.0),
            &VirtualNumber::delta(),
            &c,
        )
        .unwrap();
        for k in c.schedule.indices() {
            assert!((q.f64_at(k).unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-9);
        }
        let chi = f("piecewise(|ξ| < ∂ : ∞ / 2 ; |ξ| ≥ ∂ : 0)");
        let one = integrate(
            &chi,
            &VirtualNumber::lift(-1.0),
            &VirtualNumber::lift(1.0),
            &c,
        )
        .unwrap();
        assert!((one.f64_at(50).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn primitives_and_ftc() {
        let c = ctx();
        let p = antiderivative(&f(PSI)).unwrap();
        assert_eq!(p.to_string(), "arctan(∞ * ξ) + κ");
        assert!(primitive_check(&f("arctan(∞ * ξ)"), &f(PSI), &c).holds());
        assert!(primitive_check(&f("arctan(∞ * ξ) + ∞^2"), &f(PSI), &c).holds());
        assert!(primitive_check(&f("sin(ξ)"), &f("cos(2 * ξ)"), &c).fails());

        let r = ftc_check(
            &f(PSI),
            &VirtualNumber::lift(0.0),
            &VirtualNumber::delta(),
            FtcForm::Primitive,
            &c,
        )
        .unwrap();
        assert!(r.verdict.holds());
        let r = ftc_check(
            &f("cos(ξ)"),
            &VirtualNumber::lift(0.0),
            &VirtualNumber::lift(std::f64::consts::FRAC_PI_2),
            FtcForm::Primitive,
            &c,
        )
        .unwrap();
        assert!(r.verdict.holds());
        let r = ftc_check(
            &f("sin(ξ^2)"),
            &VirtualNumber::lift(0.0),
            &VirtualNumber::lift(1.0),
            FtcForm::Primitive,
            &c,
        );
        assert!(matches!(r, Err(IntegralError::Unsupported(_))));

        let r = ftc_check(
            &f("cos(ξ)"),
            &VirtualNumber::lift(0.0),
            &VirtualNumber::lift(0.7),
            FtcForm::Accumulated,
            &c,
        )
        .unwrap();
        assert!(r.verdict.holds());
    }

    #[test]
    fn accumulated_with_upper_function() {
        let c = ctx();
        let integrand = f("e^(∂ * ξ)");
        let upper = f("∞^ξ");
        let r = ftc_accumulated(
            &integrand,
            &n("-∞^2"),
            &upper,
            &VirtualNumber::lift(1.0),
            &c,
        )
        .unwrap();
        let expected = n("e^(∞^(1 - 1)) * ∞^1 * ln(∞)");
        for k in [4u64, 8, 16] {
            let (l, e) = (r.lhs.f64_at(k).unwrap(), expected.f64_at(k).unwrap());
            assert!((l - e).abs() <= 1e-5 * e.abs(), "{k}: {l} vs {e}");
        }
        assert!(r.verdict.holds());
    }
}
