//! Virtual sequences: index-wise families of real sequences in a position `k`.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::context::Context;
use crate::decision::{eventually, Observation, Outcome, Predicate, Verdict};
use crate::expr::{self, differentiate, eval, is_total, simplify, Bindings, Expr, Value, Var};
use crate::vnum::{end_equal, near, Repr, VirtualNumber};

pub type SequenceRule = Arc<dyn Fn(u64, u64) -> Value + Send + Sync>;

#[derive(Clone)]
pub enum SeqFamily {
    /// An expression in `∞` and the position `k`.
    Expr(Expr),
    Rule {
        label: String,
        f: SequenceRule,
    },
}

#[derive(Clone)]
pub struct VirtualSequence {
    family: SeqFamily,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum VseqError {
    #[error("a virtual sequence may only depend on ∞ and k, found {0}")]
    ForeignVariable(&'static str),
    #[error("{0} is not eventually a natural number")]
    NotNatural(String),
    #[error("a partition needs a < b, got {0} and {1}")]
    EmptyInterval(f64, f64),
    #[error("a real function cannot depend on ∞")]
    DependsOnIndex,
    #[error("{0} is undefined at partition points for infinitely many indices")]
    Undefined(String),
}

/// Tag point of each Riemann-sum cell.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Tag {
    Left,
    #[default]
    Right,
    Midpoint,
}

impl Tag {
    /// Offset subtracted from `k` to place the tag in cell `k`.
    fn shift(self) -> f64 {
        match self {
            Tag::Left => 1.0,
            Tag::Right => 0.0,
            Tag::Midpoint => 0.5,
        }
    }
}

impl VirtualSequence {
    pub fn from_expr(e: Expr) -> Result<VirtualSequence, VseqError> {
        if e.contains_var(Var::Arg) {
            return Err(VseqError::ForeignVariable(Var::Arg.symbol()));
        }
        Ok(VirtualSequence {
            family: SeqFamily::Expr(e),
        })
    }

    pub fn rule(
        label: impl Into<String>,
        f: impl Fn(u64, u64) -> Value + Send + Sync + 'static,
    ) -> VirtualSequence {
        VirtualSequence {
            family: SeqFamily::Rule {
                label: label.into(),
                f: Arc::new(f),
            },
        }
    }

    pub fn family(&self) -> &SeqFamily {
        &self.family
    }

    pub fn as_expr(&self) -> Option<&Expr> {
        match &self.family {
            SeqFamily::Expr(e) => Some(e),
            SeqFamily::Rule { .. } => None,
        }
    }

    /// Position `k` of the member sequence at index `n`.
    pub fn member_value(&self, n: u64, k: u64) -> Value {
        match &self.family {
            SeqFamily::Expr(e) => eval(e, &Bindings::at_index(n).with_position(k)),
            SeqFamily::Rule { f, .. } => f(n, k),
        }
    }

    /// Compensated sum of positions `1..=count` of the member at `n`.
    pub fn member_sum(&self, n: u64, count: u64) -> Value {
        neumaier((1..=count).map(|k| self.member_value(n, k)))
    }
}

impl fmt::Display for VirtualSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            SeqFamily::Expr(e) => write!(f, "k ↦ {e}"),
            SeqFamily::Rule { label, .. } => f.write_str(label),
        }
    }
}

impl fmt::Debug for VirtualSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VirtualSequence({self})")
    }
}

/// Neumaier-compensated sum; undefined if any term is.
fn neumaier(terms: impl Iterator<Item = Value>) -> Value {
    let (mut sum, mut comp, mut abs, mut err, mut count) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0u64);
    for t in terms {
        let Value::Real { value, err: e } = t else {
            return if t.is_defined() {
                Value::Indeterminate
            } else {
                Value::NotDefined
            };
        };
        let s = sum + value;
        comp += if sum.abs() >= value.abs() {
            (sum - s) + value
        } else {
            (value - s) + sum
        };
        sum = s;
        abs += value.abs();
        err += e;
        count += 1;
    }
    let total = sum + comp;
    Value::approx(
        total,
        err + 2.0 * f64::EPSILON * (abs + count as f64 * total.abs()) / count.max(1) as f64,
    )
}

fn as_natural(v: f64) -> Option<u64> {
    (v >= 1.0 && v.fract() == 0.0 && v < 9.0e15).then_some(v as u64)
}

/// Whether `kappa` is eventually a natural number `≥ 1`.
pub fn is_virtual_natural(kappa: &VirtualNumber, ctx: &Context) -> Verdict {
    if let Repr::Periodic(v) = kappa.repr() {
        return Verdict::symbolic_bool(v.iter().all(|x| as_natural(*x).is_some()));
    }
    eventually(
        &Predicate::new(|n| match kappa.value_at(n) {
            Value::Real { value, .. } => Observation::from_bool(as_natural(value).is_some()),
            _ => Observation::Undefined,
        }),
        &ctx.schedule,
        ctx.execution,
    )
}

fn check_natural(kappa: &VirtualNumber, ctx: &Context) -> Result<(), VseqError> {
    if is_virtual_natural(kappa, ctx).fails() {
        return Err(VseqError::NotNatural(kappa.to_string()));
    }
    Ok(())
}

fn position_at(kappa: &VirtualNumber, n: u64) -> Option<u64> {
    as_natural(kappa.f64_at(n)?)
}

/// The term at the virtual position `kappa`.
pub fn term(
    s: &VirtualSequence,
    kappa: &VirtualNumber,
    ctx: &Context,
) -> Result<VirtualNumber, VseqError> {
    check_natural(kappa, ctx)?;
    if let (Some(e), Some(k)) = (s.as_expr(), kappa.as_expr()) {
        if !kappa.is_rule() {
            if let Ok(v) =
                VirtualNumber::from_expr_unchecked(simplify(&e.substitute(Var::Position, &k)))
            {
                return Ok(v);
            }
        }
    }
    let (seq, k) = (s.clone(), kappa.clone());
    Ok(VirtualNumber::rule(
        format!("({s})[{kappa}]"),
        move |n| match position_at(&k, n) {
            Some(pos) => seq.member_value(n, pos),
            None => Value::NotDefined,
        },
    ))
}

/// `Σ_{k=1}^{K} (c₀ + c₁k + c₂k²)` as an expression in `K`, when the member
/// is such a polynomial in `k` with total coefficients.
fn polynomial_sum(e: &Expr, upper: &Expr) -> Option<Expr> {
    if !is_total(e) {
        return None;
    }
    let k = Var::Position;
    let d1 = differentiate(e, k);
    let d2 = differentiate(&d1, k);
    if d2.contains_var(k) {
        return None;
    }
    let at0 = |x: &Expr| simplify(&x.substitute(k, &Expr::num(0.0)));
    let (c0, c1) = (at0(e), at0(&d1));
    let c2 = simplify(&Expr::div(d2, Expr::num(2.0)));
    let kk = upper.clone();
    let k1 = Expr::add(kk.clone(), Expr::num(1.0));
    let s1 = Expr::div(Expr::mul(kk.clone(), k1.clone()), Expr::num(2.0));
    let s2 = Expr::div(
        Expr::mul(
            Expr::mul(kk.clone(), k1),
            Expr::add(Expr::mul(Expr::num(2.0), kk.clone()), Expr::num(1.0)),
        ),
        Expr::num(6.0),
    );
    Some(simplify(&Expr::add(
        Expr::add(Expr::mul(c0, kk), Expr::mul(c1, s1)),
        Expr::mul(c2, s2),
    )))
}

/// `Σ_{k=1}^{κ} s_k`.
pub fn partial_sum(
    s: &VirtualSequence,
    kappa: &VirtualNumber,
    ctx: &Context,
) -> Result<VirtualNumber, VseqError> {
    check_natural(kappa, ctx)?;
    if let (Some(e), Some(k)) = (s.as_expr(), kappa.as_expr()) {
        if !kappa.is_rule() {
            if let Some(closed) = polynomial_sum(e, &k) {
                if let Ok(v) = VirtualNumber::from_expr_unchecked(closed) {
                    return Ok(v);
                }
            }
        }
    }
    let (seq, k) = (s.clone(), kappa.clone());
    Ok(VirtualNumber::rule(
        format!("Σ[1, {kappa}] ({s})"),
        move |n| match position_at(&k, n) {
            Some(count) => seq.member_sum(n, count),
            None => Value::NotDefined,
        },
    ))
}

/// `Σ_{k=1}^{∞} s_k`.
pub fn infinite_sum(s: &VirtualSequence, ctx: &Context) -> Result<VirtualNumber, VseqError> {
    partial_sum(s, &VirtualNumber::infinity(), ctx)
}

/// `α_k = a + (b − a)·k/∞`.
pub fn fine_partition(a: f64, b: f64) -> Result<VirtualSequence, VseqError> {
    if !(a < b) {
        return Err(VseqError::EmptyInterval(a, b));
    }
    let step = Expr::div(Expr::mul(Expr::num(b - a), Expr::position()), Expr::index());
    VirtualSequence::from_expr(simplify(&Expr::add(Expr::num(a), step)))
}

const MESH_POSITIONS: u64 = 256;

/// Largest gap between consecutive positions `1..=n` of the member at `n`,
/// on an even subsample once `n` exceeds the probe budget.
fn mesh(s: &VirtualSequence, n: u64) -> Value {
    let stride = (n / MESH_POSITIONS).max(1);
    let mut worst = Value::exact(0.0);
    let mut k = 1;
    while k < n {
        let gap = s.member_value(n, k + 1).sub(&s.member_value(n, k)).abs();
        if !gap.is_defined() {
            return Value::NotDefined;
        }
        if gap.compare(&worst) == Some(std::cmp::Ordering::Greater) {
            worst = gap;
        }
        k += stride;
    }
    worst
}

/// Whether `s` starts near `a`, ends exactly at `b` at position `∞`, and
/// has consecutive terms near each other.
pub fn is_fine_partition(s: &VirtualSequence, a: f64, b: f64, ctx: &Context) -> Verdict {
    let first = term(s, &VirtualNumber::lift(1.0), ctx)
        .map(|t| near(&t, &VirtualNumber::lift(a), ctx))
        .unwrap_or_else(|_| Verdict::symbolic(Outcome::Fails));
    let last = term(s, &VirtualNumber::infinity(), ctx)
        .map(|t| end_equal(&t, &VirtualNumber::lift(b), ctx))
        .unwrap_or_else(|_| Verdict::symbolic(Outcome::Fails));
    let mesh_ok = match s.as_expr() {
        Some(e) => {
            let next = e.substitute(Var::Position, &Expr::add(Expr::position(), Expr::num(1.0)));
            let gap = simplify(&Expr::sub(next, e.clone()));
            match VirtualNumber::from_expr_unchecked(gap) {
                // the gap does not depend on k, so one nearness test covers all positions
                Ok(g) if !g.as_expr().is_some_and(|x| x.contains_var(Var::Position)) => {
                    near(&g, &VirtualNumber::lift(0.0), ctx)
                }
                _ => sampled_mesh(s, ctx),
            }
        }
        None => sampled_mesh(s, ctx),
    };
    first.and(last).and(mesh_ok)
}

fn sampled_mesh(s: &VirtualSequence, ctx: &Context) -> Verdict {
    let seq = s.clone();
    let m = VirtualNumber::rule(format!("mesh of {s}"), move |n| mesh(&seq, n));
    near(&m, &VirtualNumber::lift(0.0), ctx)
}

/// `Σ_{k=1}^{∞} f(α_k)·(α_k − α_{k−1})` over the fine partition of `[a, b]`,
/// i.e. `Σ_{k=1}^{n} f(a + (b−a)(k−s)/n)·(b−a)/n` at index `n`, with the
/// tag offset `s` fixed by `tag`.
pub fn riemann_sum_integral(
    f: &Expr,
    a: f64,
    b: f64,
    tag: Tag,
    ctx: &Context,
) -> Result<VirtualNumber, VseqError> {
    if f.contains_var(Var::Index) {
        return Err(VseqError::DependsOnIndex);
    }
    if let Some(v) = f.variables().into_iter().find(|v| *v != Var::Arg) {
        return Err(VseqError::ForeignVariable(v.symbol()));
    }
    fine_partition(a, b)?;
    let func = f.clone();
    let shift = tag.shift();
    let sum = VirtualNumber::rule(format!("riemann sum of {f} over [{a}, {b}]"), move |n| {
        let w = (b - a) / n as f64;
        let cells = (1..=n).map(|k| {
            let x = a + (b - a) * (k as f64 - shift) / n as f64;
            eval(&func, &Bindings::new().with_arg(x)).mul(&Value::exact(w))
        });
        neumaier(cells)
    });
    let defined = eventually(
        &Predicate::new(|n| Observation::from_bool(sum.value_at(n).is_defined())),
        &ctx.schedule,
        ctx.execution,
    );
    if defined.fails() {
        return Err(VseqError::Undefined(expr::render(f)));
    }
    Ok(sum)
}
