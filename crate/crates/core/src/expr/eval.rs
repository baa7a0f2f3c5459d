use thiserror::Error;

use super::ast::{BinaryOp, Expr, UnaryOp, Var};
use super::value::Value;

/// Values assigned to the three variables for one evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Bindings {
    pub index: Option<f64>,
    pub position: Option<f64>,
    pub arg: Option<f64>,
}

impl Bindings {
    pub fn new() -> Bindings {
        Bindings::default()
    }

    pub fn at_index(n: u64) -> Bindings {
        Bindings {
            index: Some(n as f64),
            ..Bindings::default()
        }
    }

    pub fn with_index(mut self, n: u64) -> Bindings {
        self.index = Some(n as f64);
        self
    }

    pub fn with_position(mut self, k: u64) -> Bindings {
        self.position = Some(k as f64);
        self
    }

    pub fn with_arg(mut self, x: f64) -> Bindings {
        self.arg = Some(x);
        self
    }

    pub fn get(&self, v: Var) -> Option<f64> {
        match v {
            Var::Index => self.index,
            Var::Position => self.position,
            Var::Arg => self.arg,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("variable {} is not bound", .0.symbol())]
    Unbound(Var),
}

/// Evaluates `e` under `b`.
///
/// Domain violations yield [`Value::NotDefined`]; a variable without a
/// binding is a usage error.
pub fn evaluate_at(e: &Expr, b: &Bindings) -> Result<Value, EvalError> {
    for v in e.variables() {
        if b.get(v).is_none() {
            return Err(EvalError::Unbound(v));
        }
    }
    Ok(eval(e, b))
}

/// Evaluation that treats a missing binding as undefined. Intended for hot
/// loops where the bindings were validated once up front.
pub(crate) fn eval(e: &Expr, b: &Bindings) -> Value {
    match e {
        Expr::Num(v) => Value::exact(*v),
        Expr::Const(c) => {
            let v = c.value();
            Value::approx(v, v * f64::EPSILON / 2.0)
        }
        Expr::Var(v) => match b.get(*v) {
            Some(x) => Value::exact(x),
            None => Value::NotDefined,
        },
        Expr::Unary(op, a) => {
            let a = eval(a, b);
            match op {
                UnaryOp::Neg => a.neg(),
                UnaryOp::Abs => a.abs(),
                UnaryOp::Sqrt => a.sqrt(),
                UnaryOp::Exp => a.exp(),
                UnaryOp::Ln => a.ln(),
                UnaryOp::Sin => a.sin(),
                UnaryOp::Cos => a.cos(),
                UnaryOp::Tan => a.tan(),
                UnaryOp::Arctan => a.arctan(),
            }
        }
        Expr::Binary(op, l, r) => {
            let l = eval(l, b);
            if !l.is_defined() {
                return Value::NotDefined;
            }
            let r = eval(r, b);
            match op {
                BinaryOp::Add => l.add(&r),
                BinaryOp::Sub => l.sub(&r),
                BinaryOp::Mul => l.mul(&r),
                BinaryOp::Div => l.div(&r),
                BinaryOp::Pow => l.pow(&r),
            }
        }
        Expr::Piecewise { branches, default } => {
            for br in branches {
                let l = eval(&br.guard.lhs, b);
                let r = eval(&br.guard.rhs, b);
                if !l.is_defined() || !r.is_defined() {
                    return Value::NotDefined;
                }
                match l.compare(&r) {
                    Some(ord) if br.guard.rel.accepts(ord) => return eval(&br.value, b),
                    Some(_) => {}
                    None => return Value::Indeterminate,
                }
            }
            match default {
                Some(d) => eval(d, b),
                None => Value::NotDefined,
            }
        }
    }
}

/// Finite value of `e`, or `None` when undefined or flagged.
pub(crate) fn eval_f64(e: &Expr, b: &Bindings) -> Option<f64> {
    match eval(e, b) {
        Value::Real { value, .. } => Some(value),
        _ => None,
    }
}
