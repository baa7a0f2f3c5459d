//! Per-index numeric values.
//!
//! Every finite value carries a first-order bound on its accumulated rounding
//! error. A quantity whose magnitude is within its own error bound is treated
//! as zero when it is used as a divisor, which is how `cos(π/2)` computed in
//! binary64 is recognized as a pole. Results that leave the binary64 range are
//! flagged `Huge` or `Tiny` instead of silently becoming `inf` or `0`.

use std::cmp::Ordering;
use std::fmt;

const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// Relative slack added to error bounds when comparing values, to absorb
/// rounding committed by constant folding.
pub const COMPARISON_SLACK: f64 = 64.0 * f64::EPSILON;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn of(v: f64) -> Sign {
        if v.is_sign_negative() {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    fn unit(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Value {
    /// A finite value and a bound on its absolute rounding error.
    Real { value: f64, err: f64 },
    /// Overflowed the binary64 range.
    Huge(Sign),
    /// Nonzero but underflowed to zero.
    Tiny(Sign),
    /// Defined, but overflow or underflow destroyed the value.
    Indeterminate,
    /// Outside the domain of the expression.
    NotDefined,
}

impl Value {
    pub fn exact(v: f64) -> Value {
        Value::Real { value: v, err: 0.0 }
    }

    pub fn approx(v: f64, err: f64) -> Value {
        Value::Real { value: v, err }
    }

    pub fn is_defined(&self) -> bool {
        !matches!(self, Value::NotDefined)
    }

    pub fn is_flagged(&self) -> bool {
        matches!(self, Value::Huge(_) | Value::Tiny(_) | Value::Indeterminate)
    }

    /// Numeric value when one is known; `Tiny` reads as a signed zero.
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Value::Real { value, .. } => Some(value),
            Value::Tiny(s) => Some(0.0 * s.unit()),
            _ => None,
        }
    }

    pub fn error_bound(&self) -> f64 {
        match *self {
            Value::Real { err, .. } => err,
            Value::Tiny(_) => f64::MIN_POSITIVE,
            _ => f64::INFINITY,
        }
    }

    /// Comparison that treats values within their combined error bounds as
    /// equal. `None` when either side has no usable value.
    pub fn compare(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Huge(a), Value::Huge(b)) => {
                if a == b {
                    None
                } else {
                    Some(if *a == Sign::Plus {
                        Ordering::Greater
                    } else {
                        Ordering::Less
                    })
                }
            }
            (Value::Huge(a), o) if o.as_f64().is_some() => Some(if *a == Sign::Plus {
                Ordering::Greater
            } else {
                Ordering::Less
            }),
            (o, Value::Huge(b)) if o.as_f64().is_some() => Some(if *b == Sign::Plus {
                Ordering::Less
            } else {
                Ordering::Greater
            }),
            _ => {
                let a = self.as_f64()?;
                let b = other.as_f64()?;
                let tol = self.error_bound()
                    + other.error_bound()
                    + COMPARISON_SLACK * a.abs().max(b.abs());
                if (a - b).abs() <= tol {
                    Some(Ordering::Equal)
                } else {
                    a.partial_cmp(&b)
                }
            }
        }
    }

    pub fn approx_eq(&self, other: &Value) -> Option<bool> {
        self.compare(other).map(|o| o == Ordering::Equal)
    }

    /// Whether the value is indistinguishable from zero.
    pub fn is_zero(&self) -> Option<bool> {
        self.approx_eq(&Value::exact(0.0))
    }

    fn proxy(&self) -> f64 {
        match *self {
            Value::Real { value, .. } => value,
            Value::Huge(s) => f64::INFINITY * s.unit(),
            Value::Tiny(s) => 0.0 * s.unit(),
            _ => f64::NAN,
        }
    }

    // Classify the result of an operation that had a flagged operand.
    fn from_flagged(r: f64) -> Value {
        if r.is_nan() {
            Value::Indeterminate
        } else if r.is_infinite() {
            Value::Huge(Sign::of(r))
        } else if r == 0.0 {
            Value::Tiny(Sign::of(r))
        } else {
            Value::approx(r, UNIT_ROUNDOFF * r.abs() + f64::MIN_POSITIVE)
        }
    }

    fn finish(r: f64, err: f64, underflow: bool) -> Value {
        if r.is_nan() {
            Value::NotDefined
        } else if r.is_infinite() {
            Value::Huge(Sign::of(r))
        } else if r == 0.0 && underflow {
            Value::Tiny(Sign::of(r))
        } else {
            Value::approx(r, err)
        }
    }

    fn either_undefined(a: &Value, b: &Value) -> bool {
        !a.is_defined() || !b.is_defined()
    }

    pub fn add(&self, other: &Value) -> Value {
        if Value::either_undefined(self, other) {
            return Value::NotDefined;
        }
        match (*self, *other) {
            (Value::Real { value: a, err: ea }, Value::Real { value: b, err: eb }) => {
                let r = a + b;
                Value::finish(r, ea + eb + UNIT_ROUNDOFF * r.abs(), false)
            }
            (Value::Tiny(s), Value::Tiny(t)) if s != t => Value::Indeterminate,
            _ => Value::from_flagged(self.proxy() + other.proxy()),
        }
    }

    pub fn neg(&self) -> Value {
        match *self {
            Value::Real { value, err } => Value::approx(-value, err),
            Value::Huge(s) => Value::Huge(if s == Sign::Plus {
                Sign::Minus
            } else {
                Sign::Plus
            }),
            Value::Tiny(s) => Value::Tiny(if s == Sign::Plus {
                Sign::Minus
            } else {
                Sign::Plus
            }),
            other => other,
        }
    }

    pub fn sub(&self, other: &Value) -> Value {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Value) -> Value {
        if Value::either_undefined(self, other) {
            return Value::NotDefined;
        }
        match (*self, *other) {
            (Value::Real { value: a, err: ea }, Value::Real { value: b, err: eb }) => {
                let r = a * b;
                let err = a.abs() * eb + b.abs() * ea + ea * eb + UNIT_ROUNDOFF * r.abs();
                Value::finish(r, err, a != 0.0 && b != 0.0)
            }
            _ => Value::from_flagged(self.proxy() * other.proxy()),
        }
    }

    pub fn div(&self, other: &Value) -> Value {
        if Value::either_undefined(self, other) {
            return Value::NotDefined;
        }
        if let Value::Real { value: b, err: eb } = *other {
            if b.abs() <= eb {
                return Value::NotDefined;
            }
        }
        match (*self, *other) {
            (Value::Real { value: a, err: ea }, Value::Real { value: b, err: eb }) => {
                let r = a / b;
                let err = (ea + r.abs() * eb) / (b.abs() - eb) + UNIT_ROUNDOFF * r.abs();
                Value::finish(r, err, a != 0.0)
            }
            _ => Value::from_flagged(self.proxy() / other.proxy()),
        }
    }

    pub fn pow(&self, other: &Value) -> Value {
        if Value::either_undefined(self, other) {
            return Value::NotDefined;
        }
        match (*self, *other) {
            (Value::Real { value: a, err: ea }, Value::Real { value: b, err: eb }) => {
                let integral = b.fract() == 0.0;
                if a < 0.0 && !integral {
                    return Value::NotDefined;
                }
                if a.abs() <= ea {
                    // base indistinguishable from zero
                    if b < 0.0 {
                        return Value::NotDefined;
                    }
                    if b == 0.0 {
                        return Value::exact(1.0);
                    }
                    if a == 0.0 && ea == 0.0 {
                        return Value::exact(0.0);
                    }
                }
                let r = a.powf(b);
                let mut err = 2.0 * UNIT_ROUNDOFF * r.abs();
                if a != 0.0 {
                    err += r.abs() * (b.abs() * ea / a.abs() + a.abs().ln().abs() * eb);
                } else {
                    err += ea.powf(b);
                }
                Value::finish(r, err, a != 0.0)
            }
            (base, Value::Real { value: b, .. })
                if base.is_flagged() && b.abs() < 1.0 && b != 0.0 =>
            {
                if base.proxy() < 0.0 {
                    Value::NotDefined
                } else {
                    Value::Indeterminate
                }
            }
            _ => {
                let (a, b) = (self.proxy(), other.proxy());
                if a < 0.0 && b.is_finite() && b.fract() != 0.0 {
                    return Value::NotDefined;
                }
                Value::from_flagged(a.powf(b))
            }
        }
    }

    pub fn abs(&self) -> Value {
        match *self {
            Value::Real { value, err } => Value::approx(value.abs(), err),
            Value::Huge(_) => Value::Huge(Sign::Plus),
            Value::Tiny(_) => Value::Tiny(Sign::Plus),
            other => other,
        }
    }

    pub fn sqrt(&self) -> Value {
        match *self {
            Value::Real { value: a, err: ea } => {
                if a < -ea {
                    Value::NotDefined
                } else if a <= 0.0 {
                    Value::approx(0.0, ea.sqrt())
                } else {
                    let r = a.sqrt();
                    Value::approx(r, (ea / (2.0 * r)).min(ea.sqrt()) + UNIT_ROUNDOFF * r)
                }
            }
            Value::Huge(Sign::Minus) | Value::Tiny(Sign::Minus) => Value::NotDefined,
            Value::NotDefined => Value::NotDefined,
            _ => Value::Indeterminate,
        }
    }

    pub fn exp(&self) -> Value {
        match *self {
            Value::Real { value: a, err: ea } => {
                let r = a.exp();
                Value::finish(
                    r,
                    r * (ea + UNIT_ROUNDOFF * a.abs()) + UNIT_ROUNDOFF * r,
                    true,
                )
            }
            Value::NotDefined => Value::NotDefined,
            _ => Value::from_flagged(self.proxy().exp()),
        }
    }

    pub fn ln(&self) -> Value {
        match *self {
            Value::Real { value: a, err: ea } => {
                if a <= 0.0 || a <= ea {
                    Value::NotDefined
                } else {
                    let r = a.ln();
                    Value::approx(r, ea / a + UNIT_ROUNDOFF * r.abs())
                }
            }
            Value::Huge(Sign::Minus) | Value::Tiny(Sign::Minus) => Value::NotDefined,
            Value::NotDefined => Value::NotDefined,
            _ => Value::Indeterminate,
        }
    }

    pub fn sin(&self) -> Value {
        match *self {
            Value::Real { value: a, err: ea } => {
                let r = a.sin();
                Value::approx(r, ea + UNIT_ROUNDOFF * r.abs().max(f64::MIN_POSITIVE))
            }
            Value::NotDefined => Value::NotDefined,
            _ => Value::from_flagged(self.proxy().sin()),
        }
    }

    pub fn cos(&self) -> Value {
        match *self {
            Value::Real { value: a, err: ea } => {
                let r = a.cos();
                Value::approx(r, ea + UNIT_ROUNDOFF * r.abs().max(f64::MIN_POSITIVE))
            }
            Value::NotDefined => Value::NotDefined,
            _ => Value::from_flagged(self.proxy().cos()),
        }
    }

    pub fn tan(&self) -> Value {
        match *self {
            Value::Real { value: a, err: ea } => {
                if a.cos().abs() <= ea + UNIT_ROUNDOFF * a.abs().max(1.0) {
                    return Value::NotDefined;
                }
                let r = a.tan();
                Value::finish(r, ea * (1.0 + r * r) + UNIT_ROUNDOFF * r.abs(), false)
            }
            Value::NotDefined => Value::NotDefined,
            _ => Value::from_flagged(self.proxy().tan()),
        }
    }

    pub fn arctan(&self) -> Value {
        match *self {
            Value::Real { value: a, err: ea } => {
                let r = a.atan();
                Value::approx(r, ea / (1.0 + a * a) + UNIT_ROUNDOFF * r.abs())
            }
            Value::NotDefined => Value::NotDefined,
            _ => Value::from_flagged(self.proxy().atan()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Real { value, .. } => write!(f, "{value}"),
            Value::Huge(Sign::Plus) => f.write_str("huge(+)"),
            Value::Huge(Sign::Minus) => f.write_str("huge(-)"),
            Value::Tiny(Sign::Plus) => f.write_str("tiny(+)"),
            Value::Tiny(Sign::Minus) => f.write_str("tiny(-)"),
            Value::Indeterminate => f.write_str("indeterminate"),
            Value::NotDefined => f.write_str("undefined"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_of_half_pi_is_a_pole() {
        let pi = Value::approx(std::f64::consts::PI, UNIT_ROUNDOFF * std::f64::consts::PI);
        let n = Value::exact(6.0);
        let x = n.div(&Value::exact(2.0));
        let arg = pi.mul(&Value::exact(1.0).div(&n)).mul(&x);
        let c = arg.cos();
        assert_eq!(Value::exact(1.0).div(&c), Value::NotDefined);
    }

    #[test]
    fn overflow_and_underflow_are_flagged() {
        assert_eq!(Value::exact(1000.0).exp(), Value::Huge(Sign::Plus));
        assert_eq!(Value::exact(-1000.0).exp(), Value::Tiny(Sign::Plus));
        assert_eq!(
            Value::exact(1e200).mul(&Value::exact(-1e200)),
            Value::Huge(Sign::Minus)
        );
        let huge = Value::Huge(Sign::Plus);
        assert_eq!(huge.sub(&huge), Value::Indeterminate);
        assert_eq!(huge.mul(&Value::Tiny(Sign::Plus)), Value::Indeterminate);
        assert_eq!(Value::exact(1.0).div(&huge), Value::Tiny(Sign::Plus));
        assert_eq!(huge.ln(), Value::Indeterminate);
    }

    #[test]
    fn domain_violations() {
        assert_eq!(Value::exact(1.0).div(&Value::exact(0.0)), Value::NotDefined);
        assert_eq!(Value::exact(-1.0).ln(), Value::NotDefined);
        assert_eq!(Value::exact(0.0).ln(), Value::NotDefined);
        assert_eq!(Value::exact(-1.0).sqrt(), Value::NotDefined);
        assert_eq!(
            Value::exact(-8.0).pow(&Value::exact(1.0 / 3.0)),
            Value::NotDefined
        );
        assert_eq!(
            Value::exact(0.0).pow(&Value::exact(-1.0)),
            Value::NotDefined
        );
        assert_eq!(
            Value::exact(-2.0).pow(&Value::exact(3.0)).as_f64(),
            Some(-8.0)
        );
    }

    #[test]
    fn comparison_respects_error_bounds() {
        let third = Value::exact(1.0).div(&Value::exact(3.0));
        let one = third.mul(&Value::exact(3.0));
        assert_eq!(one.compare(&Value::exact(1.0)), Some(Ordering::Equal));
        assert_eq!(
            Value::exact(1.0).compare(&Value::exact(1.0 + 1e-9)),
            Some(Ordering::Less)
        );
        assert_eq!(
            Value::Huge(Sign::Plus).compare(&Value::exact(1e300)),
            Some(Ordering::Greater)
        );
        assert_eq!(Value::Tiny(Sign::Plus).is_zero(), Some(true));
    }
}
