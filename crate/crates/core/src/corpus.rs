//! Named example families used throughout the tests, benches and CLI.

use crate::expr::{parse, Expr};
use crate::vfunc::VirtualFunction;

pub const PHI: &str = "e^(ξ^2 - ∞^2) / cos(π * ∂ * ξ)";
pub const PSI: &str = "∞ / (1 + ∞^2 * ξ^2)";
pub const CHI: &str = "piecewise(|ξ| < ∂ : ∞ / 2 ; |ξ| ≥ ∂ : 0)";
pub const KAPPA: &str = "∞";
pub const POWER: &str = "∂ * ξ^∞ + ∞^2";

/// Every named family as `(name, source)`.
pub const NAMED: [(&str, &str); 5] = [
    ("phi", PHI),
    ("psi", PSI),
    ("chi", CHI),
    ("kappa", KAPPA),
    ("power", POWER),
];

fn family(src: &str) -> VirtualFunction {
    VirtualFunction::from_expr(expr(src)).expect("corpus family")
}

pub fn expr(src: &str) -> Expr {
    parse(src).expect("corpus expression")
}

/// `e^(ξ² − ∞²)/cos(π∂ξ)`, undefined where `ξ` is an odd multiple of `∞/2`.
pub fn phi() -> VirtualFunction {
    family(PHI)
}

/// `∞/(1 + ∞²ξ²)`, a spike of height `∞` and width `∂` at the origin.
pub fn psi() -> VirtualFunction {
    family(PSI)
}

/// The box of height `∞/2` on `|ξ| < ∂`.
pub fn chi() -> VirtualFunction {
    family(CHI)
}

/// The constant function `∞`.
pub fn kappa() -> VirtualFunction {
    family(KAPPA)
}

/// `∂ξ^∞ + ∞²`, whose derivative is `ξ^(∞−1)`.
pub fn power() -> VirtualFunction {
    family(POWER)
}
