//! Expression language: syntax tree, parser, renderer, evaluation,
//! differentiation, simplification and breakpoint analysis.

mod ast;
mod breakpoints;
mod diff;
mod eval;
mod parse;
mod render;
mod simplify;
mod value;

pub use ast::{BinaryOp, Branch, Constant, Expr, Guard, Relation, UnaryOp, Var};
pub use breakpoints::{breakpoints, Breakpoint, BreakpointKind, Breakpoints};
pub use diff::differentiate;
pub use eval::{evaluate_at, Bindings, EvalError};
pub use parse::{parse, ParseDiagnostic};
pub use render::render;
pub use simplify::{expand, is_total, sign_of, simplify, SignInfo};
pub use value::{Sign, Value};

pub(crate) use eval::{eval, eval_f64};
pub(crate) use render::format_number;
