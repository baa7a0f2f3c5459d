//! Calculus over sequence-based virtual numbers and functions.
//!
//! A virtual number is a real sequence up to eventual agreement: `∞` is the
//! class of `(1, 2, 3, …)` and `∂ = 1/∞` the class of `(1, 1/2, 1/3, …)`.
//! A virtual function is a sequence of real functions applied index by index.
//! Relations between such objects hold when they hold at every index from
//! some point on; the [`decision`] module answers these questions with a
//! three-valued [`decision::Verdict`].

pub mod context;
pub mod corpus;
pub mod decision;
pub mod exec;
pub mod expr;
pub mod vfunc;
pub mod vintegral;
pub mod vnum;
pub mod vseq;
