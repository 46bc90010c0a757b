//! Symbolic-numeric toolkit for variable coefficient reaction-diffusion
//! equations of the form `f(x) u_t = (g(x) u^n u_x)_x + h(x) u^m`.
//!
//! The crate provides:
//! - a small canonical expression language ([`expr`]),
//! - the equation value and its residual operator ([`equation`]),
//! - construction/application of the equivalence and admissible point
//!   transformations of the class ([`equivgroup`]),
//! - second prolongations, infinitesimal invariance checks and the symmetry
//!   classifier ([`symmetry`]),
//! - local conservation laws and their transformation rules ([`conslaws`]),
//! - similarity reductions and closed-form exact solutions ([`reduce`]),
//! - an independent finite-volume PDE integrator used to cross-check every
//!   symbolic claim numerically ([`numeric`]).

pub mod conslaws;
pub mod equation;
pub mod equivgroup;
pub mod expr;
pub(crate) mod linalg;
pub mod numeric;
pub mod reduce;
pub mod symmetry;

pub use equation::RDEquation;
pub use expr::{Bindings, Expr, Func, Var};
