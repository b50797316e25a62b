//! Lie point symmetries of finite difference schemes.
//!
//! The pipeline turns a scheme into its differential approximation
//! ([`modeq`]), prolongs a candidate infinitesimal operator over the jet
//! variables ([`prolong`]), and solves the invariance condition with a
//! polynomial ansatz over exact rationals ([`detsolve`]).

pub mod detsolve;
pub mod modeq;
pub mod parser;
pub mod prolong;
pub mod symkernel;

pub use symkernel::{Axis, Expr, JetVar, Monomial, Rational, Symbol};
