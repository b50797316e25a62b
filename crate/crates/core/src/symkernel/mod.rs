//! Exact polynomial kernel over the analysis symbols `x, t, u, ν, h, τ`,
//! ansatz coefficients, jet variables and grid samples.
//!
//! Every expression in the pipeline is a canonical sparse polynomial with
//! `BigRational` coefficients. Only `h` and `τ` may carry negative exponents,
//! which appear while a difference scheme is still divided by its steps.

mod expr;
mod monomial;
mod symbol;

use thiserror::Error;

pub use expr::{int, rat, Expr};
pub use monomial::Monomial;
pub use symbol::{Axis, GridSample, JetVar, Symbol};

pub(crate) use expr::integer_normalizer;

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("cannot differentiate with respect to {0}: it carries a negative exponent (a step division survived Taylor expansion)")]
    NegativePowerDerivative(Symbol),
    #[error("cannot substitute a non-monomial for {0}, which carries a negative exponent")]
    NonMonomialLaurentSubstitution(Symbol),
}

/// Shorthand for the jet variable `(a, b)` as an expression.
pub fn jet(x_order: u8, t_order: u8) -> Expr {
    Expr::symbol(Symbol::Jet(JetVar::new(x_order, t_order).expect("jet (0,0) is u")))
}

/// Shorthand for a symbol as an expression.
pub fn sym(s: Symbol) -> Expr {
    Expr::symbol(s)
}
