//! Exact scalar, polynomial and rational-function arithmetic.
//!
//! Everything downstream works over the rationals: matrix entries, polynomial
//! coefficients, probabilities and moments. Nothing in this module rounds.

mod poly;
mod ratfunc;
pub(crate) mod rational;

pub use poly::Polynomial;
pub use ratfunc::RationalFunction;
pub use rational::{format_decimal, format_rational, parse_rational, rat, Rational};

use thiserror::Error;

/// Failures of exact algebraic operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("polynomial division is not exact: remainder {remainder}")]
    DivisionNotExact { remainder: String },
    #[error("division by the zero polynomial or rational function")]
    DivisionByZeroFunction,
    #[error("denominator vanishes at x = {at}")]
    PoleAtPoint { at: String },
    #[error("cannot parse rational literal {0:?}")]
    ParseRational(String),
}
