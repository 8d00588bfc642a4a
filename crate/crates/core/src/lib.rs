//! Exact analysis of finite irreducible Markov chains through hitting-time
//! generating functions.
//!
//! The central objects are the polynomials `pi_v(x) = det(Id - x M^(v))`
//! (`M^(v)` is `M` with state `v` deleted) and the hitting-time generating
//! functions `G_{u,v}^{>=t}(x) = E_u[x^{tau_v^{>=t}}]`. For every start `u`,
//! `sum_v G_{u,v}^{>=t}(x) pi_v(x) = x^t det(Id - xM) / (1 - x)`, a polynomial
//! independent of `u`; Kemeny's constant is the derivative-level shadow of
//! that identity.
//!
//! All arithmetic is over exact rationals. Module map:
//!
//! - [`exactalg`]: rationals, polynomials, rational functions.
//! - [`chain`]: parsing and validation of transition matrices.
//! - [`detcore`]: `det(Id - xM)`, `pi_v(x)`, the adjugate and `K0(x)`.
//! - [`hitting`]: generating functions, laws, moments, Kemeny constant and
//!   the identity checks.
//! - [`mcsim`]: Monte Carlo and dynamic-programming oracles.
//! - [`cli`]: the `kemeny` command-line front end.

pub mod chain;
pub mod cli;
pub mod detcore;
pub mod exactalg;
pub mod hitting;
pub mod matrix;
pub mod mcsim;
pub mod report;
pub mod samples;

#[cfg(test)]
pub(crate) mod testutil {
    pub use crate::samples::{lazy2, swap2, worked_example as example4};
}

pub use chain::{Chain, ChainError, InputFormat};
pub use exactalg::{AlgebraError, Polynomial, Rational, RationalFunction};

use thiserror::Error;

/// Any failure surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Hitting(#[from] hitting::HittingError),
    #[error(transparent)]
    Sim(#[from] mcsim::SimError),
}
