//! Exact scalars: ℚ(i), polynomials and rational functions in the model
//! parameters and central symbols.

pub mod gauss;
pub mod gcd;
pub mod monomial;
pub mod poly;
pub mod ratfunc;
pub mod rational;
pub mod symbol;

pub use gauss::GaussRational;
pub use monomial::Monomial;
pub use poly::{Poly, PolyAcc};
pub use ratfunc::ParamRat;
pub use rational::Rational;
pub use symbol::Symbol;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("denominator of {0} vanishes")]
    Pole(String),
    #[error("symbol `{0}` has no value")]
    Unbound(String),
}

/// Parameter binding helper: `[(Symbol::Hbar, "1"), ...]` style exact values.
pub fn point(values: &[(Symbol, Rational)]) -> Vec<(Symbol, GaussRational)> {
    values.iter().map(|(s, r)| (*s, GaussRational::real(r.clone()))).collect()
}
