//! Noncommutative algebra of differential operators in x, y, z whose
//! coefficients live in the coordinate ring extended by `r`.

pub mod coeff;
pub mod expr;

pub use coeff::SpatialCoeff;
pub use expr::{deriv_name, DerivIndex, OperatorExpr};
