//! Exact symbolic engine for the quantum nondegenerate Kepler-Coulomb
//! system: differential-operator algebra, integrals of motion, ternary
//! quadratic algebra relations, representations and spectrum.

pub mod dsl;
pub mod engine;
pub mod model;
pub mod operator;
pub mod oracle;
pub mod rep;
pub mod scalar;
pub mod spectrum;
