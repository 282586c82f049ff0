//! Exact combinatorics of branch-point-supported divisors on fully ramified
//! cyclic covers `w^n = prod (z - lambda_i)^{alpha_i}` of the projective line:
//! non-specialty, the operator algebra acting on theta characteristics, the
//! integer functions governing Thomae denominators, and orbit exploration.

pub mod checks;
pub mod curve;
pub mod denominators;
pub mod divisor;
pub mod ffunc;
pub mod operators;
pub mod orbits;

pub use curve::{e_factor, k_inverse, residue, s_value, CurveError, CurveSpec};
pub use divisor::{DivisorError, DivisorKind, LeveledDivisor};
