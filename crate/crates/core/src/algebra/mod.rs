//! Exact coefficient arithmetic: rationals, sparse multivariate polynomials
//! over ℚ and rational functions in normal form.

pub mod gcd;
pub mod mpoly;
pub mod ratfn;
pub mod rational;

pub use mpoly::{Exponents, MPoly, Vars};
pub use ratfn::RatFn;
pub use rational::Rational;
