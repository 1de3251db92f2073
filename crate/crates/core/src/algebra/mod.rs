//! The 2m-dimensional cyclic commutative algebra behind the density
//! expansion: truncated power series in w = t^2 - y^2, sums of monomial
//! terms closed under partial differentiation, and the generated table of
//! expansion components.

pub mod series;
pub mod table;
pub mod term_sum;
