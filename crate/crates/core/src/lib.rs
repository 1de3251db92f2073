//! Verified numerics for one-dimensional random motion whose velocity
//! flips sign at m-Erlang renewal epochs. The law of the position splits
//! into an absolutely continuous density inside the light cone |x| <= vt
//! and an atom on x = vt; for m in {1, 2} the density has closed forms in
//! Bessel functions, generated here from a cyclic-algebra expansion and
//! cross-checked by quadrature, finite-difference residuals, and seeded
//! Monte Carlo simulation.

pub mod algebra;
pub mod bessel;
pub mod density;
pub mod error;
pub mod mc;
pub mod pde;
pub mod quadrature;
pub mod report;

pub use algebra::table::{generate_table, CrRelation, CyclicIndex, UFunctionTable};
pub use algebra::term_sum::TermSum;
pub use density::{density, DensityValue, ModelParams, Region, Side};
pub use error::{Error, Result};
pub use mc::{Histogram, SimConfig, WindowEstimate};
pub use pde::{GridSpec, OperatorId, ResidualReport};
pub use quadrature::QuadratureSpec;
pub use report::{Check, McEffort, Suite};
