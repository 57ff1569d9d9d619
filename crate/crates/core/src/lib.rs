//! Radial solutions of singular Liouville systems
//!
//! Δu_i + Σ_j a_ij |x|^{β_j} e^{u_j} = 0 in ℝ²,
//!
//! their energies and asymptotics, the inverse energy map by shooting, and
//! the linearized equations around a solution.

// negated comparisons reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod algebra;
pub mod cli_io;
pub mod error;
pub mod linearized;
pub mod oracle;
pub mod radial;
pub mod shooting;
pub mod suite;

mod ode;
mod quad;
mod series;

pub use algebra::{CouplingMatrix, EnergyVector, Membership, SingularityExponents};
pub use error::{Error, Result};
pub use oracle::ScalarSolution;
pub use radial::{InitialHeights, ProblemSpec, RadialProfile};
