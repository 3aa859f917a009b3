//! LP and MILP toolkit: a sparse revised two-phase simplex, a
//! best-first branch-and-bound on top of it, and an LP text format reader
//! and writer.

mod bnb;
mod error;
mod lpfile;
mod lu;
mod model;
mod simplex;

pub use bnb::{solve, Limits, SolveResult, Stats, Status, INTEGRALITY_TOL};
pub use error::{LpFileError, ModelError, SolveError};
pub use lpfile::{parse_lp, read_lp, to_lp_string, write_lp};
pub use model::{is_identifier, Column, LinearModel, Row, Sense};
pub use simplex::{solve_lp, LpOutcome, LpStatus, FEASIBILITY_TOL, OPTIMALITY_TOL};
