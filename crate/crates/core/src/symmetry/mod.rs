//! Point symmetries of the pricing equation.
//!
//! The four generators, their commutators and the `e`-basis are computed
//! exactly in a small monomial algebra. Invariance of the equation is checked
//! numerically through the second prolongation, and the group flows act on
//! any [`Surface`](crate::pde::Surface).

mod catalog;
mod expr;
mod field;
mod flow;
mod prolong;

pub use catalog::{subalgebra, subalgebra_catalog, CatalogParams, Parameter, SubalgebraEntry};
pub use expr::{exact, MicroExpr, Monomial};
pub use field::{basis_e, basis_u, combination, express_in, jacobi, rank, CommutatorTable, VectorField};
pub use flow::{flow, preserves_solutions, Flow, FlowReport, Flowed, FLOW_TOLERANCE};
pub use prolong::{prolongation_check, ProlongationReport, PROLONGATION_TOLERANCE};

pub const U_NAMES: [&str; 4] = ["U1", "U2", "U3", "U4"];
pub const E_NAMES: [&str; 4] = ["e1", "e2", "e3", "e4"];

/// Commutator table of `U1..U4`.
pub fn u_table(r: f64) -> crate::Result<CommutatorTable> {
    CommutatorTable::build(r, &basis_u(r)?, &U_NAMES)
}

/// Commutator table of `e1..e4`.
pub fn e_table(r: f64) -> crate::Result<CommutatorTable> {
    CommutatorTable::build(r, &basis_e(r)?, &E_NAMES)
}
