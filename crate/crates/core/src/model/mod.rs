//! Problem data, uncertainty sets, shadow matrices and pole-sets.

pub mod io;
pub mod poleset;
pub mod problem;
pub mod shadow;
pub mod solution;
pub mod uncertainty;

pub use io::{load_poles, poles_from_json, poles_to_json, save_poles, Instance};
pub use poleset::{convex_weights, hull_membership, PoleSet};
pub use problem::{validate_problem, ConstraintRow, RobustProblem};
pub use shadow::ShadowMatrix;
pub use solution::{CoverageStrategy, MrcSolution};
pub use uncertainty::{
    box_vertices, contains, support_min, BoxSet, Ellipsoid, Polytope, Support, UncertaintySet,
};

/// Default tolerances shared by the solvers.
pub mod tol {
    pub const FEASIBILITY: f64 = 1e-7;
    pub const MEMBERSHIP: f64 = 1e-8;
    pub const OBJECTIVE_REL: f64 = 1e-5;
}
