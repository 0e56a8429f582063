//! Linear programming and polytope geometry.

mod parametric;
mod polytope;
mod simplex;

pub use parametric::ParametricLp;
pub use polytope::{
    vertex_enumeration, HPolytope, VPolytope, GEOM_TOL, MAX_ENUM_DIM, MAX_ENUM_HALFSPACES,
};
pub use simplex::{
    solve_lp, Constraint, LinearProgram, LpSolution, LpStatus, Relation, DEFAULT_PIVOT_LIMIT,
    LP_TOL,
};

pub(crate) use polytope::dot;
