//! Robust linear optimization where binary decisions shape the uncertainty
//! set.
//!
//! [`model`] holds the problem data, [`reformulate`] turns a problem into a
//! mixed-binary program, [`oracle`] evaluates worst cases exactly and
//! [`sp`] builds the shortest-path application.

pub mod matrix;
pub mod model;
pub mod oracle;
pub mod reformulate;
pub mod sp;

pub use matrix::Matrix;
pub use model::{
    PiBarUSet, PolyUSet, Polytope, Relation, RobustLinearProblem, RobustRow, UncertaintySet, XConstraint,
    YConstraint, YDomain,
};
