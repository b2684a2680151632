//! Requirements selection for the next software release.
//!
//! A [`model::RequirementCatalog`] (requirements, multivalued estimates and
//! interactions) goes through [`preprocess::build_problem`] to become one
//! [`model::ReleaseProblem`] per exclusion branch. [`solvers::solve`] turns
//! those into a [`model::ParetoFront`], and [`indicators`] helps pick among its
//! members.

pub mod aggregate;
pub mod cli;
pub mod error;
pub mod indicators;
pub mod io;
pub mod model;
pub mod objectives;
pub mod pareto;
pub mod preprocess;
pub mod run;
pub mod selection;
pub mod service;
pub mod solvers;

pub use error::{Error, Result};
pub use model::{
    AttributeKey, Direction, ParetoFront, ProblemConfig, ReleaseProblem, RequirementCatalog, RequirementId,
    Solution,
};
pub use selection::Selection;
