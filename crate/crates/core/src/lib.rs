//! Slope invariants of polarized metric graphs and the tropical and
//! analytic machinery around them.

pub mod corpus;
pub mod error;
pub mod graph;
pub mod invariants;
pub mod jump;
pub mod laplace;
pub mod linalg;
pub mod rational;
pub mod theta;
pub mod tropical;

pub use error::{Error, ErrorClass, Result};
pub use graph::PolarizedWeightedGraph;
pub use rational::Rational;
