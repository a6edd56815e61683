//! Exact solving of exist-random stochastic satisfiability (`∃X R Y φ`) by
//! dynamic programming over graded project-join trees.
//!
//! The pipeline has two phases:
//! 1. [`planner`] builds an `(X, Y)`-graded project-join tree for the CNF
//!    formula using blockwise bucket elimination;
//! 2. [`executor`] valuates the tree bottom-up with decision-diagram
//!    operations from [`pbf`], recording derivative signs so that a maximizing
//!    existential assignment can be read back after the maximum is known.
//!
//! [`oracle`] is an exhaustive reference implementation used for testing.

pub mod executor;
pub mod formula;
pub mod generate;
pub mod oracle;
pub mod pbf;
pub mod planner;
