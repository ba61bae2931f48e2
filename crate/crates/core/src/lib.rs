//! Exact minimum-cost decision trees built from two-way comparisons.
//!
//! A query set is searched with tests of the form `q < k` and `q = k`,
//! and each search must end at a leaf naming a class that contains the
//! query. [`solve`] finds a tree minimizing the weighted sum of leaf
//! depths by a memoized recurrence over a polynomial dictionary of
//! admissible query subsets; [`oracle`] holds an exponential reference
//! solver for small instances.

pub mod bench;
pub mod dictionary;
pub mod dot;
pub mod exec;
pub mod format;
pub mod generate;
pub mod greedy;
pub mod instance;
pub mod oracle;
pub mod queryset;
pub mod signature;
pub mod solver;
pub mod transform;
pub mod tree;
pub mod verify;

#[cfg(test)]
mod testutil;

pub use exec::Execution;
pub use instance::{check_feasibility, ClassId, Feasibility, Instance, InstanceError, Query};
pub use queryset::QuerySet;
pub use solver::{solve, SolveError, SolveMode, SolveOptions, SolveResult, SolveStats, Status};
pub use tree::{tree_cost, Answer, Cost, DecisionTree, Test, TestKind};
pub use verify::{verify_tree, VerifyReport};
