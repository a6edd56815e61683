//! Front end for the `dper` solver: deadline-bounded runs, structured reports
//! and the benchmark harness.

pub mod bench;
pub mod report;
pub mod run;
