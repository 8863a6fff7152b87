//! Oracles, measurements and workload drivers used by the tests and the CLI.

pub mod bench;
pub mod entropy;
pub mod oracle;
pub mod space;
pub mod workload;

pub use entropy::entropy;
pub use oracle::{brute_majorities, brute_minority};
pub use space::SpaceReport;
pub use workload::{run_workload, RunError, RunReport, Workload};
