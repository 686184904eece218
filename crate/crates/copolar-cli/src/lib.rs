//! Scenario runner around the `copolar` library: parses scenario files,
//! drives the identity audits, and writes deterministic reports.
//!
//! Exit code contract: 0 all expectations met, 2 scenario/usage errors,
//! 3 at least one audit verdict differed from its configured expectation,
//! 4 at least one audit could not produce a verdict (numeric degeneracy).

pub mod runner;
pub mod scenario;
