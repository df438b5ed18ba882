//! Experiment plumbing behind the `ferroconnect` binary: specs, runs, manifests and report export.

pub mod record;
pub mod report;
pub mod run;
pub mod spec;
