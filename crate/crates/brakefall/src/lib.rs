//! Scenario files, batch runs, CLI support and output formats for the
//! `brakefall-core` integrator.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod ingest;
pub mod output;
pub mod run;
pub mod scenario;

pub use error::{Error, Result};
pub use ingest::{ingest_orbit_table, run_table, table_csv, IngestOptions, OrbitRow};
pub use output::emit_outputs;
pub use run::{run_scenario, ReportBundle, Summary};
pub use scenario::{builtin, load_spec, parse_spec, Format, ScenarioSpec, BUILTIN};
