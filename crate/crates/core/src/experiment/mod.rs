//! Run configuration, algorithm dispatch and result files for the `gmw` CLI.

mod config;
mod report;
mod run;

pub use config::{Algorithm, DatasetSpec, NetworkRef, Overrides, RunConfig};
pub use report::{aggregate, compare, Aggregate, Comparison, ComparisonRow, Spread};
pub use run::{load_dataset, read_result, run, run_on, trace_export, write_outputs, RunResult, TracePoint};
