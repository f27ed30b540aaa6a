//! Experiment harness for the moving-goal agents: repeated randomized runs
//! per parameter cell, CSV records and per-cell summaries.

pub mod aggregate;
pub mod cell;
pub mod record;

pub use aggregate::{aggregate, render_table, CellKey, CellSummary};
pub use cell::{load_problem, run_cell, run_one, run_sweep, CellSpec, HarnessError, LoadedProblem, RunSettings};
pub use record::{read_csv, write_csv, ExperimentRecord, CSV_HEADER};
