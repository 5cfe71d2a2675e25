//! Configuration, sweep drivers and CSV output for the command-line front end.
//!
//! Everything here is `f64`: it is plumbing around the generic core.

mod config;
mod dataset;
mod run;

pub use config::{parse_config, AxisRange, ConfigDraft, Mode, SweepConfig, Units, KEYS};
pub use dataset::{emit_csv, format_value, write_csv, Dataset};
pub use run::{run, ENGINE_VERSION};
