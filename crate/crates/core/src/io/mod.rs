//! Configuration files, result files and run manifests.

mod build;
mod config;
mod output;
mod run;
pub mod units;

pub use build::{sha256_hex, Model, TableRecord};
pub use config::{
    DriveConfig, DriveEnergy, FomConfig, OdmrConfig, PlasmonicsConfig, RunConfig, SpectrumConfig, SweepConfig,
    SweepKind, TraceConfig, DEFAULT_LEVELS,
};
pub use output::{csv_bytes, read_columns, write_atomic, Column, OutputRecord, OutputSet};
pub use run::{read_manifest, replay, run, Command, Manifest, ReplayReport, RunOptions, RunReport, MANIFEST};
