//! Configuration parsing, scenario execution and file output.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, FieldFormat, GridConfig, LayoutConfig, OutputConfig, Scenario, ScenarioConfig, TargetSpec};
pub use output::{read_field_csv, write_field_map, write_summary, CsvRow, CSV_HEADER};
pub use run::{run_scenario, RunSummary, Subcommand, SUMMARY_FILE};
