//! Experiment sweeps over the topology workbench: declarative specs, figure
//! presets, seeded parallel runs and CSV/JSONL results.

pub mod export;
pub mod instance;
pub mod presets;
pub mod runner;
pub mod spec;
pub mod vl2;

pub use export::{export, Format};
pub use presets::{preset, Params, Plan};
pub use runner::{run_experiment, summarize, ResultRow, RunOptions, SummaryRow};
pub use spec::ExperimentSpec;
pub use vl2::{vl2_compare, Vl2Comparison, Vl2Row};
