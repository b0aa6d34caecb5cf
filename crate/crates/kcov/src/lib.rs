//! CLI front end for the k-order coverage simulator: configuration parsing,
//! CSV/SVG output, and parallel epsilon-sweep batches.

pub mod config;
pub mod output;
pub mod sweep;

pub use config::{parse_config, Args, RunPlan};
pub use output::{render_svg, write_csv};
pub use sweep::{run_sweep, summarize_sweep, write_summary_csv, SweepCellResult, SweepSpec};
