//! Sweeps over block size, exponent fits and CSV output.

mod config;
mod fit;
pub mod fixtures;
mod output;
mod sweep;
pub mod verify;

pub use config::{ExperimentConfig, HypothesisSource};
pub use fit::{fit_exponent, least_squares, ExponentEstimate, ExponentFit, FitWindow};
pub use output::{
    format_value, write_binary_csv, write_chernoff_csv, write_multi_csv, write_plan_csv,
};
pub use sweep::{
    binary_sweep, chernoff_report, evaluate_plan, multi_sweep, per_site_exponent, plan_report,
    BinaryRow, BinarySweep, ChernoffReport, MultiRow, MultiSweep, PlanReport, SweepOptions,
};
