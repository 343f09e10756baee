//! Experiment runner for `so3-cubics`: reproduces the worked examples, runs
//! convergence-order studies and writes CSV, JSON and SVG artifacts.

// `!(x > limit)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use config::{ExperimentConfig, Format, Initial, Kind, Overrides, Projection, RawConfig};
pub use error::HarnessError;
pub use experiments::{
    compare_cubic, compare_quadratic, converge, run, run_converge, run_cubic, run_figure1,
    run_figure2, run_figure3, run_quadratic, ErrorReport, RunResult,
};
