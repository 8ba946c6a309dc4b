//! Test functions, sweeps, slope fits and plots.

mod functions;
mod plot;
mod sweep;

pub use functions::{
    equispaced_breakpoints, fk_center, fk_eval, make_fk, make_fk_with_breakpoints, TestFunction, TestFunctionKind,
};
pub use plot::{emit_plot, render_svg};
pub use sweep::{
    fit_slope, log_slope, median, medians, read_rows, run_cell, run_sweep, trial_seed, write_header, write_row,
    ResultRow, Summary, SweepConfig, SweepOutput, CSV_HEADER,
};
