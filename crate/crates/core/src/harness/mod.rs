//! Experiment driver: scenario presets, scenario runs with artifacts, and
//! convergence sweeps in `k` and `h`. Works in `f64`.

mod report;
mod run;
mod scenario;
mod sweep;

pub use report::{emit_loglog, format_table, least_squares_slope, loglog_from, write_report, LogLog};
pub use run::{run_scenario, ContactRow, ScenarioMetrics, ScenarioRun};
pub use scenario::{
    BoundSpec, ContactOverrides, FrictionSpec, LoadOverrides, MaterialOverrides, Scenario, ScenarioOverrides,
    SCENARIO_NAMES,
};
pub use sweep::{space_sweep, time_sweep, Axis, ConvergenceReport, ConvergenceRow, ErrorMeasure};
