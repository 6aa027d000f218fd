//! Scenario files, experiment orchestration and result files.

mod compare;
mod config;
mod experiment;
mod validate;

pub use compare::{compare_prepared, compare_solvers, Comparison, ComparisonRow, Disagreement, RHO_DISAGREEMENT_TOL};
pub use config::{
    load_scenario, load_scenario_with, parse_scenario, scenario_source, ConstraintsSection, LoadedScenario,
    Override, PerTx, ScenarioFile, SceneSection, WaveformSection, BUNDLED, SCHEMA_VERSION,
};
pub use experiment::{
    read_summary, read_trace_csv, run_experiment, run_single, run_stem, run_with_config, write_run,
    write_trace_csv, Assignment, EpochSummary, ExperimentSpec, InitMode, Prepared, RunOutput, RunSummary, Sweep, TraceRow,
    STEADY_STATE_WINDOW, TRACE_COLUMNS,
};
pub use validate::{validate_scenario, CheckResult, ValidationReport};
