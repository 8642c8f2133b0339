//! Experiment configuration, sweeps, reference optima and CSV output.

mod check;
mod config;
mod reference;
mod run;

pub use check::{check_config, check_trajectory, CheckRow, CheckSummary};
pub use config::{
    Algorithm, CheckSpec, ExperimentConfig, LambdaRule, LambdaSpec, OracleSpec, ProblemSpec,
    ReferenceSpec, SetSpec, SolverSpec, SweepSpec,
};
pub use reference::{
    compute_reference_optimum, compute_reference_optimum_with, ReferenceOptimum, ReferenceOptions,
};
pub use run::{
    cells, mean_series, reference_for, run_cell, run_experiment, thread_count, Cell, MeanRow,
    RunOptions, RunResult, SweepResult, CSV_HEADER, THREADS_ENV,
};
