//! Scenario orchestration: closed-loop assembly, metrics, comparison
//! against the linear baseline, parameter sweeps and file output.

mod closed_loop;
mod compare;
mod config;
mod metrics;
mod output;
mod plot;

pub use closed_loop::{run_closed_loop, ClosedLoop, StepRecord, Trajectory};
pub use compare::{
    compare_controllers, run_sweep, tune_linear_baseline, override_key, split_values, BaselineTuning, Comparison, SweepPoint,
    BASELINE_GAIN_GRID, ORBIT_SAMPLES,
};
pub use config::{
    ControllerKind, ScenarioConfig, ScenarioFile, SimulationConfig, DEFAULT_CONVERGENCE_THRESHOLD,
};
pub use metrics::{
    compute_metrics, extract_reference_orbit, orbit_ending_at, periodicity_defect, pointwise_defect, Metrics,
    ReferenceOrbit,
};
pub use output::{
    emit_comparison, emit_outputs, metrics_summary, trajectory_header, write_metrics, write_trajectory_csv,
};

use crate::controller::ControllerError;
use crate::fde_solver::SolverError;
use crate::systems::SystemError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("controller: {0}")]
    Controller(#[from] ControllerError),
    #[error("plant: {0}")]
    System(#[from] SystemError),
    #[error("solver: {0}")]
    Solver(#[from] SolverError),
    #[error("trajectory has not converged (steady-state error {steady_state_error} >= {threshold})")]
    NotConverged {
        steady_state_error: f64,
        threshold: f64,
    },
    #[error("scenarios differ in plant or simulation settings: {0}")]
    MismatchedPlant(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("plot: {0}")]
    Plot(String),
}

impl ExperimentError {
    /// Process exit code for this failure category.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) | ExperimentError::MismatchedPlant(_) => 2,
            ExperimentError::Controller(ControllerError::InadmissibleGains { .. }) => 3,
            ExperimentError::Controller(_) | ExperimentError::System(_) => 2,
            ExperimentError::Solver(SolverError::Divergence { .. }) => 4,
            ExperimentError::Solver(_) => 4,
            ExperimentError::NotConverged { .. } => 6,
            ExperimentError::Io(_) | ExperimentError::Plot(_) => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, ExperimentError>;
