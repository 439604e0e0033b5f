//! Parameter schedules, the predicted stability modulus, log-law fitting and the
//! perturbation sweep that compares measured flux mismatch with domain distance.

mod experiment;
mod fit;
mod modulus;
mod schedule;

use thiserror::Error;

pub use experiment::{
    run_stability_experiment, write_stability_csv, BoundarySpec, DiskSpec, PerturbationSpec, StabilityConfig,
    StabilityRecord, StabilityRun,
};
pub use fit::{fit_log_modulus, FitReport};
pub use modulus::{script_f, theoretical_modulus, ModulusReport};
pub use schedule::{
    epsilon_bar_log, mu_for, omega, omega1, schedule_times, sigma_of_epsilon, sigma_of_log_epsilon, MuChoice,
    ScheduleCalibration, SigmaReport, TSigma,
};

use crate::geometry::GeometryError;
use crate::wave::WaveError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StabilityError {
    #[error("ε = e^(−{log_eps}) exceeds ε̄ = e^(−{log_eps_bar})")]
    EpsilonTooLarge { log_eps: f64, log_eps_bar: f64 },
    #[error("t₀ = {t0} is below t⋆ + λρ₀ = {need}")]
    TimeTooShort { t0: f64, need: f64 },
    #[error("insufficient data: {usable} usable records, need ≥ 5")]
    InsufficientData { usable: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("perturbation {id}: {source}")]
    Geometry { id: usize, source: GeometryError },
    #[error("perturbation {id}: {source}")]
    Solver { id: usize, source: WaveError },
    #[error("i/o: {0}")]
    Io(String),
}
