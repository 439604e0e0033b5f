//! Anisotropic wave IBVP on embedded-boundary grids: solver, boundary flux,
//! energy and boundary-data norms.

mod anisotropy;
mod bdata;
mod flux;
mod grid;
pub mod io;
mod solver;

pub use anisotropy::{sym_eigen, AnisotropyField};
pub use bdata::{c11_boundary_norm, BoundaryData, BoundarySource, SpatialProfile, TemporalProfile};
pub use flux::{boundary_flux, flux_mismatch_epsilon, FluxTrace};
pub use grid::{Arm, Grid, GridSpec, Node};
pub use solver::{energy, solve_ibvp, solve_with, Forcing, InitialData, SolveOptions, WaveField};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveError {
    #[error("CFL violated: Δt = {dt:.4e} > {limit:.4e}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("boundary does not conform to the grid: {0}")]
    NonconformingBoundary(String),
    #[error("flux stencil leaves the domain at Σ sample {sample} ({x:.4}, {y:.4})")]
    StencilOutOfDomain { sample: usize, x: f64, y: f64 },
    #[error("flux traces are not comparable: {0}")]
    GridMismatch(String),
    #[error("time derivative of order {order} is not resolved: {detail}")]
    InsufficientSmoothness { order: usize, detail: String },
    #[error("boundary data vanish on the accessible portion; F is undefined")]
    FlatData,
    #[error("boundary data incompatible: {0}")]
    IncompatibleData(String),
    #[error("anisotropy: {0}")]
    Anisotropy(String),
    #[error("time {t} is not on the stored time grid")]
    NotOnTimeGrid { t: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("io: {0}")]
    Io(String),
}
