//! Gaussian FBI transform in time, U(x,y) = √(μ/2π) ∫₀^T e^{−μ(iy+τ−t)²/2} u(x,t) dt,
//! which turns the wave equation into the elliptic problem ∂²_yU + div(A∇U) = f.

mod growth;
pub mod io;
pub mod quadrature;
mod residual;
mod source;
mod transform;

use thiserror::Error;

pub use growth::{fbi_growth_check, GrowthReport};
pub use residual::{elliptic_residual, elliptic_residual_in, interior_mask, ResidualReport};
pub use source::{fbi_source, source_bound_constant};
pub use transform::{fbi_transform, fbi_transform_series, kernel, AnalyticSeries, FbiField, FbiOptions, TimeSeries};

pub use num_complex::Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FbiError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("quadrature needs {nodes} nodes, cap is {cap}")]
    QuadratureUnderResolved { nodes: usize, cap: usize },
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("fields do not match: {0}")]
    Mismatch(String),
    #[error("i/o: {0}")]
    Io(String),
}
