//! Graph domains, set distances, relative graphs and ball chains.

mod chain;
mod chart;
mod distance;
mod domain;
mod polygon;
mod relgraph;

pub use chain::{
    cone_ball_chain, cone_params_for_varsigma, path_ball_chain, packing_constant, BallChain, ChainKind, ConeParams,
    PathHost,
};
pub use chart::{C11Norm, Chart};
pub use distance::{hausdorff_distance, modified_distance};
pub use domain::{
    build_graph_domain, derive_chart, read_charts_csv, read_charts_file, sigma_clearance, BoundaryLabel, Domain,
    DomainConstants, DomainExport, DomainOptions, SigmaSpec,
};
pub use polygon::{add, dist, dot, norm, point_segment_dist, scale, sub, BBox, Crossing, Point, Polygon, SegmentIndex};
pub use relgraph::{relative_graph_report, RelativeGraphOptions, RelativeGraphReport};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("chart {chart}: {term} exceeds bound ({value:.6e} > {bound:.6e})")]
    ChartViolation { chart: usize, term: String, value: f64, bound: f64 },
    #[error("no admissible measurement portion: Σ must lie at distance ≥ ρ₀ from Γ^(i) and contain a boundary ball")]
    EmptyAccessiblePortion,
    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),
    #[error("volume {area:.6e} exceeds Mρ₀ⁿ = {bound:.6e}")]
    VolumeBound { area: f64, bound: f64 },
    #[error("charts do not close into a loop (gap {gap:.3e})")]
    OpenAtlas { gap: f64 },
    #[error("domains are not relative graphs at chart {chart}: {detail}")]
    NotRelativeGraphs { chart: usize, detail: String },
    #[error("cone angles out of order: need γ₁ < γ₂ < γ (sin γ₁ = {sin1:.6}, sin γ₂ = {sin2:.6}, sin γ = {sin:.6})")]
    ConeAngleOrder { sin1: f64, sin2: f64, sin: f64 },
    #[error("start and end are not connected in the r-interior (r = {r})")]
    NotConnected { r: f64 },
    #[error("chart csv line {line}: {message}")]
    ChartCsv { line: usize, message: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
