//! Quantitative unique continuation and boundary stability tools for the
//! anisotropic wave equation on planar graph domains.
//!
//! The crate is organised bottom-up:
//! - [`geometry`]: graph domains, atlases, set distances, ball chains;
//! - [`wave`]: cut-cell wave solver with boundary flux and energy;
//! - [`fbi`]: the Gaussian time-to-elliptic transform and its checks;
//! - [`propagation`]: three-sphere inequalities and smallness propagation;
//! - [`stability`]: parameter schedules and the perturbation experiment.

pub mod geometry;
pub mod fbi;
pub mod propagation;
pub mod stability;
pub mod wave;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
