//! Three-sphere inequalities, smallness propagation along ball chains, the cone decay
//! schedule and the strong unique continuation bounds.

mod cone;
mod harmonic;
mod recursion;
mod sucp;
mod three_sphere;

use thiserror::Error;

pub use cone::{cone_decay_schedule, cone_ratio, varsigma0, ConeSchedule, CONE_A, CONE_B, CONE_Q};
pub use harmonic::{harmonic_basis, random_harmonic, Poly2};
pub use recursion::{alpha_closed_form, propagate_smallness, propagate_steps, PropagationState};
pub use sucp::{fit_sucp_constant, sucp_bound, theta_boundary, theta_interior, SucpKind};
pub use three_sphere::{
    ball_integral, three_sphere_exponent, verify_three_sphere, write_records_csv, BallProblem, ThreeSphereParams,
    VerificationRecord, VerifyOptions,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PropagationError {
    #[error("δ = {delta} outside (0, {max}]")]
    DeltaOutOfRange { delta: f64, max: f64 },
    #[error("degenerate radii: {0}")]
    DegenerateRadii(String),
    #[error("not a solution: relative residual {residual:.3e} > {tol:.3e}")]
    NotASolution { residual: f64, tol: f64 },
    #[error("contraction violated: χ²/θ̃₀ = {ratio} ≥ 1")]
    ContractionViolated { ratio: f64 },
    #[error("θ = {theta} ≤ 0: ρ too large for C")]
    ThetaNonpositive { theta: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("i/o: {0}")]
    Io(String),
}
