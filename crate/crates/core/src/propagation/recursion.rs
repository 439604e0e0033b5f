use serde::{Deserialize, Serialize};

use super::PropagationError;
use crate::geometry::BallChain;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationState {
    /// α₀, …, α_N from α_{k+1} = C α_k^ϑ.
    pub alpha: Vec<f64>,
    pub theta_star: f64,
    pub c_step: f64,
    pub n: usize,
    /// C^{(1−ϑ^N)/(1−ϑ)} α₀^{ϑ^N}: the recursion solved exactly.
    pub closed_form: f64,
    /// C^{1/(1−ϑ)} α₀^{ϑ^N}: the cruder bound, which dominates.
    pub bound: f64,
}

/// C^{Σ_{k<N} ϑ^k} α₀^{ϑ^N}.
pub fn alpha_closed_form(alpha0: f64, theta: f64, c: f64, n: usize) -> f64 {
    if alpha0 == 0.0 || n == 0 {
        return alpha0;
    }
    let geo: f64 = (0..n).map(|k| theta.powi(k as i32)).sum();
    (geo * c.ln() + theta.powi(n as i32) * alpha0.ln()).exp()
}

pub fn propagate_steps(alpha0: f64, theta: f64, c: f64, n: usize) -> Result<PropagationState, PropagationError> {
    if !(alpha0 >= 0.0 && theta > 0.0 && theta < 1.0 && c >= 1.0) {
        return Err(PropagationError::InvalidParameter(format!("α₀ = {alpha0}, ϑ = {theta}, C = {c}")));
    }
    let mut alpha = Vec::with_capacity(n + 1);
    alpha.push(alpha0);
    for k in 0..n {
        let a = alpha[k];
        alpha.push(if a == 0.0 { 0.0 } else { c * a.powf(theta) });
    }
    let bound = if alpha0 == 0.0 { 0.0 } else { (c.ln() / (1.0 - theta) + theta.powi(n as i32) * alpha0.ln()).exp() };
    Ok(PropagationState { alpha, theta_star: theta, c_step: c, n, closed_form: alpha_closed_form(alpha0, theta, c, n), bound })
}

/// One step per consecutive pair of balls in the chain.
pub fn propagate_smallness(
    chain: &BallChain,
    alpha0: f64,
    theta_star: f64,
    c_step: f64,
) -> Result<PropagationState, PropagationError> {
    propagate_steps(alpha0, theta_star, c_step, chain.len().saturating_sub(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_iteration() {
        let s = propagate_steps(1e-4, 0.5, 2.0, 3).unwrap();
        let want = 2.0 * (2.0 * (2.0f64 * 1e-2).sqrt()).sqrt();
        assert!((s.alpha[3] - want).abs() < 1e-14);
        assert!((s.alpha[3] - 1.0637).abs() < 1e-4);
        assert!((s.closed_form - want).abs() < 1e-13);
    }

    #[test]
    fn zero_and_fixed_point() {
        let s = propagate_steps(0.0, 0.3, 5.0, 8).unwrap();
        assert!(s.alpha.iter().all(|a| *a == 0.0) && s.closed_form == 0.0);
        let c: f64 = 3.0;
        let fixed = c.powf(1.0 / (1.0 - 0.4));
        let s = propagate_steps(fixed, 0.4, c, 10).unwrap();
        for a in &s.alpha {
            assert!((a - fixed).abs() < 1e-12 * fixed);
        }
    }

    proptest! {
        #[test]
        fn bound_dominates(a0 in 1e-12f64..1.0, th in 0.05f64..0.95, c in 1.0f64..10.0, n in 0usize..50) {
            let s = propagate_steps(a0, th, c, n).unwrap();
            prop_assert!(s.alpha[n] <= s.bound * (1.0 + 1e-12));
            prop_assert!((s.alpha[n] - s.closed_form).abs() <= 1e-12 * s.closed_form);
        }
    }
}
