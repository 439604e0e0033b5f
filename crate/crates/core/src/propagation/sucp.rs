use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use super::PropagationError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SucpKind {
    Interior,
    Boundary,
}

/// θ = log(ρ₀/(Cρ)) / log(ρ₀/r₀) for interior balls.
pub fn theta_interior(rho: f64, r0: f64, rho0: f64, c: f64) -> f64 {
    (rho0 / (c * rho)).ln() / (rho0 / r0).ln()
}

/// Same form for the half-balls K_ρ at a graph boundary (its own constant C).
pub fn theta_boundary(rho: f64, r0: f64, rho0: f64, c: f64) -> f64 {
    theta_interior(rho, r0, rho0, c)
}

/// C(ρ₀/ρ)^C (H₀+eε₀) / (θ log((H₀+eε₀)/ε₀))^{1/6}.
#[allow(clippy::too_many_arguments)]
pub fn sucp_bound(
    kind: SucpKind,
    rho: f64,
    r0: f64,
    rho0: f64,
    eps0: f64,
    h0: f64,
    c: f64,
) -> Result<f64, PropagationError> {
    if !(r0 > 0.0 && r0 <= rho && rho < rho0 && eps0 > 0.0 && h0 >= 0.0 && c >= 1.0) {
        return Err(PropagationError::InvalidParameter(format!(
            "need 0 < r0 ≤ ρ < ρ₀, ε₀ > 0, C ≥ 1 (r0 = {r0}, ρ = {rho}, ρ₀ = {rho0}, ε₀ = {eps0}, C = {c})"
        )));
    }
    let theta = match kind {
        SucpKind::Interior => theta_interior(rho, r0, rho0, c),
        SucpKind::Boundary => theta_boundary(rho, r0, rho0, c),
    };
    if !(theta > 0.0) {
        return Err(PropagationError::ThetaNonpositive { theta });
    }
    let top = h0 + E * eps0;
    Ok(c * (rho0 / rho).powf(c) * top / (theta * (top / eps0).ln()).powf(1.0 / 6.0))
}

/// Smallest C ≥ 1 with `measured` ≤ bound(C), by bisection on [1, ρ₀/ρ); `None` if no
/// admissible C works.
pub fn fit_sucp_constant(kind: SucpKind, measured: f64, rho: f64, r0: f64, rho0: f64, eps0: f64, h0: f64) -> Option<f64> {
    let f = |c: f64| sucp_bound(kind, rho, r0, rho0, eps0, h0, c).ok();
    if f(1.0)? >= measured {
        return Some(1.0);
    }
    let (mut lo, mut hi) = (1.0, rho0 / rho);
    // the bound blows up as θ → 0⁺, i.e. as C → ρ₀/ρ
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        match f(mid) {
            Some(b) if b >= measured => hi = mid,
            _ => lo = mid,
        }
    }
    (hi < rho0 / rho && f(hi)? >= measured).then_some(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits_and_monotonicity() {
        let b = sucp_bound(SucpKind::Interior, 0.1, 0.01, 1.0, 1.0, 1.0, 2.0).unwrap();
        assert!(b.is_finite());
        let mut last = f64::INFINITY;
        for k in 1..12 {
            let v = sucp_bound(SucpKind::Interior, 0.1, 0.01, 1.0, 10f64.powi(-k), 1.0, 2.0).unwrap();
            assert!(v < last);
            last = v;
        }
        assert!(matches!(
            sucp_bound(SucpKind::Boundary, 0.6, 0.01, 1.0, 1e-3, 1.0, 2.0),
            Err(PropagationError::ThetaNonpositive { .. })
        ));
    }

    #[test]
    fn fit_reaches_measurement() {
        let c = fit_sucp_constant(SucpKind::Interior, 50.0, 0.05, 0.01, 1.0, 1e-3, 1.0).unwrap();
        let b = sucp_bound(SucpKind::Interior, 0.05, 0.01, 1.0, 1e-3, 1.0, c).unwrap();
        assert!(b >= 50.0 && b < 50.0 * (1.0 + 1e-9));
        assert_eq!(fit_sucp_constant(SucpKind::Interior, 1e-9, 0.05, 0.01, 1.0, 1e-3, 1.0), Some(1.0));
    }
}
