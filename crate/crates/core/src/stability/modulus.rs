use serde::{Deserialize, Serialize};

use super::StabilityError;

/// ℱ(t̄) = (C_F (t̄/ρ₀)³ H(t̄)/H(t₁))².
pub fn script_f(t_bar: f64, rho0: f64, h_t_bar: f64, h_t1: f64, c_f: f64) -> f64 {
    (c_f * (t_bar / rho0).powi(3) * h_t_bar / h_t1).powi(2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusReport {
    pub t_star: f64,
    pub t0_bar: f64,
    pub h_t0_bar: f64,
    pub h_t1: f64,
    pub script_f: f64,
    /// ln K₀ = C_K ℱ(t̄₀); K₀ = e^{ln K₀} is +∞ once ℱ is large.
    pub ln_k0: f64,
    pub k0: f64,
    pub rho0: f64,
    pub c_modulus: f64,
}

impl ModulusReport {
    /// η ↦ Cρ₀ (η/(t̄₀ρ₀⁻¹H(t̄₀)))^{1/K₀}.
    pub fn predicted_bound(&self, eta: f64) -> f64 {
        let inv = (-self.ln_k0).exp();
        self.c_modulus * self.rho0 * (eta / (self.t0_bar / self.rho0 * self.h_t0_bar)).powf(inv)
    }
}

/// Requires t₀ ≥ t⋆ + λρ₀ with t⋆ = max{C_Fρ₀, 2t₁}; t̄₀ = t₀ − λρ₀.
#[allow(clippy::too_many_arguments)]
pub fn theoretical_modulus<H: Fn(f64) -> f64>(
    t0: f64,
    t1: f64,
    rho0: f64,
    lambda: f64,
    h: &H,
    c_f: f64,
    c_k: f64,
    c_modulus: f64,
) -> Result<ModulusReport, StabilityError> {
    if !(c_f >= 2.0 && c_k >= 0.0 && rho0 > 0.0 && lambda > 0.0 && lambda <= 1.0 && t1 > 0.0) {
        return Err(StabilityError::InvalidParameter(format!("C_F = {c_f}, C_K = {c_k}, λ = {lambda}")));
    }
    let t_star = (c_f * rho0).max(2.0 * t1);
    let need = t_star + lambda * rho0;
    if t0 < need * (1.0 - 1e-12) {
        return Err(StabilityError::TimeTooShort { t0, need });
    }
    let t0_bar = t0 - lambda * rho0;
    let (h_bar, h1) = (h(t0_bar), h(t1));
    if !(h1 > 0.0) {
        return Err(StabilityError::InvalidParameter("H(t₁) = 0: flat data".into()));
    }
    let f = script_f(t0_bar, rho0, h_bar, h1, c_f);
    let ln_k0 = c_k * f;
    Ok(ModulusReport { t_star, t0_bar, h_t0_bar: h_bar, h_t1: h1, script_f: f, ln_k0, k0: ln_k0.exp(), rho0, c_modulus })
}
