//! T_σ, Φ(σ), σ(ε), ω and ω₁, evaluated in log space: for desk-scale ϑ₂ the times T_σ
//! and the thresholds ε̄ leave the f64 range long before σ gets small.

use serde::{Deserialize, Serialize};

use super::StabilityError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleCalibration {
    pub sigma_bar: f64,
    pub vartheta2: f64,
    /// Multiplies Φ; 1 reproduces the unscaled schedule.
    pub phi_scale: f64,
    /// Use ϑ₂^{−σ^{−(n+1)}/2} instead of ϑ₂^{−σ^{−(n+1)}} in T_σ.
    pub t_sigma_half_exponent: bool,
    pub c_f: f64,
    pub c_k: f64,
    /// Leading constant of ω₁ and of the predicted modulus.
    pub c_modulus: f64,
}

impl Default for ScheduleCalibration {
    fn default() -> Self {
        ScheduleCalibration {
            sigma_bar: 0.5,
            vartheta2: 0.5,
            phi_scale: 1.0,
            t_sigma_half_exponent: false,
            c_f: 2.0,
            c_k: 1.0,
            c_modulus: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TSigma {
    pub ln_t: f64,
    /// e^{ln_t}, or +∞ when that overflows.
    pub t: f64,
    pub overflow: bool,
    pub ln_phi: f64,
}

fn ln_t_sigma(sigma: f64, t0: f64, rho0: f64, n: usize, c: &ScheduleCalibration) -> f64 {
    let mut expo = sigma.powi(-(n as i32 + 1)) * (-c.vartheta2.ln());
    if c.t_sigma_half_exponent {
        expo *= 0.5;
    }
    let a = (2.0 * t0).ln();
    let b = (10f64.sqrt() * rho0).ln() + expo;
    a.max(b)
}

/// T_σ = max{2t₀, √10ρ₀ϑ₂^{−σ^{−(n+1)}}} and ln Φ(σ), Φ = C_Φσ^{−(n+1)/4}(T_σ/ρ₀)^{11/2}(H(T_σ)+1)².
pub fn schedule_times<H: Fn(f64) -> f64>(
    sigma: f64,
    t0: f64,
    rho0: f64,
    n: usize,
    c: &ScheduleCalibration,
    h: &H,
) -> Result<TSigma, StabilityError> {
    if !(sigma > 0.0 && sigma <= c.sigma_bar * (1.0 + 1e-12)) {
        return Err(StabilityError::InvalidParameter(format!("σ = {sigma} outside (0, {}]", c.sigma_bar)));
    }
    if !(c.vartheta2 > 0.0 && c.vartheta2 <= 1.0 && t0 > 0.0 && rho0 > 0.0 && c.phi_scale > 0.0) {
        return Err(StabilityError::InvalidParameter(format!("ϑ₂ = {}, t₀ = {t0}, ρ₀ = {rho0}", c.vartheta2)));
    }
    let ln_t = ln_t_sigma(sigma, t0, rho0, n, c);
    let t = ln_t.exp();
    let overflow = !t.is_finite();
    let ht = h(if overflow { f64::MAX } else { t });
    let ln_phi = c.phi_scale.ln() - 0.25 * (n as f64 + 1.0) * sigma.ln() + 5.5 * (ln_t - rho0.ln()) + 2.0 * (ht + 1.0).ln();
    Ok(TSigma { ln_t, t, overflow, ln_phi })
}

/// ln |ln ε̄| with ε̄ = min{e⁻⁵, e^{−Φ(σ̄)⁸}}.
pub fn epsilon_bar_log<H: Fn(f64) -> f64>(
    t0: f64,
    rho0: f64,
    n: usize,
    c: &ScheduleCalibration,
    h: &H,
) -> Result<f64, StabilityError> {
    let ln_phi = schedule_times(c.sigma_bar, t0, rho0, n, c, h)?.ln_phi;
    Ok(5f64.ln().max(8.0 * ln_phi))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaReport {
    pub sigma: f64,
    pub t_eps: TSigma,
    pub omega: f64,
}

/// σ(ε) = inf{σ ∈ (0,σ̄] : Φ(σ) ≤ |ln ε|^{1/8}} by bisection on ln Φ, with
/// ε given through L = |ln ε| so that ε below the f64 range is expressible.
pub fn sigma_of_log_epsilon<H: Fn(f64) -> f64>(
    log_eps: f64,
    t0: f64,
    rho0: f64,
    n: usize,
    c: &ScheduleCalibration,
    h: &H,
) -> Result<SigmaReport, StabilityError> {
    let ln_bar = epsilon_bar_log(t0, rho0, n, c, h)?;
    if !(log_eps > 0.0) || log_eps.ln() < ln_bar * (1.0 - 1e-12) {
        return Err(StabilityError::EpsilonTooLarge { log_eps, log_eps_bar: ln_bar.exp() });
    }
    let target = log_eps.ln() / 8.0;
    let lphi = |s: f64| schedule_times(s, t0, rho0, n, c, h).map(|r| r.ln_phi);
    let mut hi = c.sigma_bar;
    if lphi(hi)? > target {
        // only possible through the e⁻⁵ branch of ε̄
        return Err(StabilityError::EpsilonTooLarge { log_eps, log_eps_bar: ln_bar.exp() });
    }
    let mut lo = hi;
    while lphi(lo)? <= target {
        lo *= 0.5;
        if lo < 1e-300 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if lphi(mid)? <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let t_eps = schedule_times(hi, t0, rho0, n, c, h)?;
    Ok(SigmaReport { sigma: hi, t_eps, omega: omega(log_eps, hi, t0, rho0, h) })
}

pub fn sigma_of_epsilon<H: Fn(f64) -> f64>(
    eps: f64,
    t0: f64,
    rho0: f64,
    n: usize,
    c: &ScheduleCalibration,
    h: &H,
) -> Result<SigmaReport, StabilityError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(StabilityError::InvalidParameter(format!("ε = {eps}")));
    }
    sigma_of_log_epsilon(-eps.ln(), t0, rho0, n, c, h)
}

/// ω(ε,t₀) = (t₀/ρ₀)⁶H(t₀)²σ(ε)^{1/4} + |ln ε|^{−1/8}.
pub fn omega<H: Fn(f64) -> f64>(log_eps: f64, sigma: f64, t0: f64, rho0: f64, h: &H) -> f64 {
    (t0 / rho0).powi(6) * h(t0).powi(2) * sigma.powf(0.25) + log_eps.powf(-0.125)
}

/// ω₁ = C(ω/(t̄₀ρ₀⁻¹H(t̄₀)))^{1/K₀}, with ln K₀ supplied (K₀ itself overflows quickly).
pub fn omega1(omega: f64, t0_bar: f64, rho0: f64, h_t0_bar: f64, ln_k0: f64, c_modulus: f64) -> f64 {
    let inv_k0 = (-ln_k0).exp();
    c_modulus * (omega / (t0_bar / rho0 * h_t0_bar)).powf(inv_k0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuChoice {
    pub mu: f64,
    pub capped: bool,
}

/// μ with μT² = |ln ε|/5, capped at 10⁶.
pub fn mu_for(eps: f64, t: f64) -> MuChoice {
    let mu = (-eps.ln()) / (5.0 * t * t);
    if mu > 1e6 {
        MuChoice { mu: 1e6, capped: true }
    } else {
        MuChoice { mu, capped: false }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cal() -> ScheduleCalibration {
        ScheduleCalibration::default()
    }

    #[test]
    fn hand_value() {
        let h = |_: f64| 0.0;
        let r = schedule_times(0.5, 1.0, 1.0, 2, &cal(), &h).unwrap();
        assert!((r.t - 809.54).abs() < 0.005, "{}", r.t);
        assert!((r.t - 10f64.sqrt() * 256.0).abs() < 1e-9);
        let half = ScheduleCalibration { t_sigma_half_exponent: true, ..cal() };
        assert!((schedule_times(0.5, 1.0, 1.0, 2, &half, &h).unwrap().t - 10f64.sqrt() * 16.0).abs() < 1e-9);
        let flat = ScheduleCalibration { vartheta2: 1.0, ..cal() };
        assert!((schedule_times(0.3, 1.0, 1.0, 2, &flat, &h).unwrap().t - 10f64.sqrt()).abs() < 1e-12);
        assert!((schedule_times(0.3, 5.0, 1.0, 2, &flat, &h).unwrap().t - 10.0).abs() < 1e-12);
    }

    #[test]
    fn phi_decreasing_and_sigma_monotone() {
        let h = |t: f64| 1.0 + t.min(3.0);
        let c = cal();
        let mut last = f64::INFINITY;
        for k in 1..=50 {
            let s = c.sigma_bar * k as f64 / 50.0;
            let p = schedule_times(s, 1.0, 1.0, 2, &c, &h).unwrap().ln_phi;
            assert!(p < last);
            last = p;
        }
        let bar = epsilon_bar_log(1.0, 1.0, 2, &c, &h).unwrap().exp();
        let at_bar = sigma_of_log_epsilon(bar, 1.0, 1.0, 2, &c, &h).unwrap();
        assert!((at_bar.sigma - c.sigma_bar).abs() < 1e-12);
        assert!(matches!(sigma_of_log_epsilon(0.5 * bar, 1.0, 1.0, 2, &c, &h), Err(StabilityError::EpsilonTooLarge { .. })));
        let mut prev = f64::INFINITY;
        let mut prev_omega = f64::INFINITY;
        for k in 0..40 {
            let l = bar * 2f64.powi(k);
            let r = sigma_of_log_epsilon(l, 1.0, 1.0, 2, &c, &h).unwrap();
            assert!(r.sigma <= prev);
            assert!(r.omega < prev_omega);
            prev = r.sigma;
            prev_omega = r.omega;
        }
    }

    #[test]
    fn mu_cap() {
        assert!(!mu_for(1e-3, 1.0).capped);
        let m = mu_for(1e-300, 1e-3);
        assert!(m.capped && m.mu == 1e6);
    }
}
