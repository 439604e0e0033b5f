use serde::{Deserialize, Serialize};

use super::{three_sphere_exponent, PropagationError, ThreeSphereParams};
use crate::geometry::{BallChain, ChainKind, ConeParams};

/// Fixed choices behind the cone angles: sin γ₁ = 1−ς, sin γ₂ = 1−aς, sin γ = 1−abς,
/// δ = q(R₁−ρ₁)/(2R₁).
pub const CONE_Q: f64 = 0.5;
pub const CONE_A: f64 = 0.25;
pub const CONE_B: f64 = 1.0 / 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeSchedule {
    pub varsigma: f64,
    pub s: f64,
    pub h: f64,
    pub chi: f64,
    pub delta: f64,
    pub beta1: f64,
    pub theta_tilde: f64,
    /// χ²/θ̃₀.
    pub ratio: f64,
    /// A_k, A⁽¹⁾_{s,k}, A⁽²⁾_{s,k} for k = 1..=K.
    pub a: Vec<f64>,
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
    /// lim A_k and sup_k A⁽¹⁾_{s,k}.
    pub a_sup: f64,
    pub a1_sup: f64,
    /// μ A⁽¹⁾ and μ A⁽²⁾ at the last k (the exponents entering the propagated bound).
    pub mu_a1: f64,
    pub mu_a2: f64,
    /// log of δ₃ = ϑ₂^{1+(sh/2)^{−n}}; δ₃ itself underflows for desk-scale s.
    pub ln_delta3: f64,
    /// Smallest T with A⁽²⁾_{s,k} ≤ −T²δ₃/20 for all k, and its log.
    pub t_min: f64,
    pub ln_t_min: f64,
    /// (40/δ₃)^{1/2} ρ₀, the T obtained from the cruder A⁽¹⁾ ≤ 2ρ₀².
    pub t_tilde: f64,
}

/// (θ̃₀, χ²/θ̃₀, δ) for the angle family at ς (scale-free).
pub fn cone_ratio(varsigma: f64, beta1: f64) -> Result<(f64, f64, f64), PropagationError> {
    let (sin1, sin2, sin) = (1.0 - varsigma, 1.0 - CONE_A * varsigma, 1.0 - CONE_A * CONE_B * varsigma);
    let delta = CONE_Q * (sin - sin2) / (2.0 * sin);
    let chi = (1.0 - sin2) / (1.0 - sin1);
    let (theta, _) = three_sphere_exponent(&ThreeSphereParams::new(sin1, sin2, sin, delta, beta1))?;
    Ok((theta, chi * chi / theta, delta))
}

/// Largest ς ≤ 1/4 (on a log scan from 10⁻⁶) below which χ²/θ̃₀ ≤ 1/2 throughout.
pub fn varsigma0(beta1: f64) -> Result<f64, PropagationError> {
    let mut best = None;
    for i in 0..=600 {
        let v = 1e-6 * (0.25f64 / 1e-6).powf(i as f64 / 600.0);
        if cone_ratio(v, beta1)?.1 <= 0.5 {
            best = Some(v);
        } else {
            break;
        }
    }
    best.ok_or_else(|| PropagationError::ContractionViolated { ratio: cone_ratio(1e-6, beta1).map(|r| r.1).unwrap_or(f64::NAN) })
}

#[allow(clippy::too_many_arguments)]
pub fn cone_decay_schedule(
    chain: &BallChain,
    mu: f64,
    t: f64,
    rho0: f64,
    vartheta2: f64,
    beta1: f64,
    n_dim: usize,
) -> Result<ConeSchedule, PropagationError> {
    let cone: &ConeParams = match (&chain.kind, &chain.cone) {
        (ChainKind::ConeChain, Some(c)) => c,
        _ => return Err(PropagationError::InvalidParameter("a cone chain is required".into())),
    };
    if chain.is_empty() || !(vartheta2 > 0.0 && vartheta2 < 1.0) || !(mu > 0.0 && t > 0.0 && rho0 > 0.0) {
        return Err(PropagationError::InvalidParameter(format!("ϑ₂ = {vartheta2}, μ = {mu}, T = {t}, ρ₀ = {rho0}")));
    }
    let (r1, rho1, big_r1) = (chain.small_radii[0], chain.mid_radii[0], chain.large_radii[0]);
    let delta = CONE_Q * (big_r1 - rho1) / (2.0 * big_r1);
    let (theta, _) = three_sphere_exponent(&ThreeSphereParams::new(r1, rho1, big_r1, delta, beta1))?;
    let chi = cone.chi;
    let ratio = chi * chi / theta;
    if !(ratio < 1.0) {
        return Err(PropagationError::ContractionViolated { ratio });
    }
    let pre = (chi.powi(-2) - 1.0) * ratio;
    let ak = |k: usize| pre * (1.0 - ratio.powi(k as i32)) / (1.0 - ratio);
    let a1k = |a: f64| 0.5 * (a + ratio) * big_r1 * big_r1 + rho0 * rho0;
    let ln_delta3 = (1.0 + (0.5 * cone.s * cone.h).powi(-(n_dim as i32))) * vartheta2.ln();
    let drop = 0.1 * t * t * ln_delta3.exp();
    let a: Vec<f64> = (1..=chain.len()).map(ak).collect();
    let a1: Vec<f64> = a.iter().map(|&x| a1k(x)).collect();
    let a2: Vec<f64> = a1.iter().map(|x| x - drop).collect();
    let a_sup = pre / (1.0 - ratio);
    let a1_sup = a1k(a_sup);
    let ln_t_min = 0.5 * (20.0f64.ln() + a1_sup.ln() - ln_delta3);
    Ok(ConeSchedule {
        varsigma: cone.varsigma,
        s: cone.s,
        h: cone.h,
        chi,
        delta,
        beta1,
        theta_tilde: theta,
        ratio,
        mu_a1: mu * a1.last().unwrap(),
        mu_a2: mu * a2.last().unwrap(),
        a,
        a1,
        a2,
        a_sup,
        a1_sup,
        ln_delta3,
        t_min: ln_t_min.exp(),
        ln_t_min,
        t_tilde: ((40.0f64.ln() - ln_delta3) * 0.5).exp() * rho0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{cone_ball_chain, cone_params_for_varsigma};

    fn chain(varsigma: f64, rho0: f64) -> BallChain {
        let (s, l) = cone_params_for_varsigma(varsigma, 1.0);
        cone_ball_chain(s, l, rho0, varsigma, 12).unwrap()
    }

    #[test]
    fn small_varsigma_limit() {
        let (_, r, _) = cone_ratio(1e-4, 4.0).unwrap();
        assert!((r - 23.0 / 48.0).abs() < 1e-3, "{r}");
        let v0 = varsigma0(4.0).unwrap();
        assert!(cone_ratio(v0, 4.0).unwrap().1 <= 0.5);
    }

    #[test]
    fn schedule_properties() {
        let rho0 = 0.5;
        let v = varsigma0(4.0).unwrap().min(0.25);
        let c = chain(v, rho0);
        let s = cone_decay_schedule(&c, 100.0, 10.0, rho0, 0.5, 4.0, 2).unwrap();
        assert!(s.ratio <= 0.5);
        assert!(s.a.windows(2).all(|w| w[1] > w[0]));
        assert!(s.a.iter().all(|a| *a <= s.a_sup));
        assert!(s.a1.iter().all(|a| *a <= 2.0 * rho0 * rho0));
        // chain-derived radii reproduce the scale-free ratio
        assert!((s.ratio - cone_ratio(v, 4.0).unwrap().1).abs() < 1e-9);
        let mut last = f64::INFINITY;
        for th in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let t = cone_decay_schedule(&c, 100.0, 10.0, rho0, th, 4.0, 2).unwrap().ln_t_min;
            assert!(t <= last);
            last = t;
        }
    }

    #[test]
    fn path_chain_rejected() {
        let mut c = chain(0.1, 1.0);
        c.kind = ChainKind::PathChain;
        assert!(cone_decay_schedule(&c, 1.0, 1.0, 1.0, 0.5, 4.0, 2).is_err());
    }
}
