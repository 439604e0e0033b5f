use serde::{Deserialize, Serialize};

use super::StabilityError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// d_H ≈ a ρ₀ |ln ε|^{−b}.
    pub a: f64,
    pub b: f64,
    /// RMS residual of ln d_H for the logarithmic law.
    pub residual_log: f64,
    /// d_H ≈ a′ ε^{b′}.
    pub a_power: f64,
    pub b_power: f64,
    pub residual_power: f64,
    /// residual_log / residual_power (∞ when the power law is exact).
    pub ratio: f64,
    pub used: usize,
}

/// Least squares y = α + βx; returns (α, β, rms).
fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let beta = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let alpha = my - beta * mx;
    let rms = (x.iter().zip(y).map(|(a, b)| (b - alpha - beta * a).powi(2)).sum::<f64>() / n).sqrt();
    (alpha, beta, rms)
}

/// Fits records (ε, d_H); only ε ∈ (0, e⁻¹) with d_H > 0 are usable (≥ 5 required).
pub fn fit_log_modulus(records: &[(f64, f64)], rho0: f64) -> Result<FitReport, StabilityError> {
    let mut used: Vec<(f64, f64)> =
        records.iter().copied().filter(|&(e, d)| e > 0.0 && e < (-1f64).exp() && d > 0.0 && d.is_finite()).collect();
    if used.len() < 5 {
        return Err(StabilityError::InsufficientData { usable: used.len() });
    }
    // canonical order so the fit does not depend on record order
    used.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let y: Vec<f64> = used.iter().map(|(_, d)| (d / rho0).ln()).collect();
    let xl: Vec<f64> = used.iter().map(|(e, _)| (-e.ln()).ln()).collect();
    let (al, bl, rl) = line_fit(&xl, &y);
    let xp: Vec<f64> = used.iter().map(|(e, _)| e.ln()).collect();
    let yp: Vec<f64> = used.iter().map(|(_, d)| d.ln()).collect();
    let (ap, bp, rp) = line_fit(&xp, &yp);
    Ok(FitReport {
        a: al.exp(),
        b: -bl,
        residual_log: rl,
        a_power: ap.exp(),
        b_power: bp,
        residual_power: rp,
        ratio: if rp > 0.0 { rl / rp } else { f64::INFINITY },
        used: used.len(),
    })
}
