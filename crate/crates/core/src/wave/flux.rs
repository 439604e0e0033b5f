//! Conormal flux A∇u·ν on the measurement portion Σ and the mismatch ε.

use serde::{Deserialize, Serialize};

use super::{WaveError, WaveField};
use crate::geometry::{dist, Point};

/// A∇u·ν on Σ × stored times; `values[t][k]` belongs to sample k.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxTrace {
    pub dim: usize,
    pub times: Vec<f64>,
    pub points: Vec<Point>,
    /// Arclength along Σ (concatenated in Σ edge order) at each sample.
    pub arclength: Vec<f64>,
    /// Surface elements dS; they sum to |Σ|.
    pub weights: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl FluxTrace {
    pub fn sigma_length(&self) -> f64 {
        self.weights.iter().sum()
    }
}

struct Probe {
    x: Point,
    edge: usize,
    nu: Point,
    tau: Point,
    half: f64,
    near: [(usize, f64); 16],
    far: [(usize, f64); 16],
}

/// Normal derivative from ψ on Σ and bicubic samples at 3h and 6h along the inward
/// normal (one-sided quadratic), tangential part from ∂_sψ by central differences.
pub fn boundary_flux(u: &WaveField) -> Result<FluxTrace, WaveError> {
    let grid = &u.grid;
    let h = grid.h;
    let poly = u.domain.boundary();
    let mut probes = Vec::new();
    let mut arclength = Vec::new();
    let mut weights = Vec::new();
    let mut s0 = 0.0;
    for &e in u.domain.sigma() {
        let [a, b] = poly.edge(e);
        let len = dist(a, b);
        let tau = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
        let nu = [tau[1], -tau[0]];
        let parts = ((len / h).ceil() as usize).max(1);
        let piece = len / parts as f64;
        for i in 0..parts {
            let s = (i as f64 + 0.5) * piece;
            let x = [a[0] + s * tau[0], a[1] + s * tau[1]];
            let at = |d: f64| [x[0] - d * nu[0], x[1] - d * nu[1]];
            let sample = probes.len();
            let err = || WaveError::StencilOutOfDomain { sample, x: x[0], y: x[1] };
            let near = grid.bicubic(at(3.0 * h)).ok_or_else(err)?;
            let far = grid.bicubic(at(6.0 * h)).ok_or_else(err)?;
            probes.push(Probe { x, edge: e, nu, tau, half: 0.5 * piece, near, far });
            arclength.push(s0 + s);
            weights.push(piece);
        }
        s0 += len;
    }
    let d = 3.0 * h;
    let values: Vec<Vec<f64>> = u
        .times
        .iter()
        .zip(&u.history)
        .map(|(&t, snap)| {
            probes
                .iter()
                .map(|p| {
                    let interp = |st: &[(usize, f64); 16]| st.iter().map(|(k, w)| w * snap[*k]).sum::<f64>();
                    let u0 = u.boundary_value(p.x, p.edge, t);
                    let (u1, u2) = (interp(&p.near), interp(&p.far));
                    let dn = -(-3.0 * u0 + 4.0 * u1 - u2) / (2.0 * d);
                    let plus = [p.x[0] + p.half * p.tau[0], p.x[1] + p.half * p.tau[1]];
                    let minus = [p.x[0] - p.half * p.tau[0], p.x[1] - p.half * p.tau[1]];
                    let ds = (u.boundary_value(plus, p.edge, t) - u.boundary_value(minus, p.edge, t)) / (2.0 * p.half);
                    let a = u.aniso.eval(p.x);
                    let an = [a[0][0] * p.nu[0] + a[0][1] * p.nu[1], a[1][0] * p.nu[0] + a[1][1] * p.nu[1]];
                    dn * (an[0] * p.nu[0] + an[1] * p.nu[1]) + ds * (an[0] * p.tau[0] + an[1] * p.tau[1])
                })
                .collect()
        })
        .collect();
    Ok(FluxTrace {
        dim: u.domain.dim,
        times: u.times.clone(),
        points: probes.iter().map(|p| p.x).collect(),
        arclength,
        weights,
        values,
    })
}

/// ε = ( (1/(Tρ₀^{n−3})) ∫₀^T ∫_Σ |f₁ − f₂|² dS dt )^{1/2}, trapezoidal in t.
pub fn flux_mismatch_epsilon(f1: &FluxTrace, f2: &FluxTrace, t_end: f64, rho0: f64) -> Result<f64, WaveError> {
    if f1.points.len() != f2.points.len() || f1.times.len() != f2.times.len() {
        return Err(WaveError::GridMismatch(format!(
            "{}×{} vs {}×{} samples",
            f1.times.len(),
            f1.points.len(),
            f2.times.len(),
            f2.points.len()
        )));
    }
    let scale = t_end.abs().max(1.0);
    if f1.times.iter().zip(&f2.times).any(|(a, b)| (a - b).abs() > 1e-9 * scale) {
        return Err(WaveError::GridMismatch("time levels differ".into()));
    }
    let len = f1.sigma_length().max(1e-300);
    for ((p, q), (w1, w2)) in f1.points.iter().zip(&f2.points).zip(f1.weights.iter().zip(&f2.weights)) {
        if dist(*p, *q) > 1e-9 * len || (w1 - w2).abs() > 1e-9 * len {
            return Err(WaveError::GridMismatch("Σ sampling differs".into()));
        }
    }
    if !(t_end > 0.0) || f1.times.is_empty() || *f1.times.last().unwrap() < t_end * (1.0 - 1e-9) {
        return Err(WaveError::GridMismatch(format!("time grid does not cover [0, {t_end}]")));
    }
    let inner: Vec<f64> = f1
        .values
        .iter()
        .zip(&f2.values)
        .map(|(a, b)| a.iter().zip(b).zip(&f1.weights).map(|((x, y), w)| w * (x - y) * (x - y)).sum())
        .collect();
    let mut total = 0.0;
    for k in 1..f1.times.len() {
        let (ta, tb) = (f1.times[k - 1], f1.times[k].min(t_end));
        if ta >= t_end {
            break;
        }
        total += 0.5 * (tb - ta) * (inner[k - 1] + inner[k]);
    }
    let norm = t_end * rho0.powi(f1.dim as i32 - 3);
    Ok((total / norm).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Domain, DomainConstants, DomainOptions, SigmaSpec};
    use crate::wave::{AnisotropyField, GridSpec};

    fn square_east_sigma() -> Domain {
        // 8 edges per side; Σ = the four middle edges of the east face
        let o = DomainOptions { sigma: SigmaSpec::Edges(vec![10, 11, 12, 13]), ..Default::default() };
        Domain::rectangle([0.0, 0.0], [1.0, 1.0], 8, DomainConstants::new(0.1, 1.0), &o).unwrap()
    }

    #[test]
    fn linear_field_unit_flux() {
        let d = square_east_sigma();
        let f = WaveField::from_fn(
            &d,
            &AnisotropyField::identity(),
            &GridSpec::new(1.0 / 32.0),
            vec![0.0, 0.5, 1.0],
            |p, _| p[0],
            |_, _| 0.0,
        )
        .unwrap();
        let tr = boundary_flux(&f).unwrap();
        assert!((tr.sigma_length() - 0.5).abs() < 1e-12);
        for row in &tr.values {
            for v in row {
                assert!((v - 1.0).abs() < 1e-10, "{v}");
            }
        }
    }

    #[test]
    fn epsilon_constant_difference() {
        let d = square_east_sigma();
        let mk = |c: f64| {
            WaveField::from_fn(
                &d,
                &AnisotropyField::identity(),
                &GridSpec::new(1.0 / 32.0),
                vec![0.0, 0.25, 0.5, 0.75, 1.0],
                move |p, _| c * p[0],
                |_, _| 0.0,
            )
            .unwrap()
        };
        let (a, b) = (boundary_flux(&mk(1.0)).unwrap(), boundary_flux(&mk(2.0)).unwrap());
        assert_eq!(flux_mismatch_epsilon(&a, &a, 1.0, 0.1).unwrap(), 0.0);
        let eps = flux_mismatch_epsilon(&a, &b, 1.0, 0.1).unwrap();
        let want = (0.5f64 / 0.1f64.powi(-1)).sqrt();
        assert!((eps - want).abs() < 1e-9, "{eps} {want}");
        assert_eq!(eps, flux_mismatch_epsilon(&b, &a, 1.0, 0.1).unwrap());
    }

    #[test]
    fn corner_stencils_rejected() {
        let o = DomainOptions::default();
        let d = Domain::rectangle([0.0, 0.0], [1.0, 1.0], 2, DomainConstants::new(0.1, 1.0), &o).unwrap();
        let f = WaveField::from_fn(&d, &AnisotropyField::identity(), &GridSpec::new(0.05), vec![0.0], |_, _| 0.0, |_, _| 0.0)
            .unwrap();
        assert!(matches!(boundary_flux(&f), Err(WaveError::StencilOutOfDomain { .. })));
    }
}
