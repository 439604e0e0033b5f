use num_complex::Complex64;

use super::kernel;

/// f(x,y) = K(T)·(∂_t u(x,T) − μ(iy+τ−T) u(x,T)), one row per y.
pub fn fbi_source(u_t: &[f64], du_t: &[f64], mu: f64, tau: f64, t_end: f64, ys: &[f64]) -> Vec<Vec<Complex64>> {
    ys.iter()
        .map(|&y| {
            let k = kernel(mu, tau, y, t_end);
            let z = Complex64::new(tau - t_end, y);
            u_t.iter().zip(du_t).map(|(&u, &du)| k * (du - mu * z * u)).collect()
        })
        .collect()
}

/// Smallest C with |f| ≤ C·T·ρ₀^{−3}·H(T)·e^{μ(R²/2 − T²/10)} over the sampled y rows.
pub fn source_bound_constant(f: &[Vec<Complex64>], t_end: f64, rho0: f64, h_t: f64, mu: f64, r: f64) -> f64 {
    let sup = f.iter().flatten().fold(0.0f64, |m, v| m.max(v.norm()));
    let env = t_end * rho0.powi(-3) * h_t * (mu * (0.5 * r * r - 0.1 * t_end * t_end)).exp();
    if sup == 0.0 {
        0.0
    } else {
        sup / env
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_and_linear() {
        let ys = [0.0, 0.1];
        let z = fbi_source(&[0.0; 3], &[0.0; 3], 10.0, 0.5, 1.0, &ys);
        assert!(z.iter().flatten().all(|v| v.norm() == 0.0));
        let a = fbi_source(&[1.0, -2.0], &[0.5, 3.0], 10.0, 0.5, 1.0, &ys);
        let b = fbi_source(&[2.0, -4.0], &[1.0, 6.0], 10.0, 0.5, 1.0, &ys);
        for (ra, rb) in a.iter().zip(&b) {
            for (x, y) in ra.iter().zip(rb) {
                assert!((2.0 * x - y).norm() < 1e-14 * y.norm().max(1.0));
            }
        }
        assert_eq!(source_bound_constant(&z, 1.0, 0.1, 1.0, 10.0, 0.3), 0.0);
    }
}
