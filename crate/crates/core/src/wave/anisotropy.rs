use std::fmt;
use std::sync::Arc;

use rand::Rng;

use super::WaveError;
use crate::geometry::Point;

pub type Matrix2 = [[f64; 2]; 2];

/// Symmetric coefficient field A(x) with ellipticity λ and scaled Lipschitz constant Λ.
#[derive(Clone)]
pub struct AnisotropyField {
    entries: Arc<dyn Fn(Point) -> Matrix2 + Send + Sync>,
    pub lambda: f64,
    pub lambda_lip: f64,
    pub rho0: f64,
}

impl fmt::Debug for AnisotropyField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnisotropyField")
            .field("lambda", &self.lambda)
            .field("lambda_lip", &self.lambda_lip)
            .field("rho0", &self.rho0)
            .finish()
    }
}

/// Eigenvalues of a symmetric 2×2 matrix, ascending.
pub fn sym_eigen(m: Matrix2) -> (f64, f64) {
    let tr = 0.5 * (m[0][0] + m[1][1]);
    let d = (0.25 * (m[0][0] - m[1][1]).powi(2) + m[0][1] * m[0][1]).sqrt();
    (tr - d, tr + d)
}

impl AnisotropyField {
    pub fn identity() -> Self {
        Self::constant([[1.0, 0.0], [0.0, 1.0]])
    }

    pub fn diagonal(a11: f64, a22: f64) -> Self {
        Self::constant([[a11, 0.0], [0.0, a22]])
    }

    /// Constant field; λ is the largest value admissible for the matrix.
    pub fn constant(m: Matrix2) -> Self {
        let (lo, hi) = sym_eigen(m);
        let lambda = lo.min(1.0 / hi).min(1.0);
        AnisotropyField { entries: Arc::new(move |_| m), lambda, lambda_lip: 0.0, rho0: 1.0 }
    }

    pub fn from_fn<F>(f: F, lambda: f64, lambda_lip: f64, rho0: f64) -> Self
    where
        F: Fn(Point) -> Matrix2 + Send + Sync + 'static,
    {
        AnisotropyField { entries: Arc::new(f), lambda, lambda_lip, rho0 }
    }

    pub fn eval(&self, p: Point) -> Matrix2 {
        let m = (self.entries)(p);
        let s = 0.5 * (m[0][1] + m[1][0]);
        [[m[0][0], s], [s, m[1][1]]]
    }

    /// λ|ξ|² ≤ Aξ·ξ ≤ λ⁻¹|ξ|² at every point for the basis plus `random` directions.
    pub fn check_ellipticity<R: Rng>(&self, points: &[Point], random: usize, rng: &mut R) -> Result<(), WaveError> {
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(WaveError::Anisotropy(format!("λ = {} not in (0, 1]", self.lambda)));
        }
        let mut dirs: Vec<Point> = vec![[1.0, 0.0], [0.0, 1.0]];
        for _ in 0..random {
            let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let r: f64 = rng.gen_range(0.1..10.0);
            dirs.push([r * th.cos(), r * th.sin()]);
        }
        let tol = 1e-12;
        for &p in points {
            let (raw, a) = ((self.entries)(p), self.eval(p));
            if (raw[0][1] - raw[1][0]).abs() > tol * (raw[0][1].abs() + 1.0) {
                return Err(WaveError::Anisotropy(format!("A not symmetric at ({:.4}, {:.4})", p[0], p[1])));
            }
            for xi in &dirs {
                let q = a[0][0] * xi[0] * xi[0] + 2.0 * a[0][1] * xi[0] * xi[1] + a[1][1] * xi[1] * xi[1];
                let n2 = xi[0] * xi[0] + xi[1] * xi[1];
                if q < self.lambda * n2 * (1.0 - tol) || q > n2 / self.lambda * (1.0 + tol) {
                    return Err(WaveError::Anisotropy(format!(
                        "ellipticity fails at ({:.4}, {:.4}): Aξ·ξ/|ξ|² = {:.6}",
                        p[0],
                        p[1],
                        q / n2
                    )));
                }
            }
        }
        Ok(())
    }

    /// |A(x) − A(y)| ≤ (Λ/ρ₀)|x − y| for the given sample pairs (spectral norm).
    pub fn check_lipschitz(&self, pairs: &[(Point, Point)]) -> Result<(), WaveError> {
        let bound = self.lambda_lip / self.rho0;
        for &(x, y) in pairs {
            let (a, b) = (self.eval(x), self.eval(y));
            let d = [[a[0][0] - b[0][0], a[0][1] - b[0][1]], [a[1][0] - b[1][0], a[1][1] - b[1][1]]];
            let (lo, hi) = sym_eigen(d);
            let nrm = lo.abs().max(hi.abs());
            let len = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
            if nrm > bound * len * (1.0 + 1e-9) + 1e-14 {
                return Err(WaveError::Anisotropy(format!(
                    "Lipschitz bound fails between ({:.4}, {:.4}) and ({:.4}, {:.4}): {:.4e} > {:.4e}",
                    x[0],
                    x[1],
                    y[0],
                    y[1],
                    nrm,
                    bound * len
                )));
            }
        }
        Ok(())
    }
}
