use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{FbiError, FbiField};
use crate::geometry::Point;
use crate::wave::{AnisotropyField, Grid};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub mu: f64,
    pub h: f64,
    /// (Σ_y w_y Σ_x h² |r|²)^{1/2} over the interior subgrid.
    pub l2: f64,
    pub max: f64,
    pub points: usize,
}

/// Nodes whose (2·margin+1)² block of neighbours are all unknowns.
pub fn interior_mask(grid: &Grid, margin: isize) -> Vec<bool> {
    grid.nodes
        .iter()
        .map(|n| {
            let (i, j) = (n.i as isize, n.j as isize);
            (-margin..=margin).all(|a| (-margin..=margin).all(|b| grid.node_at(i + a, j + b).is_some()))
        })
        .collect()
}

/// Trapezoid weights across the y samples (1 for a single sample).
pub(crate) fn y_weights(ys: &[f64]) -> Vec<f64> {
    if ys.len() < 2 {
        return vec![1.0; ys.len()];
    }
    let mut w = vec![0.0; ys.len()];
    for k in 1..ys.len() {
        let d = 0.5 * (ys[k] - ys[k - 1]).abs();
        w[k - 1] += d;
        w[k] += d;
    }
    w
}

/// Discrete norm of ∂²_yU + div(A∇U) − f with the conservative nine-point stencil.
pub fn elliptic_residual(u: &FbiField, a: &AnisotropyField, f: &[Vec<Complex64>]) -> Result<ResidualReport, FbiError> {
    elliptic_residual_in(u, a, f, |_| true)
}

/// As [`elliptic_residual`], restricted to interior nodes where `keep` holds; a fixed
/// physical region makes norms comparable across refinements.
pub fn elliptic_residual_in<K: Fn(Point) -> bool>(
    u: &FbiField,
    a: &AnisotropyField,
    f: &[Vec<Complex64>],
    keep: K,
) -> Result<ResidualReport, FbiError> {
    let grid = u.grid.as_ref().ok_or_else(|| FbiError::Mismatch("transform carries no grid".into()))?;
    if f.len() != u.ys.len() || f.iter().any(|r| r.len() != grid.len()) {
        return Err(FbiError::Mismatch("source shape differs from the transform".into()));
    }
    let mask = interior_mask(grid, 2);
    let inner: Vec<usize> = (0..grid.len()).filter(|&k| mask[k] && keep(grid.nodes[k].p)).collect();
    if inner.len() < 4 {
        return Err(FbiError::GridTooCoarse(format!("{} interior nodes at h = {}", inner.len(), grid.h)));
    }
    let h = grid.h;
    let at = |k: usize, di: isize, dj: isize| {
        let n = &grid.nodes[k];
        grid.node_at(n.i as isize + di, n.j as isize + dj).unwrap()
    };
    let wy = y_weights(&u.ys);
    let (mut sum, mut max) = (0.0, 0.0f64);
    for (row, (vals, d2)) in u.values.iter().zip(&u.d2y).enumerate() {
        for &k in &inner {
            let p = grid.nodes[k].p;
            let v = |di, dj| vals[at(k, di, dj)];
            let mid = |dx: f64, dy: f64| a.eval([p[0] + dx * h, p[1] + dy * h]);
            let (ae, aw, an, as_) = (mid(0.5, 0.0), mid(-0.5, 0.0), mid(0.0, 0.5), mid(0.0, -0.5));
            let c = v(0, 0);
            let mut l = (ae[0][0] * (v(1, 0) - c) - aw[0][0] * (c - v(-1, 0))
                + an[1][1] * (v(0, 1) - c)
                - as_[1][1] * (c - v(0, -1)))
                / (h * h);
            let (ne, nw, se, sw) = (v(1, 1), v(-1, 1), v(1, -1), v(-1, -1));
            let a12 = |dx: f64, dy: f64| mid(dx, dy)[0][1];
            l += (a12(1.0, 0.0) * (ne - se) - a12(-1.0, 0.0) * (nw - sw)) / (4.0 * h * h);
            l += (a12(0.0, 1.0) * (ne - nw) - a12(0.0, -1.0) * (se - sw)) / (4.0 * h * h);
            let r = (d2[k] + l - f[row][k]).norm();
            max = max.max(r);
            sum += wy[row] * h * h * r * r;
        }
    }
    Ok(ResidualReport { mu: u.mu, h, l2: sum.sqrt(), max, points: inner.len() * u.ys.len() })
}
