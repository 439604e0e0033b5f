use serde::{Deserialize, Serialize};

use super::residual::interior_mask;
use super::{FbiError, FbiField};
use crate::wave::{Grid, WaveField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub mu: f64,
    /// Largest observed c for D⁰, D¹ (gradient), D² (Hessian, Frobenius).
    pub c: [f64; 3],
    pub c_max: f64,
    pub samples: usize,
}

/// Central-difference |D^j v| at node k for a field given per node (real or complex via `abs2`).
fn djet<T: Copy>(grid: &Grid, k: usize, v: &[T], sub: impl Fn(T, T) -> T, scale: impl Fn(T, f64) -> T, abs2: impl Fn(T) -> f64) -> [f64; 3] {
    let n = &grid.nodes[k];
    let at = |di: isize, dj: isize| v[grid.node_at(n.i as isize + di, n.j as isize + dj).unwrap()];
    let h = grid.h;
    let c = at(0, 0);
    let dx = scale(sub(at(1, 0), at(-1, 0)), 0.5 / h);
    let dy = scale(sub(at(0, 1), at(0, -1)), 0.5 / h);
    let second = |p: T, m: T| scale(sub(sub(p, c), sub(c, m)), 1.0 / (h * h));
    let dxx = second(at(1, 0), at(-1, 0));
    let dyy = second(at(0, 1), at(0, -1));
    let dxy = scale(sub(sub(at(1, 1), at(-1, 1)), sub(at(1, -1), at(-1, -1))), 0.25 / (h * h));
    [abs2(c), abs2(dx) + abs2(dy), abs2(dxx) + abs2(dyy) + 2.0 * abs2(dxy)]
}

/// max over interior nodes and y rows of |D^jU| / (μ^{1/4} e^{μy²/2} ‖D^ju‖_{L²(0,T)}).
/// Samples whose denominator is negligible (< 1e-10 of the largest) are skipped.
pub fn fbi_growth_check(big_u: &FbiField, u: &WaveField) -> Result<GrowthReport, FbiError> {
    let grid = big_u.grid.as_ref().ok_or_else(|| FbiError::Mismatch("transform carries no grid".into()))?;
    if grid.len() != u.grid.len() || grid.h != u.grid.h {
        return Err(FbiError::Mismatch("transform and wave field use different grids".into()));
    }
    let mask = interior_mask(grid, 1);
    let inner: Vec<usize> = (0..grid.len()).filter(|&k| mask[k]).collect();
    if inner.is_empty() {
        return Err(FbiError::GridTooCoarse("no interior nodes".into()));
    }
    // ∫₀^T |D^j u|² dt by the trapezoid rule over stored levels
    let mut norms = vec![[0.0f64; 3]; inner.len()];
    let jets: Vec<Vec<[f64; 3]>> = u
        .history
        .iter()
        .map(|snap| inner.iter().map(|&k| djet(grid, k, snap, |a, b| a - b, |a, s| a * s, |a| a * a)).collect())
        .collect();
    for s in 1..u.times.len() {
        let dt = u.times[s] - u.times[s - 1];
        for (acc, (a, b)) in norms.iter_mut().zip(jets[s - 1].iter().zip(&jets[s])) {
            for j in 0..3 {
                acc[j] += 0.5 * dt * (a[j] + b[j]);
            }
        }
    }
    let floor: [f64; 3] = std::array::from_fn(|j| 1e-10 * norms.iter().fold(0.0f64, |m, n| m.max(n[j])));
    let mu = big_u.mu;
    let mut c = [0.0f64; 3];
    let mut samples = 0;
    for (row, &y) in big_u.ys.iter().enumerate() {
        // scale first: e^{μy²/2} alone can exceed the range of |U|²
        let inv = (-0.5 * mu * y * y).exp() / mu.powf(0.25);
        let scaled: Vec<_> = big_u.values[row].iter().map(|v| v * inv).collect();
        for (m, &k) in inner.iter().enumerate() {
            let d = djet(grid, k, &scaled, |a, b| a - b, |a, s| a * s, |a| a.norm_sqr());
            for j in 0..3 {
                if norms[m][j] > floor[j] && norms[m][j] > 0.0 {
                    c[j] = c[j].max(d[j].sqrt() / norms[m][j].sqrt());
                    samples += 1;
                }
            }
        }
    }
    Ok(GrowthReport { mu, c, c_max: c.iter().cloned().fold(0.0, f64::max), samples })
}
