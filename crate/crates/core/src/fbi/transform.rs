use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::quadrature::composite;
use super::FbiError;
use crate::geometry::Point;
use crate::wave::{Grid, WaveField};

/// Something that can be sampled at any t ∈ [0, T] on a fixed point set.
pub trait TimeSeries: Sync {
    fn len(&self) -> usize;
    fn t_end(&self) -> f64;
    fn sample(&self, t: f64, out: &mut [f64]);
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl TimeSeries for WaveField {
    fn len(&self) -> usize {
        self.grid.len()
    }
    fn t_end(&self) -> f64 {
        self.t_end
    }
    fn sample(&self, t: f64, out: &mut [f64]) {
        self.value_at(t, out)
    }
}

/// A closed form u(x, t) evaluated on a point list.
pub struct AnalyticSeries<F> {
    pub points: Vec<Point>,
    pub t_end: f64,
    pub f: F,
}

impl<F: Fn(Point, f64) -> f64 + Sync> TimeSeries for AnalyticSeries<F> {
    fn len(&self) -> usize {
        self.points.len()
    }
    fn t_end(&self) -> f64 {
        self.t_end
    }
    fn sample(&self, t: f64, out: &mut [f64]) {
        out.par_iter_mut().zip(&self.points).for_each(|(o, p)| *o = (self.f)(*p, t));
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FbiOptions {
    /// Gauss–Legendre nodes per panel.
    pub order: usize,
    /// Upper bound on the total number of time nodes.
    pub max_nodes: usize,
    /// Half-width of the integration window in units of 1/√μ; e^{−w²/2} is the dropped tail.
    pub window: f64,
}

impl Default for FbiOptions {
    fn default() -> Self {
        FbiOptions { order: 16, max_nodes: 100_000, window: 80f64.sqrt() }
    }
}

#[derive(Clone, Debug)]
pub struct FbiField {
    pub grid: Option<Arc<Grid>>,
    pub points: Vec<Point>,
    pub mu: f64,
    pub tau: f64,
    pub t_horizon: f64,
    pub ys: Vec<f64>,
    /// `values[k][i]` = U(x_i, ys[k]).
    pub values: Vec<Vec<Complex64>>,
    /// ∂²_yU from the differentiated kernel.
    pub d2y: Vec<Vec<Complex64>>,
    pub quadrature_nodes: usize,
}

impl FbiField {
    pub fn y_extent(&self) -> f64 {
        self.ys.iter().fold(0.0, |m, y| m.max(y.abs()))
    }

    pub fn y_index(&self, y: f64) -> Option<usize> {
        self.ys.iter().position(|&s| (s - y).abs() <= 1e-12 * (1.0 + y.abs()))
    }
}

/// √(μ/2π) e^{−μz²/2} with z = iy + τ − t.
pub fn kernel(mu: f64, tau: f64, y: f64, t: f64) -> Complex64 {
    let z = Complex64::new(tau - t, y);
    (mu / (2.0 * PI)).sqrt() * (-0.5 * mu * z * z).exp()
}

fn check_params(mu: f64, tau: f64, t_end: f64) -> Result<(), FbiError> {
    if !(mu > 0.0 && t_end > 0.0) {
        return Err(FbiError::InvalidParameter(format!("μ = {mu}, T = {t_end}")));
    }
    if mu * t_end * t_end < 1.0 {
        return Err(FbiError::InvalidParameter(format!("μT² = {} < 1", mu * t_end * t_end)));
    }
    if !(tau > 0.0 && tau <= 0.5 * t_end * (1.0 + 1e-12)) {
        return Err(FbiError::InvalidParameter(format!("τ = {tau} outside (0, T/2]")));
    }
    Ok(())
}

/// Window τ ± w/√μ clipped to [0, T]; panels resolve both the Gaussian width and the
/// oscillation e^{−iμy(τ−t)}.
fn time_rule(mu: f64, tau: f64, t_end: f64, ymax: f64, o: &FbiOptions) -> Result<(Vec<f64>, Vec<f64>), FbiError> {
    let half = o.window / mu.sqrt();
    let (a, b) = ((tau - half).max(0.0), (tau + half).min(t_end));
    let mut width = 0.5 / mu.sqrt();
    if ymax > 0.0 {
        width = width.min(1.0 / (mu * ymax));
    }
    let panels = ((b - a) / width).ceil().max(1.0);
    let nodes = panels * o.order as f64;
    if !nodes.is_finite() || nodes > o.max_nodes as f64 {
        return Err(FbiError::QuadratureUnderResolved { nodes: nodes.min(usize::MAX as f64) as usize, cap: o.max_nodes });
    }
    Ok(composite(a, b, panels as usize, o.order))
}

pub fn fbi_transform_series<S: TimeSeries + ?Sized>(
    u: &S,
    points: Vec<Point>,
    mu: f64,
    tau: f64,
    ys: &[f64],
    o: &FbiOptions,
) -> Result<FbiField, FbiError> {
    let t_end = u.t_end();
    check_params(mu, tau, t_end)?;
    if ys.is_empty() || ys.iter().any(|y| !y.is_finite()) {
        return Err(FbiError::InvalidParameter("empty or non-finite y grid".into()));
    }
    if points.len() != u.len() {
        return Err(FbiError::Mismatch(format!("{} points for {} samples", points.len(), u.len())));
    }
    let ymax = ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    let (tq, wq) = time_rule(mu, tau, t_end, ymax, o)?;
    let n = u.len();
    let mut values = vec![vec![Complex64::new(0.0, 0.0); n]; ys.len()];
    let mut d2y = values.clone();
    let mut buf = vec![0.0; n];
    for (&t, &w) in tq.iter().zip(&wq) {
        u.sample(t, &mut buf);
        for (k, &y) in ys.iter().enumerate() {
            let kv = w * kernel(mu, tau, y, t);
            let z = Complex64::new(tau - t, y);
            let k2 = kv * (mu - mu * mu * z * z);
            values[k].par_iter_mut().zip(d2y[k].par_iter_mut()).zip(&buf).for_each(|((v, d), &x)| {
                *v += kv * x;
                *d += k2 * x;
            });
        }
    }
    Ok(FbiField {
        grid: None,
        points,
        mu,
        tau,
        t_horizon: t_end,
        ys: ys.to_vec(),
        values,
        d2y,
        quadrature_nodes: tq.len(),
    })
}

pub fn fbi_transform(u: &WaveField, mu: f64, tau: f64, ys: &[f64], o: &FbiOptions) -> Result<FbiField, FbiError> {
    let points = u.grid.nodes.iter().map(|n| n.p).collect();
    let mut f = fbi_transform_series(u, points, mu, tau, ys, o)?;
    f.grid = Some(u.grid.clone());
    Ok(f)
}
