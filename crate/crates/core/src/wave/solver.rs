//! Leapfrog integration of ∂²_t u = div(A∇u) + F with Dirichlet data on a cut-cell grid.
//!
//! Arms that reach the boundary use Shortley–Weller coefficients. The part of a
//! cut-arm coefficient above the nominal a/h² is treated time-symmetrically
//! implicitly (it only touches the diagonal), which keeps the explicit CFL
//! limit independent of how close a node sits to the boundary.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use super::anisotropy::sym_eigen;
use super::grid::{Arm, Grid, GridSpec, EAST, NORTH, SOUTH, WEST};
use super::{AnisotropyField, BoundaryData, WaveError};
use crate::geometry::{Domain, Point};

pub type Forcing = Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>;
pub type BoundaryFn = Arc<dyn Fn(Point, usize, f64) -> f64 + Send + Sync>;

/// Initial displacement and velocity (test mode; the IBVP starts from rest).
#[derive(Clone)]
pub struct InitialData {
    pub u0: Arc<dyn Fn(Point) -> f64 + Send + Sync>,
    pub v0: Arc<dyn Fn(Point) -> f64 + Send + Sync>,
}

#[derive(Clone, Default)]
pub struct SolveOptions {
    pub initial: Option<InitialData>,
    pub forcing: Option<Forcing>,
}

/// Sparse explicit operator plus boundary couplings.
struct Operator {
    start: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    bstart: Vec<usize>,
    bcols: Vec<u32>,
    bnom: Vec<f64>,
    bexc: Vec<f64>,
    kappa: Vec<f64>,
}

impl Operator {
    fn build(grid: &Grid, a: &AnisotropyField) -> Operator {
        let h = grid.h;
        let h2 = h * h;
        let n = grid.len();
        let mut op = Operator {
            start: vec![0],
            cols: Vec::new(),
            vals: Vec::new(),
            bstart: vec![0],
            bcols: Vec::new(),
            bnom: Vec::new(),
            bexc: Vec::new(),
            kappa: vec![0.0; n],
        };
        let regular = |k: usize, dir: usize| matches!(grid.nodes[k].arms[dir], Arm::Node(_));
        let nb = |k: usize, dir: usize| grid.nodes[k].arms[dir].node().unwrap();
        for (k, node) in grid.nodes.iter().enumerate() {
            let mut row: Vec<(u32, f64)> = Vec::new();
            let mut diag = 0.0;
            let th: Vec<f64> = node.arms.iter().map(|a| a.theta()).collect();
            for dir in 0..4 {
                let (len, other, comp, unit) = match dir {
                    EAST => (th[EAST], th[WEST], 0, [1.0, 0.0]),
                    WEST => (th[WEST], th[EAST], 0, [-1.0, 0.0]),
                    NORTH => (th[NORTH], th[SOUTH], 1, [0.0, 1.0]),
                    _ => (th[SOUTH], th[NORTH], 1, [0.0, -1.0]),
                };
                let mid = [node.p[0] + 0.5 * len * h * unit[0], node.p[1] + 0.5 * len * h * unit[1]];
                let coef = a.eval(mid)[comp][comp];
                let c = 2.0 * coef / ((len + other) * len * h2);
                match node.arms[dir] {
                    Arm::Node(m) => {
                        row.push((m, c));
                        diag -= c;
                    }
                    Arm::Boundary { point, .. } => {
                        let nominal = coef / h2;
                        op.bcols.push(point);
                        op.bnom.push(nominal);
                        op.bexc.push((c - nominal).max(0.0));
                        op.kappa[k] += (c - nominal).max(0.0);
                        diag -= nominal;
                    }
                }
            }
            // mixed term ∂₁(a₁₂∂₂u) + ∂₂(a₁₂∂₁u)
            let a12 = |p: Point| a.eval(p)[0][1];
            let interior = (0..4).all(|d| regular(k, d))
                && [EAST, WEST].iter().all(|&d| regular(nb(k, d), NORTH) && regular(nb(k, d), SOUTH));
            if interior {
                let at = |di: f64, dj: f64| a12([node.p[0] + di * h, node.p[1] + dj * h]);
                let (ae, aw, an, as_) = (at(1.0, 0.0), at(-1.0, 0.0), at(0.0, 1.0), at(0.0, -1.0));
                let (e, w) = (nb(k, EAST), nb(k, WEST));
                let q = 0.25 / h2;
                for (m, c) in [
                    (nb(e, NORTH), q * (ae + an)),
                    (nb(e, SOUTH), -q * (ae + as_)),
                    (nb(w, NORTH), -q * (aw + an)),
                    (nb(w, SOUTH), q * (aw + as_)),
                ] {
                    if c != 0.0 {
                        row.push((m as u32, c));
                    }
                }
            } else {
                let quad = [(EAST, NORTH), (EAST, SOUTH), (WEST, NORTH), (WEST, SOUTH)]
                    .into_iter()
                    .find(|&(dx, dy)| regular(k, dx) && regular(k, dy) && regular(nb(k, dx), dy));
                let a0 = a12(node.p);
                let dx_a = (a12([node.p[0] + 0.5 * h, node.p[1]]) - a12([node.p[0] - 0.5 * h, node.p[1]])) / h;
                let dy_a = (a12([node.p[0], node.p[1] + 0.5 * h]) - a12([node.p[0], node.p[1] - 0.5 * h])) / h;
                if let Some((dx, dy)) = quad {
                    if a0 != 0.0 || dx_a != 0.0 || dy_a != 0.0 {
                        let sx = if dx == EAST { 1.0 } else { -1.0 };
                        let sy = if dy == NORTH { 1.0 } else { -1.0 };
                        let (x, y) = (nb(k, dx), nb(k, dy));
                        let dg = nb(x, dy);
                        let m = 2.0 * a0 * sx * sy / h2;
                        row.push((dg as u32, m));
                        row.push((x as u32, -m + dy_a * sx / h));
                        row.push((y as u32, -m + dx_a * sy / h));
                        diag += m - dy_a * sx / h - dx_a * sy / h;
                    }
                }
            }
            row.push((k as u32, diag));
            for (m, c) in row {
                op.cols.push(m);
                op.vals.push(c);
            }
            op.start.push(op.cols.len());
            op.bstart.push(op.bcols.len());
        }
        op
    }

    #[inline]
    fn apply_row(&self, k: usize, u: &[f64]) -> f64 {
        let mut s = 0.0;
        for idx in self.start[k]..self.start[k + 1] {
            s += self.vals[idx] * u[self.cols[idx] as usize];
        }
        s
    }
}

/// Solution history on the grid nodes together with what produced it.
#[derive(Clone)]
pub struct WaveField {
    pub grid: Arc<Grid>,
    pub domain: Arc<Domain>,
    pub aniso: AnisotropyField,
    pub boundary: BoundaryFn,
    pub dt: f64,
    pub steps: usize,
    pub t_end: f64,
    pub times: Vec<f64>,
    pub history: Vec<Vec<f64>>,
    pub u_final: Vec<f64>,
    /// ∂_t u at t_end (centred difference using one extra step).
    pub du_final: Vec<f64>,
    /// Discrete energy K^n at every time level n = 0..=steps; empty for analytic fields.
    pub energy: Vec<f64>,
}

impl fmt::Debug for WaveField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WaveField")
            .field("nodes", &self.grid.len())
            .field("h", &self.grid.h)
            .field("dt", &self.dt)
            .field("steps", &self.steps)
            .field("stored", &self.times.len())
            .finish()
    }
}

impl WaveField {
    /// Field sampled from a closed-form u (and ∂_t u) at the given times.
    pub fn from_fn<U, V>(
        domain: &Domain,
        aniso: &AnisotropyField,
        spec: &GridSpec,
        times: Vec<f64>,
        u: U,
        ut: V,
    ) -> Result<WaveField, WaveError>
    where
        U: Fn(Point, f64) -> f64 + Send + Sync + 'static,
        V: Fn(Point, f64) -> f64 + Send + Sync + 'static,
    {
        if times.is_empty() || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(WaveError::InvalidParameter("times must be increasing and non-empty".into()));
        }
        let grid = Grid::build(domain, spec)?;
        let history: Vec<Vec<f64>> =
            times.iter().map(|&t| grid.nodes.par_iter().map(|n| u(n.p, t)).collect()).collect();
        let t_end = *times.last().unwrap();
        let du_final = grid.nodes.iter().map(|n| ut(n.p, t_end)).collect();
        let dt = if times.len() > 1 { times[1] - times[0] } else { t_end };
        let u = Arc::new(u);
        Ok(WaveField {
            grid: Arc::new(grid),
            domain: Arc::new(domain.clone()),
            aniso: aniso.clone(),
            boundary: Arc::new(move |p, _, t| u(p, t)),
            dt,
            steps: times.len() - 1,
            t_end,
            u_final: history.last().unwrap().clone(),
            du_final,
            times,
            history,
            energy: Vec::new(),
        })
    }

    pub fn weights(&self) -> Vec<f64> {
        self.grid.weights()
    }

    fn stored_index(&self, t: f64) -> Option<usize> {
        let tol = 1e-9 * self.dt.max(1e-300);
        self.times.iter().position(|&s| (s - t).abs() <= tol)
    }

    pub fn snapshot(&self, t: f64) -> Result<&[f64], WaveError> {
        self.stored_index(t).map(|k| self.history[k].as_slice()).ok_or(WaveError::NotOnTimeGrid { t })
    }

    /// Cubic Lagrange interpolation in time between stored levels.
    pub fn value_at(&self, t: f64, out: &mut [f64]) {
        let n = self.times.len();
        if n == 1 {
            out.copy_from_slice(&self.history[0]);
            return;
        }
        let t = t.clamp(self.times[0], self.times[n - 1]);
        let k = match self.times.binary_search_by(|s| s.total_cmp(&t)) {
            Ok(k) => {
                out.copy_from_slice(&self.history[k]);
                return;
            }
            Err(k) => k.clamp(1, n - 1) - 1,
        };
        let lo = if n < 4 { 0 } else { k.saturating_sub(1).min(n - 4) };
        let m = n.min(4);
        let ts: Vec<f64> = (lo..lo + m).map(|i| self.times[i]).collect();
        let w: Vec<f64> = (0..m)
            .map(|a| (0..m).filter(|&b| b != a).fold(1.0, |acc, b| acc * (t - ts[b]) / (ts[a] - ts[b])))
            .collect();
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            *o = (0..m).map(|a| w[a] * self.history[lo + a][i]).sum();
        });
    }

    /// Weighted discrete L² distance to a closed form at t_end.
    pub fn l2_error<F: Fn(Point) -> f64>(&self, exact: F) -> f64 {
        let w = self.weights();
        self.grid
            .nodes
            .iter()
            .zip(&self.u_final)
            .zip(&w)
            .map(|((n, u), w)| w * (u - exact(n.p)).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn boundary_value(&self, p: Point, edge: usize, t: f64) -> f64 {
        (self.boundary)(p, edge, t)
    }
}

pub fn solve_ibvp(
    domain: &Domain,
    a: &AnisotropyField,
    bdata: &BoundaryData,
    t_end: f64,
    spec: &GridSpec,
) -> Result<WaveField, WaveError> {
    solve_with(domain, a, bdata, t_end, spec, &SolveOptions::default())
}

pub fn solve_with(
    domain: &Domain,
    a: &AnisotropyField,
    bdata: &BoundaryData,
    t_end: f64,
    spec: &GridSpec,
    opts: &SolveOptions,
) -> Result<WaveField, WaveError> {
    let grid = Grid::build(domain, spec)?;
    let h = grid.h;
    if !(a.lambda > 0.0 && a.lambda <= 1.0) {
        return Err(WaveError::Anisotropy(format!("λ = {} not in (0, 1]", a.lambda)));
    }
    for n in &grid.nodes {
        let (lo, hi) = sym_eigen(a.eval(n.p));
        if lo < a.lambda * (1.0 - 1e-12) || hi > (1.0 + 1e-12) / a.lambda {
            return Err(WaveError::Anisotropy(format!(
                "ellipticity fails at ({:.4}, {:.4}): eigenvalues {lo:.4}, {hi:.4}",
                n.p[0], n.p[1]
            )));
        }
    }
    let limit = spec.c_cfl * h * a.lambda.sqrt();
    let dt = match spec.dt {
        Some(dt) => {
            if dt > limit * (1.0 + 1e-12) {
                return Err(WaveError::CflViolation { dt, limit });
            }
            dt
        }
        None => {
            let n = (t_end / limit - 1e-9).ceil().max(1.0);
            t_end / n
        }
    };
    if !(dt > 0.0) || !(t_end >= dt * (1.0 - 1e-12)) {
        return Err(WaveError::InvalidParameter(format!("T = {t_end} must be ≥ Δt = {dt}")));
    }
    let steps = (t_end / dt).round() as usize;
    let op = Operator::build(&grid, a);
    let n = grid.len();
    let dt2 = dt * dt;

    let bd = bdata.clone();
    let boundary: BoundaryFn = Arc::new(move |p, e, t| bd.psi_on_edge(p, e, t));
    let psi_at = |t: f64| -> Vec<f64> {
        grid.boundary_points.iter().map(|b| boundary(b.p, b.edge, t)).collect()
    };
    let force_at = |t: f64, out: &mut Vec<f64>| {
        if let Some(f) = &opts.forcing {
            out.par_iter_mut().zip(grid.nodes.par_iter()).for_each(|(o, nd)| *o = f(nd.p, t));
        }
    };
    let weights = grid.weights();
    let energy_half = |un: &[f64], up: &[f64]| -> f64 {
        let mut e = 0.0;
        for k in 0..n {
            let d = (un[k] - up[k]) / dt;
            let su = -op.apply_row(k, up);
            e += weights[k] * (d * d + un[k] * su + 0.5 * op.kappa[k] * (un[k] * un[k] + up[k] * up[k]));
        }
        e
    };

    let mut u_prev: Vec<f64> = vec![0.0; n];
    let mut v0 = vec![0.0; n];
    if let Some(init) = &opts.initial {
        for (k, nd) in grid.nodes.iter().enumerate() {
            u_prev[k] = (init.u0)(nd.p);
            v0[k] = (init.v0)(nd.p);
        }
    }
    let mut force = vec![0.0; n];
    force_at(0.0, &mut force);
    let psi0 = psi_at(0.0);
    // Taylor start with the full cut-arm coefficients
    let mut u_cur: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut acc = op.apply_row(k, &u_prev) - op.kappa[k] * u_prev[k] + force[k];
            for b in op.bstart[k]..op.bstart[k + 1] {
                acc += (op.bnom[b] + op.bexc[b]) * psi0[op.bcols[b] as usize];
            }
            u_prev[k] + dt * v0[k] + 0.5 * dt2 * acc
        })
        .collect();

    let every = spec.store_every.max(1);
    let mut times = vec![0.0];
    let mut history = vec![u_prev.clone()];
    let mut e_half = vec![energy_half(&u_cur, &u_prev)];
    let mut psi_prev = psi0;
    let mut psi_cur = psi_at(dt);
    let mut u_next = vec![0.0; n];
    let mut u_final = Vec::new();
    let mut du_final = Vec::new();
    // iteration `step` holds u_prev = u^{step−1}, u_cur = u^{step}
    for step in 1..=steps {
        let t = step as f64 * dt;
        if step % every == 0 || step == steps {
            times.push(t);
            history.push(u_cur.clone());
        }
        let psi_next = psi_at(t + dt);
        force_at(t, &mut force);
        u_next.par_iter_mut().enumerate().for_each(|(k, out)| {
            let half = 0.5 * dt2 * op.kappa[k];
            let mut acc = op.apply_row(k, &u_cur) + force[k];
            for b in op.bstart[k]..op.bstart[k + 1] {
                let j = op.bcols[b] as usize;
                acc += op.bnom[b] * psi_cur[j] + 0.5 * op.bexc[b] * (psi_next[j] + psi_prev[j]);
            }
            *out = (2.0 * u_cur[k] - (1.0 + half) * u_prev[k] + dt2 * acc) / (1.0 + half);
        });
        e_half.push(energy_half(&u_next, &u_cur));
        if step == steps {
            du_final = (0..n).map(|k| (u_next[k] - u_prev[k]) / (2.0 * dt)).collect();
            u_final = u_cur.clone();
        }
        std::mem::swap(&mut u_prev, &mut u_cur);
        std::mem::swap(&mut u_cur, &mut u_next);
        psi_prev = std::mem::replace(&mut psi_cur, psi_next);
    }
    let mut energy = Vec::with_capacity(steps + 1);
    energy.push(e_half[0]);
    for s in 1..=steps {
        energy.push(0.5 * (e_half[s - 1] + e_half[s]));
    }
    Ok(WaveField {
        grid: Arc::new(grid),
        domain: Arc::new(domain.clone()),
        aniso: a.clone(),
        boundary,
        dt,
        steps,
        t_end: steps as f64 * dt,
        times,
        history,
        u_final,
        du_final,
        energy,
    })
}

/// K(t) at a time level of the run.
pub fn energy(u: &WaveField, t: f64) -> Result<f64, WaveError> {
    if u.energy.is_empty() {
        return Err(WaveError::InvalidParameter("field carries no energy trace".into()));
    }
    let s = t / u.dt;
    let n = s.round();
    if (s - n).abs() > 1e-6 || n < 0.0 || n as usize > u.steps {
        return Err(WaveError::NotOnTimeGrid { t });
    }
    Ok(u.energy[n as usize])
}
