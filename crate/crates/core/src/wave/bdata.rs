//! Dirichlet data ψ on ∂Ω × [0, ∞), the norm H(t) and the ratio F.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use super::WaveError;
use crate::geometry::{dist, BoundaryLabel, Domain, Point};

#[derive(Clone, Debug, PartialEq)]
pub enum SpatialProfile {
    Constant(f64),
    /// C^∞ bump in the polar angle about `center`, supported in |θ − angle| < half_width.
    AngularBump { center: Point, angle: f64, half_width: f64, amp: f64 },
    Affine { grad: [f64; 2], offset: f64 },
}

impl SpatialProfile {
    pub fn eval(&self, p: Point) -> f64 {
        match *self {
            SpatialProfile::Constant(c) => c,
            SpatialProfile::AngularBump { center, angle, half_width, amp } => {
                let th = (p[1] - center[1]).atan2(p[0] - center[0]);
                let mut d = th - angle;
                d -= (d / (2.0 * PI)).round() * 2.0 * PI;
                let z = d / half_width;
                if z.abs() >= 1.0 {
                    0.0
                } else {
                    amp * (1.0 - 1.0 / (1.0 - z * z)).exp()
                }
            }
            SpatialProfile::Affine { grad, offset } => grad[0] * p[0] + grad[1] * p[1] + offset,
        }
    }
}

/// Q(t)·e^{−rt} with Q a polynomial (ascending coefficients).
#[derive(Clone, Debug, PartialEq)]
pub struct TemporalProfile {
    pub poly: Vec<f64>,
    pub rate: f64,
}

fn poly_eval(p: &[f64], t: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

fn poly_deriv(p: &[f64]) -> Vec<f64> {
    p.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect()
}

/// Real roots of `p` in [lo, hi], isolated between the roots of p′ and refined by bisection.
fn real_roots(p: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut p = p.to_vec();
    while p.len() > 1 && *p.last().unwrap() == 0.0 {
        p.pop();
    }
    if p.len() <= 1 {
        return Vec::new();
    }
    let mut knots = vec![lo];
    knots.extend(real_roots(&poly_deriv(&p), lo, hi));
    knots.push(hi);
    let mut out: Vec<f64> = Vec::new();
    for w in knots.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (fa, fb) = (poly_eval(&p, a), poly_eval(&p, b));
        if fa == 0.0 {
            out.push(a);
            continue;
        }
        if fa * fb >= 0.0 {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if (poly_eval(&p, m) > 0.0) == (fa > 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        out.push(0.5 * (a + b));
    }
    if poly_eval(&p, hi) == 0.0 {
        out.push(hi);
    }
    out.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (1.0 + y.abs()));
    out
}

impl TemporalProfile {
    /// c·t^p·e^{−rt}.
    pub fn poly_exp(c: f64, p: usize, r: f64) -> Self {
        let mut poly = vec![0.0; p + 1];
        poly[p] = c;
        TemporalProfile { poly, rate: r }
    }

    /// (rt)^p e^{−rt} scaled to unit maximum (attained at t = p/r).
    pub fn normalized_poly_exp(p: usize, r: f64) -> Self {
        let tp = p as f64 / r;
        let c = 1.0 / (tp.powi(p as i32) * (-(p as f64)).exp());
        Self::poly_exp(c, p, r)
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        TemporalProfile { poly: coeffs, rate: 0.0 }
    }

    /// Polynomial factor of the j-th derivative: Q_{j+1} = Q_j′ − rQ_j.
    fn factor(&self, j: usize) -> Vec<f64> {
        let mut q = self.poly.clone();
        for _ in 0..j {
            let mut d = poly_deriv(&q);
            d.resize(q.len(), 0.0);
            for (dk, qk) in d.iter_mut().zip(&q) {
                *dk -= self.rate * qk;
            }
            q = d;
        }
        q
    }

    pub fn derivative(&self, j: usize, t: f64) -> f64 {
        poly_eval(&self.factor(j), t) * (-self.rate * t).exp()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.derivative(0, t)
    }

    /// sup_{[0,t]} |T^{(j)}| from the endpoint values and the critical points.
    pub fn sup_abs_derivative(&self, j: usize, t: f64) -> f64 {
        let q = self.factor(j);
        let dq = self.factor(j + 1);
        // past the Cauchy bound of the critical-point polynomial a decaying profile is
        // monotone, so the sup is already attained there
        let mut t = t;
        if self.rate > 0.0 {
            if let Some(lead) = dq.iter().rposition(|c| *c != 0.0) {
                let bound = 1.0 + dq[..lead].iter().fold(0.0f64, |m, c| m.max((c / dq[lead]).abs()));
                t = t.min(bound);
            }
        }
        let crit = real_roots(&dq, 0.0, t);
        let f = |s: f64| (poly_eval(&q, s) * (-self.rate * s).exp()).abs();
        crit.into_iter().fold(f(0.0).max(f(t)), |m, c| m.max(f(c)))
    }
}

pub type PsiFn = Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum BoundarySource {
    Zero,
    Separable { space: SpatialProfile, time: TemporalProfile },
    /// amp·max(t − s·x, 0)^p.
    PlaneWave { amp: f64, slowness: [f64; 2], power: u32 },
    Custom(PsiFn),
}

impl fmt::Debug for BoundarySource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundarySource::Zero => write!(f, "Zero"),
            BoundarySource::Separable { space, time } => {
                f.debug_struct("Separable").field("space", space).field("time", time).finish()
            }
            BoundarySource::PlaneWave { amp, slowness, power } => f
                .debug_struct("PlaneWave")
                .field("amp", amp)
                .field("slowness", slowness)
                .field("power", power)
                .finish(),
            BoundarySource::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

fn falling(p: u32, j: usize) -> f64 {
    (0..j).map(|k| p as f64 - k as f64).product()
}

impl BoundarySource {
    pub fn eval(&self, x: Point, t: f64) -> f64 {
        match self {
            BoundarySource::Zero => 0.0,
            BoundarySource::Separable { space, time } => space.eval(x) * time.eval(t),
            BoundarySource::PlaneWave { amp, slowness, power } => {
                let z = t - slowness[0] * x[0] - slowness[1] * x[1];
                if z > 0.0 {
                    amp * z.powi(*power as i32)
                } else {
                    0.0
                }
            }
            BoundarySource::Custom(f) => f(x, t),
        }
    }

    /// ∂_t^j ψ(x, t) and a resolution indicator (zero for closed forms). Custom data
    /// use local polynomial fits at steps δ and δ/2 (extrapolated); the indicator
    /// is their disagreement.
    fn time_derivative(&self, x: Point, j: usize, t: f64, step: f64) -> (f64, f64) {
        match self {
            BoundarySource::Zero => (0.0, 0.0),
            BoundarySource::Separable { space, time } => (space.eval(x) * time.derivative(j, t), 0.0),
            BoundarySource::PlaneWave { amp, slowness, power } => {
                let z = t - slowness[0] * x[0] - slowness[1] * x[1];
                if j > *power as usize || z <= 0.0 {
                    (0.0, 0.0)
                } else {
                    (amp * falling(*power, j) * z.powi(*power as i32 - j as i32), 0.0)
                }
            }
            BoundarySource::Custom(f) => {
                if j == 0 {
                    return (f(x, t), 0.0);
                }
                // zero extension to t < 0 (C^{2m+4} by compatibility)
                let g = |s: f64| if s < 0.0 { 0.0 } else { f(x, s) };
                let (d1, d2) = (poly_fit_derivative(&g, t, j, step), poly_fit_derivative(&g, t, j, 0.5 * step));
                ((8.0 * d2 - d1) / 7.0, (d1 - d2).abs())
            }
        }
    }
}

/// j-th derivative at t of the degree-(j+2) interpolant through j+3 points of
/// spacing δ centred on t.
fn poly_fit_derivative<G: Fn(f64) -> f64>(g: &G, t: f64, j: usize, d: f64) -> f64 {
    let m = j + 3;
    let x0 = -0.5 * (m - 1) as f64;
    let xs: Vec<f64> = (0..m).map(|k| x0 + k as f64).collect();
    // Vandermonde solve in the local variable x = (s − t)/δ
    let mut a: Vec<Vec<f64>> = xs
        .iter()
        .map(|&x| {
            let mut row: Vec<f64> = (0..m).map(|p| x.powi(p as i32)).collect();
            row.push(g(t + x * d));
            row
        })
        .collect();
    for c in 0..m {
        let piv = (c..m).max_by(|&p, &q| a[p][c].abs().total_cmp(&a[q][c].abs())).unwrap();
        a.swap(c, piv);
        for r in 0..m {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..=m {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    let cj = a[j][m] / a[j][j];
    let fact: f64 = (1..=j).map(|k| k as f64).product();
    fact * cj / d.powi(j as i32)
}

/// ‖g‖_{C^{1,1}} = ‖g‖∞ + ρ₀‖∂_s g‖∞ + ρ₀²‖∂²_s g‖∞ over a closed loop of samples
/// with arclength positions `s` (nonuniform three-point differences).
pub fn c11_boundary_norm(values: &[f64], s: &[f64], perimeter: f64, rho0: f64) -> f64 {
    let n = values.len();
    let (mut g0, mut g1, mut g2) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..n {
        let (km, kp) = ((k + n - 1) % n, (k + 1) % n);
        let mut h1 = s[k] - s[km];
        if h1 <= 0.0 {
            h1 += perimeter;
        }
        let mut h2 = s[kp] - s[k];
        if h2 <= 0.0 {
            h2 += perimeter;
        }
        let (a, b, c) = (values[km], values[k], values[kp]);
        let d1 = -h2 / (h1 * (h1 + h2)) * a + (h2 - h1) / (h1 * h2) * b + h1 / (h2 * (h1 + h2)) * c;
        let d2 = 2.0 * (a / (h1 * (h1 + h2)) - b / (h1 * h2) + c / (h2 * (h1 + h2)));
        g0 = g0.max(b.abs());
        g1 = g1.max(d1.abs());
        g2 = g2.max(d2.abs());
    }
    g0 + rho0 * g1 + rho0 * rho0 * g2
}

#[derive(Clone, Copy, Debug)]
struct Sample {
    p: Point,
    s: f64,
    accessible: bool,
}

/// Boundary data attached to a domain, with a fixed sampling of ∂Ω.
#[derive(Clone, Debug)]
pub struct BoundaryData {
    pub source: BoundarySource,
    pub t1: f64,
    pub rho0: f64,
    pub dim: usize,
    /// m = ⌊(n+2)/4⌋; derivatives up to 2m+4 enter H.
    pub m: usize,
    labels: Vec<BoundaryLabel>,
    samples: Vec<Sample>,
    perimeter: f64,
    /// sup |ψ| over the boundary samples and the time lattice on [0, t₁].
    scale: f64,
}

/// Time lattice resolution used when H needs sampled sups (non-separable data).
const LATTICE_PER_T1: f64 = 400.0;

impl BoundaryData {
    pub fn new(domain: &Domain, source: BoundarySource, t1: f64) -> Result<Self, WaveError> {
        let rho0 = domain.rho0;
        if !(t1 >= rho0) {
            return Err(WaveError::InvalidParameter(format!("t1 = {t1} < ρ₀ = {rho0}")));
        }
        let poly = domain.boundary();
        let step = rho0 / 16.0;
        let mut samples = Vec::new();
        let mut s = 0.0;
        for k in 0..poly.len() {
            let [a, b] = poly.edge(k);
            let l = dist(a, b);
            let parts = ((l / step).ceil() as usize).max(1);
            let accessible = domain.label(k) == BoundaryLabel::Accessible;
            for i in 0..parts {
                let t = i as f64 / parts as f64;
                samples.push(Sample { p: [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])], s: s + t * l, accessible });
            }
            s += l;
        }
        // a vertex sample belongs to Γ^(a) only if both adjacent edges do
        let mut idx = 0;
        for k in 0..poly.len() {
            let prev = (k + poly.len() - 1) % poly.len();
            if domain.label(prev) == BoundaryLabel::Inaccessible {
                samples[idx].accessible = false;
            }
            let l = dist(poly.edge(k)[0], poly.edge(k)[1]);
            idx += ((l / step).ceil() as usize).max(1);
        }
        let dim = domain.dim;
        let bd = BoundaryData {
            source,
            t1,
            rho0,
            dim,
            m: (dim + 2) / 4,
            labels: domain.labels().to_vec(),
            samples,
            perimeter: s,
            scale: 0.0,
        };
        let mut bd = bd;
        bd.scale = bd.lattice_scale();
        bd.validate()?;
        Ok(bd)
    }

    pub fn order(&self) -> usize {
        2 * self.m + 4
    }

    fn lattice_step(&self) -> f64 {
        self.t1 / LATTICE_PER_T1
    }

    fn lattice_scale(&self) -> f64 {
        let lat: Vec<f64> = (0..=LATTICE_PER_T1 as usize).map(|k| k as f64 * self.lattice_step()).collect();
        self.samples
            .iter()
            .flat_map(|s| lat.iter().map(move |&t| (s.p, t)))
            .map(|(p, t)| self.source.eval(p, t).abs())
            .fold(0.0f64, f64::max)
    }

    fn validate(&self) -> Result<(), WaveError> {
        let lat: Vec<f64> = (0..=LATTICE_PER_T1 as usize).map(|k| k as f64 * self.lattice_step()).collect();
        let scale = self.scale;
        if scale == 0.0 {
            return Ok(());
        }
        let tol = 1e-12 * scale;
        for smp in self.samples.iter().filter(|s| !s.accessible) {
            for &t in &lat {
                if self.source.eval(smp.p, t).abs() > tol {
                    return Err(WaveError::IncompatibleData(format!(
                        "ψ ≠ 0 on Γ^(i) at ({:.4}, {:.4}), t = {t:.4}",
                        smp.p[0], smp.p[1]
                    )));
                }
            }
        }
        // compatibility: ∂_t^j ψ(·, 0) = 0, j ≤ 2m+4
        for smp in &self.samples {
            if let BoundarySource::Custom(f) = &self.source {
                self.custom_compatibility(f, smp.p, scale)?;
                continue;
            }
            for j in 0..=self.order() {
                let (v, _) = self.source.time_derivative(smp.p, j, 0.0, self.t1 / 50.0);
                if v.abs() > 1e-12 * scale / self.t1.powi(j as i32) {
                    return Err(WaveError::IncompatibleData(format!(
                        "∂_t^{j} ψ(·, 0) = {v:.4e} at ({:.4}, {:.4})",
                        smp.p[0], smp.p[1]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Forward divided differences at t = 0 must decay at least linearly when the step halves.
    fn custom_compatibility(&self, f: &PsiFn, p: Point, scale: f64) -> Result<(), WaveError> {
        let d0 = 1e-2 * self.t1;
        let fd = |j: usize, d: f64| {
            let mut acc = 0.0;
            let mut binom = 1.0;
            for k in 0..=j {
                let sgn = if (j - k) % 2 == 0 { 1.0 } else { -1.0 };
                acc += sgn * binom * f(p, k as f64 * d);
                binom = binom * (j - k) as f64 / (k + 1) as f64;
            }
            acc / d.powi(j as i32)
        };
        for j in 0..=self.order() {
            let (a, b) = (fd(j, d0), fd(j, 0.5 * d0));
            let tiny = 1e-10 * scale / self.t1.powi(j as i32);
            if a.abs() <= tiny && b.abs() <= tiny {
                continue;
            }
            if b.abs() > 0.75 * a.abs() {
                return Err(WaveError::IncompatibleData(format!(
                    "divided difference of order {j} at t = 0 does not vanish at ({:.4}, {:.4})",
                    p[0], p[1]
                )));
            }
        }
        Ok(())
    }

    /// ψ at a boundary point of edge `edge`; exactly zero on Γ^(i).
    pub fn psi_on_edge(&self, p: Point, edge: usize, t: f64) -> f64 {
        if self.labels[edge] == BoundaryLabel::Inaccessible {
            0.0
        } else {
            self.source.eval(p, t)
        }
    }

    pub fn psi(&self, p: Point, t: f64) -> f64 {
        self.source.eval(p, t)
    }

    /// ‖∂_t^j ψ(·, t)‖_{C^{1,1}(∂Ω)} on the boundary samples, with the largest
    /// difference-step disagreement and the largest |∂_t^j ψ| seen.
    fn spatial_norm(&self, j: usize, t: f64) -> (f64, f64, f64) {
        let mut vals = Vec::with_capacity(self.samples.len());
        let (mut dis, mut mag) = (0.0f64, 0.0f64);
        for smp in &self.samples {
            let (v, e) = self.source.time_derivative(smp.p, j, t, self.t1 / 50.0);
            vals.push(v);
            dis = dis.max(e);
            mag = mag.max(v.abs());
        }
        let s: Vec<f64> = self.samples.iter().map(|x| x.s).collect();
        (c11_boundary_norm(&vals, &s, self.perimeter, self.rho0), dis, mag)
    }

    /// H(t) = Σ_{j ≤ 2m+4} ρ₀^j sup_{[0,t]} ‖∂_t^j ψ‖_{C^{1,1}(∂Ω)}.
    pub fn h_norm(&self, t: f64) -> Result<f64, WaveError> {
        if !(t >= 0.0) {
            return Err(WaveError::InvalidParameter(format!("t = {t}")));
        }
        match &self.source {
            BoundarySource::Zero => Ok(0.0),
            BoundarySource::Separable { space, time } => {
                let vals: Vec<f64> = self.samples.iter().map(|x| space.eval(x.p)).collect();
                let s: Vec<f64> = self.samples.iter().map(|x| x.s).collect();
                let g = c11_boundary_norm(&vals, &s, self.perimeter, self.rho0);
                let sum: f64 =
                    (0..=self.order()).map(|j| self.rho0.powi(j as i32) * time.sup_abs_derivative(j, t)).sum();
                Ok(g * sum)
            }
            _ => {
                // sups over the time lattice covering [0, t]; monotone in t by construction
                let d = self.lattice_step();
                let top = (t / d - 1e-9).ceil().max(0.0) as usize;
                let mut sups = vec![0.0f64; self.order() + 1];
                let mut dis = vec![0.0f64; self.order() + 1];
                let mut mag = vec![0.0f64; self.order() + 1];
                for k in 0..=top {
                    for j in 0..=self.order() {
                        let (v, e, m) = self.spatial_norm(j, k as f64 * d);
                        sups[j] = sups[j].max(v);
                        dis[j] = dis[j].max(e);
                        mag[j] = mag[j].max(m);
                    }
                }
                for j in 1..=self.order() {
                    if dis[j] > 0.25 * mag[j] + 1e-12 * self.scale / self.t1.powi(j as i32) {
                        return Err(WaveError::InsufficientSmoothness {
                            order: j,
                            detail: format!(
                                "difference quotients at steps δ and δ/2 disagree by {:.3e} (max |∂_t^{j}ψ| ≈ {:.3e})",
                                dis[j], mag[j]
                            ),
                        });
                    }
                }
                Ok(sups.iter().enumerate().map(|(j, v)| self.rho0.powi(j as i32) * v).sum())
            }
        }
    }

    pub fn h_table(&self, times: &[f64]) -> Result<Vec<f64>, WaveError> {
        times.iter().map(|&t| self.h_norm(t)).collect()
    }

    /// sup |ψ| over Γ^(a) × [0, t].
    pub fn sup_accessible(&self, t: f64) -> f64 {
        let acc = self.samples.iter().filter(|s| s.accessible);
        match &self.source {
            BoundarySource::Zero => 0.0,
            BoundarySource::Separable { space, time } => {
                acc.map(|s| space.eval(s.p).abs()).fold(0.0, f64::max) * time.sup_abs_derivative(0, t)
            }
            _ => {
                let d = self.lattice_step();
                let top = (t / d - 1e-9).ceil().max(0.0) as usize;
                let pts: Vec<Point> = acc.map(|s| s.p).collect();
                let mut m = 0.0f64;
                for k in 0..=top {
                    for &p in &pts {
                        m = m.max(self.source.eval(p, (k as f64 * d).min(t)).abs());
                    }
                }
                m
            }
        }
    }

    /// F = H(t₁)/‖ψ‖_{L∞(Γ^(a)×[0,t₁])}.
    pub fn f_ratio(&self) -> Result<f64, WaveError> {
        let den = self.sup_accessible(self.t1);
        if den == 0.0 {
            return Err(WaveError::FlatData);
        }
        Ok(self.h_norm(self.t1)? / den)
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }
}
