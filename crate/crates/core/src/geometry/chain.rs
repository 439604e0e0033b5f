//! Ball chains: lattice paths through an r-interior and the nested cone chain.

use std::collections::VecDeque;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::domain::Domain;
use super::polygon::{dist, Point};
use super::GeometryError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainKind {
    PathChain,
    ConeChain,
}

/// Cone constants; `a = 1/4` fixes sin γ₂ = 1 − ς/4 and hence χ = 1/4.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeParams {
    pub s: f64,
    pub l_s: f64,
    pub rho0: f64,
    pub varsigma: f64,
    pub gamma: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub sin_gamma: f64,
    pub sin_gamma1: f64,
    pub sin_gamma2: f64,
    pub chi: f64,
    pub h: f64,
    pub l1: f64,
}

impl ConeParams {
    /// Height of the cone cap, sL_sρ₀/2.
    pub fn cap(&self) -> f64 {
        0.5 * self.s * self.l_s * self.rho0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallChain {
    pub kind: ChainKind,
    pub centers: Vec<Point>,
    pub small_radii: Vec<f64>,
    pub mid_radii: Vec<f64>,
    pub large_radii: Vec<f64>,
    pub cone: Option<ConeParams>,
}

impl BallChain {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Floating-point check of B_{r_{k+1}}(w_{k+1}) ⊂ B_{ρ_k}(w_k) ⊂ B_{R_k}(w_k) ⊂ 𝒞.
    pub fn verify_cone_nesting(&self, rel_tol: f64) -> Result<(), String> {
        let c = self.cone.ok_or("not a cone chain")?;
        let cap = c.cap();
        for k in 0..self.len() {
            let (w, rk, pk, bigr) = (self.centers[k][1], self.small_radii[k], self.mid_radii[k], self.large_radii[k]);
            let scale = w.abs().max(bigr);
            if pk > bigr * (1.0 + rel_tol) {
                return Err(format!("ball {k}: ρ_k > R_k"));
            }
            // distance from (0, w) to the lateral surface x_n = L|x'|
            let lateral = w / (1.0 + c.l_s * c.l_s).sqrt();
            if bigr > lateral + rel_tol * scale {
                return Err(format!("ball {k}: leaves the cone side"));
            }
            if w + bigr > cap + rel_tol * scale {
                return Err(format!("ball {k}: crosses the cone cap"));
            }
            if rk > pk {
                return Err(format!("ball {k}: r_k > ρ_k"));
            }
            if k + 1 < self.len() {
                let step = (self.centers[k + 1][1] - w).abs();
                if step + self.small_radii[k + 1] > pk + rel_tol * scale {
                    return Err(format!("ball {}: not inside B_ρ of ball {k}", k + 1));
                }
            }
        }
        Ok(())
    }
}

/// Slope and scale matching a given ς: sin γ = 1 − ς/12 with γ = arctan(1/L),
/// and s from L_s = C⋆ s^{1/4}.
pub fn cone_params_for_varsigma(varsigma: f64, c_star: f64) -> (f64, f64) {
    let sg = 1.0 - varsigma / 12.0;
    let l = (1.0 / (sg * sg) - 1.0).sqrt();
    ((l / c_star).powi(4), l)
}

pub fn cone_ball_chain(s: f64, l_s: f64, rho0: f64, varsigma: f64, balls: usize) -> Result<BallChain, GeometryError> {
    if !(varsigma > 0.0 && varsigma <= 0.25) {
        return Err(GeometryError::InvalidParameter(format!("ς = {varsigma} not in (0, 1/4]")));
    }
    if !(s > 0.0 && l_s > 0.0 && rho0 > 0.0) || balls == 0 {
        return Err(GeometryError::InvalidParameter(format!("s = {s}, L_s = {l_s}, ρ₀ = {rho0}, balls = {balls}")));
    }
    let gamma = (1.0 / l_s).atan();
    let sin_g = gamma.sin();
    let sin1 = 1.0 - varsigma;
    let sin2 = 1.0 - 0.25 * varsigma;
    if !(sin1 < sin2 && sin2 < sin_g) {
        return Err(GeometryError::ConeAngleOrder { sin1, sin2, sin: sin_g });
    }
    // (1 − sin γ₂)/(1 − sin γ₁) without the cancellation in 1 − sin
    let chi = (0.25 * varsigma) / varsigma;
    let l1 = 0.5 * s * l_s * rho0 / (1.0 + sin_g);
    let h = (sin_g - sin1) / (1.0 + sin_g);
    let cone = ConeParams {
        s,
        l_s,
        rho0,
        varsigma,
        gamma,
        gamma1: sin1.asin(),
        gamma2: sin2.asin(),
        sin_gamma: sin_g,
        sin_gamma1: sin1,
        sin_gamma2: sin2,
        chi,
        h,
        l1,
    };
    let mut chain = BallChain {
        kind: ChainKind::ConeChain,
        centers: Vec::with_capacity(balls),
        small_radii: Vec::with_capacity(balls),
        mid_radii: Vec::with_capacity(balls),
        large_radii: Vec::with_capacity(balls),
        cone: Some(cone),
    };
    for k in 0..balls {
        let lk = l1 * chi.powi(k as i32);
        chain.centers.push([0.0, lk]);
        chain.large_radii.push(lk * sin_g);
        chain.mid_radii.push(lk * sin2);
        chain.small_radii.push(lk * sin1);
    }
    chain
        .verify_cone_nesting(1e-12)
        .map_err(|e| GeometryError::InvalidParameter(format!("cone nesting: {e}")))?;
    Ok(chain)
}

/// Volume packing constant 4ⁿ/ω_n for disjoint balls of radius r/4.
pub fn packing_constant(n: usize) -> f64 {
    let nf = n as f64;
    let omega = PI.powf(0.5 * nf) / gamma_half_integer(n + 2);
    4f64.powi(n as i32) / omega
}

/// Γ(k/2) for integer k ≥ 1.
fn gamma_half_integer(k: usize) -> f64 {
    if k == 1 {
        return PI.sqrt();
    }
    if k == 2 {
        return 1.0;
    }
    let x = 0.5 * k as f64 - 1.0;
    x * gamma_half_integer(k - 2)
}

/// Intersection of domains; a point is admissible when it lies in every
/// member at distance ≥ r from every boundary.
pub struct PathHost<'a> {
    pub parts: Vec<&'a Domain>,
}

impl<'a> PathHost<'a> {
    pub fn new(parts: Vec<&'a Domain>) -> Self {
        PathHost { parts }
    }

    pub fn clearance(&self, p: Point) -> f64 {
        let mut m = f64::INFINITY;
        for d in &self.parts {
            let b = d.boundary();
            if !b.contains(p) {
                return -1.0;
            }
            m = m.min(b.boundary_distance(p));
        }
        m
    }
}

/// Shortest 4-neighbour lattice path of spacing r/2 anchored at `start`,
/// breadth-first with neighbours taken in lexicographic (i, j) order.
pub fn path_ball_chain(host: &PathHost<'_>, start: Point, end: Point, r: f64) -> Result<BallChain, GeometryError> {
    if !(r > 0.0) || host.parts.is_empty() {
        return Err(GeometryError::InvalidParameter(format!("r = {r}")));
    }
    if host.clearance(start) < r || host.clearance(end) < r {
        return Err(GeometryError::NotConnected { r });
    }
    let make = |centers: Vec<Point>| {
        let n = centers.len();
        BallChain {
            kind: ChainKind::PathChain,
            centers,
            small_radii: vec![0.25 * r; n],
            mid_radii: vec![0.75 * r; n],
            large_radii: vec![r; n],
            cone: None,
        }
    };
    if dist(start, end) <= 1e-12 * r {
        return Ok(make(vec![start]));
    }
    let step = 0.5 * r;
    let mut bb = host.parts[0].bbox();
    for d in &host.parts[1..] {
        bb = bb.union(&d.bbox());
    }
    let i_min = ((bb.min[0] - start[0]) / step).floor() as i64;
    let i_max = ((bb.max[0] - start[0]) / step).ceil() as i64;
    let j_min = ((bb.min[1] - start[1]) / step).floor() as i64;
    let j_max = ((bb.max[1] - start[1]) / step).ceil() as i64;
    let nx = (i_max - i_min + 1) as usize;
    let ny = (j_max - j_min + 1) as usize;
    let pos = |i: i64, j: i64| [start[0] + i as f64 * step, start[1] + j as f64 * step];
    let idx = |i: i64, j: i64| (j - j_min) as usize * nx + (i - i_min) as usize;
    // target: lattice node nearest to `end`
    let ti = ((end[0] - start[0]) / step).round() as i64;
    let tj = ((end[1] - start[1]) / step).round() as i64;
    let mut valid = vec![None::<bool>; nx * ny];
    let mut parent = vec![usize::MAX; nx * ny];
    let check = |i: i64, j: i64, valid: &mut Vec<Option<bool>>| -> bool {
        if i < i_min || i > i_max || j < j_min || j > j_max {
            return false;
        }
        let k = idx(i, j);
        *valid[k].get_or_insert_with(|| host.clearance(pos(i, j)) >= r)
    };
    if !check(ti, tj, &mut valid) {
        return Err(GeometryError::NotConnected { r });
    }
    let s_idx = idx(0, 0);
    parent[s_idx] = s_idx;
    let mut queue = VecDeque::from([(0i64, 0i64)]);
    let mut found = false;
    while let Some((i, j)) = queue.pop_front() {
        if i == ti && j == tj {
            found = true;
            break;
        }
        for (di, dj) in [(-1, 0), (0, -1), (0, 1), (1, 0)] {
            let (a, b) = (i + di, j + dj);
            if check(a, b, &mut valid) {
                let k = idx(a, b);
                if parent[k] == usize::MAX {
                    parent[k] = idx(i, j);
                    queue.push_back((a, b));
                }
            }
        }
    }
    if !found {
        return Err(GeometryError::NotConnected { r });
    }
    let mut rev = Vec::new();
    let mut k = idx(ti, tj);
    loop {
        let i = (k % nx) as i64 + i_min;
        let j = (k / nx) as i64 + j_min;
        rev.push(pos(i, j));
        if k == s_idx {
            break;
        }
        k = parent[k];
    }
    rev.reverse();
    let last = *rev.last().unwrap();
    if dist(last, end) > 1e-12 * r {
        rev.push(end);
    }
    Ok(make(rev))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DomainConstants, DomainOptions};

    #[test]
    fn chi_is_a_quarter() {
        let (s, l) = cone_params_for_varsigma(0.1, 1.0);
        let c = cone_ball_chain(s, l, 1.0, 0.1, 10).unwrap();
        assert!((c.cone.unwrap().chi - 0.25).abs() < 1e-15);
        for k in 1..c.len() {
            assert!((c.large_radii[k] / c.large_radii[k - 1] - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn steep_cone_rejected() {
        // L = 1 gives sin γ ≈ 0.707 < 1 − ς/4
        assert!(matches!(cone_ball_chain(0.1, 1.0, 1.0, 0.1, 5), Err(GeometryError::ConeAngleOrder { .. })));
    }

    #[test]
    fn packing_constant_2d() {
        assert!((packing_constant(2) - 16.0 / PI).abs() < 1e-14);
        assert!((packing_constant(3) - 64.0 / (4.0 / 3.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn corridor_chain() {
        let d = Domain::rectangle([-0.3, -0.25], [1.3, 0.25], 8, DomainConstants::new(0.05, 1.0), &DomainOptions::default())
            .unwrap();
        let host = PathHost::new(vec![&d]);
        let c = path_ball_chain(&host, [0.0, 0.0], [1.0, 0.0], 0.2).unwrap();
        assert_eq!(c.len(), 11);
        for w in c.centers.windows(2) {
            assert!((dist(w[0], w[1]) - 0.1).abs() < 1e-12);
        }
        let one = path_ball_chain(&host, [0.0, 0.0], [0.0, 0.0], 0.2).unwrap();
        assert_eq!(one.len(), 1);
    }

    #[test]
    fn pinch_disconnects() {
        // two squares joined by a neck of width 0.2 < 2r
        let v = vec![
            [0.0, 0.0], [1.0, 0.0], [1.0, 0.4], [1.5, 0.4], [1.5, 0.0], [2.5, 0.0],
            [2.5, 1.0], [1.5, 1.0], [1.5, 0.6], [1.0, 0.6], [1.0, 1.0], [0.0, 1.0],
        ];
        let labels = vec![crate::geometry::BoundaryLabel::Accessible; v.len()];
        let d = Domain::from_polyline(v, labels, DomainConstants::new(0.05, 1.0), &DomainOptions::default()).unwrap();
        let host = PathHost::new(vec![&d]);
        assert!(matches!(
            path_ball_chain(&host, [0.5, 0.5], [2.0, 0.5], 0.15),
            Err(GeometryError::NotConnected { .. })
        ));
        assert!(path_ball_chain(&host, [0.5, 0.5], [2.0, 0.5], 0.05).is_ok());
    }
}
