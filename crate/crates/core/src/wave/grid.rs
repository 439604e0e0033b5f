//! Uniform Cartesian grid with cut-cell classification against a polygonal boundary.

use super::WaveError;
use crate::geometry::{BBox, Crossing, Domain, Point};

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub h: f64,
    /// Exterior layers around the frame.
    pub pad: usize,
    /// Frame the grid is anchored to; defaults to the domain bounding box.
    /// Sharing a frame keeps perturbed domains on identical node sets.
    pub frame: Option<BBox>,
    pub c_cfl: f64,
    pub dt: Option<f64>,
    /// Store every k-th time level (the last level is always stored).
    pub store_every: usize,
}

impl GridSpec {
    pub fn new(h: f64) -> Self {
        GridSpec { h, pad: 2, frame: None, c_cfl: 0.5, dt: None, store_every: 1 }
    }

    /// `cells` intervals across the longer side of the domain box.
    pub fn cells(domain: &Domain, cells: usize) -> Self {
        let bb = domain.bbox();
        Self::new(bb.width().max(bb.height()) / cells.max(1) as f64)
    }
}

/// One of the four axis arms of an unknown node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Arm {
    Node(u32),
    /// Cut arm of relative length θ ∈ (0, 1] ending at boundary point `point`.
    Boundary { theta: f64, point: u32 },
}

impl Arm {
    pub fn theta(&self) -> f64 {
        match *self {
            Arm::Node(_) => 1.0,
            Arm::Boundary { theta, .. } => theta,
        }
    }

    pub fn node(&self) -> Option<usize> {
        match *self {
            Arm::Node(k) => Some(k as usize),
            Arm::Boundary { .. } => None,
        }
    }
}

pub const EAST: usize = 0;
pub const WEST: usize = 1;
pub const NORTH: usize = 2;
pub const SOUTH: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub i: usize,
    pub j: usize,
    pub p: Point,
    /// East, west, north, south.
    pub arms: [Arm; 4],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryPoint {
    pub p: Point,
    pub edge: usize,
}

#[derive(Clone, Debug)]
pub struct Grid {
    pub origin: Point,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    index: Vec<u32>,
    pub nodes: Vec<Node>,
    pub boundary_points: Vec<BoundaryPoint>,
}

const OUTSIDE: u32 = u32::MAX;
const THETA_MIN: f64 = 1e-9;

fn parity_before(cr: &[Crossing], x: f64) -> bool {
    cr.iter().take_while(|c| c.at < x).count() % 2 == 1
}

impl Grid {
    pub fn build(domain: &Domain, spec: &GridSpec) -> Result<Grid, WaveError> {
        let h = spec.h;
        if !(h > 0.0 && h.is_finite()) {
            return Err(WaveError::InvalidParameter(format!("h = {h}")));
        }
        let frame = spec.frame.unwrap_or_else(|| domain.bbox());
        let pad = spec.pad as f64 + 0.5;
        let origin = [frame.min[0] - pad * h, frame.min[1] - pad * h];
        let nx = (frame.width() / h - 1e-9).ceil() as usize + 2 * spec.pad + 2;
        let ny = (frame.height() / h - 1e-9).ceil() as usize + 2 * spec.pad + 2;
        if nx.saturating_mul(ny) > 50_000_000 {
            return Err(WaveError::InvalidParameter(format!("grid {nx}×{ny} too large")));
        }
        let poly = domain.boundary();
        let dbb = domain.bbox();
        if dbb.min[0] < origin[0] || dbb.min[1] < origin[1] || dbb.max[0] > origin[0] + (nx - 1) as f64 * h
            || dbb.max[1] > origin[1] + (ny - 1) as f64 * h
        {
            return Err(WaveError::NonconformingBoundary("domain exceeds the grid frame".into()));
        }
        let xs: Vec<f64> = (0..nx).map(|i| origin[0] + i as f64 * h).collect();
        let ys: Vec<f64> = (0..ny).map(|j| origin[1] + j as f64 * h).collect();
        let rows: Vec<Vec<Crossing>> = ys.iter().map(|&y| poly.row_crossings(y)).collect();
        let cols: Vec<Vec<Crossing>> = xs.iter().map(|&x| poly.col_crossings(x)).collect();

        let mut index = vec![OUTSIDE; nx * ny];
        let mut count = 0u32;
        for j in 0..ny {
            for i in 0..nx {
                if parity_before(&rows[j], xs[i]) {
                    index[j * nx + i] = count;
                    count += 1;
                }
            }
        }
        if count == 0 {
            return Err(WaveError::NonconformingBoundary("no interior grid nodes".into()));
        }
        let mut nodes = Vec::with_capacity(count as usize);
        let mut bpts: Vec<BoundaryPoint> = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                if index[j * nx + i] == OUTSIDE {
                    continue;
                }
                let p = [xs[i], ys[j]];
                let mut arms = [Arm::Node(0); 4];
                for (dir, arm) in arms.iter_mut().enumerate() {
                    let (cr, c, sgn, ni, nj) = match dir {
                        EAST => (&rows[j], xs[i], 1.0, i as isize + 1, j as isize),
                        WEST => (&rows[j], xs[i], -1.0, i as isize - 1, j as isize),
                        NORTH => (&cols[i], ys[j], 1.0, i as isize, j as isize + 1),
                        _ => (&cols[i], ys[j], -1.0, i as isize, j as isize - 1),
                    };
                    let hits: Vec<&Crossing> = cr
                        .iter()
                        .filter(|x| {
                            let d = sgn * (x.at - c);
                            d > 0.0 && d <= h || (d == 0.0 && sgn < 0.0)
                        })
                        .collect();
                    let inb = ni >= 0 && nj >= 0 && (ni as usize) < nx && (nj as usize) < ny;
                    let nb = if inb { index[nj as usize * nx + ni as usize] } else { OUTSIDE };
                    if hits.is_empty() {
                        if nb == OUTSIDE {
                            return Err(WaveError::NonconformingBoundary(format!(
                                "node ({i}, {j}) has an exterior neighbour without a boundary crossing"
                            )));
                        }
                        *arm = Arm::Node(nb);
                        continue;
                    }
                    if nb != OUTSIDE {
                        return Err(WaveError::NonconformingBoundary(format!(
                            "boundary feature thinner than h between node ({i}, {j}) and its neighbour"
                        )));
                    }
                    let first = hits
                        .iter()
                        .min_by(|a, b| (sgn * (a.at - c)).total_cmp(&(sgn * (b.at - c))))
                        .unwrap();
                    let theta = ((sgn * (first.at - c)) / h).max(THETA_MIN);
                    let bp = if dir < 2 { [first.at, ys[j]] } else { [xs[i], first.at] };
                    bpts.push(BoundaryPoint { p: bp, edge: first.edge });
                    *arm = Arm::Boundary { theta, point: (bpts.len() - 1) as u32 };
                }
                nodes.push(Node { i, j, p, arms });
            }
        }
        Ok(Grid { origin, h, nx, ny, index, nodes, boundary_points: bpts })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_at(&self, i: isize, j: isize) -> Option<usize> {
        if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
            return None;
        }
        let k = self.index[j as usize * self.nx + i as usize];
        (k != OUTSIDE).then_some(k as usize)
    }

    pub fn position(&self, i: usize, j: usize) -> Point {
        [self.origin[0] + i as f64 * self.h, self.origin[1] + j as f64 * self.h]
    }

    /// Cut-cell quadrature weights w = ½(θ_E+θ_W)·½(θ_N+θ_S)·h².
    pub fn weights(&self) -> Vec<f64> {
        let h2 = self.h * self.h;
        self.nodes
            .iter()
            .map(|n| {
                let wx = 0.5 * (n.arms[EAST].theta() + n.arms[WEST].theta());
                let wy = 0.5 * (n.arms[NORTH].theta() + n.arms[SOUTH].theta());
                wx * wy * h2
            })
            .collect()
    }

    /// Expand interior values to the full nx×ny array, `fill` outside.
    pub fn to_full(&self, values: &[f64], fill: f64) -> Vec<f64> {
        let mut out = vec![fill; self.nx * self.ny];
        for (n, v) in self.nodes.iter().zip(values) {
            out[n.j * self.nx + n.i] = *v;
        }
        out
    }

    /// Cubic Lagrange weights (16 nodes) at `q`, or None when the block is not interior.
    pub fn bicubic(&self, q: Point) -> Option<[(usize, f64); 16]> {
        let fx = (q[0] - self.origin[0]) / self.h;
        let fy = (q[1] - self.origin[1]) / self.h;
        let (i0, j0) = (fx.floor() as isize, fy.floor() as isize);
        let (tx, ty) = (fx - i0 as f64, fy - j0 as f64);
        let lw = |t: f64| {
            [
                -t * (t - 1.0) * (t - 2.0) / 6.0,
                (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
                -(t + 1.0) * t * (t - 2.0) / 2.0,
                (t + 1.0) * t * (t - 1.0) / 6.0,
            ]
        };
        let (wx, wy) = (lw(tx), lw(ty));
        let mut out = [(0usize, 0.0f64); 16];
        for b in 0..4 {
            for a in 0..4 {
                let k = self.node_at(i0 - 1 + a as isize, j0 - 1 + b as isize)?;
                out[b * 4 + a] = (k, wx[a] * wy[b]);
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DomainConstants, DomainOptions};

    #[test]
    fn rectangle_walls_are_mid_cell() {
        let d = Domain::rectangle([0.0, 0.0], [1.0, 1.0], 2, DomainConstants::new(0.1, 1.0), &DomainOptions::default())
            .unwrap();
        let g = Grid::build(&d, &GridSpec::new(0.1)).unwrap();
        assert_eq!(g.len(), 100);
        for n in &g.nodes {
            for a in &n.arms {
                if let Arm::Boundary { theta, .. } = a {
                    assert!((theta - 0.5).abs() < 1e-9);
                }
            }
        }
        // dual cells stop θh/2 short of each wall: (1 − h/2)² for θ = ½
        let area: f64 = g.weights().iter().sum();
        assert!((area - 0.95f64.powi(2)).abs() < 1e-12);
    }

    #[test]
    fn bicubic_reproduces_cubics() {
        let d = Domain::rectangle([0.0, 0.0], [1.0, 1.0], 2, DomainConstants::new(0.1, 1.0), &DomainOptions::default())
            .unwrap();
        let g = Grid::build(&d, &GridSpec::new(0.05)).unwrap();
        let f = |p: Point| p[0].powi(3) - 2.0 * p[0] * p[1] * p[1] + p[1];
        let v: Vec<f64> = g.nodes.iter().map(|n| f(n.p)).collect();
        let q = [0.437, 0.611];
        let w = g.bicubic(q).unwrap();
        let approx: f64 = w.iter().map(|(k, c)| c * v[*k]).sum();
        assert!((approx - f(q)).abs() < 1e-12);
        assert!(g.bicubic([0.01, 0.5]).is_none());
    }

    #[test]
    fn disk_area() {
        let c = DomainConstants::new(0.25, 1.0);
        let d = Domain::polar([0.0, 0.0], |_| 1.0, 512, |_| true, c, &DomainOptions::default()).unwrap();
        let g = Grid::build(&d, &GridSpec::new(0.02)).unwrap();
        let area: f64 = g.weights().iter().sum();
        let per = d.boundary().perimeter();
        assert!(area < d.area() && area > d.area() - per * 0.02, "{area}");
    }
}
