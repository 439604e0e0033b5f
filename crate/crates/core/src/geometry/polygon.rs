//! Closed polylines with a bucketed segment index.
//!
//! Everything downstream (grid classification, cut-cell crossings, distance
//! sampling) goes through [`Polygon::row_crossings`] / [`Polygon::col_crossings`]
//! so that inside/outside decisions are made by a single parity rule.

use serde::{Deserialize, Serialize};

pub type Point = [f64; 2];

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

/// Distance from `p` to the segment `[a, b]`.
#[inline]
pub fn point_segment_dist(p: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let l2 = dot(ab, ab);
    if l2 == 0.0 {
        return dist(p, a);
    }
    let t = (dot(sub(p, a), ab) / l2).clamp(0.0, 1.0);
    dist(p, add(a, scale(ab, t)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    pub fn of_points(pts: &[Point]) -> Self {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for p in pts {
            for k in 0..2 {
                min[k] = min[k].min(p[k]);
                max[k] = max[k].max(p[k]);
            }
        }
        BBox { min, max }
    }

    pub fn union(&self, o: &BBox) -> BBox {
        BBox {
            min: [self.min[0].min(o.min[0]), self.min[1].min(o.min[1])],
            max: [self.max[0].max(o.max[0]), self.max[1].max(o.max[1])],
        }
    }

    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }
}

/// Uniform bucket grid over a set of segments; answers nearest-segment queries.
#[derive(Clone, Debug)]
pub struct SegmentIndex {
    segs: Vec<[Point; 2]>,
    bbox: BBox,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl SegmentIndex {
    pub fn new(segs: Vec<[Point; 2]>) -> Self {
        let pts: Vec<Point> = segs.iter().flat_map(|s| [s[0], s[1]]).collect();
        let bbox = if pts.is_empty() {
            BBox { min: [0.0; 2], max: [1.0; 2] }
        } else {
            BBox::of_points(&pts)
        };
        let n = segs.len().max(1) as f64;
        let area = (bbox.width() * bbox.height()).max(1e-300);
        let mut cell = (area / n).sqrt() * 2.0;
        let diam = bbox.diameter().max(1e-12);
        cell = cell.max(diam / 2048.0).min(diam.max(1e-12));
        let nx = ((bbox.width() / cell).ceil() as usize).max(1);
        let ny = ((bbox.height() / cell).ceil() as usize).max(1);
        let mut buckets = vec![Vec::new(); nx * ny];
        for (k, s) in segs.iter().enumerate() {
            let (i0, j0) = Self::cell_of(&bbox, cell, nx, ny, [s[0][0].min(s[1][0]), s[0][1].min(s[1][1])]);
            let (i1, j1) = Self::cell_of(&bbox, cell, nx, ny, [s[0][0].max(s[1][0]), s[0][1].max(s[1][1])]);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * nx + i].push(k as u32);
                }
            }
        }
        SegmentIndex { segs, bbox, cell, nx, ny, buckets }
    }

    fn cell_of(bbox: &BBox, cell: f64, nx: usize, ny: usize, p: Point) -> (usize, usize) {
        let fi = ((p[0] - bbox.min[0]) / cell).floor();
        let fj = ((p[1] - bbox.min[1]) / cell).floor();
        let i = fi.clamp(0.0, (nx - 1) as f64) as usize;
        let j = fj.clamp(0.0, (ny - 1) as f64) as usize;
        (i, j)
    }

    pub fn is_empty(&self) -> bool {
        self.segs.is_empty()
    }

    pub fn segments(&self) -> &[[Point; 2]] {
        &self.segs
    }

    /// Nearest segment distance and its index; `None` when the index is empty.
    pub fn nearest(&self, p: Point) -> Option<(f64, usize)> {
        if self.segs.is_empty() {
            return None;
        }
        let (ci, cj) = Self::cell_of(&self.bbox, self.cell, self.nx, self.ny, p);
        // every segment lies in the box, so `outside` is a lower bound too
        let ox = (self.bbox.min[0] - p[0]).max(0.0).max(p[0] - self.bbox.max[0]);
        let oy = (self.bbox.min[1] - p[1]).max(0.0).max(p[1] - self.bbox.max[1]);
        let outside = ox.hypot(oy);
        let mut best = f64::INFINITY;
        let mut best_k = 0usize;
        let max_ring = self.nx.max(self.ny);
        for r in 0..=max_ring {
            let i0 = ci as isize - r as isize;
            let i1 = ci as isize + r as isize;
            let j0 = cj as isize - r as isize;
            let j1 = cj as isize + r as isize;
            for j in j0..=j1 {
                if j < 0 || j >= self.ny as isize {
                    continue;
                }
                for i in i0..=i1 {
                    if i < 0 || i >= self.nx as isize {
                        continue;
                    }
                    if j != j0 && j != j1 && i != i0 && i != i1 {
                        continue;
                    }
                    for &k in &self.buckets[j as usize * self.nx + i as usize] {
                        let s = &self.segs[k as usize];
                        let d = point_segment_dist(p, s[0], s[1]);
                        if d < best || (d == best && (k as usize) < best_k) {
                            best = d;
                            best_k = k as usize;
                        }
                    }
                }
            }
            if best <= (r as f64 * self.cell).max(outside) {
                break;
            }
        }
        Some((best, best_k))
    }

    pub fn distance(&self, p: Point) -> f64 {
        self.nearest(p).map(|(d, _)| d).unwrap_or(f64::INFINITY)
    }
}

/// A crossing of a grid line with the polygon boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Crossing {
    /// Coordinate along the line (x for rows, y for columns).
    pub at: f64,
    /// Edge index (edge `k` joins vertex `k` to vertex `k+1`).
    pub edge: usize,
}

/// Simple closed polygon; vertices are stored counter-clockwise.
#[derive(Clone, Debug)]
pub struct Polygon {
    vertices: Vec<Point>,
    index: SegmentIndex,
    bbox: BBox,
}

impl Polygon {
    /// Builds the polygon; clockwise input is NOT reversed here (callers own the labels).
    pub fn new(vertices: Vec<Point>) -> Self {
        let n = vertices.len();
        let segs = (0..n).map(|k| [vertices[k], vertices[(k + 1) % n]]).collect();
        let bbox = BBox::of_points(&vertices);
        Polygon { index: SegmentIndex::new(segs), vertices, bbox }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn bbox(&self) -> BBox {
        self.bbox
    }

    pub fn edge(&self, k: usize) -> [Point; 2] {
        let n = self.vertices.len();
        [self.vertices[k % n], self.vertices[(k + 1) % n]]
    }

    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        let mut a = 0.0;
        for k in 0..n {
            let p = self.vertices[k];
            let q = self.vertices[(k + 1) % n];
            a += p[0] * q[1] - q[0] * p[1];
        }
        0.5 * a
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn perimeter(&self) -> f64 {
        (0..self.len()).map(|k| {
            let e = self.edge(k);
            dist(e[0], e[1])
        }).sum()
    }

    pub fn boundary_distance(&self, p: Point) -> f64 {
        self.index.distance(p)
    }

    pub fn nearest_edge(&self, p: Point) -> Option<(f64, usize)> {
        self.index.nearest(p)
    }

    /// Sorted crossings of the horizontal line `y` (half-open rule on vertices).
    pub fn row_crossings(&self, y: f64) -> Vec<Crossing> {
        self.line_crossings(y, 1)
    }

    /// Sorted crossings of the vertical line `x`.
    pub fn col_crossings(&self, x: f64) -> Vec<Crossing> {
        self.line_crossings(x, 0)
    }

    fn line_crossings(&self, c: f64, axis: usize) -> Vec<Crossing> {
        let other = 1 - axis;
        let n = self.vertices.len();
        let mut out = Vec::new();
        for k in 0..n {
            let a = self.vertices[k];
            let b = self.vertices[(k + 1) % n];
            let (ya, yb) = (a[axis], b[axis]);
            if (ya <= c && c < yb) || (yb <= c && c < ya) {
                let t = (c - ya) / (yb - ya);
                out.push(Crossing { at: a[other] + t * (b[other] - a[other]), edge: k });
            }
        }
        out.sort_by(|p, q| p.at.total_cmp(&q.at).then(p.edge.cmp(&q.edge)));
        out
    }

    /// Even-odd point membership (open set up to the half-open vertex rule).
    pub fn contains(&self, p: Point) -> bool {
        let cr = self.row_crossings(p[1]);
        cr.iter().filter(|c| c.at < p[0]).count() % 2 == 1
    }

    /// Membership in the closure, counting points within `tol` of the boundary.
    pub fn closure_contains(&self, p: Point, tol: f64) -> bool {
        self.contains(p) || self.boundary_distance(p) <= tol
    }

    /// Distance from `p` to the closed region.
    pub fn region_distance(&self, p: Point, tol: f64) -> f64 {
        if self.contains(p) {
            return 0.0;
        }
        let d = self.boundary_distance(p);
        if d <= tol {
            0.0
        } else {
            d
        }
    }

    /// Points along the boundary with spacing at most `step` (vertices included).
    pub fn boundary_samples(&self, step: f64) -> Vec<Point> {
        let mut out = Vec::new();
        for k in 0..self.len() {
            let [a, b] = self.edge(k);
            let l = dist(a, b);
            let m = ((l / step).ceil() as usize).max(1);
            for i in 0..m {
                let t = i as f64 / m as f64;
                out.push(add(a, scale(sub(b, a), t)));
            }
        }
        out
    }
}
