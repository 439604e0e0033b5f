use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::chart::Chart;
use super::polygon::{add, dist, norm, point_segment_dist, scale, sub, BBox, Point, Polygon, SegmentIndex};
use super::GeometryError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryLabel {
    Accessible,
    Inaccessible,
}

/// A-priori constants of the domain class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainConstants {
    pub rho0: f64,
    pub e: f64,
    /// Volume constant; `None` derives the smallest admissible value from the area.
    pub m: Option<f64>,
}

impl DomainConstants {
    pub fn new(rho0: f64, e: f64) -> Self {
        DomainConstants { rho0, e, m: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SigmaSpec {
    /// Largest run of accessible edges at distance ≥ ρ₀ from the inaccessible part.
    Auto,
    /// Explicit edge indices (must satisfy the same distance requirement).
    Edges(Vec<usize>),
}

#[derive(Clone, Debug)]
pub struct DomainOptions {
    /// Number of charts derived from a polyline; 0 disables the atlas.
    pub chart_count: usize,
    /// Samples per derived chart (forced odd).
    pub chart_samples: usize,
    /// Derived chart radius; defaults to ρ₀/E.
    pub chart_radius: Option<f64>,
    /// Relative slack on the chart norm bound Eρ₀.
    pub slack: f64,
    /// Tolerance (relative to ρ₀) on φ(0) = 0 and ρ₀|∇φ(0)| = 0.
    pub origin_tol: f64,
    pub sigma: SigmaSpec,
}

impl Default for DomainOptions {
    fn default() -> Self {
        DomainOptions {
            chart_count: 0,
            chart_samples: 41,
            chart_radius: None,
            slack: 1e-6,
            origin_tol: 1e-3,
            sigma: SigmaSpec::Auto,
        }
    }
}

/// Bounded planar domain with an accessible / inaccessible boundary partition.
#[derive(Clone, Debug)]
pub struct Domain {
    pub dim: usize,
    pub rho0: f64,
    pub e: f64,
    pub m: f64,
    boundary: Polygon,
    labels: Vec<BoundaryLabel>,
    charts: Vec<Chart>,
    sigma: Vec<usize>,
    p0: Point,
}

/// Self-describing export of a domain with all of its a-priori constants.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DomainExport {
    pub dim: usize,
    pub rho0: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub area: f64,
    pub sigma_length: f64,
    pub p0: Point,
    pub sigma_edges: Vec<usize>,
    pub vertices: Vec<Point>,
    pub labels: Vec<BoundaryLabel>,
    pub charts: Vec<Chart>,
}

fn check_chart(c: &Chart, rho0: f64, e: f64, slack: f64, origin_tol: f64) -> Result<(), GeometryError> {
    let n = c.samples.len();
    if n < 3 || n % 2 == 0 || !(c.radius > 0.0) {
        return Err(GeometryError::ChartViolation {
            chart: c.id,
            term: "sampling".into(),
            value: n as f64,
            bound: 3.0,
        });
    }
    if c.samples.iter().any(|v| !v.is_finite()) {
        return Err(GeometryError::ChartViolation { chart: c.id, term: "sup".into(), value: f64::INFINITY, bound: e * rho0 });
    }
    let mid = c.centre_index();
    if c.samples[mid].abs() > origin_tol * rho0 {
        return Err(GeometryError::ChartViolation {
            chart: c.id,
            term: "origin value".into(),
            value: c.samples[mid].abs(),
            bound: origin_tol * rho0,
        });
    }
    let d = c.derivative_samples();
    if rho0 * d[mid].abs() > origin_tol * rho0 {
        return Err(GeometryError::ChartViolation {
            chart: c.id,
            term: "origin gradient".into(),
            value: rho0 * d[mid].abs(),
            bound: origin_tol * rho0,
        });
    }
    let nrm = c.c11_norm(rho0);
    let bound = e * rho0;
    if nrm.total() > bound * (1.0 + slack) {
        return Err(GeometryError::ChartViolation {
            chart: c.id,
            term: format!(
                "C11 norm {:.6} (sup {:.6} + gradient {:.6} + hessian {:.6}; dominant {})",
                nrm.total(),
                nrm.sup,
                nrm.grad,
                nrm.hess,
                nrm.dominant()
            ),
            value: nrm.total(),
            bound,
        });
    }
    Ok(())
}

/// Validates sampled charts and closes them into a domain.
///
/// A single chart is closed by the walls of its cylinder `|x'| < r, x_n < ρ₀`
/// (walls count as accessible). Three or more charts are read as a closed loop
/// in the given order and joined at the midpoints between consecutive origins.
pub fn build_graph_domain(
    charts: Vec<Chart>,
    rho0: f64,
    e: f64,
    opts: &DomainOptions,
) -> Result<Domain, GeometryError> {
    if !(rho0 > 0.0) || !(e > 0.0) {
        return Err(GeometryError::InvalidParameter(format!("rho0 = {rho0}, E = {e}")));
    }
    if charts.is_empty() {
        return Err(GeometryError::DegenerateDomain("no charts".into()));
    }
    for c in &charts {
        check_chart(c, rho0, e, opts.slack, opts.origin_tol)?;
    }
    let (vertices, labels) = if charts.len() == 1 {
        let c = &charts[0];
        let mut v = c.world_samples();
        let mut l = vec![if c.accessible { BoundaryLabel::Accessible } else { BoundaryLabel::Inaccessible }; v.len() - 1];
        let top = rho0.max(c.samples.iter().fold(0.0f64, |m, s| m.max(*s)) + 0.5 * rho0);
        v.push(c.to_world([c.radius, top]));
        v.push(c.to_world([-c.radius, top]));
        l.extend([BoundaryLabel::Accessible; 3]);
        (v, l)
    } else if charts.len() >= 3 {
        join_loop(&charts, rho0)?
    } else {
        return Err(GeometryError::OpenAtlas { gap: f64::INFINITY });
    };
    let poly = Polygon::new(vertices);
    if poly.signed_area() <= 0.0 {
        return Err(GeometryError::DegenerateDomain("charts do not enclose a positively oriented region".into()));
    }
    Domain::finish(poly, labels, charts, DomainConstants::new(rho0, e), opts)
}

fn join_loop(charts: &[Chart], rho0: f64) -> Result<(Vec<Point>, Vec<BoundaryLabel>), GeometryError> {
    let n = charts.len();
    let mut verts = Vec::new();
    let mut labels = Vec::new();
    let mut ends: Vec<(Point, Point)> = Vec::with_capacity(n);
    for k in 0..n {
        let c = &charts[k];
        let prev = &charts[(k + n - 1) % n];
        let next = &charts[(k + 1) % n];
        let mid_a = scale([prev.origin[0] + c.origin[0], prev.origin[1] + c.origin[1]], 0.5);
        let mid_b = scale([c.origin[0] + next.origin[0], c.origin[1] + next.origin[1]], 0.5);
        let ua = c.to_local(mid_a)[0];
        let ub = c.to_local(mid_b)[0];
        if !(ua < 0.0 && ub > 0.0 && -ua <= c.radius * (1.0 + 1e-9) && ub <= c.radius * (1.0 + 1e-9)) {
            return Err(GeometryError::OpenAtlas { gap: dist(c.origin, next.origin) });
        }
        let start = c.to_world([ua, c.eval(ua)]);
        let end = c.to_world([ub, c.eval(ub)]);
        ends.push((start, end));
        let label = if c.accessible { BoundaryLabel::Accessible } else { BoundaryLabel::Inaccessible };
        verts.push(start);
        for j in 0..c.samples.len() {
            let u = c.abscissa(j);
            if u > ua && u < ub {
                verts.push(c.to_world([u, c.samples[j]]));
            }
        }
        let added = verts.len() - labels.len();
        labels.extend(std::iter::repeat(label).take(added));
    }
    for k in 0..n {
        let gap = dist(ends[k].1, ends[(k + 1) % n].0);
        if gap > 0.05 * rho0 {
            return Err(GeometryError::OpenAtlas { gap });
        }
    }
    Ok((verts, labels))
}

impl Domain {
    /// Builds a domain from a polyline with one label per edge
    /// (edge `k` joins vertex `k` and `k+1`). Clockwise input is reversed.
    pub fn from_polyline(
        vertices: Vec<Point>,
        labels: Vec<BoundaryLabel>,
        constants: DomainConstants,
        opts: &DomainOptions,
    ) -> Result<Domain, GeometryError> {
        if vertices.len() < 3 || labels.len() != vertices.len() {
            return Err(GeometryError::DegenerateDomain(format!(
                "{} vertices, {} labels",
                vertices.len(),
                labels.len()
            )));
        }
        if !(constants.rho0 > 0.0) || !(constants.e > 0.0) {
            return Err(GeometryError::InvalidParameter(format!("rho0 = {}, E = {}", constants.rho0, constants.e)));
        }
        let mut poly = Polygon::new(vertices);
        let mut labels = labels;
        if poly.area() == 0.0 {
            return Err(GeometryError::DegenerateDomain("zero area".into()));
        }
        if poly.signed_area() < 0.0 {
            let n = poly.len();
            let mut v = poly.vertices().to_vec();
            v.reverse();
            // reversed edge k joins old vertices n-1-k and n-2-k, i.e. old edge n-2-k
            labels = (0..n).map(|k| labels[(2 * n - 2 - k) % n]).collect();
            poly = Polygon::new(v);
        }
        let charts = if opts.chart_count > 0 {
            let radius = opts.chart_radius.unwrap_or(constants.rho0 / constants.e);
            derive_atlas(&poly, &labels, opts.chart_count, radius, opts.chart_samples)?
        } else {
            Vec::new()
        };
        for c in &charts {
            check_chart(c, constants.rho0, constants.e, opts.slack, opts.origin_tol)?;
        }
        Domain::finish(poly, labels, charts, constants, opts)
    }

    /// Star-shaped domain `r < r(θ)` around `center`, sampled at `n` equal angles.
    pub fn polar<R, A>(
        center: Point,
        radius: R,
        n: usize,
        accessible: A,
        constants: DomainConstants,
        opts: &DomainOptions,
    ) -> Result<Domain, GeometryError>
    where
        R: Fn(f64) -> f64,
        A: Fn(f64) -> bool,
    {
        let verts: Vec<Point> = (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                let r = radius(t);
                [center[0] + r * t.cos(), center[1] + r * t.sin()]
            })
            .collect();
        let labels = (0..n)
            .map(|k| {
                let t = 2.0 * PI * (k as f64 + 0.5) / n as f64;
                if accessible(t) {
                    BoundaryLabel::Accessible
                } else {
                    BoundaryLabel::Inaccessible
                }
            })
            .collect();
        Domain::from_polyline(verts, labels, constants, opts)
    }

    /// Axis-aligned rectangle with `per_side` edges on each side, all accessible.
    pub fn rectangle(
        min: Point,
        max: Point,
        per_side: usize,
        constants: DomainConstants,
        opts: &DomainOptions,
    ) -> Result<Domain, GeometryError> {
        let corners = [min, [max[0], min[1]], max, [min[0], max[1]]];
        let m = per_side.max(1);
        let mut v = Vec::with_capacity(4 * m);
        for s in 0..4 {
            let a = corners[s];
            let b = corners[(s + 1) % 4];
            for i in 0..m {
                let t = i as f64 / m as f64;
                v.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
            }
        }
        let labels = vec![BoundaryLabel::Accessible; v.len()];
        Domain::from_polyline(v, labels, constants, opts)
    }

    fn finish(
        boundary: Polygon,
        labels: Vec<BoundaryLabel>,
        charts: Vec<Chart>,
        constants: DomainConstants,
        opts: &DomainOptions,
    ) -> Result<Domain, GeometryError> {
        let rho0 = constants.rho0;
        let area = boundary.area();
        let m = match constants.m {
            Some(m) => {
                if area > m * rho0 * rho0 * (1.0 + 1e-12) {
                    return Err(GeometryError::VolumeBound { area, bound: m * rho0 * rho0 });
                }
                m
            }
            None => area / (rho0 * rho0),
        };
        let (sigma, p0) = select_sigma(&boundary, &labels, rho0, &opts.sigma)?;
        Ok(Domain { dim: 2, rho0, e: constants.e, m, boundary, labels, charts, sigma, p0 })
    }

    pub fn boundary(&self) -> &Polygon {
        &self.boundary
    }

    pub fn labels(&self) -> &[BoundaryLabel] {
        &self.labels
    }

    pub fn label(&self, edge: usize) -> BoundaryLabel {
        self.labels[edge % self.labels.len()]
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    /// Edge indices of the measurement portion Σ, in boundary order.
    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn p0(&self) -> Point {
        self.p0
    }

    pub fn area(&self) -> f64 {
        self.boundary.area()
    }

    pub fn bbox(&self) -> BBox {
        self.boundary.bbox()
    }

    pub fn sigma_length(&self) -> f64 {
        self.sigma.iter().map(|&k| {
            let e = self.boundary.edge(k);
            dist(e[0], e[1])
        }).sum()
    }

    pub fn constants(&self) -> DomainConstants {
        DomainConstants { rho0: self.rho0, e: self.e, m: Some(self.m) }
    }

    /// Unit inward normal at vertex `k` (from its two neighbours).
    pub fn vertex_normal(&self, k: usize) -> Point {
        let v = self.boundary.vertices();
        let n = v.len();
        let t = sub(v[(k + 1) % n], v[(k + n - 1) % n]);
        let l = norm(t);
        [-t[1] / l, t[0] / l]
    }

    /// Moves every vertex whose two adjacent edges are inaccessible by
    /// `disp(vertex)` along the inward vertex normal; Γ^(a) and Σ are kept
    /// bit-for-bit.
    pub fn perturb_inaccessible<F>(&self, disp: F, opts: &DomainOptions) -> Result<Domain, GeometryError>
    where
        F: Fn(Point) -> f64,
    {
        let v = self.boundary.vertices();
        let n = v.len();
        let moved: Vec<Point> = (0..n)
            .map(|k| {
                let before = self.labels[(k + n - 1) % n];
                let after = self.labels[k];
                if before == BoundaryLabel::Inaccessible && after == BoundaryLabel::Inaccessible {
                    let d = disp(v[k]);
                    if d == 0.0 {
                        v[k]
                    } else {
                        let nn = self.vertex_normal(k);
                        [v[k][0] + d * nn[0], v[k][1] + d * nn[1]]
                    }
                } else {
                    v[k]
                }
            })
            .collect();
        let mut o = opts.clone();
        o.sigma = SigmaSpec::Edges(self.sigma.clone());
        Domain::from_polyline(moved, self.labels.clone(), DomainConstants { m: None, ..self.constants() }, &o)
    }

    pub fn export(&self) -> DomainExport {
        DomainExport {
            dim: self.dim,
            rho0: self.rho0,
            e: self.e,
            m: self.m,
            area: self.area(),
            sigma_length: self.sigma_length(),
            p0: self.p0,
            sigma_edges: self.sigma.clone(),
            vertices: self.boundary.vertices().to_vec(),
            labels: self.labels.clone(),
            charts: self.charts.clone(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.export()).expect("domain export is always representable")
    }

    /// Rebuilds a domain from its export (charts are re-validated).
    pub fn from_export(x: &DomainExport, opts: &DomainOptions) -> Result<Domain, GeometryError> {
        let mut o = opts.clone();
        o.sigma = SigmaSpec::Edges(x.sigma_edges.clone());
        o.chart_count = 0;
        let d = Domain::from_polyline(
            x.vertices.clone(),
            x.labels.clone(),
            DomainConstants { rho0: x.rho0, e: x.e, m: Some(x.m) },
            &o,
        )?;
        for c in &x.charts {
            check_chart(c, x.rho0, x.e, opts.slack, opts.origin_tol)?;
        }
        Ok(Domain { charts: x.charts.clone(), ..d })
    }
}

/// Charts centred at vertices spread evenly in arclength.
fn derive_atlas(
    poly: &Polygon,
    labels: &[BoundaryLabel],
    count: usize,
    radius: f64,
    samples: usize,
) -> Result<Vec<Chart>, GeometryError> {
    let n = poly.len();
    let mut arc = vec![0.0; n + 1];
    for k in 0..n {
        let e = poly.edge(k);
        arc[k + 1] = arc[k] + dist(e[0], e[1]);
    }
    let total = arc[n];
    let samples = if samples % 2 == 0 { samples + 1 } else { samples.max(3) };
    let mut out = Vec::with_capacity(count);
    let mut k = 0usize;
    for c in 0..count {
        let target = total * c as f64 / count as f64;
        while k + 1 < n && arc[k + 1] <= target {
            k += 1;
        }
        let vk = if k + 1 < n && (arc[k + 1] - target) < (target - arc[k]) { k + 1 } else { k };
        out.push(derive_chart(poly, labels, vk, radius, samples, c)?);
    }
    Ok(out)
}

/// Reads the polyline around vertex `k` as a graph over its tangent line.
pub fn derive_chart(
    poly: &Polygon,
    labels: &[BoundaryLabel],
    k: usize,
    radius: f64,
    samples: usize,
    id: usize,
) -> Result<Chart, GeometryError> {
    let v = poly.vertices();
    let n = v.len();
    let t = sub(v[(k + 1) % n], v[(k + n - 1) % n]);
    let angle = t[1].atan2(t[0]);
    let mut chart = Chart { id, origin: v[k], angle, radius, samples: vec![0.0; samples], accessible: true };
    // walk both ways collecting local coordinates
    let mut fwd = vec![[0.0, 0.0]];
    let mut accessible = true;
    let mut j = k;
    for _ in 0..n {
        if labels[j] == BoundaryLabel::Inaccessible {
            accessible = false;
        }
        j = (j + 1) % n;
        let p = chart.to_local(v[j]);
        if p[0] <= fwd.last().unwrap()[0] {
            return Err(GeometryError::ChartViolation { chart: id, term: "graph".into(), value: p[0], bound: radius });
        }
        fwd.push(p);
        if p[0] >= radius {
            break;
        }
    }
    let mut bwd = vec![[0.0, 0.0]];
    let mut j = k;
    for _ in 0..n {
        j = (j + n - 1) % n;
        if labels[j] == BoundaryLabel::Inaccessible {
            accessible = false;
        }
        let p = chart.to_local(v[j]);
        if p[0] >= bwd.last().unwrap()[0] {
            return Err(GeometryError::ChartViolation { chart: id, term: "graph".into(), value: p[0], bound: radius });
        }
        bwd.push(p);
        if p[0] <= -radius {
            break;
        }
    }
    if fwd.last().unwrap()[0] < radius || bwd.last().unwrap()[0] > -radius {
        return Err(GeometryError::ChartViolation { chart: id, term: "graph extent".into(), value: radius, bound: radius });
    }
    bwd.reverse();
    let pts: Vec<Point> = bwd.into_iter().chain(fwd.into_iter().skip(1)).collect();
    let mut seg = 0;
    for s in 0..samples {
        let u = chart.abscissa(s);
        while seg + 2 < pts.len() && pts[seg + 1][0] < u {
            seg += 1;
        }
        let a = pts[seg];
        let b = pts[seg + 1];
        let w = (u - a[0]) / (b[0] - a[0]);
        chart.samples[s] = a[1] + w * (b[1] - a[1]);
    }
    chart.samples[samples / 2] = 0.0;
    chart.accessible = accessible;
    Ok(chart)
}

fn select_sigma(
    poly: &Polygon,
    labels: &[BoundaryLabel],
    rho0: f64,
    spec: &SigmaSpec,
) -> Result<(Vec<usize>, Point), GeometryError> {
    let n = poly.len();
    let inacc: Vec<[Point; 2]> = (0..n)
        .filter(|&k| labels[k] == BoundaryLabel::Inaccessible)
        .map(|k| poly.edge(k))
        .collect();
    let gi = SegmentIndex::new(inacc);
    let vdist: Vec<f64> = poly.vertices().iter().map(|&p| gi.distance(p)).collect();
    let admissible = |k: usize| {
        labels[k] == BoundaryLabel::Accessible
            && vdist[k] >= rho0 * (1.0 - 1e-12)
            && vdist[(k + 1) % n] >= rho0 * (1.0 - 1e-12)
    };
    let sigma: Vec<usize> = match spec {
        SigmaSpec::Edges(e) => {
            if e.is_empty() {
                return Err(GeometryError::EmptyAccessiblePortion);
            }
            for &k in e {
                if k >= n || !admissible(k) {
                    return Err(GeometryError::EmptyAccessiblePortion);
                }
            }
            e.clone()
        }
        SigmaSpec::Auto => {
            let ok: Vec<bool> = (0..n).map(admissible).collect();
            if !ok.iter().any(|&b| b) {
                return Err(GeometryError::EmptyAccessiblePortion);
            }
            if ok.iter().all(|&b| b) {
                (0..n).collect()
            } else {
                // longest cyclic run, earliest start on ties
                let start = (0..n).find(|&k| !ok[k]).unwrap();
                let mut best: (usize, usize) = (0, 0);
                let mut cur_start = 0;
                let mut cur_len = 0;
                for step in 1..=n {
                    let k = (start + step) % n;
                    if ok[k] {
                        if cur_len == 0 {
                            cur_start = k;
                        }
                        cur_len += 1;
                        if cur_len > best.1 {
                            best = (cur_start, cur_len);
                        }
                    } else {
                        cur_len = 0;
                    }
                }
                (0..best.1).map(|i| (best.0 + i) % n).collect()
            }
        }
    };
    // Σ must contain ∂Ω ∩ B_ρ₀(P₀): pick P₀ farthest from the rest of the boundary
    let mut in_sigma = vec![false; n];
    for &k in &sigma {
        in_sigma[k] = true;
    }
    let rest: Vec<[Point; 2]> = (0..n).filter(|&k| !in_sigma[k]).map(|k| poly.edge(k)).collect();
    let ri = SegmentIndex::new(rest);
    let mut best = (f64::NEG_INFINITY, poly.vertices()[sigma[0]]);
    for &k in &sigma {
        let [a, b] = poly.edge(k);
        let m = ((dist(a, b) / (0.125 * rho0)).ceil() as usize).max(1);
        for i in 0..m {
            let p = add(a, scale(sub(b, a), i as f64 / m as f64));
            let d = ri.distance(p);
            if d > best.0 {
                best = (d, p);
            }
        }
    }
    if best.0 < rho0 {
        return Err(GeometryError::EmptyAccessiblePortion);
    }
    Ok((sigma, best.1))
}

/// Reads charts from CSV with columns `chart_id, u1, phi` and optional
/// `origin_x, origin_y, angle, accessible` (frame taken from a chart's first row).
pub fn read_charts_csv<R: std::io::Read>(reader: R) -> Result<Vec<Chart>, GeometryError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| GeometryError::ChartCsv { line: 1, message: e.to_string() })?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (ci, cu, cp) = match (col("chart_id"), col("u1"), col("phi")) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => {
            return Err(GeometryError::ChartCsv { line: 1, message: "need columns chart_id, u1, phi".into() })
        }
    };
    let (cx, cy, ca, cacc) = (col("origin_x"), col("origin_y"), col("angle"), col("accessible"));
    struct Acc {
        id: usize,
        origin: Point,
        angle: f64,
        accessible: bool,
        us: Vec<f64>,
        phis: Vec<f64>,
    }
    let mut acc: Vec<Acc> = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let line = row + 2;
        let rec = rec.map_err(|e| GeometryError::ChartCsv { line, message: e.to_string() })?;
        let num = |i: usize| -> Result<f64, GeometryError> {
            rec.get(i)
                .unwrap_or("")
                .parse::<f64>()
                .map_err(|e| GeometryError::ChartCsv { line, message: format!("column {}: {e}", headers.get(i).unwrap_or("?")) })
        };
        let id = rec
            .get(ci)
            .unwrap_or("")
            .parse::<usize>()
            .map_err(|e| GeometryError::ChartCsv { line, message: format!("chart_id: {e}") })?;
        let u = num(cu)?;
        let phi = num(cp)?;
        if acc.last().map(|a| a.id) != Some(id) {
            if acc.iter().any(|a| a.id == id) {
                return Err(GeometryError::ChartCsv { line, message: format!("chart {id} rows are not contiguous") });
            }
            let origin = [cx.map(num).transpose()?.unwrap_or(0.0), cy.map(num).transpose()?.unwrap_or(0.0)];
            let angle = ca.map(num).transpose()?.unwrap_or(0.0);
            let accessible = match cacc.and_then(|i| rec.get(i)) {
                None | Some("") => true,
                Some(s) => matches!(s, "1" | "true" | "yes" | "accessible"),
            };
            acc.push(Acc { id, origin, angle, accessible, us: Vec::new(), phis: Vec::new() });
        }
        let a = acc.last_mut().unwrap();
        a.us.push(u);
        a.phis.push(phi);
    }
    let mut charts = Vec::with_capacity(acc.len());
    for a in acc {
        let n = a.us.len();
        if n < 3 || n % 2 == 0 {
            return Err(GeometryError::ChartCsv { line: 0, message: format!("chart {} needs an odd number ≥ 3 of samples", a.id) });
        }
        let r = a.us[n - 1];
        let h = 2.0 * r / (n - 1) as f64;
        for (j, u) in a.us.iter().enumerate() {
            if (u - (-r + j as f64 * h)).abs() > 1e-9 * r.max(1.0) {
                return Err(GeometryError::ChartCsv {
                    line: 0,
                    message: format!("chart {} samples are not a uniform symmetric grid", a.id),
                });
            }
        }
        charts.push(Chart { id: a.id, origin: a.origin, angle: a.angle, radius: r, samples: a.phis, accessible: a.accessible });
    }
    Ok(charts)
}

pub fn read_charts_file(path: &Path) -> Result<Vec<Chart>, GeometryError> {
    let f = std::fs::File::open(path).map_err(|e| GeometryError::ChartCsv { line: 0, message: format!("{}: {e}", path.display()) })?;
    read_charts_csv(f)
}

/// Largest distance from a Σ point to the inaccessible boundary is at most
/// this; used by callers that want a quick sanity check on Σ.
pub fn sigma_clearance(d: &Domain) -> f64 {
    let n = d.boundary.len();
    let inacc: Vec<[Point; 2]> = (0..n)
        .filter(|&k| d.labels[k] == BoundaryLabel::Inaccessible)
        .map(|k| d.boundary.edge(k))
        .collect();
    let mut m = f64::INFINITY;
    for &k in &d.sigma {
        let e = d.boundary.edge(k);
        for s in &inacc {
            m = m.min(point_segment_dist(e[0], s[0], s[1])).min(point_segment_dist(e[1], s[0], s[1]));
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_chart(id: usize, r: f64, n: usize, f: impl Fn(f64) -> f64) -> Chart {
        let h = 2.0 * r / (n - 1) as f64;
        Chart { id, origin: [0.0, 0.0], angle: 0.0, radius: r, samples: (0..n).map(|j| f(-r + j as f64 * h)).collect(), accessible: true }
    }

    #[test]
    fn half_plane_chart_is_valid() {
        let d = build_graph_domain(vec![flat_chart(0, 1.0, 21, |_| 0.0)], 1.0, 1.0, &DomainOptions::default()).unwrap();
        assert!(d.area() > 0.0);
        assert!(!d.sigma().is_empty());
    }

    #[test]
    fn parabola_rejected_with_named_chart() {
        let err = build_graph_domain(vec![flat_chart(7, 1.0, 41, |u| 0.5 * u * u)], 1.0, 2.0, &DomainOptions::default())
            .unwrap_err();
        match err {
            GeometryError::ChartViolation { chart, value, bound, .. } => {
                assert_eq!(chart, 7);
                assert!((value - 2.5).abs() < 1e-9);
                assert_eq!(bound, 2.0);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn gradient_jump_rejected() {
        let err = build_graph_domain(vec![flat_chart(3, 1.0, 41, |u| 0.3 * (u - 0.5).abs() - 0.15)], 1.0, 2.0, &DomainOptions::default());
        assert!(matches!(err, Err(GeometryError::ChartViolation { chart: 3, .. })));
    }

    #[test]
    fn disk_atlas_and_sigma() {
        let opts = DomainOptions { chart_count: 16, ..Default::default() };
        let d = Domain::polar(
            [0.0, 0.0],
            |_| 1.0,
            512,
            |t| t > 20f64.to_radians() && t < 160f64.to_radians(),
            DomainConstants::new(0.25, 1.0),
            &opts,
        )
        .unwrap();
        assert_eq!(d.charts().len(), 16);
        assert!(sigma_clearance(&d) >= 0.25 * (1.0 - 1e-12));
        let p0 = d.p0();
        assert!(p0[1] > 0.9);
        assert!((d.area() - PI).abs() < 1e-3);
    }

    #[test]
    fn clockwise_input_is_reoriented_with_labels() {
        let v = vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]];
        // edge 1 ((0,1)->(1,1)) is the top side
        let labels = vec![
            BoundaryLabel::Accessible,
            BoundaryLabel::Inaccessible,
            BoundaryLabel::Accessible,
            BoundaryLabel::Accessible,
        ];
        let opts = DomainOptions { sigma: SigmaSpec::Auto, ..Default::default() };
        let d = Domain::from_polyline(v, labels, DomainConstants::new(0.2, 1.0), &opts).unwrap();
        for k in 0..4 {
            let e = d.boundary().edge(k);
            let top = e[0][1] == 1.0 && e[1][1] == 1.0;
            assert_eq!(d.label(k) == BoundaryLabel::Inaccessible, top);
        }
    }

    #[test]
    fn export_round_trip() {
        let opts = DomainOptions { chart_count: 8, ..Default::default() };
        let d = Domain::polar([0.0, 0.0], |_| 1.0, 256, |t| t < PI, DomainConstants::new(0.25, 1.0), &opts).unwrap();
        let s = d.to_toml();
        let x: DomainExport = toml::from_str(&s).unwrap();
        let d2 = Domain::from_export(&x, &opts).unwrap();
        assert_eq!(d2.boundary().vertices(), d.boundary().vertices());
        assert_eq!(d2.sigma(), d.sigma());
        assert_eq!(d2.charts().len(), 8);
    }

    #[test]
    fn csv_ingestion() {
        let mut s = String::from("chart_id,u1,phi\n");
        for j in 0..11 {
            let u = -1.0 + 0.2 * j as f64;
            s.push_str(&format!("0,{u},0\n"));
        }
        let charts = read_charts_csv(s.as_bytes()).unwrap();
        assert_eq!(charts.len(), 1);
        assert_eq!(charts[0].samples.len(), 11);
        assert!((charts[0].radius - 1.0).abs() < 1e-12);
    }
}
