//! Relative-graph comparison of two domains in the frames of the first atlas.

use serde::{Deserialize, Serialize};

use super::chart::Chart;
use super::distance::hausdorff_distance;
use super::domain::Domain;
use super::polygon::Point;
use super::GeometryError;

#[derive(Clone, Debug)]
pub struct RelativeGraphOptions {
    pub alpha: f64,
    /// Common graph radius; defaults to the smallest chart radius of Ω₁.
    pub r0: Option<f64>,
    /// d₀ as a fraction of ρ₀ (the smallness threshold on d_H).
    pub d0_fraction: f64,
    /// Sampling resolution used for the d_H flag.
    pub resolution: f64,
    /// Samples per chart on [-r₀, r₀] (forced odd).
    pub samples: usize,
}

impl Default for RelativeGraphOptions {
    fn default() -> Self {
        RelativeGraphOptions { alpha: 0.5, r0: None, d0_fraction: 0.1, resolution: 0.005, samples: 41 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelativeGraphReport {
    pub gamma0: f64,
    pub gamma1_alpha: f64,
    pub alpha: f64,
    pub r0: f64,
    pub d_hausdorff: f64,
    pub d0: f64,
    pub within_d0: bool,
    pub charts_checked: usize,
    /// Chart of Ω₁ where γ₀ is attained.
    pub worst_chart: usize,
}

/// Graph of `dom`'s boundary over the tangent line of `frame`, restricted to
/// the cylinder |x'| ≤ r₀, |x_n| < r₀.
fn graph_in_frame(dom: &Domain, frame: &Chart, r0: f64, us: &[f64]) -> Result<Vec<f64>, GeometryError> {
    let poly = dom.boundary();
    let n = poly.len();
    let reach = 2.0 * r0;
    let local: Vec<[Point; 2]> = (0..n)
        .filter_map(|k| {
            let e = poly.edge(k);
            let a = frame.to_local(e[0]);
            let b = frame.to_local(e[1]);
            let near = |p: Point| p[0].abs() <= reach && p[1].abs() <= reach;
            (near(a) || near(b)).then_some([a, b])
        })
        .collect();
    let mut out = Vec::with_capacity(us.len());
    for &u in us {
        let mut hits: Vec<f64> = Vec::new();
        for s in &local {
            let (a, b) = (s[0], s[1]);
            // closed test so the end abscissae ±r₀ are covered; shared vertices are merged below
            let crosses = a[0] != b[0] && ((a[0] <= u && u <= b[0]) || (b[0] <= u && u <= a[0]));
            if !crosses {
                continue;
            }
            let t = (u - a[0]) / (b[0] - a[0]);
            let xn = a[1] + t * (b[1] - a[1]);
            if xn.abs() >= r0 {
                continue;
            }
            if b[0] < a[0] {
                return Err(GeometryError::NotRelativeGraphs {
                    chart: frame.id,
                    detail: format!("boundary runs backwards over x' = {u:.4}"),
                });
            }
            if !hits.iter().any(|&x| (x - xn).abs() <= 1e-12 * r0) {
                hits.push(xn);
            }
        }
        match hits.len() {
            1 => out.push(hits[0]),
            0 => {
                return Err(GeometryError::NotRelativeGraphs {
                    chart: frame.id,
                    detail: format!("no boundary point over x' = {u:.4} within r0"),
                })
            }
            k => {
                return Err(GeometryError::NotRelativeGraphs {
                    chart: frame.id,
                    detail: format!("{k} boundary points over x' = {u:.4}"),
                })
            }
        }
    }
    Ok(out)
}

fn c1alpha(d: &[f64], h: f64, r0: f64, alpha: f64) -> (f64, f64) {
    let n = d.len();
    let der: Vec<f64> = (0..n)
        .map(|j| {
            if j == 0 {
                (-3.0 * d[0] + 4.0 * d[1] - d[2]) / (2.0 * h)
            } else if j == n - 1 {
                (3.0 * d[n - 1] - 4.0 * d[n - 2] + d[n - 3]) / (2.0 * h)
            } else {
                (d[j + 1] - d[j - 1]) / (2.0 * h)
            }
        })
        .collect();
    let sup = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gsup = der.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut hol = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            let dist = (j - i) as f64 * h;
            hol = hol.max((der[j] - der[i]).abs() / dist.powf(alpha));
        }
    }
    (sup, sup + r0 * gsup + r0.powf(1.0 + alpha) * hol)
}

/// γ₀, γ_{1,α} and the d_H ≤ d₀ flag, evaluated at every chart of Ω₁.
pub fn relative_graph_report(
    om1: &Domain,
    om2: &Domain,
    opts: &RelativeGraphOptions,
) -> Result<RelativeGraphReport, GeometryError> {
    if (om1.rho0 - om2.rho0).abs() > 1e-12 * om1.rho0 || (om1.e - om2.e).abs() > 1e-12 * om1.e {
        return Err(GeometryError::InvalidParameter("domains must share ρ₀ and E".into()));
    }
    if om1.charts().is_empty() {
        return Err(GeometryError::InvalidParameter("Ω₁ has no chart atlas".into()));
    }
    if !(opts.alpha > 0.0 && opts.alpha <= 1.0) {
        return Err(GeometryError::InvalidParameter(format!("alpha = {}", opts.alpha)));
    }
    let r0 = opts
        .r0
        .unwrap_or_else(|| om1.charts().iter().map(|c| c.radius).fold(f64::INFINITY, f64::min))
        .min(om1.rho0);
    let s = if opts.samples % 2 == 0 { opts.samples + 1 } else { opts.samples.max(5) };
    let h = 2.0 * r0 / (s - 1) as f64;
    let us: Vec<f64> = (0..s).map(|j| -r0 + j as f64 * h).collect();
    let mut gamma0 = 0.0f64;
    let mut gamma1 = 0.0f64;
    let mut worst = om1.charts()[0].id;
    for frame in om1.charts() {
        let g1 = graph_in_frame(om1, frame, r0, &us)?;
        let g2 = graph_in_frame(om2, frame, r0, &us)?;
        if g2[s / 2].abs() > 0.5 * r0 {
            return Err(GeometryError::NotRelativeGraphs {
                chart: frame.id,
                detail: format!("|φ₂(0)| = {:.4e} > r0/2", g2[s / 2].abs()),
            });
        }
        let diff: Vec<f64> = g1.iter().zip(&g2).map(|(a, b)| a - b).collect();
        let (sup, full) = c1alpha(&diff, h, r0, opts.alpha);
        if sup > gamma0 {
            gamma0 = sup;
            worst = frame.id;
        }
        gamma1 = gamma1.max(full);
    }
    let dh = hausdorff_distance(om1, om2, opts.resolution)?;
    let d0 = opts.d0_fraction * om1.rho0;
    Ok(RelativeGraphReport {
        gamma0,
        gamma1_alpha: gamma1,
        alpha: opts.alpha,
        r0,
        d_hausdorff: dh,
        d0,
        within_d0: dh <= d0,
        charts_checked: om1.charts().len(),
        worst_chart: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_graph_domain, DomainConstants, DomainOptions};

    fn bump_chart(shift: f64) -> Chart {
        let n = 41;
        let r = 1.0;
        let h = 2.0 * r / (n - 1) as f64;
        Chart {
            id: 0,
            origin: [0.0, shift],
            angle: 0.0,
            radius: r,
            samples: (0..n).map(|j| {
                let u: f64 = -r + j as f64 * h;
                0.1 * u * u * (1.0 - 0.2 * u)
            }).collect(),
            accessible: true,
        }
    }

    #[test]
    fn identical_gives_zero() {
        let d = build_graph_domain(vec![bump_chart(0.0)], 1.0, 1.0, &DomainOptions::default()).unwrap();
        let r = relative_graph_report(&d, &d, &RelativeGraphOptions { resolution: 0.02, ..Default::default() }).unwrap();
        assert_eq!(r.gamma0, 0.0);
        assert_eq!(r.gamma1_alpha, 0.0);
        assert_eq!(r.d_hausdorff, 0.0);
    }

    #[test]
    fn vertical_shift_is_exact() {
        let d1 = build_graph_domain(vec![bump_chart(0.0)], 1.0, 1.0, &DomainOptions::default()).unwrap();
        let d2 = build_graph_domain(vec![bump_chart(0.01)], 1.0, 1.0, &DomainOptions::default()).unwrap();
        let r = relative_graph_report(&d1, &d2, &RelativeGraphOptions { resolution: 0.02, ..Default::default() }).unwrap();
        assert!((r.gamma0 - 0.01).abs() < 1e-12, "{}", r.gamma0);
        // the difference is constant, so the higher terms vanish up to rounding
        assert!((r.gamma1_alpha - 0.01).abs() < 1e-9);
    }

    #[test]
    fn disjoint_domains_are_not_relative_graphs() {
        let o = DomainOptions { chart_count: 8, ..Default::default() };
        let c = DomainConstants::new(0.25, 1.0);
        let a = Domain::polar([0.0, 0.0], |_| 1.0, 256, |_| true, c, &o).unwrap();
        let b = Domain::polar([5.0, 0.0], |_| 1.0, 256, |_| true, c, &o).unwrap();
        assert!(matches!(
            relative_graph_report(&a, &b, &RelativeGraphOptions::default()),
            Err(GeometryError::NotRelativeGraphs { .. })
        ));
    }
}
