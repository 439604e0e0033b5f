//! Sampled Hausdorff and modified distances between domain closures.
//!
//! Samples are a lattice of spacing `resolution` anchored at the corner of the
//! common bounding box plus boundary points spaced at most `resolution` apart.
//! dist(·, Ω̄) is 1-Lipschitz, so either sup is off by at most `resolution`
//! per side; the documented budget is 2·resolution.

use rayon::prelude::*;

use super::domain::Domain;
use super::polygon::{Crossing, Polygon};
use super::GeometryError;

fn parity_inside(cr: &[Crossing], x: f64, cursor: &mut usize) -> bool {
    while *cursor < cr.len() && cr[*cursor].at < x {
        *cursor += 1;
    }
    *cursor % 2 == 1
}

/// sup over samples of `a` of dist(p, ā₂) with ā₂ the closure of `b`.
fn one_sided(a: &Polygon, b: &Polygon, res: f64, interior: bool) -> Result<f64, GeometryError> {
    let bb = a.bbox().union(&b.bbox());
    let tol = 1e-12 * bb.diameter().max(1.0);
    let boundary = a.boundary_samples(res);
    let mut best = boundary
        .par_iter()
        .map(|&p| b.region_distance(p, tol))
        .reduce(|| f64::NEG_INFINITY, f64::max);
    let mut count = boundary.len();
    if interior {
        let nx = (bb.width() / res).floor() as usize + 1;
        let ny = (bb.height() / res).floor() as usize + 1;
        let (m, c) = (0..ny)
            .into_par_iter()
            .map(|j| {
                let y = bb.min[1] + j as f64 * res;
                let ca = a.row_crossings(y);
                if ca.is_empty() {
                    return (f64::NEG_INFINITY, 0usize);
                }
                let cb = b.row_crossings(y);
                let (mut ia, mut ib) = (0, 0);
                let mut m = f64::NEG_INFINITY;
                let mut c = 0;
                for i in 0..nx {
                    let x = bb.min[0] + i as f64 * res;
                    if !parity_inside(&ca, x, &mut ia) {
                        continue;
                    }
                    c += 1;
                    let d = if parity_inside(&cb, x, &mut ib) { 0.0 } else { b.region_distance([x, y], tol) };
                    m = m.max(d);
                }
                (m, c)
            })
            .reduce(|| (f64::NEG_INFINITY, 0), |p, q| (p.0.max(q.0), p.1 + q.1));
        best = best.max(m);
        count += c;
    }
    if count == 0 {
        return Err(GeometryError::DegenerateDomain("empty sample set".into()));
    }
    Ok(best.max(0.0))
}

fn check_res(resolution: f64) -> Result<(), GeometryError> {
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(GeometryError::InvalidParameter(format!("resolution = {resolution}")));
    }
    Ok(())
}

/// d_H(Ω̄₁, Ω̄₂) from dense samples of both closures.
pub fn hausdorff_distance(om1: &Domain, om2: &Domain, resolution: f64) -> Result<f64, GeometryError> {
    check_res(resolution)?;
    let a = one_sided(om1.boundary(), om2.boundary(), resolution, true)?;
    let b = one_sided(om2.boundary(), om1.boundary(), resolution, true)?;
    Ok(a.max(b))
}

/// d_m: as [`hausdorff_distance`] but the sups run over boundary samples only.
pub fn modified_distance(om1: &Domain, om2: &Domain, resolution: f64) -> Result<f64, GeometryError> {
    check_res(resolution)?;
    let a = one_sided(om1.boundary(), om2.boundary(), resolution, false)?;
    let b = one_sided(om2.boundary(), om1.boundary(), resolution, false)?;
    Ok(a.max(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DomainConstants, DomainOptions};

    fn disk(r: f64) -> Domain {
        Domain::polar([0.0, 0.0], |_| r, 1024, |_| true, DomainConstants::new(0.1, 1.0), &DomainOptions::default())
            .unwrap()
    }

    #[test]
    fn identical_is_zero() {
        let d = disk(1.0);
        assert_eq!(hausdorff_distance(&d, &d, 0.01).unwrap(), 0.0);
        assert_eq!(modified_distance(&d, &d, 0.01).unwrap(), 0.0);
    }

    #[test]
    fn concentric_disks() {
        let a = disk(1.0);
        let b = disk(0.5);
        let dh = hausdorff_distance(&a, &b, 0.01).unwrap();
        assert!((dh - 0.5).abs() < 1e-12, "{dh}");
        let dm = modified_distance(&a, &b, 0.01).unwrap();
        assert!((dm - 0.5).abs() < 1e-12);
    }

    #[test]
    fn offset_squares() {
        let c = DomainConstants::new(0.1, 1.0);
        let o = DomainOptions::default();
        let a = Domain::rectangle([0.0, 0.0], [1.0, 1.0], 4, c, &o).unwrap();
        let b = Domain::rectangle([0.3, 0.0], [1.3, 1.0], 4, c, &o).unwrap();
        let dh = hausdorff_distance(&a, &b, 0.01).unwrap();
        assert!((dh - 0.3).abs() < 0.02, "{dh}");
    }

    #[test]
    fn bad_resolution() {
        let d = disk(1.0);
        assert!(hausdorff_distance(&d, &d, 0.0).is_err());
    }
}
