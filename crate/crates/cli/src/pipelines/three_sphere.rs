use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wavescope_core::geometry::Point;
use wavescope_core::propagation::{
    random_harmonic, three_sphere_exponent, verify_three_sphere, write_records_csv, BallProblem, ThreeSphereParams,
    VerifyOptions,
};

use super::Ctx;
use crate::error::CliError;

type M2 = [[f64; 2]; 2];

/// A^{−1/2} for a symmetric positive definite 2×2 matrix, via √A = (A + √det·I)/√(tr A + 2√det).
fn inv_sqrt(a: M2) -> M2 {
    let sd = (a[0][0] * a[1][1] - a[0][1] * a[1][0]).sqrt();
    let t = (a[0][0] + a[1][1] + 2.0 * sd).sqrt();
    let s = [[(a[0][0] + sd) / t, a[0][1] / t], [a[1][0] / t, (a[1][1] + sd) / t]];
    let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    [[s[1][1] / det, -s[0][1] / det], [-s[1][0] / det, s[0][0] / det]]
}

/// Verifies the three-sphere inequality on random solutions of div(A∇u) = 0: harmonic
/// polynomials composed with x ↦ c + A^{−1/2}(x − c), which is exact for constant A.
pub fn run_three_sphere(ctx: &mut Ctx<'_>) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let ts = &cfg.three_sphere;
    let a = cfg.anisotropy.build()?;
    let m = inv_sqrt(a.eval([0.0, 0.0]));
    let params = ThreeSphereParams {
        c_carleman: cfg.calibration.c_carleman,
        ..ThreeSphereParams::new(ts.r1, ts.r2, ts.r3, ts.delta, ts.beta.unwrap_or(cfg.calibration.beta1))
    };
    let (theta0, c0) = three_sphere_exponent(&params)?;
    let opts = VerifyOptions { cap: ts.cap, ..VerifyOptions::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let zero = |_: Point| 0.0;
    let mut records = Vec::with_capacity(ts.count);
    for k in 0..ts.count {
        let spread = ts.center_spread;
        let center = if spread > 0.0 {
            [rng.gen_range(-spread..=spread), rng.gen_range(-spread..=spread)]
        } else {
            [0.0, 0.0]
        };
        let poly = random_harmonic(k % (ts.max_degree + 1), center, &mut rng);
        let u = move |x: Point| {
            let d = [x[0] - center[0], x[1] - center[1]];
            poly.eval([center[0] + m[0][0] * d[0] + m[0][1] * d[1], center[1] + m[1][0] * d[0] + m[1][1] * d[1]])
        };
        let prob = BallProblem { center, u: &u, f: &zero, a: &a };
        records.push(verify_three_sphere(&prob, &params, &opts)?);
    }
    write_records_csv(&records, ctx.create("three_sphere.csv")?)?;
    ctx.out.record("three_sphere.csv")?;

    let failures = records.iter().filter(|r| !r.pass).count();
    let sum = &mut *ctx.summary;
    sum.num("theta0", theta0);
    sum.num("c0", c0);
    sum.num("cap", ts.cap.unwrap_or(c0));
    sum.num("max_implied_c0", records.iter().fold(0.0, |m: f64, r| m.max(r.implied_c0)));
    sum.num("max_residual", records.iter().fold(0.0, |m: f64, r| m.max(r.residual)));
    sum.int("records", records.len());
    sum.int("failures", failures);
    if failures > 0 {
        return Err(CliError::CheckFailed(format!("{failures} of {} records exceed the C₀ cap", records.len())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::inv_sqrt;

    #[test]
    fn inverse_square_root() {
        let a = [[2.0, 0.5], [0.5, 1.0]];
        let m = inv_sqrt(a);
        // M A M = I
        let ma = [
            [m[0][0] * a[0][0] + m[0][1] * a[1][0], m[0][0] * a[0][1] + m[0][1] * a[1][1]],
            [m[1][0] * a[0][0] + m[1][1] * a[1][0], m[1][0] * a[0][1] + m[1][1] * a[1][1]],
        ];
        for i in 0..2 {
            for j in 0..2 {
                let v = ma[i][0] * m[0][j] + ma[i][1] * m[1][j];
                assert!((v - f64::from(u8::from(i == j))).abs() < 1e-14, "{v}");
            }
        }
    }
}
