use std::io::Write;

use wavescope_core::fbi::io::write_fbi;
use wavescope_core::fbi::{
    elliptic_residual_in, fbi_growth_check, fbi_source, fbi_transform, source_bound_constant, Complex64, FbiOptions,
};

use super::{solve_configured, Ctx};
use crate::error::CliError;

/// Transforms the solved field at every configured μ and reports the growth constants,
/// the elliptic residual with and without the source, and the concentration error at y = 0.
pub fn run_fbi_check(ctx: &mut Ctx<'_>) -> Result<(), CliError> {
    let s = solve_configured(ctx.cfg)?;
    let f = &ctx.cfg.fbi;
    let rho0 = s.domain.rho0;
    let poly = s.domain.boundary();
    let keep = |p| poly.contains(p) && poly.boundary_distance(p) >= f.margin * rho0;
    let h_t = s.bdata.h_norm(s.u.t_end)?;
    let radius = f.ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    let mut at_tau = vec![0.0; s.u.grid.len()];
    s.u.value_at(f.tau, &mut at_tau);

    let mut w = ctx.create("fbi.csv")?;
    let io = |e: std::io::Error| CliError::Output(e.to_string());
    writeln!(w, "mu,tau,nodes,c0,c1,c2,c_max,residual_l2,residual_max,control_l2,conc_err,c_source").map_err(io)?;
    let mut worst_c = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for (k, &mu) in f.mu.iter().enumerate() {
        let field = fbi_transform(&s.u, mu, f.tau, &f.ys, &FbiOptions::default())?;
        let growth = fbi_growth_check(&field, &s.u)?;
        let src = fbi_source(&s.u.u_final, &s.u.du_final, mu, f.tau, s.u.t_end, &f.ys);
        let res = elliptic_residual_in(&field, &s.a, &src, keep)?;
        let zero: Vec<Vec<Complex64>> = src.iter().map(|r| vec![Complex64::new(0.0, 0.0); r.len()]).collect();
        let control = elliptic_residual_in(&field, &s.a, &zero, keep)?;
        let conc = match field.y_index(0.0) {
            Some(j) => field.values[j].iter().zip(&at_tau).map(|(v, u)| (v - u).norm()).fold(0.0, f64::max),
            None => f64::NAN,
        };
        let c_src = source_bound_constant(&src, s.u.t_end, rho0, h_t, mu, radius);
        writeln!(
            w,
            "{mu},{},{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}",
            f.tau,
            field.quadrature_nodes,
            growth.c[0],
            growth.c[1],
            growth.c[2],
            growth.c_max,
            res.l2,
            res.max,
            control.l2,
            conc,
            c_src
        )
        .map_err(io)?;
        worst_c = worst_c.max(growth.c_max);
        if control.l2 > 0.0 {
            worst_ratio = worst_ratio.max(res.l2 / control.l2);
        }
        if f.write_fields {
            for p in write_fbi(&field, &ctx.out.path(&format!("fbi_mu{k}"))?)? {
                ctx.out.record_path(&p)?;
            }
        }
    }
    w.flush().map_err(io)?;
    drop(w);
    ctx.out.record("fbi.csv")?;

    let sum = &mut *ctx.summary;
    sum.int("nodes", s.u.grid.len());
    sum.num("h", s.u.grid.h);
    sum.num("t_end", s.u.t_end);
    sum.num("c_max", worst_c);
    sum.flag("growth_within_2", worst_c <= 2.0);
    sum.num("max_residual_over_control", worst_ratio);
    Ok(())
}
