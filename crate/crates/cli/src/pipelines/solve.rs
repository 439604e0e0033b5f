use std::io::Write;

use wavescope_core::wave::io::{write_flux_csv, write_snapshot};
use wavescope_core::wave::boundary_flux;

use super::{field_sha256, solve_configured, Ctx};
use crate::error::CliError;

/// Stored levels to write: `count` evenly spaced indices including first and last.
fn snapshot_indices(stored: usize, count: usize) -> Vec<usize> {
    if stored == 0 || count == 0 {
        return Vec::new();
    }
    if count == 1 || stored == 1 {
        return vec![stored - 1];
    }
    let mut v: Vec<usize> = (0..count).map(|k| (k * (stored - 1) + (count - 1) / 2) / (count - 1)).collect();
    v.dedup();
    v
}

pub fn run_solve(ctx: &mut Ctx<'_>) -> Result<(), CliError> {
    let s = solve_configured(ctx.cfg)?;
    ctx.out.write("domain.toml", s.domain.to_toml().as_bytes())?;

    let flux = boundary_flux(&s.u)?;
    write_flux_csv(&flux, ctx.create("flux.csv")?)?;
    ctx.out.record("flux.csv")?;

    {
        let mut w = ctx.create("energy.csv")?;
        let io = |e: std::io::Error| CliError::Output(e.to_string());
        writeln!(w, "n,t,energy").map_err(io)?;
        for (n, k) in s.u.energy.iter().enumerate() {
            writeln!(w, "{n},{:.12e},{k:.12e}", n as f64 * s.u.dt).map_err(io)?;
        }
        w.flush().map_err(io)?;
    }
    ctx.out.record("energy.csv")?;

    for idx in snapshot_indices(s.u.history.len(), ctx.cfg.solve.snapshots) {
        let (bin, hdr) = write_snapshot(&s.u, idx, &ctx.out.path(&format!("u_{idx:04}"))?)?;
        ctx.out.record_path(&bin)?;
        ctx.out.record_path(&hdr)?;
    }

    let sum = &mut *ctx.summary;
    sum.int("nodes", s.u.grid.len());
    sum.num("h", s.u.grid.h);
    sum.num("dt", s.u.dt);
    sum.int("steps", s.u.steps);
    sum.num("t_end", s.u.t_end);
    sum.num("lambda", s.a.lambda);
    sum.num("sigma_length", flux.sigma_length());
    sum.num("energy_final", s.u.energy.last().copied().unwrap_or(0.0));
    sum.num("energy_max", s.u.energy.iter().fold(0.0, |m: f64, v| m.max(*v)));
    sum.num("u_final_max_abs", s.u.u_final.iter().fold(0.0, |m: f64, v| m.max(v.abs())));
    sum.num("h_norm_t_end", s.bdata.h_norm(s.u.t_end)?);
    sum.text("u_final_sha256", field_sha256(&s.u.u_final));
    Ok(())
}
