use wavescope_core::stability::{fit_log_modulus, run_stability_experiment, write_stability_csv};

use super::Ctx;
use crate::error::CliError;

/// Runs the perturbation ladder, writes the CSV (also when the fit is impossible) and
/// reports an unusable fit as the run's error afterwards.
pub fn run_stability(ctx: &mut Ctx<'_>, csv_name: &str) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let scfg = cfg.stability_config()?;
    let mut a = cfg.anisotropy.build()?;
    a.rho0 = scfg.domain.rho0;
    let run = run_stability_experiment(&scfg, &a, cfg.seed)?;
    let pairs: Vec<(f64, f64)> = run.records.iter().map(|r| (r.epsilon, r.d_hausdorff)).collect();
    let fit = fit_log_modulus(&pairs, scfg.domain.rho0);
    write_stability_csv(&run.records, fit.as_ref(), ctx.create(csv_name)?)?;
    ctx.out.record(csv_name)?;

    let sum = &mut *ctx.summary;
    sum.int("perturbations", run.records.len());
    sum.int("base_nodes", run.base_nodes);
    sum.num("dt", run.dt);
    sum.int("steps", run.steps);
    sum.num("t_star", run.modulus.t_star);
    sum.num("t0_bar", run.modulus.t0_bar);
    sum.num("script_f", run.modulus.script_f);
    sum.num("ln_k0", run.modulus.ln_k0);
    sum.int("schedule_records", run.records.iter().filter(|r| r.sigma_eps.is_some()).count());
    match fit {
        Ok(f) => {
            sum.num("fit_a", f.a);
            sum.num("fit_b", f.b);
            sum.num("fit_residual_log", f.residual_log);
            sum.num("fit_b_power", f.b_power);
            sum.num("fit_residual_power", f.residual_power);
            sum.int("fit_used", f.used);
            Ok(())
        }
        Err(e) => Err(e.into()),
    }
}
