use std::io::Write;

use wavescope_core::geometry::{cone_ball_chain, cone_params_for_varsigma, path_ball_chain, BallChain, PathHost};
use wavescope_core::propagation::{
    cone_decay_schedule, propagate_smallness, three_sphere_exponent, varsigma0, PropagationState, ThreeSphereParams,
};

use super::Ctx;
use crate::config::{rho0_declarations, ChainSection};
use crate::error::CliError;

fn write_chain(ctx: &mut Ctx<'_>, chain: &BallChain, state: &PropagationState) -> Result<(), CliError> {
    let mut w = ctx.create("chain.csv")?;
    let io = |e: std::io::Error| CliError::Output(e.to_string());
    writeln!(w, "k,x,y,r_small,r_mid,r_large,alpha").map_err(io)?;
    for k in 0..chain.len() {
        let c = chain.centers[k];
        let alpha = state.alpha.get(k).copied().unwrap_or(f64::NAN);
        writeln!(
            w,
            "{k},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{alpha:.15e}",
            c[0], c[1], chain.small_radii[k], chain.mid_radii[k], chain.large_radii[k]
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)?;
    drop(w);
    ctx.out.record("chain.csv")
}

/// One propagation step per pair of consecutive balls, with θ and C from the
/// three-sphere inequality on the first ball's radii.
fn step_constants(chain: &BallChain, delta: f64, beta: f64, c: f64) -> Result<(f64, f64), CliError> {
    let p = ThreeSphereParams {
        c_carleman: c,
        ..ThreeSphereParams::new(chain.small_radii[0], chain.mid_radii[0], chain.large_radii[0], delta, beta)
    };
    Ok(three_sphere_exponent(&p)?)
}

pub fn run_chain(ctx: &mut Ctx<'_>) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let k = &cfg.calibration;
    let rho0 = rho0_declarations(cfg)?[0].1;
    match &cfg.chain {
        ChainSection::Cone(c) => {
            let vs = match c.varsigma {
                Some(v) => v,
                None => varsigma0(k.beta1)?,
            };
            let (s, l_s) = cone_params_for_varsigma(vs, c.c_star);
            let chain = cone_ball_chain(s, l_s, rho0, vs, c.balls)?;
            let sched = cone_decay_schedule(&chain, c.mu, c.t, rho0, k.vartheta2, k.beta1, 2)?;
            let (theta, c0) = step_constants(&chain, sched.delta, k.beta1, k.c_carleman)?;
            let state = propagate_smallness(&chain, c.alpha0, theta, c0)?;
            write_chain(ctx, &chain, &state)?;
            let sum = &mut *ctx.summary;
            sum.text("kind", "cone");
            sum.num("varsigma", vs);
            sum.num("s", s);
            sum.num("l_s", l_s);
            sum.num("chi", sched.chi);
            sum.num("delta", sched.delta);
            sum.num("theta_tilde", sched.theta_tilde);
            sum.num("contraction_ratio", sched.ratio);
            sum.num("a_sup", sched.a_sup);
            sum.num("a1_sup", sched.a1_sup);
            sum.num("mu_a1", sched.mu_a1);
            sum.num("mu_a2", sched.mu_a2);
            sum.num("ln_delta3", sched.ln_delta3);
            sum.num("ln_t_min", sched.ln_t_min);
            sum.flag("t_reaches_t_min", c.t.ln() >= sched.ln_t_min);
            summarize_state(sum, &state);
        }
        ChainSection::Path(p) => {
            let domain = cfg.build_domain()?;
            let host = PathHost::new(vec![&domain]);
            let chain = path_ball_chain(&host, p.start, p.end, p.r)?;
            // radii r/4 ≤ 3r/4 < r admit δ = (r − 3r/4)/(2r) = 1/8
            let (theta, c0) = step_constants(&chain, 0.125, k.beta1, k.c_carleman)?;
            let state = propagate_smallness(&chain, p.alpha0, theta, c0)?;
            write_chain(ctx, &chain, &state)?;
            let n_bound = k.c_n * domain.area() / (p.r * p.r);
            let sum = &mut *ctx.summary;
            sum.text("kind", "path");
            sum.int("balls", chain.len());
            sum.num("length_bound", n_bound);
            sum.flag("within_length_bound", chain.len() as f64 <= n_bound);
            summarize_state(sum, &state);
        }
    }
    Ok(())
}

fn summarize_state(sum: &mut crate::manifest::Summary, s: &PropagationState) {
    sum.int("steps", s.n);
    sum.num("theta_step", s.theta_star);
    sum.num("c_step", s.c_step);
    sum.num("alpha_final", *s.alpha.last().unwrap_or(&f64::NAN));
    sum.num("alpha_closed_form", s.closed_form);
    sum.num("alpha_bound", s.bound);
}
