use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::FitReport;
use super::schedule::{mu_for, omega1, sigma_of_epsilon, ScheduleCalibration};
use super::{theoretical_modulus, ModulusReport, StabilityError};
use crate::geometry::{hausdorff_distance, modified_distance, Domain, DomainConstants, DomainOptions, Point};
use crate::wave::{
    boundary_flux, flux_mismatch_epsilon, solve_ibvp, AnisotropyField, BoundaryData, BoundarySource, FluxTrace,
    GridSpec, SpatialProfile, TemporalProfile,
};

/// Polygonal disk; the accessible boundary is the arc between two angles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiskSpec {
    pub center: Point,
    pub radius: f64,
    pub vertices: usize,
    pub rho0: f64,
    pub e: f64,
    pub accessible_from_deg: f64,
    pub accessible_to_deg: f64,
}

impl Default for DiskSpec {
    fn default() -> Self {
        DiskSpec {
            center: [0.0, 0.0],
            radius: 1.0,
            vertices: 512,
            rho0: 0.25,
            e: 1.0,
            accessible_from_deg: 20.0,
            accessible_to_deg: 160.0,
        }
    }
}

impl DiskSpec {
    pub fn build(&self) -> Result<Domain, crate::geometry::GeometryError> {
        let (a, b) = (self.accessible_from_deg.to_radians(), self.accessible_to_deg.to_radians());
        let r = self.radius;
        Domain::polar(
            self.center,
            |_| r,
            self.vertices,
            |t| t >= a && t <= b,
            DomainConstants::new(self.rho0, self.e),
            &DomainOptions::default(),
        )
    }
}

/// ψ = amp·bump(angle)·Q(t)e^{−rt} with Q(t)e^{−rt} = (t/t_p)^p e^{p(1 − t/t_p)}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundarySpec {
    pub center_deg: f64,
    pub half_width_deg: f64,
    pub amp: f64,
    pub power: usize,
    pub peak_time: f64,
    /// Time up to which the data is required to vanish on Γ^(i) and H(t₁) is taken.
    pub t1: f64,
}

impl Default for BoundarySpec {
    fn default() -> Self {
        BoundarySpec { center_deg: 90.0, half_width_deg: 50.0, amp: 1.0, power: 7, peak_time: 1.5, t1: 1.5 }
    }
}

impl BoundarySpec {
    pub fn source(&self, center: Point) -> BoundarySource {
        BoundarySource::Separable {
            space: SpatialProfile::AngularBump {
                center,
                angle: self.center_deg.to_radians(),
                half_width: self.half_width_deg.to_radians(),
                amp: self.amp,
            },
            time: TemporalProfile::normalized_poly_exp(self.power, self.power as f64 / self.peak_time),
        }
    }
}

/// Smooth radial dent (or bulge) of Γ^(i) centred at an angle; amplitudes in units of ρ₀.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbationSpec {
    pub center_deg: f64,
    pub width_deg: f64,
    pub amplitudes: Vec<f64>,
    /// Outward instead of inward.
    pub outward: bool,
    /// Uniform random shift of the centre in ±jitter_deg, drawn per rung from the seed.
    pub jitter_deg: f64,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        let amplitudes = (0..8).map(|k| 1e-3 * 100f64.powf(k as f64 / 7.0)).collect();
        PerturbationSpec { center_deg: 270.0, width_deg: 40.0, amplitudes, outward: false, jitter_deg: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StabilityConfig {
    pub domain: DiskSpec,
    pub data: BoundarySpec,
    pub perturbation: PerturbationSpec,
    /// Desk-scale horizon actually simulated.
    pub t_end: f64,
    /// Grid intervals across the domain box.
    pub cells: usize,
    pub c_cfl: f64,
    pub store_every: usize,
    /// Lattice spacing for d_H and d_m.
    pub distance_resolution: f64,
    pub schedule: ScheduleCalibration,
    /// Defaults to t⋆ + λρ₀.
    pub t0: Option<f64>,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig {
            domain: DiskSpec::default(),
            data: BoundarySpec::default(),
            perturbation: PerturbationSpec::default(),
            t_end: 6.0,
            cells: 96,
            c_cfl: 0.5,
            store_every: 2,
            distance_resolution: 0.005,
            schedule: ScheduleCalibration::default(),
            t0: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityRecord {
    pub perturbation_id: usize,
    /// Absolute dent depth.
    pub amplitude: f64,
    pub center_deg: f64,
    pub epsilon: f64,
    pub d_hausdorff: f64,
    pub d_modified: f64,
    pub t_used: f64,
    pub mu_used: f64,
    pub mu_capped: bool,
    pub h_t: f64,
    pub h_t1: f64,
    /// Schedule values; `None` where ε lies outside (0, ε̄].
    pub sigma_eps: Option<f64>,
    pub ln_t_eps: Option<f64>,
    pub omega: Option<f64>,
    pub omega1: Option<f64>,
    pub k0: f64,
    pub ln_k0: f64,
    pub script_f: f64,
}

#[derive(Clone, Debug)]
pub struct StabilityRun {
    pub records: Vec<StabilityRecord>,
    pub modulus: ModulusReport,
    pub base_nodes: usize,
    pub dt: f64,
    pub steps: usize,
    pub wall_seconds: f64,
}

fn bump(angle: f64, center: f64, width: f64) -> f64 {
    let mut d = angle - center;
    d -= (d / (2.0 * PI)).round() * 2.0 * PI;
    let z = d / (0.5 * width);
    if z.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - z * z)).exp()
    }
}

struct Shared {
    spec: GridSpec,
    base_flux: FluxTrace,
}

fn run_one(
    id: usize,
    base: &Domain,
    cfg: &StabilityConfig,
    a: &AnisotropyField,
    shared: &Shared,
    amp: f64,
    center_deg: f64,
) -> Result<(f64, f64, f64), StabilityError> {
    let geo = |source| StabilityError::Geometry { id, source };
    let sol = |source| StabilityError::Solver { id, source };
    let c = cfg.domain.center;
    let sign = if cfg.perturbation.outward { -1.0 } else { 1.0 };
    let (centre, width) = (center_deg.to_radians(), cfg.perturbation.width_deg.to_radians());
    let om2 = base
        .perturb_inaccessible(
            |p| sign * amp * bump((p[1] - c[1]).atan2(p[0] - c[0]), centre, width),
            &DomainOptions::default(),
        )
        .map_err(geo)?;
    if amp == 0.0 {
        return Ok((0.0, 0.0, 0.0));
    }
    let bd = BoundaryData::new(&om2, cfg.data.source(c), cfg.data.t1).map_err(sol)?;
    let u2 = solve_ibvp(&om2, a, &bd, cfg.t_end, &shared.spec).map_err(sol)?;
    let f2 = boundary_flux(&u2).map_err(sol)?;
    let eps = flux_mismatch_epsilon(&shared.base_flux, &f2, cfg.t_end, base.rho0).map_err(sol)?;
    let dh = hausdorff_distance(base, &om2, cfg.distance_resolution).map_err(geo)?;
    let dm = modified_distance(base, &om2, cfg.distance_resolution).map_err(geo)?;
    Ok((eps, dh, dm))
}

/// Solves the base problem once, then every rung of the amplitude ladder in parallel.
/// Output order follows the ladder; every number is independent of the thread count.
pub fn run_stability_experiment(
    cfg: &StabilityConfig,
    a: &AnisotropyField,
    seed: u64,
) -> Result<StabilityRun, StabilityError> {
    let start = Instant::now();
    if cfg.cells < 8 || !(cfg.t_end > 0.0) || !(cfg.distance_resolution > 0.0) {
        return Err(StabilityError::InvalidParameter("cells ≥ 8, T > 0 and a positive distance resolution".into()));
    }
    let base = cfg.domain.build().map_err(|source| StabilityError::Geometry { id: 0, source })?;
    let rho0 = base.rho0;
    let max_amp = cfg.perturbation.amplitudes.iter().fold(0.0f64, |m, v| m.max(v.abs())) * rho0;
    let mut frame = base.bbox();
    if cfg.perturbation.outward {
        for k in 0..2 {
            frame.min[k] -= max_amp;
            frame.max[k] += max_amp;
        }
    }
    let mut spec = GridSpec::new(frame.width().max(frame.height()) / cfg.cells as f64);
    spec.frame = Some(frame);
    spec.c_cfl = cfg.c_cfl;
    spec.store_every = cfg.store_every.max(1);

    let base_err = |source| StabilityError::Solver { id: 0, source };
    let bd = BoundaryData::new(&base, cfg.data.source(cfg.domain.center), cfg.data.t1).map_err(base_err)?;
    let u1 = solve_ibvp(&base, a, &bd, cfg.t_end, &spec).map_err(base_err)?;
    let shared = Shared { spec, base_flux: boundary_flux(&u1).map_err(base_err)? };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rungs: Vec<(usize, f64, f64)> = cfg
        .perturbation
        .amplitudes
        .iter()
        .enumerate()
        .map(|(k, &amp)| {
            let j = if cfg.perturbation.jitter_deg > 0.0 {
                rng.gen_range(-cfg.perturbation.jitter_deg..=cfg.perturbation.jitter_deg)
            } else {
                0.0
            };
            (k + 1, amp * rho0, cfg.perturbation.center_deg + j)
        })
        .collect();
    let results: Vec<Result<(f64, f64, f64), StabilityError>> = rungs
        .par_iter()
        .map(|&(id, amp, c)| run_one(id, &base, cfg, a, &shared, amp, c))
        .collect();

    let h = |t: f64| bd.h_norm(t).unwrap_or(f64::NAN);
    let lambda = a.lambda;
    let cal = &cfg.schedule;
    let t_star = (cal.c_f * rho0).max(2.0 * cfg.data.t1);
    let t0 = cfg.t0.unwrap_or(t_star + lambda * rho0);
    let modulus = theoretical_modulus(t0, cfg.data.t1, rho0, lambda, &h, cal.c_f, cal.c_k, cal.c_modulus)?;
    let (h_t, h_t1) = (h(cfg.t_end), h(cfg.data.t1));
    let mut records = Vec::with_capacity(rungs.len());
    for (&(id, amp, c), r) in rungs.iter().zip(results) {
        let (eps, dh, dm) = r?;
        let mu = mu_for(eps, cfg.t_end);
        let sched = if eps > 0.0 && eps < 1.0 { sigma_of_epsilon(eps, t0, rho0, base.dim, cal, &h).ok() } else { None };
        let om1 = sched
            .as_ref()
            .map(|s| omega1(s.omega, modulus.t0_bar, rho0, modulus.h_t0_bar, modulus.ln_k0, cal.c_modulus));
        records.push(StabilityRecord {
            perturbation_id: id,
            amplitude: amp,
            center_deg: c,
            epsilon: eps,
            d_hausdorff: dh,
            d_modified: dm,
            t_used: cfg.t_end,
            mu_used: if eps > 0.0 { mu.mu } else { 0.0 },
            mu_capped: eps > 0.0 && mu.capped,
            h_t,
            h_t1,
            sigma_eps: sched.as_ref().map(|s| s.sigma),
            ln_t_eps: sched.as_ref().map(|s| s.t_eps.ln_t),
            omega: sched.as_ref().map(|s| s.omega),
            omega1: om1,
            k0: modulus.k0,
            ln_k0: modulus.ln_k0,
            script_f: modulus.script_f,
        });
    }
    Ok(StabilityRun {
        records,
        modulus,
        base_nodes: u1.grid.len(),
        dt: u1.dt,
        steps: u1.steps,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.12e}")).unwrap_or_default()
}

/// One row per record; the fit (or the reason it is unavailable) goes into a `#` footer.
pub fn write_stability_csv<W: std::io::Write>(
    records: &[StabilityRecord],
    fit: Result<&FitReport, &StabilityError>,
    mut out: W,
) -> Result<(), StabilityError> {
    let io = |e: std::io::Error| StabilityError::Io(e.to_string());
    writeln!(
        out,
        "# exploratory fit; T_used is the simulated desk-scale horizon, far below the schedule horizon T(eps) reported as ln_T_eps"
    )
    .map_err(io)?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        let err = |e: csv::Error| StabilityError::Io(e.to_string());
        w.write_record([
            "perturbation_id",
            "amplitude",
            "epsilon",
            "d_hausdorff",
            "d_modified",
            "T_used",
            "mu_used",
            "sigma_eps",
            "omega",
            "omega1",
            "K0",
            "ln_K0",
            "ln_T_eps",
            "F_script",
            "H_T",
            "H_t1",
            "mu_capped",
        ])
        .map_err(err)?;
        for r in records {
            w.write_record([
                r.perturbation_id.to_string(),
                format!("{:.12e}", r.amplitude),
                format!("{:.12e}", r.epsilon),
                format!("{:.12e}", r.d_hausdorff),
                format!("{:.12e}", r.d_modified),
                format!("{:.12e}", r.t_used),
                format!("{:.12e}", r.mu_used),
                opt(r.sigma_eps),
                opt(r.omega),
                opt(r.omega1),
                format!("{:.12e}", r.k0),
                format!("{:.12e}", r.ln_k0),
                opt(r.ln_t_eps),
                format!("{:.12e}", r.script_f),
                format!("{:.12e}", r.h_t),
                format!("{:.12e}", r.h_t1),
                r.mu_capped.to_string(),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(io)?;
    }
    match fit {
        Ok(f) => {
            writeln!(out, "# fit log: d_H = a*rho0*|ln eps|^(-b), a = {:.12e}, b = {:.12e}, rms = {:.6e}", f.a, f.b, f.residual_log)
                .map_err(io)?;
            writeln!(
                out,
                "# fit power: d_H = a'*eps^b', a' = {:.12e}, b' = {:.12e}, rms = {:.6e}",
                f.a_power, f.b_power, f.residual_power
            )
            .map_err(io)?;
            writeln!(out, "# residual ratio log/power = {:.6e}, records used = {}", f.ratio, f.used).map_err(io)?;
        }
        Err(e) => writeln!(out, "# fit unavailable: {e}").map_err(io)?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> StabilityConfig {
        StabilityConfig {
            domain: DiskSpec { vertices: 128, ..Default::default() },
            cells: 32,
            t_end: 5.0,
            distance_resolution: 0.02,
            perturbation: PerturbationSpec { amplitudes: vec![0.0, 0.2], ..Default::default() },
            ..Default::default()
        }
    }

    #[test]
    fn zero_rung_and_determinism() {
        let a = AnisotropyField::identity();
        let r1 = run_stability_experiment(&small(), &a, 7).unwrap();
        assert_eq!(r1.records[0].epsilon, 0.0);
        assert_eq!(r1.records[0].d_hausdorff, 0.0);
        assert!(r1.records[1].epsilon > 0.0 && r1.records[1].d_hausdorff > 0.0);
        let r2 = run_stability_experiment(&small(), &a, 7).unwrap();
        let (mut b1, mut b2) = (Vec::new(), Vec::new());
        let fit = Err(StabilityError::InsufficientData { usable: 1 });
        write_stability_csv(&r1.records, fit.as_ref(), &mut b1).unwrap();
        write_stability_csv(&r2.records, fit.as_ref(), &mut b2).unwrap();
        assert_eq!(b1, b2);
        assert!(String::from_utf8(b1).unwrap().contains("# fit unavailable"));
    }

    #[test]
    fn dent_profile() {
        assert_eq!(bump(0.0, PI, 0.5), 0.0);
        assert!((bump(PI, PI, 0.5) - 1.0).abs() < 1e-15);
        assert!((bump(-PI + 0.1, PI - 0.1, 1.0) - bump(PI - 0.1, PI + 0.1, 1.0)).abs() < 1e-15);
    }
}
