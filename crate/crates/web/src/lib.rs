//! Browser bindings: a wave heatmap on the disk, the nested cone chain, and the
//! three-sphere exponent as a function of β. Each export is a thin wrapper over a
//! plain function so the numerics are tested natively.

use wasm_bindgen::prelude::*;
use wavescope_core::geometry::{cone_ball_chain, cone_params_for_varsigma};
use wavescope_core::propagation::{cone_ratio, three_sphere_exponent, varsigma0, ThreeSphereParams};
use wavescope_core::stability::{BoundarySpec, DiskSpec};
use wavescope_core::wave::{solve_ibvp, AnisotropyField, BoundaryData, GridSpec};

/// Stored levels of a disk solve, flattened `[frame][row][col]`, NaN outside the disk.
#[wasm_bindgen]
pub struct WaveFrames {
    nx: usize,
    ny: usize,
    times: Vec<f64>,
    values: Vec<f64>,
    max_abs: f64,
}

#[wasm_bindgen]
impl WaveFrames {
    #[wasm_bindgen(getter)]
    pub fn nx(&self) -> usize {
        self.nx
    }

    #[wasm_bindgen(getter)]
    pub fn ny(&self) -> usize {
        self.ny
    }

    #[wasm_bindgen(getter)]
    pub fn max_abs(&self) -> f64 {
        self.max_abs
    }

    pub fn times(&self) -> Vec<f64> {
        self.times.clone()
    }

    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }
}

pub fn wave_frames(cells: usize, t_end: f64, a11: f64, frames: usize) -> Result<WaveFrames, String> {
    if !(8..=160).contains(&cells) || !(t_end > 0.0 && t_end <= 8.0) || !(0.25..=4.0).contains(&a11) {
        return Err(format!("need 8 ≤ cells ≤ 160, 0 < T ≤ 8, 1/4 ≤ a11 ≤ 4 (got {cells}, {t_end}, {a11})"));
    }
    let disk = DiskSpec { vertices: 256, ..DiskSpec::default() };
    let domain = disk.build().map_err(|e| e.to_string())?;
    let data = BoundarySpec::default();
    let bd = BoundaryData::new(&domain, data.source(disk.center), data.t1).map_err(|e| e.to_string())?;
    let mut a = AnisotropyField::diagonal(a11, 1.0);
    a.rho0 = domain.rho0;
    let mut spec = GridSpec::cells(&domain, cells);
    spec.store_every = 1;
    let u = solve_ibvp(&domain, &a, &bd, t_end, &spec).map_err(|e| e.to_string())?;
    let n = u.history.len();
    let frames = frames.clamp(1, n);
    let mut out = WaveFrames { nx: u.grid.nx, ny: u.grid.ny, times: Vec::new(), values: Vec::new(), max_abs: 0.0 };
    for k in 0..frames {
        let idx = if frames == 1 { n - 1 } else { k * (n - 1) / (frames - 1) };
        out.times.push(u.times[idx]);
        out.max_abs = u.history[idx].iter().fold(out.max_abs, |m, v| m.max(v.abs()));
        out.values.extend(u.grid.to_full(&u.history[idx], f64::NAN));
    }
    Ok(out)
}

#[wasm_bindgen(js_name = waveFrames)]
pub fn wave_frames_js(cells: usize, t_end: f64, a11: f64, frames: usize) -> Result<WaveFrames, JsError> {
    wave_frames(cells, t_end, a11, frames).map_err(|e| JsError::new(&e))
}

/// Cone chain in cap units: per ball `[w_k, r_k, ρ_k, R_k]`, then the cone slope L,
/// the cap height, ς, χ and the contraction ratio χ²/θ̃₀.
pub fn cone_chain(beta1: f64, varsigma: f64, balls: usize) -> Result<Vec<f64>, String> {
    if !(beta1 > 0.0) || !(1..=40).contains(&balls) {
        return Err(format!("need β₁ > 0 and 1 ≤ balls ≤ 40 (got {beta1}, {balls})"));
    }
    let vs = if varsigma > 0.0 { varsigma } else { varsigma0(beta1).map_err(|e| e.to_string())? };
    let (s, l) = cone_params_for_varsigma(vs, 1.0);
    let chain = cone_ball_chain(s, l, 1.0, vs, balls).map_err(|e| e.to_string())?;
    let cone = chain.cone.expect("cone chains carry their parameters");
    let cap = cone.cap();
    let mut out = Vec::with_capacity(4 * balls + 5);
    for k in 0..chain.len() {
        out.extend([chain.centers[k][1], chain.small_radii[k], chain.mid_radii[k], chain.large_radii[k]].map(|v| v / cap));
    }
    let (_, ratio, _) = cone_ratio(vs, beta1).map_err(|e| e.to_string())?;
    out.extend([l, 1.0, vs, cone.chi, ratio]);
    Ok(out)
}

#[wasm_bindgen(js_name = coneChain)]
pub fn cone_chain_js(beta1: f64, varsigma: f64, balls: usize) -> Result<Vec<f64>, JsError> {
    cone_chain(beta1, varsigma, balls).map_err(|e| JsError::new(&e))
}

/// Interleaved `(β, θ₀(β), ln C₀(β))` on `samples` points of (0, β_max].
pub fn theta0_curve(r1: f64, r2: f64, r3: f64, delta: f64, beta_max: f64, samples: usize) -> Result<Vec<f64>, String> {
    if !(beta_max > 0.0) || !(2..=2000).contains(&samples) {
        return Err(format!("need β_max > 0 and 2 ≤ samples ≤ 2000 (got {beta_max}, {samples})"));
    }
    let mut out = Vec::with_capacity(3 * samples);
    for k in 1..=samples {
        let beta = beta_max * k as f64 / samples as f64;
        let (theta, c0) =
            three_sphere_exponent(&ThreeSphereParams::new(r1, r2, r3, delta, beta)).map_err(|e| e.to_string())?;
        out.extend([beta, theta, c0.ln()]);
    }
    Ok(out)
}

#[wasm_bindgen(js_name = theta0Curve)]
pub fn theta0_curve_js(r1: f64, r2: f64, r3: f64, delta: f64, beta_max: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    theta0_curve(r1, r2, r3, delta, beta_max, samples).map_err(|e| JsError::new(&e))
}
