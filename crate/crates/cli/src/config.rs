//! Run configuration: TOML with nested sections, every key optional except where a
//! pipeline needs it. Unknown keys are rejected; defaults are filled and reported.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wavescope_core::geometry::{
    build_graph_domain, packing_constant, read_charts_file, Domain, DomainConstants, DomainExport, DomainOptions,
};
use wavescope_core::stability::{BoundarySpec, DiskSpec, PerturbationSpec, ScheduleCalibration, StabilityConfig};
use wavescope_core::wave::{sym_eigen, AnisotropyField, BoundarySource};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Solve,
    FbiCheck,
    ThreeSphere,
    Chain,
    Stability,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Solve => "solve",
            Subcommand::FbiCheck => "fbi-check",
            Subcommand::ThreeSphere => "three-sphere",
            Subcommand::Chain => "chain",
            Subcommand::Stability => "stability",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RectangleSpec {
    pub min: [f64; 2],
    pub max: [f64; 2],
    pub per_side: usize,
    pub rho0: f64,
    pub e: f64,
}

impl Default for RectangleSpec {
    fn default() -> Self {
        RectangleSpec { min: [0.0, 0.0], max: [1.0, 1.0], per_side: 4, rho0: 0.1, e: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportSpec {
    /// A domain previously exported as TOML.
    pub path: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartsSpec {
    /// Chart samples CSV (chart_id, u1, phi).
    pub path: PathBuf,
    pub rho0: f64,
    pub e: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    Disk(DiskSpec),
    Rectangle(RectangleSpec),
    Export(ExportSpec),
    Charts(ChartsSpec),
}

impl Default for DomainSpec {
    fn default() -> Self {
        DomainSpec::Disk(DiskSpec::default())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnisotropySpec {
    Identity {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
    },
    Diagonal {
        a11: f64,
        a22: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
    },
    Constant {
        a11: f64,
        a12: f64,
        a22: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
    },
}

impl Default for AnisotropySpec {
    fn default() -> Self {
        AnisotropySpec::Identity { lambda: None }
    }
}

impl AnisotropySpec {
    fn matrix(&self) -> [[f64; 2]; 2] {
        match *self {
            AnisotropySpec::Identity { .. } => [[1.0, 0.0], [0.0, 1.0]],
            AnisotropySpec::Diagonal { a11, a22, .. } => [[a11, 0.0], [0.0, a22]],
            AnisotropySpec::Constant { a11, a12, a22, .. } => [[a11, a12], [a12, a22]],
        }
    }

    fn declared_lambda(&self) -> Option<f64> {
        match *self {
            AnisotropySpec::Identity { lambda } | AnisotropySpec::Diagonal { lambda, .. } => lambda,
            AnisotropySpec::Constant { lambda, .. } => lambda,
        }
    }

    /// The field, carrying the declared λ when one is given (it must be admissible).
    pub fn build(&self) -> Result<AnisotropyField, CliError> {
        let m = self.matrix();
        let (lo, _) = sym_eigen(m);
        if !(lo > 0.0) {
            return Err(CliError::validation("anisotropy.positive_definite", format!("smallest eigenvalue {lo} ≤ 0")));
        }
        let mut f = AnisotropyField::constant(m);
        if let Some(l) = self.declared_lambda() {
            if !(l > 0.0 && l <= 1.0) {
                return Err(CliError::validation("anisotropy.lambda_range", format!("λ = {l} must lie in (0, 1]")));
            }
            if l > f.lambda * (1.0 + 1e-12) {
                return Err(CliError::validation(
                    "anisotropy.lambda_admissible",
                    format!("declared λ = {l} exceeds the ellipticity {} of the matrix", f.lambda),
                ));
            }
            f.lambda = l;
        }
        Ok(f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlaneWaveSpec {
    pub amp: f64,
    pub slowness: [f64; 2],
    pub power: u32,
    pub t1: f64,
}

impl Default for PlaneWaveSpec {
    fn default() -> Self {
        PlaneWaveSpec { amp: 1.0, slowness: [1.0, 0.0], power: 6, t1: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZeroSpec {
    pub t1: f64,
}

impl Default for ZeroSpec {
    fn default() -> Self {
        ZeroSpec { t1: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryDataSpec {
    /// Angular bump on the accessible boundary times a polynomial–exponential pulse.
    Bump(BoundarySpec),
    PlaneWave(PlaneWaveSpec),
    Zero(ZeroSpec),
}

impl Default for BoundaryDataSpec {
    fn default() -> Self {
        BoundaryDataSpec::Bump(BoundarySpec::default())
    }
}

impl BoundaryDataSpec {
    pub fn t1(&self) -> f64 {
        match self {
            BoundaryDataSpec::Bump(b) => b.t1,
            BoundaryDataSpec::PlaneWave(p) => p.t1,
            BoundaryDataSpec::Zero(z) => z.t1,
        }
    }

    pub fn source(&self, center: [f64; 2]) -> BoundarySource {
        match self {
            BoundaryDataSpec::Bump(b) => b.source(center),
            BoundaryDataSpec::PlaneWave(p) => {
                BoundarySource::PlaneWave { amp: p.amp, slowness: p.slowness, power: p.power }
            }
            BoundaryDataSpec::Zero(_) => BoundarySource::Zero,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    /// Grid intervals across the longer side of the domain box.
    pub cells: usize,
    /// Store every k-th time level.
    pub store_every: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { cells: 96, store_every: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Calibration {
    pub c_f: f64,
    pub c_k: f64,
    pub c_carleman: f64,
    pub beta1: f64,
    pub vartheta2: f64,
    pub c_cfl: f64,
    /// Relative-graph margin as a fraction of ρ₀.
    pub d0: f64,
    /// Packing constant of the path-chain length bound.
    pub c_n: f64,
    /// Optional second declaration of ρ₀; must agree with the domain.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho0: Option<f64>,
}

impl Default for Calibration {
    fn default() -> Self {
        Calibration {
            c_f: 2.0,
            c_k: 1.0,
            c_carleman: 1.0,
            beta1: 4.0,
            vartheta2: 0.5,
            c_cfl: 0.5,
            d0: 0.1,
            c_n: packing_constant(2),
            rho0: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// File name of the stability CSV inside `dir`.
    pub csv: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("wavescope-out"), csv: "stability.csv".into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveSection {
    pub t_end: f64,
    /// Number of evenly spaced stored levels written as binary snapshots (first and last included).
    pub snapshots: usize,
}

impl Default for SolveSection {
    fn default() -> Self {
        SolveSection { t_end: 2.0, snapshots: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FbiSection {
    pub mu: Vec<f64>,
    pub tau: f64,
    pub ys: Vec<f64>,
    /// Residual evaluated at distance ≥ margin·ρ₀ from the boundary.
    pub margin: f64,
    pub write_fields: bool,
}

impl Default for FbiSection {
    fn default() -> Self {
        FbiSection { mu: vec![10.0, 40.0], tau: 0.5, ys: vec![-0.3, 0.0, 0.3], margin: 1.0, write_fields: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThreeSphereSection {
    pub count: usize,
    pub max_degree: usize,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub delta: f64,
    /// Defaults to calibration.beta1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Largest accepted implied C₀; defaults to C₀ itself.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<f64>,
    /// Ball centres are drawn uniformly from [−spread, spread]².
    pub center_spread: f64,
}

impl Default for ThreeSphereSection {
    fn default() -> Self {
        ThreeSphereSection {
            count: 100,
            max_degree: 6,
            r1: 0.25,
            r2: 0.5,
            r3: 1.0,
            delta: 0.2,
            beta: None,
            cap: None,
            center_spread: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConeChainSpec {
    /// Defaults to the largest contracting ς for β₁.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub varsigma: Option<f64>,
    pub c_star: f64,
    pub balls: usize,
    pub alpha0: f64,
    pub mu: f64,
    pub t: f64,
}

impl Default for ConeChainSpec {
    fn default() -> Self {
        ConeChainSpec { varsigma: None, c_star: 1.0, balls: 8, alpha0: 1e-6, mu: 100.0, t: 10.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathChainSpec {
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub r: f64,
    pub alpha0: f64,
}

impl Default for PathChainSpec {
    fn default() -> Self {
        PathChainSpec { start: [0.0, 0.6], end: [0.0, -0.6], r: 0.1, alpha0: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChainSection {
    Cone(ConeChainSpec),
    Path(PathChainSpec),
}

impl Default for ChainSection {
    fn default() -> Self {
        ChainSection::Cone(ConeChainSpec::default())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StabilitySection {
    pub t_end: f64,
    pub distance_resolution: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    pub sigma_bar: f64,
    pub phi_scale: f64,
    pub t_sigma_half_exponent: bool,
    pub c_modulus: f64,
    pub perturbation: PerturbationSpec,
}

impl Default for StabilitySection {
    fn default() -> Self {
        let s = StabilityConfig::default();
        StabilitySection {
            t_end: s.t_end,
            distance_resolution: s.distance_resolution,
            t0: None,
            sigma_bar: s.schedule.sigma_bar,
            phi_scale: s.schedule.phi_scale,
            t_sigma_half_exponent: s.schedule.t_sigma_half_exponent,
            c_modulus: s.schedule.c_modulus,
            perturbation: s.perturbation,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subcommand: Option<Subcommand>,
    pub seed: u64,
    pub output: OutputSection,
    pub domain: DomainSpec,
    pub anisotropy: AnisotropySpec,
    pub boundary: BoundaryDataSpec,
    pub grid: GridSection,
    pub calibration: Calibration,
    pub solve: SolveSection,
    pub fbi: FbiSection,
    pub three_sphere: ThreeSphereSection,
    pub chain: ChainSection,
    pub stability: StabilitySection,
}

/// A validated configuration plus the dotted keys that were filled from defaults.
#[derive(Clone, Debug)]
pub struct ParsedConfig {
    pub config: RunConfig,
    pub defaulted: Vec<String>,
}

fn line_of(text: &str, offset: usize) -> (usize, String) {
    let upto = &text[..offset.min(text.len())];
    let line = upto.matches('\n').count() + 1;
    let section = upto
        .lines()
        .filter_map(|l| {
            let t = l.trim();
            (t.starts_with('[') && t.ends_with(']')).then(|| t.trim_matches(|c| c == '[' || c == ']').to_string())
        })
        .last()
        .unwrap_or_else(|| "root".into());
    (line, section)
}

fn parse_error(text: &str, e: toml::de::Error) -> CliError {
    let (line, section) = e.span().map(|s| line_of(text, s.start)).unwrap_or((0, "root".into()));
    CliError::Parse { section, line, message: e.message().to_string() }
}

fn collect_keys(v: &toml::Value, prefix: &str, out: &mut Vec<String>) {
    if let toml::Value::Table(t) = v {
        for (k, v) in t {
            let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            if v.is_table() {
                collect_keys(v, &key, out);
            } else {
                out.push(key);
            }
        }
    }
}

fn has_key(v: &toml::Value, dotted: &str) -> bool {
    let mut cur = v;
    for part in dotted.split('.') {
        match cur.get(part) {
            Some(n) => cur = n,
            None => return false,
        }
    }
    true
}

/// Parses TOML text. A manifest written by a previous run is accepted too: its
/// `[config]` table is the configuration it was produced from.
pub fn parse_config_str(text: &str, base_dir: &Path) -> Result<ParsedConfig, CliError> {
    let raw: toml::Value = toml::from_str(text).map_err(|e| parse_error(text, e))?;
    let (raw, config) = if raw.get("manifest").is_some() {
        let inner = raw
            .get("config")
            .cloned()
            .ok_or_else(|| CliError::validation("manifest.config", "manifest has no [config] table"))?;
        let c: RunConfig = inner.clone().try_into().map_err(|e: toml::de::Error| CliError::Parse {
            section: "config".into(),
            line: 0,
            message: e.message().to_string(),
        })?;
        (inner, c)
    } else {
        let c: RunConfig = toml::from_str(text).map_err(|e| parse_error(text, e))?;
        (raw, c)
    };
    let mut config = config;
    resolve_paths(&mut config, base_dir);
    let full = toml::Value::try_from(&config).map_err(|e| CliError::Output(e.to_string()))?;
    let mut keys = Vec::new();
    collect_keys(&full, "", &mut keys);
    let defaulted = keys.into_iter().filter(|k| !has_key(&raw, k)).collect();
    validate(&config)?;
    Ok(ParsedConfig { config, defaulted })
}

pub fn parse_config(path: &Path) -> Result<ParsedConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Parse {
        section: "root".into(),
        line: 0,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config_str(&text, &base)
}

fn absolutize(p: &mut PathBuf, base: &Path) {
    if p.is_relative() {
        let joined = base.join(&*p);
        *p = joined.canonicalize().unwrap_or(joined);
    }
}

fn resolve_paths(c: &mut RunConfig, base: &Path) {
    match &mut c.domain {
        DomainSpec::Export(e) => absolutize(&mut e.path, base),
        DomainSpec::Charts(ch) => absolutize(&mut ch.path, base),
        _ => {}
    }
}

fn check(cond: bool, invariant: &str, message: String) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::validation(invariant, message))
    }
}

fn read_export(path: &Path) -> Result<DomainExport, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::validation("domain.path_exists", format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Parse {
        section: "domain export".into(),
        line: e.span().map(|s| line_of(&text, s.start).0).unwrap_or(0),
        message: e.message().to_string(),
    })
}

/// The single ρ₀ of the run (declared by the domain, optionally repeated in the calibration).
pub fn rho0_declarations(c: &RunConfig) -> Result<Vec<(String, f64)>, CliError> {
    let mut out = Vec::new();
    match &c.domain {
        DomainSpec::Disk(d) => out.push(("domain.rho0".into(), d.rho0)),
        DomainSpec::Rectangle(r) => out.push(("domain.rho0".into(), r.rho0)),
        DomainSpec::Charts(ch) => out.push(("domain.rho0".into(), ch.rho0)),
        DomainSpec::Export(e) => out.push((format!("{} rho0", e.path.display()), read_export(&e.path)?.rho0)),
    }
    if let Some(r) = c.calibration.rho0 {
        out.push(("calibration.rho0".into(), r));
    }
    Ok(out)
}

pub fn validate(c: &RunConfig) -> Result<(), CliError> {
    let k = &c.calibration;
    check(k.c_f >= 2.0, "calibration.c_f", format!("C_F = {} must be ≥ 2", k.c_f))?;
    check(k.c_k >= 0.0, "calibration.c_k", format!("C_K = {} must be ≥ 0", k.c_k))?;
    check(k.c_carleman > 0.0, "calibration.c_carleman", format!("C = {} must be > 0", k.c_carleman))?;
    check(k.beta1 > 0.0 && k.beta1.is_finite(), "calibration.beta1", format!("β₁ = {} must be > 0", k.beta1))?;
    check(k.vartheta2 > 0.0 && k.vartheta2 <= 1.0, "calibration.vartheta2", format!("ϑ₂ = {} must lie in (0, 1]", k.vartheta2))?;
    check(k.c_cfl > 0.0 && k.c_cfl <= 1.0, "calibration.c_cfl", format!("c_cfl = {} must lie in (0, 1]", k.c_cfl))?;
    check(k.d0 > 0.0 && k.d0 <= 1.0, "calibration.d0", format!("d₀ = {} must lie in (0, 1]", k.d0))?;
    check(k.c_n > 0.0, "calibration.c_n", format!("c_n = {} must be > 0", k.c_n))?;
    check(c.grid.cells >= 8, "grid.cells", format!("cells = {} must be ≥ 8", c.grid.cells))?;
    check(c.grid.store_every >= 1, "grid.store_every", "store_every must be ≥ 1".into())?;
    check(c.boundary.t1() > 0.0, "boundary.t1", format!("t₁ = {} must be > 0", c.boundary.t1()))?;
    check(c.solve.t_end > 0.0, "solve.t_end", format!("T = {} must be > 0", c.solve.t_end))?;
    check(
        !c.output.csv.is_empty() && !c.output.csv.contains(['/', '\\']) && c.output.csv != "..",
        "output.csv",
        format!("`{}` must be a plain file name", c.output.csv),
    )?;
    // λ ∈ (0, 1] and admissible for the matrix
    c.anisotropy.build()?;

    let decl = rho0_declarations(c)?;
    for (name, v) in &decl {
        check(*v > 0.0 && v.is_finite(), "rho0.positive", format!("{name} = {v} must be > 0"))?;
    }
    if let Some((first, v0)) = decl.first() {
        for (name, v) in &decl[1..] {
            check(
                (v - v0).abs() <= 1e-12 * v0.abs(),
                "rho0.declared_once",
                format!("{first} = {v0} conflicts with {name} = {v}"),
            )?;
        }
    }
    match &c.domain {
        DomainSpec::Export(e) => check(e.path.is_file(), "domain.path_exists", format!("{} not found", e.path.display()))?,
        DomainSpec::Charts(ch) => {
            check(ch.path.is_file(), "domain.path_exists", format!("{} not found", ch.path.display()))?;
            check(ch.e > 0.0, "domain.e", format!("E = {} must be > 0", ch.e))?;
        }
        DomainSpec::Disk(d) => {
            check(d.vertices >= 16, "domain.vertices", format!("vertices = {} must be ≥ 16", d.vertices))?;
            check(d.radius > 0.0 && d.e > 0.0, "domain.radius", format!("radius = {}, E = {}", d.radius, d.e))?;
        }
        DomainSpec::Rectangle(r) => check(
            r.max[0] > r.min[0] && r.max[1] > r.min[1] && r.per_side >= 1 && r.e > 0.0,
            "domain.rectangle",
            format!("min {:?}, max {:?}, per_side {}", r.min, r.max, r.per_side),
        )?,
    }
    let f = &c.fbi;
    check(!f.mu.is_empty() && f.mu.iter().all(|m| *m > 0.0), "fbi.mu", "μ list must be non-empty and positive".into())?;
    check(!f.ys.is_empty(), "fbi.ys", "y grid must be non-empty".into())?;
    let s = &c.stability;
    check(s.t_end > 0.0, "stability.t_end", format!("T = {} must be > 0", s.t_end))?;
    check(s.distance_resolution > 0.0, "stability.distance_resolution", "must be > 0".into())?;
    check(s.sigma_bar > 0.0 && s.phi_scale > 0.0, "stability.sigma_bar", "σ̄ and C_Φ must be > 0".into())?;
    Ok(())
}

impl RunConfig {
    pub fn build_domain(&self) -> Result<Domain, CliError> {
        let opts = DomainOptions::default();
        Ok(match &self.domain {
            DomainSpec::Disk(d) => d.build()?,
            DomainSpec::Rectangle(r) => {
                Domain::rectangle(r.min, r.max, r.per_side, DomainConstants::new(r.rho0, r.e), &opts)?
            }
            DomainSpec::Export(e) => Domain::from_export(&read_export(&e.path)?, &opts)?,
            DomainSpec::Charts(ch) => build_graph_domain(read_charts_file(&ch.path)?, ch.rho0, ch.e, &opts)?,
        })
    }

    /// The stability experiment is defined on a disk with an angular dent ladder.
    pub fn stability_config(&self) -> Result<StabilityConfig, CliError> {
        let DomainSpec::Disk(disk) = &self.domain else {
            return Err(CliError::validation("stability.domain_kind", "the stability experiment needs domain.kind = \"disk\""));
        };
        let BoundaryDataSpec::Bump(data) = &self.boundary else {
            return Err(CliError::validation("stability.boundary_kind", "the stability experiment needs boundary.kind = \"bump\""));
        };
        let s = &self.stability;
        let k = &self.calibration;
        Ok(StabilityConfig {
            domain: DiskSpec { ..disk.clone() },
            data: data.clone(),
            perturbation: s.perturbation.clone(),
            t_end: s.t_end,
            cells: self.grid.cells,
            c_cfl: k.c_cfl,
            store_every: self.grid.store_every,
            distance_resolution: s.distance_resolution,
            schedule: ScheduleCalibration {
                sigma_bar: s.sigma_bar,
                vartheta2: k.vartheta2,
                phi_scale: s.phi_scale,
                t_sigma_half_exponent: s.t_sigma_half_exponent,
                c_f: k.c_f,
                c_k: k.c_k,
                c_modulus: s.c_modulus,
            },
            t0: s.t0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ParsedConfig, CliError> {
        parse_config_str(text, Path::new("."))
    }

    #[test]
    fn minimal_config_lists_defaults() {
        let p = parse("").unwrap();
        assert_eq!(p.config, RunConfig::default());
        for key in ["seed", "grid.cells", "calibration.c_f", "domain.kind", "domain.rho0", "stability.perturbation.amplitudes"] {
            assert!(p.defaulted.iter().any(|k| k == key), "{key} missing from {:?}", p.defaulted);
        }
        let q = parse("seed = 3\n[grid]\ncells = 64\n").unwrap();
        assert!(!q.defaulted.iter().any(|k| k == "seed" || k == "grid.cells"));
        assert!(q.defaulted.iter().any(|k| k == "grid.store_every"));
    }

    #[test]
    fn lambda_out_of_range() {
        let e = parse("[anisotropy]\nkind = \"identity\"\nlambda = 1.5\n").unwrap_err();
        assert!(matches!(&e, CliError::Validation { invariant, .. } if invariant == "anisotropy.lambda_range"), "{e}");
        let e = parse("[anisotropy]\nkind = \"diagonal\"\na11 = 4.0\na22 = 1.0\nlambda = 0.5\n").unwrap_err();
        assert!(matches!(&e, CliError::Validation { invariant, .. } if invariant == "anisotropy.lambda_admissible"));
        parse("[anisotropy]\nkind = \"diagonal\"\na11 = 4.0\na22 = 1.0\nlambda = 0.25\n").unwrap();
    }

    #[test]
    fn conflicting_rho0() {
        let e = parse("[domain]\nkind = \"disk\"\nrho0 = 0.25\n[calibration]\nrho0 = 0.3\n").unwrap_err();
        assert!(matches!(&e, CliError::Validation { invariant, .. } if invariant == "rho0.declared_once"), "{e}");
        parse("[domain]\nkind = \"disk\"\nrho0 = 0.25\n[calibration]\nrho0 = 0.25\n").unwrap();
    }

    #[test]
    fn parse_errors_carry_location() {
        match parse("seed = 1\n[grid]\ncells = 64\nbogus = 2\n").unwrap_err() {
            CliError::Parse { section, line, .. } => {
                assert_eq!(section, "grid");
                assert_eq!(line, 4);
            }
            e => panic!("{e}"),
        }
        assert!(matches!(parse("[grid\n").unwrap_err(), CliError::Parse { line: 1, .. }));
        assert!(matches!(parse("[domain]\nkind = \"disk\"\nwidth = 2\n").unwrap_err(), CliError::Parse { .. }));
    }

    #[test]
    fn missing_file_is_a_validation_error() {
        let e = parse("[domain]\nkind = \"export\"\npath = \"/nonexistent/domain.toml\"\n").unwrap_err();
        assert!(matches!(e, CliError::Validation { .. }), "{e}");
    }

    #[test]
    fn calibration_ranges() {
        assert!(parse("[calibration]\nc_f = 1.5\n").is_err());
        assert!(parse("[calibration]\nvartheta2 = 0.0\n").is_err());
        assert!(parse("[calibration]\nc_cfl = 1.2\n").is_err());
    }
}
