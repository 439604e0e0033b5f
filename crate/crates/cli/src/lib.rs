//! `wavescope`: configuration-driven runner for the solver, transform, propagation
//! and stability pipelines. Every run writes its outputs plus a TOML manifest.

pub mod config;
pub mod error;
pub mod manifest;
pub mod output;
pub mod pipelines;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;

use config::{parse_config, parse_config_str, ParsedConfig, Subcommand};
use error::CliError;
use manifest::{Manifest, ManifestHead, Summary, FORMAT};
use output::OutputDir;
use pipelines::Ctx;

#[derive(Debug, Parser)]
#[command(name = "wavescope", version, about = "Wave-equation unique continuation and stability experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration (a manifest from a previous run is accepted too).
    #[arg(long, global = true, visible_alias = "corpus")]
    pub config: Option<PathBuf>,
    /// Output directory; for `stability` a path ending in `.csv` names the CSV itself.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; falls back to WAVESCOPE_THREADS, then to all cores.
    #[arg(long, global = true, env = "WAVESCOPE_THREADS")]
    pub threads: Option<usize>,
    /// Replaces `[grid] cells`.
    #[arg(long, global = true)]
    pub resolution_override: Option<usize>,
}

#[derive(Clone, Copy, Debug, clap::Subcommand)]
pub enum Command {
    /// Solve the boundary value problem; writes the domain, flux, energy and snapshots.
    Solve,
    /// Transform the solution and check growth, residual and concentration.
    FbiCheck,
    /// Verify the three-sphere inequality on random exact solutions.
    ThreeSphere,
    /// Build a ball chain and propagate smallness along it.
    Chain,
    /// Perturbation sweep of the inaccessible boundary with the modulus fit.
    Stability,
}

impl Command {
    fn kind(self) -> Subcommand {
        match self {
            Command::Solve => Subcommand::Solve,
            Command::FbiCheck => Subcommand::FbiCheck,
            Command::ThreeSphere => Subcommand::ThreeSphere,
            Command::Chain => Subcommand::Chain,
            Command::Stability => Subcommand::Stability,
        }
    }
}

/// Where a run writes: directory, stability CSV name and manifest name.
struct Target {
    dir: PathBuf,
    csv: String,
    manifest: String,
}

fn target(cli: &Cli, parsed: &ParsedConfig, kind: Subcommand) -> Result<Target, CliError> {
    let out = &parsed.config.output;
    match &cli.out {
        Some(p) if kind == Subcommand::Stability && p.extension().is_some_and(|e| e == "csv") => {
            let name = p.file_name().and_then(|n| n.to_str()).ok_or_else(|| CliError::Output(format!("bad path {}", p.display())))?;
            let stem = p.file_stem().and_then(|n| n.to_str()).unwrap_or("stability");
            let dir = match p.parent() {
                Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
                _ => PathBuf::from("."),
            };
            Ok(Target { dir, csv: name.to_string(), manifest: format!("{stem}.manifest.toml") })
        }
        Some(p) => Ok(Target { dir: p.clone(), csv: out.csv.clone(), manifest: "manifest.toml".into() }),
        None => Ok(Target { dir: out.dir.clone(), csv: out.csv.clone(), manifest: "manifest.toml".into() }),
    }
}

fn load(cli: &Cli) -> Result<ParsedConfig, CliError> {
    match &cli.config {
        Some(p) => parse_config(p),
        None => parse_config_str("", Path::new(".")),
    }
}

/// Applies command-line overrides and re-validates.
fn resolve(cli: &Cli, mut parsed: ParsedConfig, kind: Subcommand) -> Result<ParsedConfig, CliError> {
    let c = &mut parsed.config;
    if let Some(s) = c.subcommand {
        if s != kind {
            return Err(CliError::validation(
                "subcommand",
                format!("configuration is for `{}`, not `{}`", s.name(), kind.name()),
            ));
        }
    }
    c.subcommand = Some(kind);
    let mut overridden = vec!["subcommand"];
    if let Some(seed) = cli.seed {
        c.seed = seed;
        overridden.push("seed");
    }
    if let Some(cells) = cli.resolution_override {
        c.grid.cells = cells;
        overridden.push("grid.cells");
    }
    if cli.out.is_some() {
        overridden.extend(["output.dir", "output.csv"]);
    }
    parsed.defaulted.retain(|k| !overridden.contains(&k.as_str()));
    config::validate(&parsed.config)?;
    Ok(parsed)
}

fn threads(cli: &Cli) -> Result<usize, CliError> {
    match cli.threads {
        Some(0) => Err(CliError::validation("threads", "thread count must be ≥ 1")),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

fn dispatch(kind: Subcommand, ctx: &mut Ctx<'_>, csv: &str) -> Result<(), CliError> {
    match kind {
        Subcommand::Solve => pipelines::run_solve(ctx),
        Subcommand::FbiCheck => pipelines::run_fbi_check(ctx),
        Subcommand::ThreeSphere => pipelines::run_three_sphere(ctx),
        Subcommand::Chain => pipelines::run_chain(ctx),
        Subcommand::Stability => pipelines::run_stability(ctx, csv),
    }
}

/// Outcome of a run: the manifest path when one was written, and the first error.
pub struct RunOutcome {
    pub manifest: Option<PathBuf>,
    pub error: Option<CliError>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> u8 {
        self.error.as_ref().map_or(0, CliError::exit_code)
    }
}

pub fn execute(cli: &Cli) -> RunOutcome {
    let start = Instant::now();
    let kind = cli.command.kind();
    let fail = |e| RunOutcome { manifest: None, error: Some(e) };
    let parsed = match load(cli).and_then(|p| resolve(cli, p, kind)) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let (n_threads, tgt) = match threads(cli).and_then(|n| Ok((n, target(cli, &parsed, kind)?))) {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    let mut out = match OutputDir::create(&tgt.dir) {
        Ok(o) => o,
        Err(e) => return fail(e),
    };
    let ParsedConfig { mut config, defaulted } = parsed;
    config.output.dir = out.root().to_path_buf();
    config.output.csv = tgt.csv.clone();

    let mut summary = Summary::default();
    let result = match rayon::ThreadPoolBuilder::new().num_threads(n_threads).build() {
        Ok(pool) => pool.install(|| {
            let mut ctx = Ctx { cfg: &config, out: &mut out, summary: &mut summary };
            dispatch(kind, &mut ctx, &tgt.csv)
        }),
        Err(e) => Err(CliError::validation("threads", e.to_string())),
    };

    let head = ManifestHead {
        format: FORMAT.into(),
        subcommand: kind.name().into(),
        status: if result.is_ok() { "ok" } else { "error" }.into(),
        error_category: result.as_ref().err().map(|e| e.category().to_string()),
        error: result.as_ref().err().map(|e| e.to_string()),
        seed: config.seed,
        threads: n_threads,
        wall_seconds: start.elapsed().as_secs_f64(),
        versions: manifest::versions(),
        defaulted,
        outputs: out.files().to_vec(),
        summary: summary.0,
    };
    let m = Manifest { manifest: head, config };
    let written = toml::to_string(&m)
        .map_err(|e| CliError::Output(e.to_string()))
        .and_then(|text| {
            let p = out.path(&tgt.manifest)?;
            std::fs::write(&p, text).map_err(|e| CliError::Output(format!("{}: {e}", p.display())))?;
            Ok(p)
        });
    match (result, written) {
        (Ok(()), Ok(p)) => RunOutcome { manifest: Some(p), error: None },
        (Err(e), Ok(p)) => RunOutcome { manifest: Some(p), error: Some(e) },
        (Ok(()), Err(e)) => fail(e),
        (Err(e), Err(_)) => fail(e),
    }
}

/// Parses `args`, runs, reports on stdout/stderr and returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = execute(&cli);
    if let Some(p) = &outcome.manifest {
        println!("manifest: {}", p.display());
    }
    if let Some(e) = &outcome.error {
        eprintln!("error category={}: {e}", e.category());
    }
    outcome.exit_code()
}
