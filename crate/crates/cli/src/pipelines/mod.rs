mod chain;
mod fbi_check;
mod solve;
mod stability;
mod three_sphere;

pub use chain::run_chain;
pub use fbi_check::run_fbi_check;
pub use solve::run_solve;
pub use stability::run_stability;
pub use three_sphere::run_three_sphere;

use std::fs::File;
use std::io::BufWriter;

use wavescope_core::geometry::{Domain, Point};
use wavescope_core::wave::{solve_ibvp, AnisotropyField, BoundaryData, GridSpec, WaveField};

use crate::config::{DomainSpec, RunConfig};
use crate::error::CliError;
use crate::manifest::Summary;
use crate::output::{sha256_hex, OutputDir};

pub struct Ctx<'a> {
    pub cfg: &'a RunConfig,
    pub out: &'a mut OutputDir,
    pub summary: &'a mut Summary,
}

impl Ctx<'_> {
    pub fn create(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        let path = self.out.path(name)?;
        let f = File::create(&path).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        Ok(BufWriter::new(f))
    }
}

pub(crate) fn field_sha256(values: &[f64]) -> String {
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    sha256_hex(&bytes)
}

/// Centre used to place angular boundary bumps.
fn data_center(cfg: &RunConfig, domain: &Domain) -> Point {
    match &cfg.domain {
        DomainSpec::Disk(d) => d.center,
        _ => {
            let b = domain.bbox();
            [0.5 * (b.min[0] + b.max[0]), 0.5 * (b.min[1] + b.max[1])]
        }
    }
}

pub(crate) struct Solved {
    pub domain: Domain,
    pub a: AnisotropyField,
    pub bdata: BoundaryData,
    pub u: WaveField,
}

/// Builds the configured domain, data and grid and solves to `[solve] t_end`.
pub(crate) fn solve_configured(cfg: &RunConfig) -> Result<Solved, CliError> {
    let domain = cfg.build_domain()?;
    let mut a = cfg.anisotropy.build()?;
    a.rho0 = domain.rho0;
    let bdata = BoundaryData::new(&domain, cfg.boundary.source(data_center(cfg, &domain)), cfg.boundary.t1())?;
    let mut spec = GridSpec::cells(&domain, cfg.grid.cells);
    spec.c_cfl = cfg.calibration.c_cfl;
    spec.store_every = cfg.grid.store_every;
    let u = solve_ibvp(&domain, &a, &bdata, cfg.solve.t_end, &spec)?;
    Ok(Solved { domain, a, bdata, u })
}
