//! Flat binary snapshots with a `key = value` text header, and flux CSV.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{FluxTrace, WaveError, WaveField};

fn io_err(e: impl std::fmt::Display) -> WaveError {
    WaveError::Io(e.to_string())
}

fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    let mut p = stem.as_os_str().to_owned();
    p.push(ext);
    PathBuf::from(p)
}

/// Little-endian f64 values in row-major (nx × ny) order.
pub fn write_f64_le(path: &Path, values: &[f64]) -> Result<(), WaveError> {
    let mut buf = Vec::with_capacity(values.len() * 8);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, buf).map_err(io_err)
}

pub fn read_f64_le(path: &Path) -> Result<Vec<f64>, WaveError> {
    let raw = fs::read(path).map_err(io_err)?;
    if raw.len() % 8 != 0 {
        return Err(WaveError::Io(format!("{}: length {} is not a multiple of 8", path.display(), raw.len())));
    }
    Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

pub fn write_header(path: &Path, entries: &[(&str, String)]) -> Result<(), WaveError> {
    let mut f = fs::File::create(path).map_err(io_err)?;
    for (k, v) in entries {
        writeln!(f, "{k} = {v}").map_err(io_err)?;
    }
    Ok(())
}

pub fn read_header(path: &Path) -> Result<Vec<(String, String)>, WaveError> {
    let text = fs::read_to_string(path).map_err(io_err)?;
    Ok(text
        .lines()
        .filter_map(|l| l.split_once('=').map(|(k, v)| (k.trim().to_string(), v.trim().to_string())))
        .collect())
}

/// Writes `<stem>.bin` (exterior nodes NaN) and `<stem>.hdr` for stored level `index`.
pub fn write_snapshot(u: &WaveField, index: usize, stem: &Path) -> Result<(PathBuf, PathBuf), WaveError> {
    let snap = u.history.get(index).ok_or_else(|| WaveError::InvalidParameter(format!("no stored level {index}")))?;
    let full = u.grid.to_full(snap, f64::NAN);
    let (bin, hdr) = (with_ext(stem, ".bin"), with_ext(stem, ".hdr"));
    write_f64_le(&bin, &full)?;
    let g = &u.grid;
    write_header(
        &hdr,
        &[
            ("format", "f64-le row-major".into()),
            ("nx", g.nx.to_string()),
            ("ny", g.ny.to_string()),
            ("h", format!("{:e}", g.h)),
            ("dt", format!("{:e}", u.dt)),
            ("origin_x", format!("{:e}", g.origin[0])),
            ("origin_y", format!("{:e}", g.origin[1])),
            ("t_index", index.to_string()),
            ("t", format!("{:e}", u.times[index])),
            ("exterior", "nan".into()),
        ],
    )?;
    Ok((bin, hdr))
}

/// Columns t, arclength, flux; one row per (time, sample).
pub fn write_flux_csv<W: std::io::Write>(trace: &FluxTrace, out: W) -> Result<(), WaveError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "arclength", "flux"]).map_err(io_err)?;
    for (t, row) in trace.times.iter().zip(&trace.values) {
        for (s, v) in trace.arclength.iter().zip(row) {
            w.write_record([format!("{t:.12e}"), format!("{s:.12e}"), format!("{v:.12e}")]).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}
