//! Paired real/imaginary binary arrays with a text header.

use std::path::{Path, PathBuf};

use super::{FbiError, FbiField};
use crate::wave::io::{write_f64_le, write_header};

fn with_suffix(stem: &Path, s: &str) -> PathBuf {
    let mut p = stem.as_os_str().to_owned();
    p.push(s);
    PathBuf::from(p)
}

/// `<stem>_re.bin`, `<stem>_im.bin` (ys × ny × nx on the grid, NaN exterior; ys × points
/// without a grid) and `<stem>.hdr`.
pub fn write_fbi(field: &FbiField, stem: &Path) -> Result<[PathBuf; 3], FbiError> {
    let err = |e: crate::wave::WaveError| FbiError::Io(e.to_string());
    let (mut re, mut im) = (Vec::new(), Vec::new());
    for row in &field.values {
        let (r, i): (Vec<f64>, Vec<f64>) = row.iter().map(|v| (v.re, v.im)).unzip();
        match &field.grid {
            Some(g) => {
                re.extend(g.to_full(&r, f64::NAN));
                im.extend(g.to_full(&i, f64::NAN));
            }
            None => {
                re.extend(r);
                im.extend(i);
            }
        }
    }
    let paths = [with_suffix(stem, "_re.bin"), with_suffix(stem, "_im.bin"), with_suffix(stem, ".hdr")];
    write_f64_le(&paths[0], &re).map_err(err)?;
    write_f64_le(&paths[1], &im).map_err(err)?;
    let ys: Vec<String> = field.ys.iter().map(|y| format!("{y:e}")).collect();
    let mut head = vec![
        ("format", "f64-le, [y][row][col]".to_string()),
        ("mu", format!("{:e}", field.mu)),
        ("tau", format!("{:e}", field.tau)),
        ("T", format!("{:e}", field.t_horizon)),
        ("ys", ys.join(",")),
        ("quadrature_nodes", field.quadrature_nodes.to_string()),
    ];
    match &field.grid {
        Some(g) => head.extend([
            ("nx", g.nx.to_string()),
            ("ny", g.ny.to_string()),
            ("h", format!("{:e}", g.h)),
            ("origin_x", format!("{:e}", g.origin[0])),
            ("origin_y", format!("{:e}", g.origin[1])),
        ]),
        None => head.push(("points", field.points.len().to_string())),
    }
    write_header(&paths[2], &head).map_err(err)?;
    Ok(paths)
}
