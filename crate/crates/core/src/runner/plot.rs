//! Plot-ready series from result tables.
//!
//! - `sweep.csv` → `series_<column>_vs_<axis>.dat`, two columns `x y` sorted by
//!   ascending `x`, one file per swept axis and result column; failed rows are
//!   skipped.
//! - `phase_diagram.csv` → `n_minima_grid.dat`, one row per `axis1` value and
//!   one column per `axis2` value.
//!
//! Files start with `#` comment lines naming the columns and are
//! space-separated.

use std::fs;
use std::path::{Path, PathBuf};

use super::RunError;
use crate::csvfmt::fmt_f64;

const RESULT_COLUMNS: [&str; 8] = [
    "xi_x",
    "xi_dcz_min",
    "theta_dcz",
    "xi_uv_min",
    "theta_uv",
    "rho_m1",
    "rho_0",
    "rho_p1",
];

fn parse_err(path: &Path, msg: impl std::fmt::Display) -> RunError {
    RunError::Io(format!("{}: {msg}", path.display()))
}

fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), RunError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| parse_err(path, e))?;
    let header: Vec<String> = r.headers().map_err(|e| parse_err(path, e))?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(String::from).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| parse_err(path, e))?;
    Ok((header, rows))
}

fn num(path: &Path, s: &str) -> Result<f64, RunError> {
    s.trim().parse().map_err(|_| parse_err(path, format!("{s:?} is not a number")))
}

fn sweep_series(path: &Path, out: &Path) -> Result<Vec<PathBuf>, RunError> {
    let (header, rows) = read_csv(path)?;
    let first_result = header
        .iter()
        .position(|h| h == "xi_x")
        .ok_or_else(|| parse_err(path, "missing xi_x column"))?;
    let status = header
        .iter()
        .position(|h| h == "status")
        .ok_or_else(|| parse_err(path, "missing status column"))?;
    let ok: Vec<&Vec<String>> = rows.iter().filter(|r| r.get(status).map(String::as_str) == Some("ok")).collect();
    let mut files = Vec::new();
    for (ai, axis) in header[..first_result].iter().enumerate() {
        for col in RESULT_COLUMNS {
            let ci = header
                .iter()
                .position(|h| h == col)
                .ok_or_else(|| parse_err(path, format!("missing {col} column")))?;
            let mut pts = ok
                .iter()
                .map(|r| Ok((num(path, &r[ai])?, num(path, &r[ci])?)))
                .collect::<Result<Vec<(f64, f64)>, RunError>>()?;
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut text = format!("# {axis} {col}\n");
            for (x, y) in pts {
                text += &format!("{} {}\n", fmt_f64(x), fmt_f64(y));
            }
            let f = out.join(format!("series_{col}_vs_{axis}.dat"));
            fs::write(&f, text).map_err(|e| parse_err(&f, e))?;
            files.push(f);
        }
    }
    Ok(files)
}

fn phase_grid(path: &Path, out: &Path) -> Result<PathBuf, RunError> {
    let (header, rows) = read_csv(path)?;
    if header.len() < 3 || header[2] != "n_minima" {
        return Err(parse_err(path, "expected columns <axis1>,<axis2>,n_minima,..."));
    }
    let mut v1: Vec<f64> = Vec::new();
    let mut v2: Vec<f64> = Vec::new();
    let mut cells = Vec::new();
    for r in &rows {
        if r.len() < 3 {
            return Err(parse_err(path, "short row"));
        }
        let (a, b) = (num(path, &r[0])?, num(path, &r[1])?);
        if !v1.contains(&a) {
            v1.push(a);
        }
        if !v2.contains(&b) {
            v2.push(b);
        }
        let n: usize = r[2].trim().parse().map_err(|_| parse_err(path, format!("bad n_minima {:?}", r[2])))?;
        cells.push(n);
    }
    if cells.len() != v1.len() * v2.len() {
        return Err(parse_err(path, "rows do not form a complete grid"));
    }
    let mut text = format!(
        "# n_minima: {} rows ({} from {} to {}), {} columns ({} from {} to {})\n",
        v1.len(),
        header[0],
        fmt_f64(v1[0]),
        fmt_f64(v1[v1.len() - 1]),
        v2.len(),
        header[1],
        fmt_f64(v2[0]),
        fmt_f64(v2[v2.len() - 1])
    );
    for row in cells.chunks(v2.len()) {
        let line: Vec<String> = row.iter().map(|n| n.to_string()).collect();
        text += &line.join(" ");
        text.push('\n');
    }
    let f = out.join("n_minima_grid.dat");
    fs::write(&f, text).map_err(|e| parse_err(&f, e))?;
    Ok(f)
}

/// Writes series files for every result table found in `input` into `out`.
///
/// Any unreadable or malformed table, or a directory without tables, is an
/// I/O error (exit status 4).
pub fn emit_plot_data(input: &Path, out: &Path) -> Result<Vec<PathBuf>, RunError> {
    let sweep = input.join("sweep.csv");
    let phase = input.join("phase_diagram.csv");
    if !sweep.exists() && !phase.exists() {
        return Err(RunError::Io(format!(
            "{}: no sweep.csv or phase_diagram.csv found",
            input.display()
        )));
    }
    fs::create_dir_all(out).map_err(|e| parse_err(out, e))?;
    let mut files = Vec::new();
    if sweep.exists() {
        files.extend(sweep_series(&sweep, out)?);
    }
    if phase.exists() {
        files.push(phase_grid(&phase, out)?);
    }
    Ok(files)
}
