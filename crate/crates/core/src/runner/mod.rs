//! Configuration-driven runs: dispersion curves, phase diagrams and squeezing
//! sweeps on any backend, written as CSV/JSON plus plot-ready series.
//!
//! Output files for a run directory:
//!
//! | command         | files                                                        |
//! |-----------------|--------------------------------------------------------------|
//! | `dispersion`    | `dispersion.csv` (k, E1, E2, E3), `minima.csv`               |
//! | `phase-diagram` | `phase_diagram.csv`                                          |
//! | squeezing runs  | `report_NNNN.json` per successful point, `sweep.csv`         |
//! | every command   | `manifest.json`, the resolved configuration                  |
//!
//! Floats in CSV files carry 17 significant digits. Outputs depend only on
//! the configuration and seed, never on the worker count.

mod config;
mod plot;

pub use config::{Backend, Command, GpRunConfig, GridConfig, Overrides, RunConfig, SweepAxis};
pub use plot::emit_plot_data;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::band_structure::{dispersion, phase_diagram, ModelParams};
use crate::csvfmt::fmt_f64;
use crate::effective_model::{
    ed_ground_state_with, ed_moment_set, effective_coefficients, gaussian_moment_set, hp_mean_field, hp_quadratic,
};
use crate::gp_solver::{build_problem, gp_moments, imaginary_time_ground_state, write_checkpoint, Grid, SpinorField};
use crate::squeezing_metrics::{squeezing_report, SqueezingReport};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl RunError {
    /// Process exit status: 2 configuration, 3 solver, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Solver(_) => 3,
            RunError::Io(_) => 4,
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> RunError {
    RunError::Io(format!("{}: {e}", path.display()))
}

/// What a finished run produced.
#[derive(Clone, Debug, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    /// Indices and messages of sweep points that failed.
    pub failures: Vec<(usize, String)>,
}

/// Outcome of one sweep point.
#[derive(Clone, Debug)]
pub struct PointResult {
    pub params: ModelParams,
    pub outcome: Result<SqueezingReport, String>,
    pub field: Option<SpinorField>,
}

/// Reads, validates and executes a configuration file.
///
/// The output directory is only created once the configuration validated.
pub fn run_file(path: &Path, overrides: &Overrides, jobs: usize) -> Result<RunSummary, RunError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let cfg = RunConfig::parse(&text, overrides)?;
    run(&cfg, jobs)
}

/// Executes a resolved configuration on a pool of `jobs` workers.
///
/// Returns `Err(Solver)` if any sweep point failed, after all other points
/// and output files have been written.
pub fn run(cfg: &RunConfig, jobs: usize) -> Result<RunSummary, RunError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| RunError::Config(format!("cannot build worker pool: {e}")))?;
    let out = PathBuf::from(&cfg.output_dir);
    fs::create_dir_all(&out).map_err(|e| io_err(&out, e))?;
    let mut summary = RunSummary::default();
    let manifest = out.join("manifest.json");
    write_json(&manifest, &cfg.manifest())?;
    summary.files.push(manifest);

    pool.install(|| match cfg.command {
        Command::Dispersion => run_dispersion(cfg, &out, &mut summary),
        Command::PhaseDiagram => run_phase_diagram(cfg, &out, &mut summary),
        Command::EffSqueeze | Command::GpGround | Command::Sweep => run_sweep(cfg, &out, &mut summary),
    })?;
    if let Some((i, msg)) = summary.failures.first() {
        return Err(RunError::Solver(format!(
            "{} of {} points failed; first failure at point {i}: {msg}",
            summary.failures.len(),
            cfg.points().len()
        )));
    }
    Ok(summary)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), RunError> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn run_dispersion(cfg: &RunConfig, out: &Path, summary: &mut RunSummary) -> Result<(), RunError> {
    let d = dispersion(&cfg.params, cfg.band.k_min, cfg.band.k_max, cfg.band.n_points)
        .map_err(|e| RunError::Solver(e.to_string()))?;
    let mut text = String::from("k,E1,E2,E3\n");
    for (j, k) in d.k_grid.iter().enumerate() {
        text += &format!(
            "{},{},{},{}\n",
            fmt_f64(*k),
            fmt_f64(d.branches[0][j]),
            fmt_f64(d.branches[1][j]),
            fmt_f64(d.branches[2][j])
        );
    }
    let path = out.join("dispersion.csv");
    write_text(&path, &text)?;
    summary.files.push(path);
    let mut text = String::from("k,E\n");
    for m in &d.minima {
        text += &format!("{},{}\n", fmt_f64(m.k), fmt_f64(m.energy));
    }
    let path = out.join("minima.csv");
    write_text(&path, &text)?;
    summary.files.push(path);
    Ok(())
}

fn run_phase_diagram(cfg: &RunConfig, out: &Path, summary: &mut RunSummary) -> Result<(), RunError> {
    let (a1, a2) = cfg.phase_diagram.expect("validated");
    let pd = phase_diagram(a1, a2, &cfg.params, &cfg.band).map_err(|e| RunError::Solver(e.to_string()))?;
    let path = out.join("phase_diagram.csv");
    let mut buf = Vec::new();
    pd.write_csv(&mut buf).map_err(|e| io_err(&path, e))?;
    fs::write(&path, buf).map_err(|e| io_err(&path, e))?;
    summary.files.push(path);
    Ok(())
}

/// Ground state and squeezing report of one parameter point.
pub fn evaluate_point(cfg: &RunConfig, params: &ModelParams) -> PointResult {
    let mut field = None;
    let outcome = (|| -> Result<SqueezingReport, String> {
        match cfg.backend {
            config::Backend::Ed => {
                let c = effective_coefficients(params).map_err(|e| e.to_string())?;
                let state = ed_ground_state_with(&c, params.n_atoms, &cfg.ed).map_err(|e| e.to_string())?;
                squeezing_report(&ed_moment_set(&state), &cfg.metrics).map_err(|e| e.to_string())
            }
            config::Backend::Gaussian => {
                let c = effective_coefficients(params).map_err(|e| e.to_string())?;
                let mf = hp_mean_field(&c, params.n_atoms).map_err(|e| e.to_string())?;
                let sol = hp_quadratic(&c, params.n_atoms, &mf).map_err(|e| e.to_string())?;
                let moments = gaussian_moment_set(&sol).map_err(|e| e.to_string())?;
                squeezing_report(&moments, &cfg.metrics).map_err(|e| e.to_string())
            }
            config::Backend::Gp => {
                let trap = cfg.gp.trap.ok_or("gp backend requires [trap]")?;
                let mut inter = cfg.gp.interaction;
                if cfg.sweep.iter().any(|a| a.name == crate::ParamName::NAtoms) {
                    inter.n_atoms = params.n_atoms;
                }
                let grid = Grid::new(cfg.gp.grid.points.clone(), cfg.gp.grid.extents.clone())?;
                let problem = build_problem(params, &trap, &inter, grid).map_err(|e| e.to_string())?;
                let gs = imaginary_time_ground_state(&problem, &cfg.gp.solver).map_err(|e| e.to_string())?;
                let moments = gp_moments(&gs.field, inter.n_atoms);
                let mut report = squeezing_report(&moments, &cfg.metrics).map_err(|e| e.to_string())?;
                report.populations = gs.field.populations();
                report.moment_model = Some("hartree_product".into());
                field = Some(gs.field);
                Ok(report)
            }
        }
    })();
    PointResult {
        params: *params,
        outcome,
        field,
    }
}

/// Evaluates every sweep point on the ambient rayon pool, in index order.
pub fn evaluate_sweep(cfg: &RunConfig) -> Vec<PointResult> {
    cfg.points().par_iter().map(|p| evaluate_point(cfg, p)).collect()
}

/// Column names of `sweep.csv`.
pub fn sweep_header(cfg: &RunConfig) -> Vec<String> {
    let mut h: Vec<String> = cfg.sweep.iter().map(|a| a.name.to_string()).collect();
    h.extend(
        [
            "xi_x",
            "xi_dcz_min",
            "theta_dcz",
            "xi_uv_min",
            "theta_uv",
            "rho_m1",
            "rho_0",
            "rho_p1",
            "status",
        ]
        .map(String::from),
    );
    h
}

fn run_sweep(cfg: &RunConfig, out: &Path, summary: &mut RunSummary) -> Result<(), RunError> {
    let results = evaluate_sweep(cfg);
    let path = out.join("sweep.csv");
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(sweep_header(cfg)).map_err(|e| io_err(&path, e))?;
    for (i, r) in results.iter().enumerate() {
        let mut row: Vec<String> = cfg.sweep.iter().map(|a| fmt_f64(r.params.get(a.name))).collect();
        match &r.outcome {
            Ok(rep) => {
                row.extend(
                    [
                        rep.xi_x,
                        rep.xi_dcz_min,
                        rep.theta_dcz,
                        rep.xi_uv_min,
                        rep.theta_uv,
                        rep.populations.rho_m1,
                        rep.populations.rho_0,
                        rep.populations.rho_p1,
                    ]
                    .map(fmt_f64),
                );
                row.push("ok".into());
                let report_path = out.join(format!("report_{i:04}.json"));
                write_json(&report_path, rep)?;
                summary.files.push(report_path);
                if let (true, Some(field)) = (cfg.gp.checkpoint, &r.field) {
                    let cp = out.join(format!("field_{i:04}.bin"));
                    let file = fs::File::create(&cp).map_err(|e| io_err(&cp, e))?;
                    write_checkpoint(field, std::io::BufWriter::new(file)).map_err(|e| io_err(&cp, e))?;
                    summary.files.push(cp);
                }
            }
            Err(msg) => {
                row.extend(std::iter::repeat_n(String::new(), 8));
                row.push(format!("error: {msg}"));
                summary.failures.push((i, msg.clone()));
            }
        }
        w.write_record(&row).map_err(|e| io_err(&path, e))?;
    }
    let bytes = w.into_inner().map_err(|e| io_err(&path, e))?;
    fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
    summary.files.push(path);
    Ok(())
}
