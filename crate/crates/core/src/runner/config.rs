//! INI run configuration.
//!
//! ```ini
//! [run]
//! command = sweep          ; dispersion | phase-diagram | eff-squeeze | gp-ground | sweep
//! backend = ed             ; ed | gaussian | gp
//! seed = 1
//!
//! [params]
//! omega_R = 2
//! delta = 0
//! epsilon = 6
//! N = 200
//!
//! [sweep]                  ; one key per swept parameter, Cartesian product in file order
//! omega_R = 0.5, 1, 2, 3, 4
//! delta = -5:5:11          ; min:max:count
//! ```
//!
//! Further sections: `band`, `phase_diagram`, `ed`, `metrics`, `trap`,
//! `interaction`, `grid`, `gp`. Every key has a default except the trap,
//! which is required by the `gp` backend. Unknown sections or keys are errors.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ini::Ini;
use serde::Serialize;

use super::RunError;
use crate::band_structure::{Axis, BandScan, ModelParams, ParamName};
use crate::effective_model::EdConfig;
use crate::gp_solver::{GpConfig, Grid, InteractionConfig, TrapConfig, RB87_MASS_AMU};
use crate::squeezing_metrics::{MetricOptions, Normalization};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Dispersion,
    PhaseDiagram,
    EffSqueeze,
    GpGround,
    Sweep,
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s.trim() {
            "dispersion" => Self::Dispersion,
            "phase-diagram" => Self::PhaseDiagram,
            "eff-squeeze" => Self::EffSqueeze,
            "gp-ground" => Self::GpGround,
            "sweep" => Self::Sweep,
            other => {
                return Err(format!(
                    "unknown command {other:?} (expected dispersion, phase-diagram, eff-squeeze, gp-ground or sweep)"
                ))
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Ed,
    Gaussian,
    Gp,
}

impl FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s.trim() {
            "ed" => Self::Ed,
            "gaussian" => Self::Gaussian,
            "gp" => Self::Gp,
            other => return Err(format!("unknown backend {other:?} (expected ed, gaussian or gp)")),
        })
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ed => "ed",
            Self::Gaussian => "gaussian",
            Self::Gp => "gp",
        })
    }
}

/// One swept parameter and its explicit values.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepAxis {
    pub name: ParamName,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridConfig {
    pub points: Vec<usize>,
    pub extents: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GpRunConfig {
    pub trap: Option<TrapConfig>,
    pub interaction: InteractionConfig,
    pub grid: GridConfig,
    pub solver: GpConfig,
    pub checkpoint: bool,
}

/// Fully resolved configuration; every default is explicit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub backend: Backend,
    pub seed: u64,
    pub params: ModelParams,
    pub sweep: Vec<SweepAxis>,
    pub band: BandScan,
    pub phase_diagram: Option<(Axis, Axis)>,
    pub ed: EdConfig,
    pub metrics: MetricOptions,
    pub gp: GpRunConfig,
    #[serde(skip)]
    pub output_dir: String,
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("run", &["command", "backend", "seed"]),
    ("params", &["omega_R", "delta", "epsilon", "N"]),
    ("sweep", &[]),
    ("band", &["k_min", "k_max", "n_points", "tol_deg"]),
    ("phase_diagram", &["axis1", "axis2"]),
    ("ed", &["n_max", "dense_threshold", "tol", "krylov", "max_restarts"]),
    ("metrics", &["theta_points", "normalization"]),
    ("trap", &["omega_x", "omega_y", "omega_z", "recoil_frequency"]),
    ("interaction", &["a_s0", "a_s2", "N", "mass_amu"]),
    ("grid", &["points", "extent"]),
    ("gp", &["dt", "tol", "max_iter", "min_iter", "checkpoint"]),
    ("output", &["dir"]),
];

fn cfg_err(msg: impl Into<String>) -> RunError {
    RunError::Config(msg.into())
}

struct Table(BTreeMap<String, BTreeMap<String, String>>, Vec<(String, Vec<(String, String)>)>);

impl Table {
    fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.0.get(section).and_then(|s| s.get(key)).map(|s| s.as_str())
    }

    fn parse<T: FromStr>(&self, section: &str, key: &str, default: T) -> Result<T, RunError>
    where
        T::Err: fmt::Display,
    {
        match self.get(section, key) {
            None => Ok(default),
            Some(v) => v
                .trim()
                .parse()
                .map_err(|e| cfg_err(format!("[{section}] {key} = {v:?}: {e}"))),
        }
    }

    fn has_section(&self, section: &str) -> bool {
        self.0.contains_key(section)
    }
}

fn read_table(text: &str) -> Result<Table, RunError> {
    let ini = Ini::load_from_str(text).map_err(|e| cfg_err(format!("cannot parse configuration: {e}")))?;
    let mut map = BTreeMap::new();
    let mut ordered = Vec::new();
    for (section, props) in ini.iter() {
        let Some(section) = section else {
            if let Some((k, _)) = props.iter().next() {
                return Err(cfg_err(format!("key {k:?} appears before any [section]")));
            }
            continue;
        };
        let Some((_, allowed)) = SECTIONS.iter().find(|(name, _)| *name == section) else {
            return Err(cfg_err(format!("unknown section [{section}]")));
        };
        let entry: &mut BTreeMap<String, String> = map.entry(section.to_string()).or_default();
        let mut keys = Vec::new();
        for (k, v) in props.iter() {
            if section != "sweep" && !allowed.contains(&k) {
                return Err(cfg_err(format!("unknown key {k:?} in [{section}]")));
            }
            if entry.insert(k.to_string(), v.to_string()).is_some() {
                return Err(cfg_err(format!("duplicate key {k:?} in [{section}]")));
            }
            keys.push((k.to_string(), v.to_string()));
        }
        ordered.push((section.to_string(), keys));
    }
    Ok(Table(map, ordered))
}

fn parse_f64(s: &str, what: &str) -> Result<f64, RunError> {
    let v: f64 = s.trim().parse().map_err(|_| cfg_err(format!("{what}: {s:?} is not a number")))?;
    if !v.is_finite() {
        return Err(cfg_err(format!("{what}: {s:?} is not finite")));
    }
    Ok(v)
}

fn parse_count(s: &str, what: &str) -> Result<usize, RunError> {
    s.trim()
        .parse()
        .map_err(|_| cfg_err(format!("{what}: {s:?} is not a non-negative integer")))
}

/// `min:max:count` with count ≥ 2.
fn parse_range(spec: &str, what: &str) -> Result<(f64, f64, usize), RunError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(cfg_err(format!("{what}: expected min:max:count, got {spec:?}")));
    }
    let count = parse_count(parts[2], what)?;
    if count < 2 {
        return Err(cfg_err(format!("{what}: count must be at least 2, got {count}")));
    }
    Ok((parse_f64(parts[0], what)?, parse_f64(parts[1], what)?, count))
}

fn parse_sweep_values(spec: &str, what: &str) -> Result<Vec<f64>, RunError> {
    if spec.contains(':') {
        let (a, b, n) = parse_range(spec, what)?;
        return Ok(crate::band_structure::linspace(a, b, n));
    }
    let values = spec
        .split(',')
        .map(|s| parse_f64(s, what))
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(cfg_err(format!("{what}: no values")));
    }
    Ok(values)
}

fn parse_param_name(s: &str) -> Result<ParamName, RunError> {
    s.trim().parse::<ParamName>().map_err(|e| cfg_err(e.to_string()))
}

/// `name:min:max:count`.
fn parse_axis(spec: &str, what: &str) -> Result<Axis, RunError> {
    let (name, rest) = spec
        .split_once(':')
        .ok_or_else(|| cfg_err(format!("{what}: expected name:min:max:count, got {spec:?}")))?;
    let (min, max, count) = parse_range(rest, what)?;
    Ok(Axis::new(parse_param_name(name)?, min, max, count))
}

fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>, RunError> {
    s.split(',')
        .map(|p| p.trim().parse::<T>().map_err(|_| cfg_err(format!("{what}: bad entry {p:?}"))))
        .collect()
}

/// Command-line overrides applied on top of the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub backend: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<String>,
}

impl RunConfig {
    pub fn parse(text: &str, overrides: &Overrides) -> Result<Self, RunError> {
        let t = read_table(text)?;

        let command: Command = match t.get("run", "command") {
            Some(c) => c.parse().map_err(cfg_err)?,
            None => return Err(cfg_err("[run] command is required")),
        };
        let backend_text = overrides
            .backend
            .clone()
            .or_else(|| t.get("run", "backend").map(str::to_string));
        let backend = match (backend_text, command) {
            (Some(b), _) => b.parse().map_err(cfg_err)?,
            (None, Command::GpGround) => Backend::Gp,
            (None, _) => Backend::Ed,
        };
        match (command, backend) {
            (Command::EffSqueeze, Backend::Gp) => return Err(cfg_err("eff-squeeze runs on the ed or gaussian backend")),
            (Command::GpGround, b) if b != Backend::Gp => return Err(cfg_err("gp-ground requires the gp backend")),
            _ => {}
        }
        let seed = match overrides.seed {
            Some(s) => s,
            None => t.parse("run", "seed", 1u64)?,
        };

        let d = ModelParams::default();
        let n_atoms: f64 = parse_f64(t.get("params", "N").unwrap_or("200"), "[params] N")?;
        let params = ModelParams::new(
            t.parse("params", "omega_R", d.omega_r)?,
            t.parse("params", "delta", d.delta)?,
            t.parse("params", "epsilon", d.epsilon)?,
            0,
        )
        .with(ParamName::NAtoms, n_atoms)
        .map_err(|e| cfg_err(e.to_string()))?;
        for v in [params.omega_r, params.delta, params.epsilon] {
            if !v.is_finite() {
                return Err(cfg_err("[params] values must be finite"));
            }
        }

        let mut sweep = Vec::new();
        if let Some((_, keys)) = t.1.iter().find(|(s, _)| s == "sweep") {
            for (k, v) in keys {
                let name = parse_param_name(k)?;
                let values = parse_sweep_values(v, &format!("[sweep] {k}"))?;
                for x in &values {
                    params.with(name, *x).map_err(|e| cfg_err(format!("[sweep] {k}: {e}")))?;
                }
                if sweep.iter().any(|a: &SweepAxis| a.name == name) {
                    return Err(cfg_err(format!("[sweep] {k} given twice")));
                }
                sweep.push(SweepAxis { name, values });
            }
        }

        let db = BandScan::default();
        let band = BandScan {
            k_min: t.parse("band", "k_min", db.k_min)?,
            k_max: t.parse("band", "k_max", db.k_max)?,
            n_points: t.parse("band", "n_points", db.n_points)?,
            tol_deg: t.parse("band", "tol_deg", db.tol_deg)?,
        };
        if !(band.k_min < band.k_max) || band.n_points < 3 || !(band.tol_deg > 0.0) {
            return Err(cfg_err("[band] needs k_min < k_max, n_points >= 3 and tol_deg > 0"));
        }

        let phase_diagram = match (t.get("phase_diagram", "axis1"), t.get("phase_diagram", "axis2")) {
            (Some(a), Some(b)) => {
                let a1 = parse_axis(a, "[phase_diagram] axis1")?;
                let a2 = parse_axis(b, "[phase_diagram] axis2")?;
                if a1.name == a2.name || !a1.name.is_band_parameter() || !a2.name.is_band_parameter() {
                    return Err(cfg_err("[phase_diagram] axes must be two distinct band parameters (omega_R, delta, epsilon)"));
                }
                Some((a1, a2))
            }
            (None, None) => None,
            _ => return Err(cfg_err("[phase_diagram] needs both axis1 and axis2")),
        };
        if command == Command::PhaseDiagram && phase_diagram.is_none() {
            return Err(cfg_err("phase-diagram requires [phase_diagram] axis1 and axis2"));
        }

        let de = EdConfig::default();
        let ed = EdConfig {
            n_max: t.parse("ed", "n_max", de.n_max)?,
            dense_threshold: t.parse("ed", "dense_threshold", de.dense_threshold)?,
            tol: t.parse("ed", "tol", de.tol)?,
            krylov: t.parse("ed", "krylov", de.krylov)?,
            max_restarts: t.parse("ed", "max_restarts", de.max_restarts)?,
        };
        if !(ed.tol > 0.0) || ed.krylov < 2 || ed.max_restarts == 0 {
            return Err(cfg_err("[ed] needs tol > 0, krylov >= 2 and max_restarts >= 1"));
        }

        let dm = MetricOptions::default();
        let metrics = MetricOptions {
            theta_points: t.parse("metrics", "theta_points", dm.theta_points)?,
            normalization: t.parse::<Normalization>("metrics", "normalization", dm.normalization)?,
        };
        if metrics.theta_points == 0 {
            return Err(cfg_err("[metrics] theta_points must be positive"));
        }

        let trap = if t.has_section("trap") {
            let req = |k: &str| -> Result<f64, RunError> {
                parse_f64(
                    t.get("trap", k).ok_or_else(|| cfg_err(format!("[trap] {k} is required")))?,
                    &format!("[trap] {k}"),
                )
            };
            let trap = TrapConfig {
                omega_x: req("omega_x")?,
                omega_y: req("omega_y")?,
                omega_z: req("omega_z")?,
                recoil_frequency: req("recoil_frequency")?,
            };
            trap.validate().map_err(|e| cfg_err(e.to_string()))?;
            Some(trap)
        } else {
            None
        };
        let di = InteractionConfig::rb87(100_000);
        let interaction = InteractionConfig {
            a_s0: t.parse("interaction", "a_s0", di.a_s0)?,
            a_s2: t.parse("interaction", "a_s2", di.a_s2)?,
            n_atoms: t.parse("interaction", "N", di.n_atoms)?,
            mass_amu: t.parse("interaction", "mass_amu", RB87_MASS_AMU)?,
        };
        interaction.validate().map_err(|e| cfg_err(e.to_string()))?;
        if interaction.n_atoms == 0 {
            return Err(cfg_err("[interaction] N must be positive"));
        }
        let points: Vec<usize> = parse_list(t.get("grid", "points").unwrap_or("512"), "[grid] points")?;
        let mut extents: Vec<f64> = parse_list(t.get("grid", "extent").unwrap_or("120"), "[grid] extent")?;
        if extents.len() == 1 && points.len() > 1 {
            extents = vec![extents[0]; points.len()];
        }
        let grid = GridConfig { points, extents };
        Grid::new(grid.points.clone(), grid.extents.clone()).map_err(|e| cfg_err(format!("[grid] {e}")))?;
        let dg = GpConfig::default();
        let solver = GpConfig {
            dt: t.parse("gp", "dt", dg.dt)?,
            tol: t.parse("gp", "tol", dg.tol)?,
            max_iter: t.parse("gp", "max_iter", dg.max_iter)?,
            min_iter: t.parse("gp", "min_iter", dg.min_iter)?,
            seed,
        };
        solver.validate().map_err(|e| cfg_err(e.to_string()))?;
        let gp = GpRunConfig {
            trap,
            interaction,
            grid,
            solver,
            checkpoint: t.parse("gp", "checkpoint", false)?,
        };

        let output_dir = overrides
            .out
            .clone()
            .or_else(|| t.get("output", "dir").map(str::to_string))
            .unwrap_or_else(|| "out".to_string());

        let cfg = Self {
            command,
            backend,
            seed,
            params,
            sweep,
            band,
            phase_diagram,
            ed,
            metrics,
            gp,
            output_dir,
        };
        cfg.validate_points()?;
        Ok(cfg)
    }

    /// Parameter values of every sweep point, in row-major order over the axes.
    pub fn points(&self) -> Vec<ModelParams> {
        let mut out = vec![self.params];
        for axis in &self.sweep {
            out = out
                .iter()
                .flat_map(|p| axis.values.iter().map(move |v| p.with(axis.name, *v).expect("validated")))
                .collect();
        }
        out
    }

    fn validate_points(&self) -> Result<(), RunError> {
        if !matches!(self.command, Command::EffSqueeze | Command::GpGround | Command::Sweep) {
            return Ok(());
        }
        match self.backend {
            Backend::Ed => {
                if let Some(p) = self.points().iter().find(|p| p.n_atoms > self.ed.n_max) {
                    return Err(cfg_err(format!(
                        "ed backend: N = {} exceeds [ed] n_max = {}",
                        p.n_atoms, self.ed.n_max
                    )));
                }
            }
            Backend::Gaussian => {}
            Backend::Gp => {
                let trap = self
                    .gp
                    .trap
                    .ok_or_else(|| cfg_err("gp backend requires a [trap] section with recoil_frequency"))?;
                let grid = Grid::new(self.gp.grid.points.clone(), self.gp.grid.extents.clone())
                    .map_err(|e| cfg_err(format!("[grid] {e}")))?;
                crate::gp_solver::build_problem(&self.params, &trap, &self.gp.interaction, grid)
                    .map_err(|e| cfg_err(e.to_string()))?;
            }
        }
        Ok(())
    }

    /// JSON manifest of the resolved configuration.
    pub fn manifest(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("configuration serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, RunError> {
        RunConfig::parse(text, &Overrides::default())
    }

    #[test]
    fn sweep_product_and_defaults() {
        let c = parse("[run]\ncommand = eff-squeeze\n[params]\nN = 50\n[sweep]\nomega_R = 1, 2\ndelta = -1:1:3\n").unwrap();
        assert_eq!(c.backend, Backend::Ed);
        let pts = c.points();
        assert_eq!(pts.len(), 6);
        assert_eq!((pts[0].omega_r, pts[0].delta), (1.0, -1.0));
        assert_eq!((pts[5].omega_r, pts[5].delta), (2.0, 1.0));
        assert!(pts.iter().all(|p| p.n_atoms == 50 && p.epsilon == 6.0));
        let m = c.manifest();
        assert_eq!(m["ed"]["n_max"], 300);
        assert_eq!(m["metrics"]["normalization"], "approximate");
        assert!(m.get("output_dir").is_none());
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "[run]\ncommand = sweep\n[sweep]\ngamma = 1, 2\n",
            "[run]\ncommand = sweep\n[params]\nfoo = 1\n",
            "[run]\ncommand = sweep\n[nope]\n",
            "[run]\ncommand = fly\n",
            "[run]\ncommand = sweep\nbackend = gp\n",
            "[run]\ncommand = eff-squeeze\n[params]\nN = 1000\n",
            "[run]\ncommand = sweep\n[sweep]\ndelta = 0:1:1\n",
            "[run]\ncommand = phase-diagram\n",
            "[run]\ncommand = phase-diagram\n[phase_diagram]\naxis1 = omega_R:0:1:3\naxis2 = N:1:2:3\n",
            "[run]\ncommand = sweep\n[sweep]\nN = 1.5, 2\n",
            "command = sweep\n",
        ] {
            assert!(matches!(parse(text), Err(RunError::Config(_))), "{text}");
        }
    }

    #[test]
    fn overrides_win() {
        let o = Overrides {
            backend: Some("gaussian".into()),
            seed: Some(9),
            out: Some("elsewhere".into()),
        };
        let c = RunConfig::parse("[run]\ncommand = sweep\nbackend = ed\nseed = 3\n[output]\ndir = x\n", &o).unwrap();
        assert_eq!((c.backend, c.seed, c.output_dir.as_str()), (Backend::Gaussian, 9, "elsewhere"));
    }

    #[test]
    fn gp_section() {
        let text = "[run]\ncommand = gp-ground\n[trap]\nomega_x = 5000\nomega_y = 5000\nomega_z = 1500\nrecoil_frequency = 23116\n[grid]\npoints = 256\nextent = 120\n";
        let c = parse(text).unwrap();
        assert_eq!(c.backend, Backend::Gp);
        assert_eq!(c.gp.trap.unwrap().recoil_frequency, 23116.0);
        let small = text.replace("extent = 120", "extent = 10");
        assert!(parse(&small).is_err());
        assert!(parse("[run]\ncommand = gp-ground\n").is_err());
    }
}
