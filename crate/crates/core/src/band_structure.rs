//! Single-particle band structure of the Raman-coupled spin-1 gas.
//!
//! Energies are in units of the recoil energy `E_r`, momenta in units of the
//! recoil momentum `k_r`, so each kinetic diagonal `(k ± 2k_r)²/2` becomes
//! `(k ± 2)²`. The transverse momentum only adds the spin-independent shift
//! `k_⊥²` and is dropped here.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::{Matrix3, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::csvfmt::fmt_f64;
use crate::spin_algebra::{Mat3, C64};

/// Physics knobs shared by every backend. Energies in units of `E_r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega_r: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub n_atoms: usize,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            omega_r: 2.0,
            delta: 0.0,
            epsilon: 6.0,
            n_atoms: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParamError {
    #[error("parameter `{name}` must be finite, got {value}")]
    NotFinite { name: &'static str, value: f64 },
    #[error("particle number must be at least 1")]
    NoAtoms,
    #[error("unknown parameter name `{0}` (expected omega_R, delta, epsilon or N)")]
    UnknownName(String),
    #[error("parameter N must be a positive integer, got {0}")]
    BadCount(f64),
}

impl ModelParams {
    pub fn new(omega_r: f64, delta: f64, epsilon: f64, n_atoms: usize) -> Self {
        Self {
            omega_r,
            delta,
            epsilon,
            n_atoms,
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        for (name, value) in [
            ("omega_R", self.omega_r),
            ("delta", self.delta),
            ("epsilon", self.epsilon),
        ] {
            if !value.is_finite() {
                return Err(ParamError::NotFinite { name, value });
            }
        }
        if self.n_atoms == 0 {
            return Err(ParamError::NoAtoms);
        }
        Ok(())
    }

    pub fn get(&self, name: ParamName) -> f64 {
        match name {
            ParamName::OmegaR => self.omega_r,
            ParamName::Delta => self.delta,
            ParamName::Epsilon => self.epsilon,
            ParamName::NAtoms => self.n_atoms as f64,
        }
    }

    pub fn with(mut self, name: ParamName, value: f64) -> Result<Self, ParamError> {
        match name {
            ParamName::OmegaR => self.omega_r = value,
            ParamName::Delta => self.delta = value,
            ParamName::Epsilon => self.epsilon = value,
            ParamName::NAtoms => {
                if !(value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64) {
                    return Err(ParamError::BadCount(value));
                }
                self.n_atoms = value as usize;
            }
        }
        self.validate()?;
        Ok(self)
    }
}

/// Names of the sweepable parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParamName {
    #[serde(rename = "omega_R")]
    OmegaR,
    #[serde(rename = "delta")]
    Delta,
    #[serde(rename = "epsilon")]
    Epsilon,
    #[serde(rename = "N")]
    NAtoms,
}

impl ParamName {
    pub fn as_str(self) -> &'static str {
        match self {
            ParamName::OmegaR => "omega_R",
            ParamName::Delta => "delta",
            ParamName::Epsilon => "epsilon",
            ParamName::NAtoms => "N",
        }
    }

    /// Parameters that enter the single-particle Hamiltonian.
    pub fn is_band_parameter(self) -> bool {
        !matches!(self, ParamName::NAtoms)
    }
}

impl fmt::Display for ParamName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParamName {
    type Err = ParamError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "omega_R" | "omega_r" | "Omega_R" => Ok(ParamName::OmegaR),
            "delta" => Ok(ParamName::Delta),
            "epsilon" => Ok(ParamName::Epsilon),
            "N" | "n_atoms" => Ok(ParamName::NAtoms),
            other => Err(ParamError::UnknownName(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BandError {
    #[error("eigen-solver did not converge at k = {k} for {params:?}")]
    NoConvergence { k: f64, params: ModelParams },
    #[error("invalid k window [{k_min}, {k_max}] with {n_points} points")]
    BadWindow { k_min: f64, k_max: f64, n_points: usize },
    #[error("degeneracy tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("phase-diagram axes must be distinct band parameters with at least 2 points")]
    BadAxes,
    #[error("cell ({i}, {j}): {source}")]
    Cell {
        i: usize,
        j: usize,
        #[source]
        source: Box<BandError>,
    },
    #[error(transparent)]
    Params(#[from] ParamError),
}

/// Real symmetric form of [`build_hamiltonian`].
pub fn real_hamiltonian(k: f64, p: &ModelParams) -> Matrix3<f64> {
    let w = 0.5 * p.omega_r;
    let kp = k + 2.0;
    let km = k - 2.0;
    Matrix3::new(
        kp * kp - p.delta,
        w,
        0.0,
        w,
        k * k - p.epsilon,
        w,
        0.0,
        w,
        km * km + p.delta,
    )
}

/// Single-particle Hamiltonian at momentum `k` (units of `k_r`), in units of `E_r`.
pub fn build_hamiltonian(k: f64, params: &ModelParams) -> Mat3 {
    real_hamiltonian(k, params).map(C64::from)
}

/// Ascending eigenvalues of `H(k)`.
///
/// The matrix is first brought to a canonical orientation under the exchange
/// `|+1> <-> |-1>` so that mirror-related inputs `(k, δ)` and `(-k, -δ)` give
/// bit-identical spectra.
pub fn band_energies(k: f64, params: &ModelParams) -> Result<[f64; 3], BandError> {
    let mut h = real_hamiltonian(k, params);
    if h[(0, 0)] > h[(2, 2)] {
        h.swap_rows(0, 2);
        h.swap_columns(0, 2);
    }
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 10_000).ok_or(BandError::NoConvergence {
        k,
        params: *params,
    })?;
    let mut e = [eig.eigenvalues[0], eig.eigenvalues[1], eig.eigenvalues[2]];
    e.sort_by(f64::total_cmp);
    Ok(e)
}

pub fn lowest_band(k: f64, params: &ModelParams) -> Result<f64, BandError> {
    band_energies(k, params).map(|e| e[0])
}

/// `n` points spanning `[a, b]`; symmetric windows give exactly mirrored grids.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let d = (n - 1) as f64;
    (0..n)
        .map(|j| ((n - 1 - j) as f64 * a + j as f64 * b) / d)
        .collect()
}

/// A refined local minimum of the lowest branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub k: f64,
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersionResult {
    pub k_grid: Vec<f64>,
    /// `branches[b][j]` is the b-th ascending eigenvalue at `k_grid[j]`.
    pub branches: [Vec<f64>; 3],
    pub minima: Vec<Minimum>,
}

pub fn dispersion(
    params: &ModelParams,
    k_min: f64,
    k_max: f64,
    n_points: usize,
) -> Result<DispersionResult, BandError> {
    params.validate()?;
    if !(k_min < k_max) || n_points < 3 {
        return Err(BandError::BadWindow {
            k_min,
            k_max,
            n_points,
        });
    }
    let k_grid = linspace(k_min, k_max, n_points);
    let mut branches = [
        Vec::with_capacity(n_points),
        Vec::with_capacity(n_points),
        Vec::with_capacity(n_points),
    ];
    for &k in &k_grid {
        let e = band_energies(k, params)?;
        for (b, v) in branches.iter_mut().zip(e) {
            b.push(v);
        }
    }
    let minima = find_minima(&k_grid, &branches[0], |k| lowest_band(k, params))?;
    Ok(DispersionResult {
        k_grid,
        branches,
        minima,
    })
}

/// Discrete local minima of `values` on `grid`, refined against `eval`.
///
/// A run of equal values bordered by strictly larger neighbours counts as one
/// minimum placed at the run's midpoint. Grid endpoints never qualify.
pub fn find_minima<E>(
    grid: &[f64],
    values: &[f64],
    eval: impl Fn(f64) -> Result<f64, E>,
) -> Result<Vec<Minimum>, E> {
    let n = values.len();
    let mut minima = Vec::new();
    let mut j = 1;
    while j + 1 < n {
        let mut end = j;
        while end + 1 < n && values[end + 1] == values[j] {
            end += 1;
        }
        if end + 1 < n && values[j - 1] > values[j] && values[end + 1] > values[end] {
            if end == j {
                minima.push(refine(grid, values, j, &eval)?);
            } else {
                let k = 0.5 * (grid[j] + grid[end]);
                minima.push(Minimum { k, energy: eval(k)? });
            }
        }
        j = end + 1;
    }
    Ok(minima)
}

fn refine<E>(
    grid: &[f64],
    values: &[f64],
    j: usize,
    eval: &impl Fn(f64) -> Result<f64, E>,
) -> Result<Minimum, E> {
    let (x0, x1, x2) = (grid[j - 1], grid[j], grid[j + 1]);
    let (y0, y1, y2) = (values[j - 1], values[j], values[j + 1]);
    let mut best = Minimum { k: x1, energy: y1 };

    // parabola through the three grid points
    let denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
    if denom != 0.0 {
        let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
        let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
        if a > 0.0 {
            let xv = -b / (2.0 * a);
            if xv > x0 && xv < x2 {
                let e = eval(xv)?;
                if e < best.energy {
                    best = Minimum { k: xv, energy: e };
                }
            }
        }
    }

    // golden-section polish inside the bracket
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (x0, x2);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    for _ in 0..80 {
        if (b - a).abs() < 1e-13 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = eval(d)?;
        }
    }
    let (k, e) = if fc < fd { (c, fc) } else { (d, fd) };
    if e < best.energy {
        best = Minimum { k, energy: e };
    }
    Ok(best)
}

/// Window and tolerances used to classify a parameter point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandScan {
    pub k_min: f64,
    pub k_max: f64,
    pub n_points: usize,
    pub tol_deg: f64,
}

impl Default for BandScan {
    fn default() -> Self {
        Self {
            k_min: -4.0,
            k_max: 4.0,
            n_points: 2001,
            tol_deg: 1e-6,
        }
    }
}

/// Minimum count and degeneracy of the lowest branch at one parameter point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub params: ModelParams,
    pub n_minima: usize,
    pub degenerate: bool,
    pub e_min: f64,
    pub k_min: f64,
}

pub fn classify(params: &ModelParams, tol_deg: f64) -> Result<PhaseCell, BandError> {
    classify_with(
        params,
        &BandScan {
            tol_deg,
            ..BandScan::default()
        },
    )
}

pub fn classify_with(params: &ModelParams, scan: &BandScan) -> Result<PhaseCell, BandError> {
    if !(scan.tol_deg > 0.0) {
        return Err(BandError::BadTolerance(scan.tol_deg));
    }
    let disp = dispersion(params, scan.k_min, scan.k_max, scan.n_points)?;
    let mut energies: Vec<Minimum> = disp.minima.clone();
    energies.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    let degenerate = energies.len() >= 2 && energies[1].energy - energies[0].energy < scan.tol_deg;
    let (e_min, k_min) = match energies.first() {
        Some(m) => (m.energy, m.k),
        None => {
            // no interior minimum: report the lowest grid value
            let (j, e) = disp.branches[0]
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .expect("grid has at least three points");
            (*e, disp.k_grid[j])
        }
    };
    Ok(PhaseCell {
        params: *params,
        n_minima: disp.minima.len(),
        degenerate,
        e_min,
        k_min,
    })
}

/// One axis of a parameter plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: ParamName,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(name: ParamName, min: f64, max: f64, count: usize) -> Self {
        Self {
            name,
            min,
            max,
            count,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        linspace(self.min, self.max, self.count)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub axis1: Axis,
    pub axis2: Axis,
    /// Row-major: `cells[i * axis2.count + j]`.
    pub cells: Vec<PhaseCell>,
}

impl PhaseDiagram {
    pub fn cell(&self, i: usize, j: usize) -> &PhaseCell {
        &self.cells[i * self.axis2.count + j]
    }

    /// Columns: axis1 value, axis2 value, n_minima, degenerate, E_min, k_min.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "{},{},n_minima,degenerate,E_min,k_min",
            self.axis1.name, self.axis2.name
        )?;
        for c in &self.cells {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt_f64(c.params.get(self.axis1.name)),
                fmt_f64(c.params.get(self.axis2.name)),
                c.n_minima,
                c.degenerate,
                fmt_f64(c.e_min),
                fmt_f64(c.k_min)
            )?;
        }
        Ok(())
    }
}

/// Classifies every cell of a 2-D parameter plane.
///
/// Cells are evaluated on the ambient rayon pool and assembled by index.
pub fn phase_diagram(
    axis1: Axis,
    axis2: Axis,
    fixed: &ModelParams,
    scan: &BandScan,
) -> Result<PhaseDiagram, BandError> {
    if axis1.name == axis2.name
        || !axis1.name.is_band_parameter()
        || !axis2.name.is_band_parameter()
        || axis1.count < 2
        || axis2.count < 2
    {
        return Err(BandError::BadAxes);
    }
    let v1 = axis1.values();
    let v2 = axis2.values();
    let cells = (0..v1.len() * v2.len())
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / v2.len(), idx % v2.len());
            let wrap = |e: BandError| BandError::Cell {
                i,
                j,
                source: Box::new(e),
            };
            let p = fixed
                .with(axis1.name, v1[i])
                .and_then(|p| p.with(axis2.name, v2[j]))
                .map_err(|e| wrap(e.into()))?;
            classify_with(&p, scan).map_err(wrap)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PhaseDiagram { axis1, axis2, cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(omega_r: f64, delta: f64, epsilon: f64) -> ModelParams {
        ModelParams::new(omega_r, delta, epsilon, 1)
    }

    #[test]
    fn hamiltonian_examples() {
        let h = build_hamiltonian(0.0, &p(0.0, 0.0, 0.0));
        let d: Vec<f64> = (0..3).map(|i| h[(i, i)].re).collect();
        assert_eq!(d, vec![4.0, 0.0, 4.0]);
        assert_eq!(h[(0, 1)], C64::from(0.0));

        let h = build_hamiltonian(2.0, &p(2.0, 1.0, 6.0));
        let d: Vec<f64> = (0..3).map(|i| h[(i, i)].re).collect();
        assert_eq!(d, vec![15.0, -2.0, 1.0]);
        assert_eq!(h[(0, 1)], C64::from(1.0));
        assert_eq!(h[(1, 2)], C64::from(1.0));
        assert_eq!(h[(0, 2)], C64::from(0.0));
        assert_eq!(h, h.adjoint());
    }

    #[test]
    fn decoupled_minima() {
        let d = dispersion(&p(0.0, 1.0, 0.0), -4.0, 4.0, 2001).unwrap();
        assert_eq!(d.minima.len(), 3);
        for (m, (k, e)) in d.minima.iter().zip([(-2.0, -1.0), (0.0, 0.0), (2.0, 1.0)]) {
            assert!((m.k - k).abs() < 1e-6, "{m:?}");
            assert!((m.energy - e).abs() < 1e-10, "{m:?}");
        }

        let d = dispersion(&p(0.0, 1.0, 6.0), -4.0, 4.0, 2001).unwrap();
        assert_eq!(d.minima.len(), 1);
        assert!(d.minima[0].k.abs() < 1e-6);
        assert!((d.minima[0].energy + 6.0).abs() < 1e-10);
    }

    #[test]
    fn three_fold_degeneracy() {
        let c = classify(&p(0.0, 0.0, 0.0), 1e-9).unwrap();
        assert_eq!(c.n_minima, 3);
        assert!(c.degenerate);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&p(0.5, 1.0, 0.0), 1e-6).unwrap().n_minima, 3);
        assert_eq!(classify(&p(20.0, 1.0, 0.0), 1e-6).unwrap().n_minima, 1);
    }

    #[test]
    fn ordered_branches_and_minimum_consistency() {
        let params = p(2.0, 1.0, 0.0);
        let d = dispersion(&params, -4.0, 4.0, 801).unwrap();
        for j in 0..d.k_grid.len() {
            assert!(d.branches[0][j] <= d.branches[1][j]);
            assert!(d.branches[1][j] <= d.branches[2][j]);
        }
        let h = 1e-4;
        for m in &d.minima {
            let e = lowest_band(m.k, &params).unwrap();
            assert!((e - m.energy).abs() <= 1e-9);
            assert!(lowest_band(m.k - h, &params).unwrap() > m.energy);
            assert!(lowest_band(m.k + h, &params).unwrap() > m.energy);
        }
    }

    #[test]
    fn branches_continuous_under_refinement() {
        let params = p(1.0, 0.5, 1.0);
        let jump = |n| {
            let d = dispersion(&params, -4.0, 4.0, n).unwrap();
            d.branches
                .iter()
                .flat_map(|b| b.windows(2).map(|w| (w[1] - w[0]).abs()))
                .fold(0.0, f64::max)
        };
        let coarse = jump(201);
        let fine = jump(2001);
        assert!(fine < 0.2 * coarse, "{coarse} {fine}");
    }

    #[test]
    fn plateau_counts_once() {
        let grid = [0.0, 1.0, 2.0, 3.0, 4.0];
        let values = [2.0, 1.0, 1.0, 1.0, 2.0];
        let m = find_minima(&grid, &values, |_| Ok::<_, ()>(1.0)).unwrap();
        assert_eq!(m, vec![Minimum { k: 2.0, energy: 1.0 }]);
    }

    #[test]
    fn window_and_axes_errors() {
        assert!(dispersion(&p(0.0, 0.0, 0.0), 1.0, 1.0, 10).is_err());
        assert!(dispersion(&p(0.0, 0.0, 0.0), -1.0, 1.0, 2).is_err());
        assert!(classify(&p(0.0, 0.0, 0.0), 0.0).is_err());
        let a = Axis::new(ParamName::OmegaR, 0.0, 1.0, 3);
        assert!(matches!(
            phase_diagram(a, a, &p(0.0, 1.0, 0.0), &BandScan::default()),
            Err(BandError::BadAxes)
        ));
    }

    #[test]
    fn grid_is_mirror_exact() {
        let g = linspace(-4.0, 4.0, 2001);
        for j in 0..g.len() {
            assert_eq!(g[j], -g[g.len() - 1 - j]);
        }
        assert_eq!(g[1000], 0.0);
    }
}
