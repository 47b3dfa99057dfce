//! Imaginary-time ground states of the trapped, interacting spin-1 condensate
//! with Raman spin-orbit coupling.
//!
//! Dimensionless units match the rest of the crate: energies in `E_r`,
//! lengths in `1/k_r`, time in `ħ/E_r`. The energy functional per atom is
//!
//! ```text
//! E[ψ] = ∫ ψ† H₁(-i∂) ψ + V n + (c0/2) n² + (c2/2) |F|²,
//! H₁   = H(k_x) + k_⊥²,   V = Σ_a ω̃_a² x_a² / 4,   ω̃ = ω / ω_rec,
//! ```
//!
//! with `ψ` normalized to 1, `n = ψ†ψ` and `F_a = ψ† J_a ψ`.
//!
//! # Couplings
//!
//! With `k_r = sqrt(2 m ω_rec / ħ)` and `ã = a k_r`, the 3-D contact coupling
//! `4πħ²a/m` becomes `g̃ = 8π ã`. Axes that are not on the grid are frozen in
//! their oscillator ground state (width `ℓ̃ = sqrt(2/ω̃)`), which divides the
//! coupling by `sqrt(2π) ℓ̃` per frozen axis; a quasi-1-D run therefore uses
//! `g̃ = 2 ã sqrt(ω̃_y ω̃_z)`. The channel couplings are
//! `c0 = N g̃(a_0 + 2a_2)/3` and `c2 = N g̃(a_2 - a_0)/3`.

mod checkpoint;
mod grid;

pub use checkpoint::{read_checkpoint, write_checkpoint};
pub use grid::Grid;

use std::f64::consts::PI;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::band_structure::{real_hamiltonian, ModelParams};
use crate::spin_algebra::{Generator, Mat3, C64};
use crate::squeezing_metrics::{MomentSet, Populations};
use grid::Transform;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
pub const RB87_MASS_AMU: f64 = 86.909_180_527;

#[derive(Debug, Clone, thiserror::Error)]
pub enum GpError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("no convergence after {iterations} iterations (last |dE| = {last_delta:e})")]
    NoConvergence {
        iterations: usize,
        last_delta: f64,
        field: Box<SpinorField>,
    },
    #[error("non-finite field at iteration {iteration}")]
    NonFinite {
        iteration: usize,
        last_good: Box<SpinorField>,
    },
}

/// Trap frequencies and the recoil frequency `E_r/ħ`, all in the same unit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapConfig {
    pub omega_x: f64,
    pub omega_y: f64,
    pub omega_z: f64,
    pub recoil_frequency: f64,
}

impl TrapConfig {
    pub fn validate(&self) -> Result<(), GpError> {
        for (name, v) in [
            ("omega_x", self.omega_x),
            ("omega_y", self.omega_y),
            ("omega_z", self.omega_z),
            ("recoil_frequency", self.recoil_frequency),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(GpError::Config(format!("trap {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// `ω̃ = ω / ω_rec` for x, y, z.
    pub fn dimensionless(&self) -> [f64; 3] {
        [self.omega_x, self.omega_y, self.omega_z].map(|w| w / self.recoil_frequency)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionConfig {
    /// Scattering lengths in Bohr radii.
    pub a_s0: f64,
    pub a_s2: f64,
    pub n_atoms: usize,
    pub mass_amu: f64,
}

impl InteractionConfig {
    pub fn rb87(n_atoms: usize) -> Self {
        Self {
            a_s0: 101.8,
            a_s2: 100.4,
            n_atoms,
            mass_amu: RB87_MASS_AMU,
        }
    }

    pub fn validate(&self) -> Result<(), GpError> {
        if !(self.a_s0.is_finite() && self.a_s2.is_finite()) {
            return Err(GpError::Config("scattering lengths must be finite".into()));
        }
        if !(self.mass_amu.is_finite() && self.mass_amu > 0.0) {
            return Err(GpError::Config(format!("mass must be positive, got {}", self.mass_amu)));
        }
        Ok(())
    }
}

/// Recoil wave number `k_r = sqrt(2 m ω_rec / ħ)` in 1/m.
pub fn recoil_wavenumber(recoil_frequency: f64, mass_amu: f64) -> f64 {
    (2.0 * mass_amu * ATOMIC_MASS_UNIT * recoil_frequency / HBAR).sqrt()
}

/// Density and spin channel couplings `(c0, c2)` for the axes on the grid.
pub fn couplings(trap: &TrapConfig, inter: &InteractionConfig, dim: usize) -> (f64, f64) {
    let kr = recoil_wavenumber(trap.recoil_frequency, inter.mass_amu);
    let w = trap.dimensionless();
    let frozen: f64 = w[dim..].iter().map(|wa| 1.0 / ((2.0 * PI).sqrt() * (2.0 / wa).sqrt())).product();
    let g = |a_bohr: f64| 8.0 * PI * a_bohr * BOHR_RADIUS * kr * frozen * inter.n_atoms as f64;
    (
        g((inter.a_s0 + 2.0 * inter.a_s2) / 3.0),
        g((inter.a_s2 - inter.a_s0) / 3.0),
    )
}

/// Three complex components on a grid, ordered `|+1>, |0>, |-1>`.
#[derive(Clone, PartialEq)]
pub struct SpinorField {
    pub grid: Grid,
    pub psi: [Vec<C64>; 3],
}

impl std::fmt::Debug for SpinorField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpinorField")
            .field("grid", &self.grid)
            .field("component_norms", &self.component_norms())
            .finish_non_exhaustive()
    }
}

impl SpinorField {
    pub fn zeros(grid: Grid) -> Self {
        let z = vec![C64::new(0.0, 0.0); grid.len()];
        Self {
            psi: [z.clone(), z.clone(), z],
            grid,
        }
    }

    /// Uniform field in a single spinor state.
    pub fn uniform(grid: Grid, spinor: [C64; 3]) -> Self {
        let mut f = Self::zeros(grid);
        for (comp, s) in f.psi.iter_mut().zip(spinor) {
            comp.iter_mut().for_each(|v| *v = s);
        }
        f.normalize();
        f
    }

    /// `∫ |ψ_m|²` for m = +1, 0, -1.
    pub fn component_norms(&self) -> [f64; 3] {
        let dv = self.grid.volume_element();
        self.psi.clone().map(|c| dv * c.iter().map(|v| v.norm_sqr()).sum::<f64>())
    }

    pub fn norm(&self) -> f64 {
        self.component_norms().iter().sum()
    }

    pub fn normalize(&mut self) {
        let s = 1.0 / self.norm().sqrt();
        self.psi.iter_mut().flatten().for_each(|v| *v *= s);
    }

    pub fn populations(&self) -> Populations {
        let [p, z, m] = self.component_norms();
        let t = p + z + m;
        Populations {
            rho_m1: m / t,
            rho_0: z / t,
            rho_p1: p / t,
        }
    }

    fn spinor_at(&self, i: usize) -> Vector3<C64> {
        Vector3::new(self.psi[0][i], self.psi[1][i], self.psi[2][i])
    }

    /// `∫ φ† χ`.
    pub fn inner(&self, other: &SpinorField) -> C64 {
        let dv = self.grid.volume_element();
        let s: C64 = self
            .psi
            .iter()
            .zip(&other.psi)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.conj() * y))
            .sum();
        s * dv
    }

    /// `x` wave number carrying the most weight.
    pub fn dominant_momentum(&self) -> f64 {
        let mut t = Transform::new(&self.grid);
        let nx = self.grid.points[0];
        let per = self.grid.transverse_len();
        let mut weight = vec![0.0; nx];
        for comp in &self.psi {
            let mut c = comp.clone();
            t.forward(&mut c);
            for (i, v) in c.iter().enumerate() {
                weight[i / per] += v.norm_sqr();
            }
        }
        let best = (0..nx).max_by(|a, b| weight[*a].total_cmp(&weight[*b]).then(b.cmp(a))).unwrap_or(0);
        self.grid.wavenumbers(0)[best]
    }
}

/// Collective moments of the Hartree product of `N` copies of the field mode.
pub fn gp_moments(field: &SpinorField, n_atoms: usize) -> MomentSet {
    let dv = field.grid.volume_element();
    let mats: Vec<Mat3> = Generator::ALL.iter().map(|g| g.matrix()).collect();
    let mut first = [0.0; 8];
    let mut second = [[0.0; 8]; 8];
    for i in 0..field.grid.len() {
        let v = field.spinor_at(i);
        let images: Vec<Vector3<C64>> = mats.iter().map(|m| m * v).collect();
        for a in 0..8 {
            first[a] += v.dotc(&images[a]).re;
            for b in a..8 {
                // <{Ga, Gb}/2> = Re <Ga v | Gb v>
                second[a][b] += images[a].dotc(&images[b]).re;
            }
        }
    }
    let n = n_atoms as f64;
    let mut out = MomentSet::new(n_atoms);
    for (a, ga) in Generator::ALL.into_iter().enumerate() {
        out.set_mean(ga, n * dv * first[a]);
        for (b, gb) in Generator::ALL.into_iter().enumerate().skip(a) {
            let c = dv * second[a][b] - dv * first[a] * dv * first[b];
            out.set_covariance(ga, gb, n * c);
        }
    }
    out
}

/// A fully specified, dimensionless GP problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GpProblem {
    pub params: ModelParams,
    /// `ω̃` for the grid axes; zero switches the trap off along that axis.
    pub omega: Vec<f64>,
    pub c0: f64,
    pub c2: f64,
    pub grid: Grid,
}

/// Builds the problem from physical inputs.
///
/// Every grid axis must span at least six oscillator lengths.
pub fn build_problem(
    params: &ModelParams,
    trap: &TrapConfig,
    inter: &InteractionConfig,
    grid: Grid,
) -> Result<GpProblem, GpError> {
    params.validate().map_err(|e| GpError::Config(e.to_string()))?;
    trap.validate()?;
    inter.validate()?;
    let w = trap.dimensionless();
    for a in 0..grid.dim() {
        let ell = (2.0 / w[a]).sqrt();
        if grid.extents[a] < 6.0 * ell {
            return Err(GpError::Config(format!(
                "grid axis {a} spans {} but needs at least 6 oscillator lengths ({})",
                grid.extents[a],
                6.0 * ell
            )));
        }
    }
    let (c0, c2) = couplings(trap, inter, grid.dim());
    Ok(GpProblem {
        params: *params,
        omega: w[..grid.dim()].to_vec(),
        c0,
        c2,
        grid,
    })
}

impl GpProblem {
    /// Dimensionless construction without the oscillator-length check.
    pub fn dimensionless(params: ModelParams, omega: Vec<f64>, c0: f64, c2: f64, grid: Grid) -> Result<Self, GpError> {
        if omega.len() != grid.dim() {
            return Err(GpError::Config(format!(
                "{} trap frequencies for a {}-axis grid",
                omega.len(),
                grid.dim()
            )));
        }
        if omega.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || !c0.is_finite() || !c2.is_finite() {
            return Err(GpError::Config("trap frequencies and couplings must be finite, traps non-negative".into()));
        }
        Ok(Self {
            params,
            omega,
            c0,
            c2,
            grid,
        })
    }

    fn potential(&self) -> Vec<f64> {
        (0..self.grid.len())
            .map(|i| {
                let idx = self.grid.unflatten(i);
                (0..self.grid.dim())
                    .map(|a| {
                        let x = self.grid.coordinate(a, idx[a]);
                        0.25 * self.omega[a] * self.omega[a] * x * x
                    })
                    .sum()
            })
            .collect()
    }

    /// `Σ k_⊥²` for each flat index within one x slab.
    fn transverse_kinetic(&self) -> Vec<f64> {
        let g = &self.grid;
        let ks: Vec<Vec<f64>> = (1..g.dim()).map(|a| g.wavenumbers(a)).collect();
        (0..g.transverse_len())
            .map(|i| {
                let idx = g.unflatten(i);
                (1..g.dim()).map(|a| ks[a - 1][idx[a]].powi(2)).sum()
            })
            .collect()
    }

    fn soc_blocks(&self) -> Vec<Matrix3<f64>> {
        self.grid.wavenumbers(0).iter().map(|k| real_hamiltonian(*k, &self.params)).collect()
    }

    /// `(H₁ + V) φ` for any field on the problem grid.
    pub fn apply_single_particle(&self, field: &SpinorField) -> SpinorField {
        let mut t = Transform::new(&self.grid);
        let mut spec = field.psi.clone();
        spec.iter_mut().for_each(|c| t.forward(c));
        let blocks = self.soc_blocks();
        let kt = self.transverse_kinetic();
        let per = self.grid.transverse_len();
        let mut out = SpinorField::zeros(self.grid.clone());
        for i in 0..self.grid.len() {
            let h = blocks[i / per].map(C64::from) + Mat3::identity() * C64::from(kt[i % per]);
            let v = h * Vector3::new(spec[0][i], spec[1][i], spec[2][i]);
            for m in 0..3 {
                out.psi[m][i] = v[m];
            }
        }
        out.psi.iter_mut().for_each(|c| t.inverse(c));
        let pot = self.potential();
        for m in 0..3 {
            for (o, (p, v)) in out.psi[m].iter_mut().zip(field.psi[m].iter().zip(&pot)) {
                *o += p * v;
            }
        }
        out
    }

    /// Energy per atom and chemical potential of a normalized field.
    pub fn energy(&self, field: &SpinorField) -> (f64, f64) {
        let mut ws = Workspace::new(self, 1.0);
        ws.energy(&field.psi)
    }

    /// Initial field: Gaussian envelope with random, seeded component mixing
    /// plus weak pointwise noise that seeds every momentum.
    pub fn initial_field(&self, seed: u64) -> SpinorField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = &self.grid;
        let widths: Vec<f64> = (0..g.dim())
            .map(|a| {
                let w = self.omega[a];
                if w <= 0.0 {
                    return f64::INFINITY;
                }
                let ell = (2.0 / w).sqrt();
                if a == 0 && g.dim() == 1 && self.c0 > 0.0 {
                    // Thomas–Fermi radius of the density channel alone
                    let mu = (3.0 * self.c0 * w / 8.0).powf(2.0 / 3.0);
                    ell.max(mu.sqrt() / w)
                } else {
                    ell
                }
            })
            .collect();
        let mut mix = [C64::new(0.0, 0.0); 3];
        for m in mix.iter_mut() {
            *m = C64::new(1.0 + 0.1 * (rng.random::<f64>() - 0.5), 0.1 * (rng.random::<f64>() - 0.5));
        }
        let mut f = SpinorField::zeros(g.clone());
        for i in 0..g.len() {
            let idx = g.unflatten(i);
            let env: f64 = (0..g.dim())
                .map(|a| {
                    let x = g.coordinate(a, idx[a]) / widths[a];
                    (-0.5 * x * x).exp()
                })
                .product();
            for m in 0..3 {
                let noise = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                f.psi[m][i] = mix[m] * env + noise * 1e-3;
            }
        }
        f.normalize();
        f
    }
}

/// Solver controls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GpConfig {
    /// Imaginary-time step.
    pub dt: f64,
    /// Convergence threshold on `|E_{n+1} - E_n|`.
    pub tol: f64,
    pub max_iter: usize,
    pub min_iter: usize,
    pub seed: u64,
}

impl Default for GpConfig {
    fn default() -> Self {
        Self {
            dt: 0.005,
            tol: 1e-11,
            max_iter: 400_000,
            min_iter: 200,
            seed: 1,
        }
    }
}

impl GpConfig {
    pub fn validate(&self) -> Result<(), GpError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(GpError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(GpError::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(GpError::Config("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub field: SpinorField,
    pub energy: f64,
    pub chemical_potential: f64,
    /// Energy after every step.
    pub energy_history: Vec<f64>,
    pub iterations: usize,
}

impl GroundState {
    /// Number of steps in the last `fraction` of the run where the energy rose
    /// by more than `slack`.
    pub fn energy_increases(&self, fraction: f64, slack: f64) -> usize {
        let h = &self.energy_history;
        let start = ((1.0 - fraction) * h.len() as f64).floor() as usize;
        h[start.min(h.len())..].windows(2).filter(|w| w[1] > w[0] + slack).count()
    }
}

struct Workspace<'a> {
    problem: &'a GpProblem,
    transform: Transform,
    potential: Vec<f64>,
    blocks: Vec<Matrix3<f64>>,
    kin_exp: Vec<Matrix3<f64>>,
    trans_kin: Vec<f64>,
    trans_exp: Vec<f64>,
    spec: [Vec<C64>; 3],
    jmats: [Mat3; 3],
}

impl<'a> Workspace<'a> {
    fn new(problem: &'a GpProblem, dt: f64) -> Self {
        let blocks = problem.soc_blocks();
        let kin_exp = blocks
            .iter()
            .map(|h| {
                let e = SymmetricEigen::new(*h);
                let d = Matrix3::from_diagonal(&e.eigenvalues.map(|l| (-dt * l).exp()));
                e.eigenvectors * d * e.eigenvectors.transpose()
            })
            .collect();
        let trans_kin = problem.transverse_kinetic();
        let trans_exp = trans_kin.iter().map(|k| (-dt * k).exp()).collect();
        let n = problem.grid.len();
        let z = vec![C64::new(0.0, 0.0); n];
        Self {
            problem,
            transform: Transform::new(&problem.grid),
            potential: problem.potential(),
            blocks,
            kin_exp,
            trans_kin,
            trans_exp,
            spec: [z.clone(), z.clone(), z],
            jmats: [Generator::Jx.matrix(), Generator::Jy.matrix(), Generator::Jz.matrix()],
        }
    }

    fn spin_density(&self, v: &Vector3<C64>) -> [f64; 3] {
        self.jmats.map(|j| v.dotc(&(j * v)).re)
    }

    /// Pointwise `exp(-τ (V + c0 n + c2 F·J))`.
    fn nonlinear(&self, psi: &mut [Vec<C64>; 3], tau: f64) {
        let p = self.problem;
        for i in 0..psi[0].len() {
            let v = Vector3::new(psi[0][i], psi[1][i], psi[2][i]);
            let n = v.norm_squared();
            let mut out = v * C64::from((-tau * (self.potential[i] + p.c0 * n)).exp());
            if p.c2 != 0.0 {
                let f = self.spin_density(&v);
                let fm = (f[0] * f[0] + f[1] * f[1] + f[2] * f[2]).sqrt();
                if fm > 0.0 {
                    // (n̂·J)³ = n̂·J, so exp(aM) = 1 + sinh(a) M + (cosh(a) - 1) M²
                    let m = (self.jmats[0] * C64::from(f[0]) + self.jmats[1] * C64::from(f[1]) + self.jmats[2] * C64::from(f[2]))
                        * C64::from(1.0 / fm);
                    let a = -tau * p.c2 * fm;
                    let u = Mat3::identity() + m * C64::from(a.sinh()) + m * m * C64::from(a.cosh() - 1.0);
                    out = u * out;
                }
            }
            for c in 0..3 {
                psi[c][i] = out[c];
            }
        }
    }

    fn kinetic(&mut self, psi: &mut [Vec<C64>; 3]) {
        for c in psi.iter_mut() {
            self.transform.forward(c);
        }
        let per = self.problem.grid.transverse_len();
        for i in 0..psi[0].len() {
            let e = &self.kin_exp[i / per];
            let s = self.trans_exp[i % per];
            let v = [psi[0][i], psi[1][i], psi[2][i]];
            for r in 0..3 {
                psi[r][i] = (v[0] * e[(r, 0)] + v[1] * e[(r, 1)] + v[2] * e[(r, 2)]) * s;
            }
        }
        for c in psi.iter_mut() {
            self.transform.inverse(c);
        }
    }

    fn energy(&mut self, psi: &[Vec<C64>; 3]) -> (f64, f64) {
        let p = self.problem;
        let g = &p.grid;
        let dv = g.volume_element();
        for (s, c) in self.spec.iter_mut().zip(psi) {
            s.copy_from_slice(c);
            self.transform.forward(s);
        }
        let per = g.transverse_len();
        let mut kin = 0.0;
        for i in 0..g.len() {
            let h = &self.blocks[i / per];
            let v = [self.spec[0][i], self.spec[1][i], self.spec[2][i]];
            let mut acc = self.trans_kin[i % per] * (v[0].norm_sqr() + v[1].norm_sqr() + v[2].norm_sqr());
            for r in 0..3 {
                for c in 0..3 {
                    acc += h[(r, c)] * (v[r].conj() * v[c]).re;
                }
            }
            kin += acc;
        }
        kin *= dv / g.len() as f64;
        let (mut pot, mut dens, mut spin) = (0.0, 0.0, 0.0);
        for i in 0..g.len() {
            let v = Vector3::new(psi[0][i], psi[1][i], psi[2][i]);
            let n = v.norm_squared();
            pot += self.potential[i] * n;
            dens += n * n;
            if p.c2 != 0.0 {
                let f = self.spin_density(&v);
                spin += f[0] * f[0] + f[1] * f[1] + f[2] * f[2];
            }
        }
        let (pot, dens, spin) = (pot * dv, dens * dv, spin * dv);
        let energy = kin + pot + 0.5 * p.c0 * dens + 0.5 * p.c2 * spin;
        let mu = kin + pot + p.c0 * dens + p.c2 * spin;
        (energy, mu)
    }
}

fn renormalize(psi: &mut [Vec<C64>; 3], dv: f64) -> f64 {
    let norm: f64 = dv * psi.iter().flatten().map(|v| v.norm_sqr()).sum::<f64>();
    let s = 1.0 / norm.sqrt();
    psi.iter_mut().flatten().for_each(|v| *v *= s);
    norm
}

/// Strang-split imaginary-time relaxation from the seeded initial field.
///
/// Each step applies half a nonlinear/trap step, a full kinetic+SOC step in
/// momentum space (exact 3x3 exponential per `k_x`), another half nonlinear
/// step, and renormalizes. Stops once `|ΔE| < tol` after `min_iter` steps.
pub fn imaginary_time_ground_state(problem: &GpProblem, cfg: &GpConfig) -> Result<GroundState, GpError> {
    imaginary_time_from(problem, cfg, problem.initial_field(cfg.seed))
}

pub fn imaginary_time_from(problem: &GpProblem, cfg: &GpConfig, start: SpinorField) -> Result<GroundState, GpError> {
    cfg.validate()?;
    if start.grid != problem.grid {
        return Err(GpError::Config("initial field grid does not match the problem grid".into()));
    }
    let dv = problem.grid.volume_element();
    let mut ws = Workspace::new(problem, cfg.dt);
    let mut psi = start.psi;
    renormalize(&mut psi, dv);
    let mut last_good = psi.clone();
    let (mut energy, _) = ws.energy(&psi);
    let mut history = Vec::new();
    let mut last_delta = f64::INFINITY;
    for it in 1..=cfg.max_iter {
        ws.nonlinear(&mut psi, 0.5 * cfg.dt);
        ws.kinetic(&mut psi);
        ws.nonlinear(&mut psi, 0.5 * cfg.dt);
        let norm = renormalize(&mut psi, dv);
        let (e, mu) = ws.energy(&psi);
        if !(norm.is_finite() && norm > 0.0 && e.is_finite()) {
            return Err(GpError::NonFinite {
                iteration: it,
                last_good: Box::new(SpinorField {
                    grid: problem.grid.clone(),
                    psi: last_good,
                }),
            });
        }
        history.push(e);
        last_delta = (e - energy).abs();
        energy = e;
        if it >= cfg.min_iter && last_delta < cfg.tol {
            return Ok(GroundState {
                field: SpinorField {
                    grid: problem.grid.clone(),
                    psi,
                },
                energy: e,
                chemical_potential: mu,
                energy_history: history,
                iterations: it,
            });
        }
        for (g, p) in last_good.iter_mut().zip(&psi) {
            g.copy_from_slice(p);
        }
    }
    Err(GpError::NoConvergence {
        iterations: cfg.max_iter,
        last_delta,
        field: Box::new(SpinorField {
            grid: problem.grid.clone(),
            psi,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::band_structure::classify;
    use crate::squeezing_metrics::xi_x;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn harmonic(params: ModelParams, omega: f64, c0: f64, c2: f64, n: usize) -> GpProblem {
        let ell = (2.0 / omega).sqrt();
        let grid = Grid::uniform(1, n, 16.0 * ell).unwrap();
        GpProblem::dimensionless(params, vec![omega], c0, c2, grid).unwrap()
    }

    #[test]
    fn coupling_prefactors_follow_si_route() {
        let trap = TrapConfig {
            omega_x: 5000.0,
            omega_y: 5000.0,
            omega_z: 1500.0,
            recoil_frequency: 23116.0,
        };
        let inter = InteractionConfig::rb87(100_000);
        // the same quantity built directly in SI: g1D / (E_r / k_r) · N
        let m = RB87_MASS_AMU * ATOMIC_MASS_UNIT;
        let a = (inter.a_s0 + 2.0 * inter.a_s2) / 3.0 * BOHR_RADIUS;
        let g3 = 4.0 * PI * HBAR * HBAR * a / m;
        let ly = (HBAR / (m * trap.omega_y)).sqrt();
        let lz = (HBAR / (m * trap.omega_z)).sqrt();
        let g1 = g3 / (2.0 * PI * ly * lz);
        let er = HBAR * trap.recoil_frequency;
        let kr = (2.0 * m * er).sqrt() / HBAR;
        let expect = g1 * kr / er * inter.n_atoms as f64;
        let (c0, c2) = couplings(&trap, &inter, 1);
        assert!((c0 / expect - 1.0).abs() < 1e-12, "{c0} vs {expect}");
        assert!(c2 < 0.0);
        assert!((c2 / c0 - (inter.a_s2 - inter.a_s0) / (inter.a_s0 + 2.0 * inter.a_s2)).abs() < 1e-14);
        // a 3-D run has no frozen axes and picks up dimension 1/length³ → k_r³
        let (c0_3d, _) = couplings(&trap, &inter, 3);
        let expect_3d = g3 * kr.powi(3) / er * inter.n_atoms as f64;
        assert!((c0_3d / expect_3d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_must_cover_oscillator() {
        let trap = TrapConfig {
            omega_x: 1000.0,
            omega_y: 1000.0,
            omega_z: 1000.0,
            recoil_frequency: 1000.0,
        };
        let p = ModelParams::default();
        let inter = InteractionConfig::rb87(1000);
        assert!(build_problem(&p, &trap, &inter, Grid::uniform(1, 64, 8.0).unwrap()).is_err());
        assert!(build_problem(&p, &trap, &inter, Grid::uniform(1, 64, 9.0).unwrap()).is_ok());
        let bad = TrapConfig { recoil_frequency: 0.0, ..trap };
        assert!(build_problem(&p, &bad, &inter, Grid::uniform(1, 64, 9.0).unwrap()).is_err());
    }

    #[test]
    fn single_particle_operator_is_hermitian() {
        let params = ModelParams::new(1.7, 0.4, 3.0, 10);
        let grid = Grid::new(vec![16, 6, 4], vec![12.0, 9.0, 8.0]).unwrap();
        let prob = GpProblem::dimensionless(params, vec![0.8, 1.1, 1.3], 0.0, 0.0, grid.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut random = || {
            let mut f = SpinorField::zeros(grid.clone());
            f.psi
                .iter_mut()
                .flatten()
                .for_each(|v| *v = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            f
        };
        let (phi, chi) = (random(), random());
        let lhs = phi.inner(&prob.apply_single_particle(&chi));
        let rhs = prob.apply_single_particle(&phi).inner(&chi);
        assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1.0));
    }

    #[test]
    fn decoupled_oscillator() {
        let omega = 1.0;
        let prob = harmonic(ModelParams::new(0.0, 0.0, 6.0, 1), omega, 0.0, 0.0, 128);
        let cfg = GpConfig {
            dt: 0.01,
            tol: 1e-13,
            ..GpConfig::default()
        };
        let gs = imaginary_time_ground_state(&prob, &cfg).unwrap();
        let p = gs.field.populations();
        assert!((p.rho_0 - 1.0).abs() < 1e-6, "{p:?}");
        let exact = 0.5 * omega - 6.0;
        assert!((gs.energy - exact).abs() < 1e-3 * exact.abs(), "{} vs {exact}", gs.energy);
        assert!((gs.field.norm() - 1.0).abs() < 1e-10);
        assert_eq!(gs.energy_increases(0.9, 1e-13), 0);
        assert!((gs.chemical_potential - gs.energy).abs() < 1e-9);
    }

    #[test]
    fn detuning_reflection_swaps_side_components() {
        let cfg = GpConfig {
            dt: 0.01,
            tol: 1e-14,
            ..GpConfig::default()
        };
        let run = |delta: f64| {
            let prob = harmonic(ModelParams::new(2.0, delta, 6.0, 1), 2.0, 0.0, 0.0, 128);
            imaginary_time_ground_state(&prob, &cfg).unwrap().field.populations()
        };
        let (a, b) = (run(2.0), run(-2.0));
        assert!((a.rho_p1 - b.rho_m1).abs() < 1e-6 && (a.rho_m1 - b.rho_p1).abs() < 1e-6);
        assert!(a.rho_p1 > a.rho_m1);
        let s = run(0.0);
        assert!((s.rho_p1 - s.rho_m1).abs() < 1e-6);
    }

    #[test]
    fn chemical_potential_grows_with_interaction() {
        let cfg = GpConfig {
            dt: 0.005,
            tol: 1e-11,
            ..GpConfig::default()
        };
        let params = ModelParams::new(0.0, 0.0, 6.0, 1);
        let mu = |c0: f64| {
            let ell = (2.0f64 / 0.5).sqrt();
            let grid = Grid::uniform(1, 256, 40.0 * ell).unwrap();
            let prob = GpProblem::dimensionless(params, vec![0.5], c0, 0.0, grid).unwrap();
            imaginary_time_ground_state(&prob, &cfg).unwrap().chemical_potential
        };
        let (a, b) = (mu(20.0), mu(80.0));
        assert!(b > a, "{a} {b}");
    }

    #[test]
    fn free_field_momentum_matches_band_minimum() {
        let params = ModelParams::new(1.0, 1.0, 0.0, 1);
        let grid = Grid::uniform(1, 128, 40.0 * PI).unwrap();
        let prob = GpProblem::dimensionless(params, vec![0.0], 0.0, 0.0, grid.clone()).unwrap();
        let cfg = GpConfig {
            dt: 0.02,
            tol: 1e-10,
            ..GpConfig::default()
        };
        let gs = imaginary_time_ground_state(&prob, &cfg).unwrap();
        let cell = classify(&params, 1e-6).unwrap();
        let dk = 2.0 * PI / grid.extents[0];
        assert!((gs.field.dominant_momentum() - cell.k_min).abs() <= dk, "{} vs {}", gs.field.dominant_momentum(), cell.k_min);
    }

    #[test]
    fn hartree_moments_of_pure_states() {
        let grid = Grid::uniform(1, 8, 4.0).unwrap();
        let zero = SpinorField::uniform(grid.clone(), [c(0.0), c(1.0), c(0.0)]);
        let m = gp_moments(&zero, 500);
        assert!(m.mean(Generator::Jx).unwrap().abs() < 1e-12);
        assert!((m.variance(Generator::Jx).unwrap() - 500.0).abs() < 1e-9);
        assert!((xi_x(&m).unwrap() - 1.0).abs() < 1e-12);

        let up = SpinorField::uniform(grid.clone(), [c(1.0), c(0.0), c(0.0)]);
        let m = gp_moments(&up, 500);
        assert!((m.mean(Generator::Jz).unwrap() - 500.0).abs() < 1e-9);
        assert!(m.variance(Generator::Jz).unwrap().abs() < 1e-9);

        let pm = SpinorField::uniform(grid, [c(1.0), c(0.0), c(1.0)]);
        let m = gp_moments(&pm, 500);
        assert!(m.mean(Generator::Jz).unwrap().abs() < 1e-12);
        assert!((m.variance(Generator::Jz).unwrap() - 500.0).abs() < 1e-9);
        let p = pm.populations();
        assert!((p.rho_p1 - 0.5).abs() < 1e-14);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let prob = harmonic(ModelParams::new(1.5, 0.3, 4.0, 1), 1.0, 30.0, -0.5, 64);
        let cfg = GpConfig {
            max_iter: 300,
            min_iter: 300,
            ..GpConfig::default()
        };
        let a = imaginary_time_from(&prob, &cfg, prob.initial_field(9));
        let b = imaginary_time_from(&prob, &cfg, prob.initial_field(9));
        let (fa, fb) = match (a, b) {
            (Err(GpError::NoConvergence { field: fa, .. }), Err(GpError::NoConvergence { field: fb, .. })) => (fa, fb),
            (Ok(a), Ok(b)) => (Box::new(a.field), Box::new(b.field)),
            _ => panic!("runs disagree"),
        };
        assert_eq!(fa, fb);
    }

    #[test]
    fn non_finite_aborts() {
        let prob = harmonic(ModelParams::new(1.0, 0.0, 6.0, 1), 1.0, 0.0, 0.0, 32);
        let mut start = prob.initial_field(1);
        start.psi[0][3] = C64::new(f64::NAN, 0.0);
        let r = imaginary_time_from(&prob, &GpConfig::default(), start);
        assert!(matches!(r, Err(GpError::NonFinite { iteration: 1, .. })));
    }
}
