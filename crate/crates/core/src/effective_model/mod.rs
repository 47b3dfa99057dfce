//! Effective collective-spin Hamiltonian
//!
//! ```text
//! H_eff = -q Fz² + hx Fx + hz Fz + hY F_Y,
//! q = 8/N,  hx = Ω_R/√2,  hz = -δ,  hY = (4 + ε)/√3      (units of E_r)
//! ```
//!
//! solved two ways: exact diagonalization in the symmetric Fock space
//! ([`ed_ground_state`]) and a Holstein–Primakoff mean field with Gaussian
//! fluctuations ([`hp_mean_field`], [`hp_quadratic`]).

mod fock;
mod gaussian;
mod lanczos;

pub use fock::{
    apply_collective, ed_ground_state, ed_ground_state_with, ed_moment_set, ed_moments,
    EdConfig, FockBasis, SymmetricFockState,
};
pub use gaussian::{
    gaussian_moment_set, gaussian_moments, hp_mean_field, hp_quadratic, mean_field_energy,
    mean_field_energy_derivatives, symplectic_eigenvalues, GaussianSolution, MeanField,
};
pub use lanczos::{lanczos_ground, LanczosResult};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::band_structure::{ModelParams, ParamError};

/// Coefficients of `H_eff`, in units of `E_r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveCoefficients {
    pub q: f64,
    pub hx: f64,
    pub hz: f64,
    pub h_y: f64,
}

impl EffectiveCoefficients {
    /// `q N`, which equals 8 for coefficients built from [`effective_coefficients`].
    pub fn twisting_total(&self, n_atoms: usize) -> f64 {
        self.q * n_atoms as f64
    }
}

pub fn effective_coefficients(params: &ModelParams) -> Result<EffectiveCoefficients, ParamError> {
    params.validate()?;
    Ok(EffectiveCoefficients {
        q: 8.0 / params.n_atoms as f64,
        hx: params.omega_r / std::f64::consts::SQRT_2,
        hz: -params.delta,
        h_y: (4.0 + params.epsilon) / 3f64.sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EffectiveModelError {
    #[error("N = {n} exceeds the exact-diagonalization cap {cap}")]
    OverCap { n: usize, cap: usize },
    #[error("Lanczos did not reach residual {tol:e} (best {residual:e}) after {iterations} iterations")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        tol: f64,
    },
    #[error("dense eigen-solver failed for dimension {0}")]
    DenseFailure(usize),
    #[error("mean-field minimization failed from every start; best gradient norm {grad_norm:e} at {best:?}")]
    MeanFieldFailed { best: [f64; 4], grad_norm: f64 },
    #[error("expansion point is not stationary (gradient norm {0:e})")]
    NotStationary(f64),
    #[error("unstable expansion point: normal mode {frequency} is not positive")]
    UnstableMode { frequency: f64 },
    #[error("observable has no quadratic Holstein–Primakoff image: {0}")]
    UnsupportedObservable(String),
    #[error(transparent)]
    Params(#[from] ParamError),
}

/// First and symmetrized second moments of a list of collective observables.
#[derive(Clone, Debug, PartialEq)]
pub struct SpecMoments {
    pub means: Vec<f64>,
    /// `second[(a, b)] = <(F_a F_b + F_b F_a)/2>`.
    pub second: DMatrix<f64>,
}

impl SpecMoments {
    pub fn covariance(&self, a: usize, b: usize) -> f64 {
        self.second[(a, b)] - self.means[a] * self.means[b]
    }

    pub fn variance(&self, a: usize) -> f64 {
        self.covariance(a, a)
    }
}
