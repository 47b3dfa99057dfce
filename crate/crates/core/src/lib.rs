//! Spin-nematic squeezing in spin-orbit coupled three-component Bose gases.
//!
//! The crate is organized around the physics pipeline:
//!
//! - [`spin_algebra`]: the eight spin-1 generators and collective-operator weights.
//! - [`band_structure`]: single-particle dispersion, minima counting and phase diagrams.
//! - [`effective_model`]: the collective-spin Hamiltonian solved by exact
//!   diagonalization in the symmetric Fock space and by a Holstein–Primakoff
//!   Gaussian expansion.
//! - [`squeezing_metrics`]: spin-nematic squeezing, two-mode entanglement and
//!   two-spin squeezing from any backend's moments, plus the RF detection rotation.
//! - [`gp_solver`]: imaginary-time split-step ground states of the trapped,
//!   interacting spinor condensate.
//! - [`runner`]: configuration files, parameter sweeps and CSV/JSON output used
//!   by the `socsqueeze` binary.
//!
//! Units: energies in the recoil energy `E_r`, momenta in the recoil momentum
//! `k_r`, lengths in `1/k_r`, with `ħ = m = 1`.

pub mod band_structure;
pub mod csvfmt;
pub mod effective_model;
pub mod gp_solver;
pub mod runner;
pub mod spin_algebra;
pub mod squeezing_metrics;

pub use band_structure::{ModelParams, ParamName};
pub use effective_model::{EffectiveCoefficients, GaussianSolution, SymmetricFockState};
pub use spin_algebra::{CollectiveOperatorSpec, Generator, SpinOperator};
pub use squeezing_metrics::{MomentSet, Populations, SqueezingReport};
