//! Exact diagonalization in the symmetric (bosonic) Fock space of N spin-1 atoms.
//!
//! Basis states are occupation triples `(n₊₁, n₀, n₋₁)` with fixed total N,
//! indexed lexicographically in `(n₊₁, n₋₁)` with `n₀` implied:
//! `index = n₊₁ (N + 1) - n₊₁ (n₊₁ - 1)/2 + n₋₁`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::lanczos::lanczos_ground;
use super::{EffectiveCoefficients, EffectiveModelError, SpecMoments};
use crate::spin_algebra::{CollectiveOperatorSpec, Generator, Mat3, C64};
use crate::squeezing_metrics::MomentSet;

/// Indexing of the symmetric Fock space for fixed N.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FockBasis {
    n: usize,
}

impl FockBasis {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn n_atoms(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        (self.n + 1) * (self.n + 2) / 2
    }

    /// Index of the state with `n_plus` atoms in `|+1>` and `n_minus` in `|-1>`.
    pub fn index(&self, n_plus: usize, n_minus: usize) -> usize {
        debug_assert!(n_plus + n_minus <= self.n);
        n_plus * (self.n + 1) - n_plus * n_plus.saturating_sub(1) / 2 + n_minus
    }

    /// Occupations `[n₊₁, n₀, n₋₁]` in matrix-basis order.
    pub fn occupations(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        (0..=self.n).flat_map(move |p| (0..=self.n - p).map(move |m| [p, self.n - p - m, m]))
    }

    fn index_of(&self, occ: [usize; 3]) -> usize {
        self.index(occ[0], occ[2])
    }
}

/// Lowest eigenstate of `H_eff` in the symmetric Fock space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetricFockState {
    pub n_atoms: usize,
    pub amplitudes: Vec<C64>,
    pub energy: f64,
}

impl SymmetricFockState {
    pub fn basis(&self) -> FockBasis {
        FockBasis::new(self.n_atoms)
    }

    /// The Fock state `|n₊₁, n₀, n₋₁>`.
    pub fn fock(occ: [usize; 3]) -> Self {
        let n = occ.iter().sum();
        let basis = FockBasis::new(n);
        let mut amplitudes = vec![C64::new(0.0, 0.0); basis.dim()];
        amplitudes[basis.index_of(occ)] = C64::new(1.0, 0.0);
        Self {
            n_atoms: n,
            amplitudes,
            energy: f64::NAN,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Mean occupations `<n₊₁>, <n₀>, <n₋₁>`.
    pub fn mean_occupations(&self) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (occ, a) in self.basis().occupations().zip(&self.amplitudes) {
            let w = a.norm_sqr();
            for (o, n) in out.iter_mut().zip(occ) {
                *o += w * n as f64;
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdConfig {
    pub n_max: usize,
    /// Dimensions up to this size are diagonalized densely.
    pub dense_threshold: usize,
    /// Residual target for the iterative solver.
    pub tol: f64,
    pub krylov: usize,
    pub max_restarts: usize,
}

impl Default for EdConfig {
    fn default() -> Self {
        Self {
            n_max: 300,
            dense_threshold: 2000,
            tol: 1e-10,
            krylov: 120,
            max_restarts: 60,
        }
    }
}

/// `out = F_G psi` with `F_G = sum_mn G_mn a_m† a_n`.
pub fn apply_collective(basis: &FockBasis, g: &Mat3, psi: &[C64], out: &mut [C64]) {
    out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
    let entries: Vec<(usize, usize, C64)> = (0..3)
        .flat_map(|m| (0..3).map(move |k| (m, k)))
        .filter_map(|(m, k)| {
            let v = g[(m, k)];
            (v != C64::new(0.0, 0.0)).then_some((m, k, v))
        })
        .collect();
    for (j, occ) in basis.occupations().enumerate() {
        let amp = psi[j];
        if amp == C64::new(0.0, 0.0) {
            continue;
        }
        for &(m, k, v) in &entries {
            if m == k {
                out[j] += v * occ[m] as f64 * amp;
            } else if occ[k] > 0 {
                let mut to = occ;
                to[k] -= 1;
                to[m] += 1;
                let factor = ((occ[k] * (occ[m] + 1)) as f64).sqrt();
                out[basis.index_of(to)] += v * factor * amp;
            }
        }
    }
}

/// Visits every nonzero matrix element of the (real) `H_eff`.
fn for_each_element(c: &EffectiveCoefficients, basis: &FockBasis, mut visit: impl FnMut(usize, usize, f64)) {
    let hop = c.hx * std::f64::consts::FRAC_1_SQRT_2;
    let inv_sqrt3 = 1.0 / 3f64.sqrt();
    for (j, [np, n0, nm]) in basis.occupations().enumerate() {
        let fz = np as f64 - nm as f64;
        let fy = (np as f64 + nm as f64 - 2.0 * n0 as f64) * inv_sqrt3;
        visit(j, j, -c.q * fz * fz + c.hz * fz + c.h_y * fy);
        if hop == 0.0 {
            continue;
        }
        // Fx moves one atom between |0> and |±1>; emit each pair in both directions
        if n0 > 0 {
            let v = hop * ((n0 * (np + 1)) as f64).sqrt();
            let i = basis.index(np + 1, nm);
            visit(i, j, v);
            visit(j, i, v);
            let v = hop * ((n0 * (nm + 1)) as f64).sqrt();
            let i = basis.index(np, nm + 1);
            visit(i, j, v);
            visit(j, i, v);
        }
    }
}

fn fix_phase(amplitudes: &mut [C64]) {
    let max = amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = amplitudes
        .iter()
        .position(|a| a.norm() >= max * (1.0 - 1e-10))
        .expect("maximum exists");
    let phase = amplitudes[pivot].conj() / amplitudes[pivot].norm();
    amplitudes.iter_mut().for_each(|a| *a *= phase);
}

pub fn ed_ground_state(
    coeffs: &EffectiveCoefficients,
    n_atoms: usize,
) -> Result<SymmetricFockState, EffectiveModelError> {
    ed_ground_state_with(coeffs, n_atoms, &EdConfig::default())
}

/// Ground state of `H_eff`, dense below `dense_threshold` and Lanczos above.
///
/// The returned amplitudes are normalized and carry the phase convention that
/// the first largest-modulus amplitude is real and positive.
pub fn ed_ground_state_with(
    coeffs: &EffectiveCoefficients,
    n_atoms: usize,
    config: &EdConfig,
) -> Result<SymmetricFockState, EffectiveModelError> {
    if n_atoms == 0 {
        return Err(crate::band_structure::ParamError::NoAtoms.into());
    }
    if n_atoms > config.n_max {
        return Err(EffectiveModelError::OverCap {
            n: n_atoms,
            cap: config.n_max,
        });
    }
    let basis = FockBasis::new(n_atoms);
    let dim = basis.dim();

    let (energy, vector) = if dim <= config.dense_threshold {
        let mut h = DMatrix::<f64>::zeros(dim, dim);
        for_each_element(coeffs, &basis, |i, j, v| h[(i, j)] += v);
        let eig = SymmetricEigen::try_new(h, f64::EPSILON, 0)
            .ok_or(EffectiveModelError::DenseFailure(dim))?;
        let (k, e) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, e)| (k, *e))
            .expect("dimension is at least 3");
        (e, eig.eigenvectors.column(k).iter().copied().collect::<Vec<_>>())
    } else {
        // assemble once in CSR-like form; the operator is applied many times
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
        for_each_element(coeffs, &basis, |i, j, v| rows[i].push((j, v)));
        let apply = |x: &[f64], y: &mut [f64]| {
            for (yi, row) in y.iter_mut().zip(&rows) {
                *yi = row.iter().map(|&(j, v)| v * x[j]).sum();
            }
        };
        match lanczos_ground(dim, apply, config.tol, config.krylov, config.max_restarts) {
            Ok(r) => (r.eigenvalue, r.eigenvector),
            Err(r) => {
                return Err(EffectiveModelError::NoConvergence {
                    iterations: r.iterations,
                    residual: r.residual,
                    tol: config.tol,
                })
            }
        }
    };

    let norm = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut amplitudes: Vec<C64> = vector.iter().map(|x| C64::new(x / norm, 0.0)).collect();
    fix_phase(&mut amplitudes);
    Ok(SymmetricFockState {
        n_atoms,
        amplitudes,
        energy,
    })
}

/// Exact moments of collective observables in a Fock-space state.
pub fn ed_moments(state: &SymmetricFockState, specs: &[CollectiveOperatorSpec]) -> SpecMoments {
    let basis = state.basis();
    let images: Vec<Vec<C64>> = specs
        .iter()
        .map(|s| {
            let mut out = vec![C64::new(0.0, 0.0); basis.dim()];
            if !s.is_zero() {
                apply_collective(&basis, &s.matrix(), &state.amplitudes, &mut out);
            }
            out
        })
        .collect();
    let inner = |a: &[C64], b: &[C64]| -> C64 { a.iter().zip(b).map(|(x, y)| x.conj() * y).sum() };
    let means: Vec<f64> = images.iter().map(|f| inner(&state.amplitudes, f).re).collect();
    let k = specs.len();
    let mut second = nalgebra::DMatrix::zeros(k, k);
    for a in 0..k {
        for b in a..k {
            // <F_a F_b + F_b F_a>/2 = Re <F_a psi | F_b psi> for Hermitian F
            let v = inner(&images[a], &images[b]).re;
            second[(a, b)] = v;
            second[(b, a)] = v;
        }
    }
    SpecMoments { means, second }
}

/// All eight generator moments, as consumed by the squeezing metrics.
pub fn ed_moment_set(state: &SymmetricFockState) -> MomentSet {
    let specs: Vec<_> = Generator::ALL.iter().map(|g| CollectiveOperatorSpec::single(*g)).collect();
    MomentSet::from_spec_moments(state.n_atoms, &ed_moments(state, &specs))
}
