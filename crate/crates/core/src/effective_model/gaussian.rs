//! Holstein–Primakoff mean field plus Gaussian (Bogoliubov) fluctuations.
//!
//! The two spin-flip modes `b₊₁, b₋₁` replace the `|±1>` amplitudes with
//! `a₀ → N₀' = sqrt(N - b₊₁†b₊₁ - b₋₁†b₋₁)`. Every collective generator then
//! has the classical symbol `ζ† G ζ` with `ζ = (b₊₁, N₀', b₋₁)`.
//!
//! Mean field: `b± = sqrt(N) β±`, parametrized by
//! `u = (Re β₊, Im β₊, Re β₋, Im β₋)`; the energy per atom `e(u)` does not
//! depend on N because `qN = 8`.
//!
//! Fluctuations: quadratures `r = (x₊, p₊, x₋, p₋)` with `δb = (x + ip)/√2`,
//! vacuum covariance `diag(1/2)`. Around a stationary point the Hamiltonian is
//! `½ rᵀ K r` with `K = ½ ∇²_u e`; third and higher orders are dropped.

use nalgebra::{DMatrix, Matrix4, SymmetricEigen, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use super::{EffectiveCoefficients, EffectiveModelError, SpecMoments};
use crate::spin_algebra::{CollectiveOperatorSpec, Generator, Mat3, C64};
use crate::squeezing_metrics::MomentSet;

type Spinor = Vector3<C64>;

/// `ζ(u)` with first and second derivatives in `u`.
struct SpinorJet {
    zeta: Spinor,
    d1: [Spinor; 4],
    /// Only the `|0>` component has curvature.
    d2_zero: Matrix4<f64>,
}

impl SpinorJet {
    fn at(u: &Vector4<f64>) -> Option<Self> {
        let s2 = 1.0 - u.norm_squared();
        if !(s2 > 0.0) {
            return None;
        }
        let s = s2.sqrt();
        let c = |re: f64, im: f64| C64::new(re, im);
        let zeta = Spinor::new(c(u[0], u[1]), c(s, 0.0), c(u[2], u[3]));
        let ds: Vec<f64> = (0..4).map(|i| -u[i] / s).collect();
        let d1 = [
            Spinor::new(c(1.0, 0.0), c(ds[0], 0.0), c(0.0, 0.0)),
            Spinor::new(c(0.0, 1.0), c(ds[1], 0.0), c(0.0, 0.0)),
            Spinor::new(c(0.0, 0.0), c(ds[2], 0.0), c(1.0, 0.0)),
            Spinor::new(c(0.0, 0.0), c(ds[3], 0.0), c(0.0, 1.0)),
        ];
        let d2_zero = Matrix4::from_fn(|i, j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            -delta / s - u[i] * u[j] / (s * s2)
        });
        Some(Self { zeta, d1, d2_zero })
    }

    /// Value, gradient and Hessian of `ζ† G ζ`.
    fn symbol(&self, g: &Mat3) -> (f64, Vector4<f64>, Matrix4<f64>) {
        let gz = g * self.zeta;
        let value = self.zeta.dotc(&gz).re;
        let gd: Vec<Spinor> = self.d1.iter().map(|d| g * d).collect();
        let grad = Vector4::from_fn(|i, _| 2.0 * gz.dotc(&self.d1[i]).re);
        let hess = Matrix4::from_fn(|i, j| {
            // ζ† G ∂ij ζ with ∂ij ζ = (0, d2_zero[ij], 0)
            let curv = (gz[1].conj() * self.d2_zero[(i, j)]).re;
            2.0 * (self.d1[i].dotc(&gd[j]).re + curv)
        });
        (value, grad, hess)
    }
}

fn to_u(beta_p: C64, beta_m: C64) -> Vector4<f64> {
    Vector4::new(beta_p.re, beta_p.im, beta_m.re, beta_m.im)
}

/// Mean-field energy per atom, its gradient and Hessian in `u`.
///
/// Returns `None` outside the domain `|β₊|² + |β₋|² < 1`.
pub fn mean_field_energy_derivatives(
    c: &EffectiveCoefficients,
    n_atoms: usize,
    u: &Vector4<f64>,
) -> Option<(f64, Vector4<f64>, Matrix4<f64>)> {
    let jet = SpinorJet::at(u)?;
    let qn = c.twisting_total(n_atoms);
    let (fz, gz, hz) = jet.symbol(&Generator::Jz.matrix());
    let (fx, gx, hx) = jet.symbol(&Generator::Jx.matrix());
    let (fy, gy, hy) = jet.symbol(&Generator::Y.matrix());
    let e = -qn * fz * fz + c.hx * fx + c.hz * fz + c.h_y * fy;
    let g = gz * (-2.0 * qn * fz + c.hz) + gx * c.hx + gy * c.h_y;
    let h = (gz * gz.transpose() + hz * fz) * (-2.0 * qn) + hz * c.hz + hx * c.hx + hy * c.h_y;
    Some((e, g, h))
}

pub fn mean_field_energy(c: &EffectiveCoefficients, n_atoms: usize, u: &Vector4<f64>) -> Option<f64> {
    mean_field_energy_derivatives(c, n_atoms, u).map(|(e, _, _)| e)
}

/// A stationary point of the mean-field energy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanField {
    pub beta_p: C64,
    pub beta_m: C64,
    pub energy_per_atom: f64,
    pub gradient_norm: f64,
    /// Energy at each start seed, in seed order.
    pub start_energies: Vec<f64>,
    /// Another start converged to a distinct point with the same energy.
    pub degenerate: bool,
}

fn start_seeds() -> Vec<Vector4<f64>> {
    let comps = [
        (0.0, 0.0),
        (0.05, 0.0),
        (-0.05, 0.0),
        (0.0, 0.05),
        (0.0, -0.05),
    ];
    comps
        .iter()
        .flat_map(|p| comps.iter().map(move |m| Vector4::new(p.0, p.1, m.0, m.1)))
        .collect()
}

/// Saddle-free damped Newton descent from one seed.
fn descend(c: &EffectiveCoefficients, n: usize, mut u: Vector4<f64>) -> Option<(Vector4<f64>, f64, f64)> {
    let (mut e, mut g, mut h) = mean_field_energy_derivatives(c, n, &u)?;
    for _ in 0..500 {
        if g.norm() <= 1e-13 {
            break;
        }
        let eig = SymmetricEigen::new(h);
        let scale = eig.eigenvalues.amax().max(1.0);
        let mut dir = Vector4::zeros();
        for k in 0..4 {
            let v = eig.eigenvectors.column(k);
            let lam = eig.eigenvalues[k].abs().max(1e-8 * scale);
            dir -= v * (v.dot(&g) / lam);
        }
        let slope = g.dot(&dir);
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-14 {
            let trial = u + dir * t;
            if let Some((et, gt, ht)) = mean_field_energy_derivatives(c, n, &trial) {
                let armijo = et <= e + 1e-4 * t * slope;
                let flat = et <= e + 1e-15 * e.abs().max(1.0) && gt.norm() < g.norm();
                if armijo || flat {
                    accepted = Some((trial, et, gt, ht));
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((un, en, gn, hn)) => {
                u = un;
                e = en;
                g = gn;
                h = hn;
            }
            None => break,
        }
    }
    Some((u, e, g.norm()))
}

/// Global minimum of the mean-field energy over a fixed multi-start set.
///
/// Seeds: every combination of `β± ∈ {0, ±0.05, ±0.05i}`.
pub fn hp_mean_field(c: &EffectiveCoefficients, n_atoms: usize) -> Result<MeanField, EffectiveModelError> {
    let seeds = start_seeds();
    let mut start_energies = Vec::with_capacity(seeds.len());
    let mut results = Vec::new();
    let mut fallback: Option<(Vector4<f64>, f64)> = None;
    for seed in seeds {
        start_energies.push(mean_field_energy(c, n_atoms, &seed).unwrap_or(f64::NAN));
        if let Some((u, e, gn)) = descend(c, n_atoms, seed) {
            if gn <= 1e-10 {
                results.push((u, e, gn));
            } else if fallback.is_none_or(|f| gn < f.1) {
                fallback = Some((u, gn));
            }
        }
    }
    let Some(&(u, e, gn)) = results.iter().min_by(|a, b| a.1.total_cmp(&b.1)) else {
        let (best, grad_norm) = fallback.unwrap_or((Vector4::zeros(), f64::INFINITY));
        return Err(EffectiveModelError::MeanFieldFailed {
            best: [best[0], best[1], best[2], best[3]],
            grad_norm,
        });
    };
    let degenerate = results
        .iter()
        .any(|(v, ev, _)| (ev - e).abs() <= 1e-12 * e.abs().max(1.0) && (v - u).norm() > 1e-6);
    Ok(MeanField {
        beta_p: C64::new(u[0], u[1]),
        beta_m: C64::new(u[2], u[3]),
        energy_per_atom: e,
        gradient_norm: gn,
        start_energies,
        degenerate,
    })
}

/// Mean field plus the Gaussian ground state of the quadratic fluctuations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianSolution {
    pub n_atoms: usize,
    pub beta_p: C64,
    pub beta_m: C64,
    /// Covariance of `(x₊, p₊, x₋, p₋)`, vacuum = `diag(1/2)`.
    pub covariance: Matrix4<f64>,
    /// Bogoliubov normal-mode frequencies, ascending (units of `E_r`).
    pub frequencies: [f64; 2],
}

fn omega() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        0.0, 0.0, -1.0, 0.0,
    )
}

fn sym_sqrt(m: &Matrix4<f64>) -> Matrix4<f64> {
    let eig = SymmetricEigen::new(*m);
    let d = Matrix4::from_diagonal(&eig.eigenvalues.map(|x| x.max(0.0).sqrt()));
    eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// Symplectic eigenvalues of a 4x4 covariance matrix, ascending.
pub fn symplectic_eigenvalues(v: &Matrix4<f64>) -> [f64; 2] {
    let a = sym_sqrt(v);
    let m = a * omega() * a;
    let mut nu: Vec<f64> = SymmetricEigen::new(m.transpose() * m)
        .eigenvalues
        .iter()
        .map(|x| x.max(0.0).sqrt())
        .collect();
    nu.sort_by(f64::total_cmp);
    [0.5 * (nu[0] + nu[1]), 0.5 * (nu[2] + nu[3])]
}

/// Quadratic expansion around `mf` and its Bogoliubov ground state.
pub fn hp_quadratic(
    c: &EffectiveCoefficients,
    n_atoms: usize,
    mf: &MeanField,
) -> Result<GaussianSolution, EffectiveModelError> {
    let u = to_u(mf.beta_p, mf.beta_m);
    let (_, g, h) = mean_field_energy_derivatives(c, n_atoms, &u)
        .ok_or(EffectiveModelError::NotStationary(f64::INFINITY))?;
    if g.norm() > 1e-8 {
        return Err(EffectiveModelError::NotStationary(g.norm()));
    }
    let k = h * 0.5;
    let k = (k + k.transpose()) * 0.5;
    let curv = SymmetricEigen::new(k).eigenvalues;
    let min_curv = curv.min();
    if !(min_curv > 0.0) {
        return Err(EffectiveModelError::UnstableMode { frequency: min_curv });
    }
    let a = sym_sqrt(&k);
    let a_inv = a.try_inverse().ok_or(EffectiveModelError::UnstableMode { frequency: 0.0 })?;
    let m = a * omega() * a;
    let mtm = m.transpose() * m;
    let root = sym_sqrt(&mtm);
    let v = a_inv * root * a_inv * 0.5;
    let v = (v + v.transpose()) * 0.5;
    let mut w: Vec<f64> = SymmetricEigen::new(mtm).eigenvalues.iter().map(|x| x.max(0.0).sqrt()).collect();
    w.sort_by(f64::total_cmp);
    let frequencies = [0.5 * (w[0] + w[1]), 0.5 * (w[2] + w[3])];
    if !(frequencies[0] > 0.0) {
        return Err(EffectiveModelError::UnstableMode {
            frequency: frequencies[0],
        });
    }
    Ok(GaussianSolution {
        n_atoms,
        beta_p: mf.beta_p,
        beta_m: mf.beta_m,
        covariance: v,
        frequencies,
    })
}

/// Moments of collective observables in the Gaussian state.
///
/// Means carry the second-order correction `¼ tr(∇²f (V - ½))`; covariances
/// use the linearized images `sqrt(N/2) ∇f · r`. Every linear combination of
/// generators has such an image, so only non-finite weights are rejected.
pub fn gaussian_moments(
    sol: &GaussianSolution,
    n_atoms: usize,
    specs: &[CollectiveOperatorSpec],
) -> Result<SpecMoments, EffectiveModelError> {
    if let Some(bad) = specs.iter().find(|s| s.coefficients.iter().any(|c| !c.is_finite())) {
        return Err(EffectiveModelError::UnsupportedObservable(format!("{:?}", bad.coefficients)));
    }
    let u = to_u(sol.beta_p, sol.beta_m);
    let jet = SpinorJet::at(&u).ok_or_else(|| {
        EffectiveModelError::UnsupportedObservable("mean field outside the Holstein–Primakoff domain".into())
    })?;
    let n = n_atoms as f64;
    let excess = sol.covariance - Matrix4::identity() * 0.5;
    let symbols: Vec<(f64, Vector4<f64>, Matrix4<f64>)> = specs.iter().map(|s| jet.symbol(&s.matrix())).collect();
    let means: Vec<f64> = symbols
        .iter()
        .map(|(f, _, h)| n * f + 0.25 * (h * excess).trace())
        .collect();
    let k = specs.len();
    let mut second = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in a..k {
            let cov = 0.5 * n * (symbols[a].1.transpose() * sol.covariance * symbols[b].1)[(0, 0)];
            let v = cov + means[a] * means[b];
            second[(a, b)] = v;
            second[(b, a)] = v;
        }
    }
    Ok(SpecMoments { means, second })
}

pub fn gaussian_moment_set(sol: &GaussianSolution) -> Result<MomentSet, EffectiveModelError> {
    let specs: Vec<_> = Generator::ALL.iter().map(|g| CollectiveOperatorSpec::single(*g)).collect();
    Ok(MomentSet::from_spec_moments(
        sol.n_atoms,
        &gaussian_moments(sol, sol.n_atoms, &specs)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::band_structure::ModelParams;
    use crate::effective_model::effective_coefficients;
    use rand::{Rng, SeedableRng};

    fn coeffs(omega_r: f64, delta: f64, epsilon: f64, n: usize) -> EffectiveCoefficients {
        effective_coefficients(&ModelParams::new(omega_r, delta, epsilon, n)).unwrap()
    }

    #[test]
    fn origin_without_drive() {
        let c = coeffs(0.0, 0.0, 6.0, 100);
        let mf = hp_mean_field(&c, 100).unwrap();
        assert!(mf.beta_p.norm() < 1e-12 && mf.beta_m.norm() < 1e-12);
        let sol = hp_quadratic(&c, 100, &mf).unwrap();
        assert!((sol.covariance - Matrix4::identity() * 0.5).amax() < 1e-12);
        // one excitation costs √3 hY = 4 + ε
        assert!((sol.frequencies[0] - 10.0).abs() < 1e-10);
    }

    #[test]
    fn symmetric_drive_gives_equal_amplitudes() {
        let c = coeffs(2.0, 0.0, 6.0, 200);
        let mf = hp_mean_field(&c, 200).unwrap();
        assert!((mf.beta_p - mf.beta_m).norm() < 1e-9, "{mf:?}");
        assert!(mf.beta_p.norm() > 1e-3);
        assert!(mf.gradient_norm <= 1e-10);
        // an exchange-asymmetric start lands on the same point
        let (u, _, gn) = descend(&c, 200, Vector4::new(0.2, 0.0, -0.1, 0.05)).unwrap();
        assert!(gn <= 1e-10);
        assert!((u - to_u(mf.beta_p, mf.beta_m)).norm() < 1e-8);
        for e in &mf.start_energies {
            assert!(mf.energy_per_atom <= e + 1e-14);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let c = coeffs(
                rng.random_range(0.0..5.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-2.0..10.0),
                rng.random_range(10..500),
            );
            let n = (8.0 / c.q).round() as usize;
            let u = Vector4::from_fn(|_, _| rng.random_range(-0.3..0.3));
            let (_, g, h) = mean_field_energy_derivatives(&c, n, &u).unwrap();
            let step = 1e-5;
            for i in 0..4 {
                let mut up = u;
                let mut dn = u;
                up[i] += step;
                dn[i] -= step;
                let (ep, gp, _) = mean_field_energy_derivatives(&c, n, &up).unwrap();
                let (em, gm, _) = mean_field_energy_derivatives(&c, n, &dn).unwrap();
                let fd = (ep - em) / (2.0 * step);
                assert!((fd - g[i]).abs() <= 1e-6 * g[i].abs().max(1.0), "grad {i}: {fd} vs {}", g[i]);
                let fd_h = (gp - gm) / (2.0 * step);
                for j in 0..4 {
                    assert!((fd_h[j] - h[(i, j)]).abs() <= 1e-5 * h[(i, j)].abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn pure_state_and_positive_variances() {
        for (w, d, e) in [(2.0, 0.0, 6.0), (1.0, 1.0, 4.0), (3.0, -0.5, 8.0)] {
            let c = coeffs(w, d, e, 150);
            let mf = hp_mean_field(&c, 150).unwrap();
            let sol = hp_quadratic(&c, 150, &mf).unwrap();
            let nu = symplectic_eigenvalues(&sol.covariance);
            assert!((nu[0] - 0.5).abs() < 1e-9 && (nu[1] - 0.5).abs() < 1e-9, "{nu:?}");
            assert!(SymmetricEigen::new(sol.covariance).eigenvalues.min() > 0.0);
            let ms = gaussian_moment_set(&sol).unwrap();
            for g in Generator::ALL {
                assert!(ms.covariance(g, g).unwrap() >= 0.0);
            }
        }
    }

    #[test]
    fn vacuum_moments() {
        let n = 80;
        let c = coeffs(0.0, 0.0, 6.0, n);
        let sol = hp_quadratic(&c, n, &hp_mean_field(&c, n).unwrap()).unwrap();
        let m = gaussian_moments(
            &sol,
            n,
            &[CollectiveOperatorSpec::fx(), CollectiveOperatorSpec::f_y_nematic()],
        )
        .unwrap();
        assert!(m.means[0].abs() < 1e-12);
        assert!((m.variance(0) - n as f64).abs() < 1e-9);
        assert!((m.means[1] + 2.0 * n as f64 / 3f64.sqrt()).abs() < 1.0);
    }

    #[test]
    fn unstable_point_is_rejected() {
        // β = 0 with a strongly negative ε is a maximum of the nematic field term
        let c = coeffs(0.0, 0.0, -10.0, 50);
        let mf = MeanField {
            beta_p: C64::new(0.0, 0.0),
            beta_m: C64::new(0.0, 0.0),
            energy_per_atom: 0.0,
            gradient_norm: 0.0,
            start_energies: vec![],
            degenerate: false,
        };
        assert!(matches!(
            hp_quadratic(&c, 50, &mf),
            Err(EffectiveModelError::UnstableMode { .. })
        ));
    }
}
