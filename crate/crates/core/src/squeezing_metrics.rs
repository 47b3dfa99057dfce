//! Squeezing and entanglement metrics computed from collective-spin moments.
//!
//! Every backend (exact diagonalization, Gaussian, Gross–Pitaevskii) reduces
//! its state to a [`MomentSet`]: the means of the eight collective generators
//! and their symmetrized covariances. The metrics here only read that table.
//!
//! - spin-nematic squeezing `ξ_x = Δ²F_x / N`
//! - two-mode entanglement `ξ_DCZ(θ) = (Δ²F₊^θ + Δ²F₋^(θ+π/2)) / 2N`
//! - two-spin squeezing `ξ_UV(θ) = (Δ²F₊^θ + Δ²F₋^(θ+π/2)) / (√3 |<F_Y>|)`
//!
//! with quadratures `F₊^θ = cos θ F_x + sin θ F_yz` and
//! `F₋^θ = cos θ F_zx + sin θ F_y`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::effective_model::SpecMoments;
use crate::spin_algebra::{CollectiveOperatorSpec, Generator, Mat3, C64};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("moment set has no mean for {0}")]
    MissingMean(Generator),
    #[error("moment set has no covariance for ({0}, {1})")]
    MissingCovariance(Generator, Generator),
    #[error("|<F_Y>| = {value:e} is below the degeneracy threshold {threshold:e}")]
    DegenerateDenominator { value: f64, threshold: f64 },
    #[error("rotation image of {0} needs moments that are not stored")]
    IncompleteBlock(Generator),
    #[error("invalid moment set: {0}")]
    Invalid(String),
}

/// Means and symmetrized covariances of collective generators for `N` atoms.
///
/// Covariance keys are stored with the smaller generator first; lookups accept
/// either order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "RawMomentSet", try_from = "RawMomentSet")]
pub struct MomentSet {
    pub n_atoms: usize,
    pub means: BTreeMap<Generator, f64>,
    pub covariances: BTreeMap<(Generator, Generator), f64>,
}

fn ordered(a: Generator, b: Generator) -> (Generator, Generator) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl MomentSet {
    pub fn new(n_atoms: usize) -> Self {
        Self {
            n_atoms,
            means: BTreeMap::new(),
            covariances: BTreeMap::new(),
        }
    }

    /// Builds the set from moments evaluated on `Generator::ALL`, in that order.
    pub fn from_spec_moments(n_atoms: usize, m: &SpecMoments) -> Self {
        assert_eq!(m.means.len(), Generator::ALL.len(), "moments must cover all eight generators");
        let mut out = Self::new(n_atoms);
        for (i, a) in Generator::ALL.into_iter().enumerate() {
            out.means.insert(a, m.means[i]);
            for (j, b) in Generator::ALL.into_iter().enumerate().skip(i) {
                out.covariances.insert((a, b), m.covariance(i, j));
            }
        }
        out
    }

    /// Coherent-reference moments of the polar state `|0>^⊗N`.
    pub fn polar_reference(n_atoms: usize) -> Self {
        let n = n_atoms as f64;
        let mut out = Self::new(n_atoms);
        for g in Generator::ALL {
            out.means.insert(g, 0.0);
            for h in Generator::ALL {
                out.covariances.insert(ordered(g, h), 0.0);
            }
        }
        out.means.insert(Generator::Y, -2.0 * n / 3f64.sqrt());
        for g in [Generator::Jx, Generator::Jy, Generator::Qyz, Generator::Qzx] {
            out.covariances.insert((g, g), n);
        }
        out
    }

    pub fn set_mean(&mut self, g: Generator, value: f64) {
        self.means.insert(g, value);
    }

    pub fn set_covariance(&mut self, a: Generator, b: Generator, value: f64) {
        self.covariances.insert(ordered(a, b), value);
    }

    pub fn mean(&self, g: Generator) -> Result<f64, MetricError> {
        self.means.get(&g).copied().ok_or(MetricError::MissingMean(g))
    }

    pub fn covariance(&self, a: Generator, b: Generator) -> Result<f64, MetricError> {
        self.covariances
            .get(&ordered(a, b))
            .copied()
            .ok_or(MetricError::MissingCovariance(a, b))
    }

    pub fn variance(&self, g: Generator) -> Result<f64, MetricError> {
        self.covariance(g, g)
    }

    pub fn spec_mean(&self, s: &CollectiveOperatorSpec) -> Result<f64, MetricError> {
        s.support().map(|g| Ok(s.weight(g) * self.mean(g)?)).sum()
    }

    pub fn spec_covariance(&self, s: &CollectiveOperatorSpec, t: &CollectiveOperatorSpec) -> Result<f64, MetricError> {
        let mut acc = 0.0;
        for a in s.support() {
            for b in t.support() {
                acc += s.weight(a) * t.weight(b) * self.covariance(a, b)?;
            }
        }
        Ok(acc)
    }

    pub fn spec_variance(&self, s: &CollectiveOperatorSpec) -> Result<f64, MetricError> {
        self.spec_covariance(s, s)
    }

    /// Covariance matrix restricted to `gens`.
    pub fn covariance_matrix(&self, gens: &[Generator]) -> Result<DMatrix<f64>, MetricError> {
        let mut out = DMatrix::zeros(gens.len(), gens.len());
        for (i, a) in gens.iter().enumerate() {
            for (j, b) in gens.iter().enumerate() {
                out[(i, j)] = self.covariance(*a, *b)?;
            }
        }
        Ok(out)
    }

    /// Smallest eigenvalue of the covariance block over `gens`.
    pub fn min_covariance_eigenvalue(&self, gens: &[Generator]) -> Result<f64, MetricError> {
        let c = self.covariance_matrix(gens)?;
        Ok(SymmetricEigen::new(c).eigenvalues.min())
    }

    /// Component fractions from `<F_z>` and `<F_Y>`.
    ///
    /// `F_z = n₊ - n₋` and `√3 F_Y = n₊ + n₋ - 2 n₀` fix all three occupations
    /// once `N` is known, so every backend is reported the same way.
    pub fn populations(&self) -> Result<Populations, MetricError> {
        if self.n_atoms == 0 {
            return Err(MetricError::Invalid("N = 0".into()));
        }
        let n = self.n_atoms as f64;
        let fz = self.mean(Generator::Jz)?;
        let fy = self.mean(Generator::Y)?;
        let pm_sum = (2.0 * n + 3f64.sqrt() * fy) / 3.0;
        let n_plus = 0.5 * (pm_sum + fz);
        let n_minus = 0.5 * (pm_sum - fz);
        Ok(Populations {
            rho_m1: n_minus / n,
            rho_0: 1.0 - pm_sum / n,
            rho_p1: n_plus / n,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct RawMomentSet {
    n_atoms: usize,
    means: BTreeMap<String, f64>,
    covariances: BTreeMap<String, f64>,
}

impl From<MomentSet> for RawMomentSet {
    fn from(m: MomentSet) -> Self {
        Self {
            n_atoms: m.n_atoms,
            means: m.means.iter().map(|(g, v)| (g.name().to_string(), *v)).collect(),
            covariances: m
                .covariances
                .iter()
                .map(|((a, b), v)| (format!("{},{}", a.name(), b.name()), *v))
                .collect(),
        }
    }
}

impl TryFrom<RawMomentSet> for MomentSet {
    type Error = String;

    fn try_from(raw: RawMomentSet) -> Result<Self, String> {
        let parse = |s: &str| s.trim().parse::<Generator>().map_err(|e| e.to_string());
        let mut out = MomentSet::new(raw.n_atoms);
        for (k, v) in raw.means {
            out.means.insert(parse(&k)?, v);
        }
        for (k, v) in raw.covariances {
            let (a, b) = k.split_once(',').ok_or_else(|| format!("bad covariance key {k:?}"))?;
            out.set_covariance(parse(a)?, parse(b)?, v);
        }
        Ok(out)
    }
}

/// Component fractions `ρ_m = <n_m>/N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Populations {
    pub rho_m1: f64,
    pub rho_0: f64,
    pub rho_p1: f64,
}

/// Denominator convention for `ξ_x` and `ξ_DCZ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `Δ²/N`, the low-excitation form.
    #[default]
    Approximate,
    /// `Δ²/(√3 |<F_Y>| / 2)`, using the actual polarization length.
    MeanSpin,
}

impl std::str::FromStr for Normalization {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "approximate" => Ok(Self::Approximate),
            "mean_spin" | "meanspin" => Ok(Self::MeanSpin),
            other => Err(format!("unknown normalization {other:?} (expected approximate or mean_spin)")),
        }
    }
}

impl Normalization {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Approximate => "approximate",
            Self::MeanSpin => "mean_spin",
        }
    }
}

/// `√3 |<F_Y>|`, rejected when below `1e-9 N`.
fn polarization(m: &MomentSet) -> Result<f64, MetricError> {
    let value = 3f64.sqrt() * m.mean(Generator::Y)?.abs();
    let threshold = 1e-9 * m.n_atoms as f64;
    if !(value >= threshold) || value == 0.0 {
        return Err(MetricError::DegenerateDenominator { value, threshold });
    }
    Ok(value)
}

fn single_mode_scale(m: &MomentSet, norm: Normalization) -> Result<f64, MetricError> {
    if m.n_atoms == 0 {
        return Err(MetricError::Invalid("N = 0".into()));
    }
    match norm {
        Normalization::Approximate => Ok(m.n_atoms as f64),
        Normalization::MeanSpin => Ok(0.5 * polarization(m)?),
    }
}

pub fn xi_x(m: &MomentSet) -> Result<f64, MetricError> {
    xi_x_with(m, Normalization::Approximate)
}

pub fn xi_x_with(m: &MomentSet, norm: Normalization) -> Result<f64, MetricError> {
    Ok(m.variance(Generator::Jx)? / single_mode_scale(m, norm)?)
}

/// `(F₊^θ, F₋^θ)`.
pub fn quadratures(theta: f64) -> (CollectiveOperatorSpec, CollectiveOperatorSpec) {
    let (s, c) = theta.sin_cos();
    (
        CollectiveOperatorSpec::fx() * c + CollectiveOperatorSpec::f_yz() * s,
        CollectiveOperatorSpec::f_zx() * c + CollectiveOperatorSpec::fy() * s,
    )
}

/// `Δ²F₊^θ + Δ²F₋^(θ+π/2)`.
fn quadrature_sum(m: &MomentSet, theta: f64) -> Result<f64, MetricError> {
    let (plus, _) = quadratures(theta);
    let (_, minus) = quadratures(theta + 0.5 * PI);
    Ok(m.spec_variance(&plus)? + m.spec_variance(&minus)?)
}

pub fn xi_dcz(m: &MomentSet, theta: f64) -> Result<f64, MetricError> {
    xi_dcz_with(m, theta, Normalization::Approximate)
}

pub fn xi_dcz_with(m: &MomentSet, theta: f64, norm: Normalization) -> Result<f64, MetricError> {
    Ok(quadrature_sum(m, theta)? / (2.0 * single_mode_scale(m, norm)?))
}

pub fn xi_uv(m: &MomentSet, theta: f64) -> Result<f64, MetricError> {
    let denom = polarization(m)?;
    Ok(quadrature_sum(m, theta)? / denom)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Dcz,
    Uv,
}

/// Options shared by the θ scan and the report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricOptions {
    pub theta_points: usize,
    pub normalization: Normalization,
}

impl Default for MetricOptions {
    fn default() -> Self {
        Self {
            theta_points: 360,
            normalization: Normalization::Approximate,
        }
    }
}

fn evaluate(m: &MomentSet, metric: Metric, theta: f64, norm: Normalization) -> Result<f64, MetricError> {
    match metric {
        Metric::Dcz => xi_dcz_with(m, theta, norm),
        Metric::Uv => xi_uv(m, theta),
    }
}

/// Minimum of a metric over `θ ∈ [0, π)` as `(θ*, ξ*)`.
pub fn optimize_theta(m: &MomentSet, metric: Metric) -> Result<(f64, f64), MetricError> {
    optimize_theta_with(m, metric, &MetricOptions::default())
}

/// Dense scan, then golden-section refinement inside the neighbouring cells.
///
/// Among scan points within `1e-12` (relative) of the best value the smallest
/// θ wins; the refined point replaces it only if it improves by more than
/// `1e-13`, so flat objectives return θ* = 0.
pub fn optimize_theta_with(m: &MomentSet, metric: Metric, opts: &MetricOptions) -> Result<(f64, f64), MetricError> {
    let n = opts.theta_points.max(1);
    let step = PI / n as f64;
    let f = |t: f64| evaluate(m, metric, t, opts.normalization);
    let values = (0..n).map(|i| f(i as f64 * step)).collect::<Result<Vec<_>, _>>()?;
    let best = values.iter().copied().fold(f64::INFINITY, f64::min);
    let tie = 1e-12 * best.abs().max(1.0);
    let i = values.iter().position(|v| *v <= best + tie).unwrap_or(0);
    let (mut theta, mut xi) = (i as f64 * step, values[i]);

    let (mut a, mut b) = (theta - step, theta + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..80 {
        if b - a < 1e-12 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    let (t_ref, f_ref) = if fc < fd { (c, fc) } else { (d, fd) };
    if f_ref < xi - 1e-13 {
        theta = t_ref.rem_euclid(PI);
        xi = f_ref;
    }
    Ok((theta, xi))
}

/// Single-particle rotation `exp(-i angle J_y)`.
fn rotation(angle: f64) -> Mat3 {
    let jy = Generator::Jy.matrix();
    let (s, c) = angle.sin_cos();
    Mat3::identity() - jy * C64::new(0.0, s) + jy * jy * C64::from(c - 1.0)
}

/// `R[a][b]` with `U† G_a U = Σ_b R[a][b] G_b`.
pub fn rotation_map(angle: f64) -> [[f64; 8]; 8] {
    let u = rotation(angle);
    let ud = u.adjoint();
    let mut r = [[0.0; 8]; 8];
    for a in Generator::ALL {
        let img = ud * a.matrix() * u;
        for b in Generator::ALL {
            let v = 0.5 * (b.matrix() * img).trace().re;
            r[a.index()][b.index()] = if v.abs() > 1e-14 { v } else { 0.0 };
        }
    }
    r
}

/// Moments after every atom is rotated by `exp(-i angle J_y)`.
///
/// Each stored entry is replaced by the moment of its rotated image; the
/// images must be expressible through stored moments.
pub fn rf_rotate(m: &MomentSet, angle: f64) -> Result<MomentSet, MetricError> {
    let r = rotation_map(angle);
    let image = |g: Generator| Generator::ALL.into_iter().filter(move |h| r[g.index()][h.index()] != 0.0);
    let mut out = MomentSet::new(m.n_atoms);
    for &a in m.means.keys() {
        let mut acc = 0.0;
        for h in image(a) {
            acc += r[a.index()][h.index()] * m.mean(h).map_err(|_| MetricError::IncompleteBlock(a))?;
        }
        out.means.insert(a, acc);
    }
    for &(a, b) in m.covariances.keys() {
        let mut acc = 0.0;
        for h in image(a) {
            for k in image(b) {
                let c = m.covariance(h, k).map_err(|_| MetricError::IncompleteBlock(a))?;
                acc += r[a.index()][h.index()] * r[b.index()][k.index()] * c;
            }
        }
        out.covariances.insert((a, b), acc);
    }
    Ok(out)
}

/// The flat per-point result record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezingReport {
    pub xi_x: f64,
    pub xi_dcz_min: f64,
    pub theta_dcz: f64,
    pub xi_uv_min: f64,
    pub theta_uv: f64,
    #[serde(flatten)]
    pub populations: Populations,
    /// Set for backends whose moments come from a declared model, such as the
    /// Hartree product used for Gross–Pitaevskii fields.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moment_model: Option<String>,
}

pub fn squeezing_report(m: &MomentSet, opts: &MetricOptions) -> Result<SqueezingReport, MetricError> {
    let (theta_dcz, xi_dcz_min) = optimize_theta_with(m, Metric::Dcz, opts)?;
    let (theta_uv, xi_uv_min) = optimize_theta_with(m, Metric::Uv, opts)?;
    Ok(SqueezingReport {
        xi_x: xi_x_with(m, opts.normalization)?,
        xi_dcz_min,
        theta_dcz,
        xi_uv_min,
        theta_uv,
        populations: m.populations()?,
        moment_model: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Moments of the product state with every atom in `spinor`, computed
    /// directly from 3x3 matrices.
    fn product_state(n: usize, spinor: [C64; 3]) -> MomentSet {
        let v = nalgebra::Vector3::from(spinor).normalize();
        let ev = |m: &Mat3| v.dotc(&(m * v)).re;
        let nn = n as f64;
        let mut out = MomentSet::new(n);
        for a in Generator::ALL {
            out.set_mean(a, nn * ev(&a.matrix()));
        }
        for a in Generator::ALL {
            for b in Generator::ALL {
                let (ma, mb) = (a.matrix(), b.matrix());
                let sym = (ma * mb + mb * ma) * C64::from(0.5);
                out.set_covariance(a, b, nn * (ev(&sym) - ev(&ma) * ev(&mb)));
            }
        }
        out
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// A squeezed-looking fixture with cross-correlations in the quadrature block.
    fn anisotropic(n: usize) -> MomentSet {
        let mut m = MomentSet::polar_reference(n);
        let nn = n as f64;
        m.set_covariance(Generator::Jx, Generator::Jx, 0.6 * nn);
        m.set_covariance(Generator::Qyz, Generator::Qyz, 1.8 * nn);
        m.set_covariance(Generator::Jx, Generator::Qyz, 0.2 * nn);
        m.set_covariance(Generator::Qzx, Generator::Qzx, 1.5 * nn);
        m.set_covariance(Generator::Jy, Generator::Jy, 0.7 * nn);
        m.set_covariance(Generator::Jy, Generator::Qzx, -0.1 * nn);
        m
    }

    #[test]
    fn reference_values() {
        let m = MomentSet::polar_reference(100);
        assert!((xi_x(&m).unwrap() - 1.0).abs() < 1e-15);
        assert!((xi_dcz(&m, 0.3).unwrap() - 1.0).abs() < 1e-15);
        assert!((xi_uv(&m, 1.1).unwrap() - 1.0).abs() < 1e-14);
        let (t, x) = optimize_theta(&m, Metric::Dcz).unwrap();
        assert_eq!(t, 0.0);
        assert!((x - 1.0).abs() < 1e-14);
        let p = m.populations().unwrap();
        assert!(p.rho_0 > 1.0 - 1e-15 && p.rho_m1.abs() < 1e-15 && p.rho_p1.abs() < 1e-15);
        assert!((xi_x_with(&m, Normalization::MeanSpin).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn polar_reference_matches_direct_computation() {
        let direct = product_state(37, [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let reference = MomentSet::polar_reference(37);
        for (k, v) in &direct.covariances {
            assert!((v - reference.covariances[k]).abs() < 1e-12, "{k:?}");
        }
        for (k, v) in &direct.means {
            assert!((v - reference.means[k]).abs() < 1e-12, "{k:?}");
        }
    }

    #[test]
    fn quadrature_examples() {
        let (p, m) = quadratures(0.0);
        assert_eq!((p, m), (CollectiveOperatorSpec::fx(), CollectiveOperatorSpec::f_zx()));
        let (p, m) = quadratures(0.5 * PI);
        assert!((p - CollectiveOperatorSpec::f_yz()).coefficients.iter().all(|x| x.abs() < 1e-16));
        assert!((m - CollectiveOperatorSpec::fy()).coefficients.iter().all(|x| x.abs() < 1e-16));
        let (p, m) = quadratures(PI);
        assert!((p + CollectiveOperatorSpec::fx()).coefficients.iter().all(|x| x.abs() < 1e-15));
        assert!((m + CollectiveOperatorSpec::f_zx()).coefficients.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn dcz_matches_raw_covariances() {
        use rand::{Rng, SeedableRng};
        let m = anisotropic(50);
        let n = 50.0;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let t: f64 = rng.random_range(0.0..2.0 * PI);
            let (s, co) = t.sin_cos();
            let var = |a, b| m.covariance(a, b).unwrap();
            let plus = co * co * var(Generator::Jx, Generator::Jx)
                + s * s * var(Generator::Qyz, Generator::Qyz)
                + 2.0 * s * co * var(Generator::Jx, Generator::Qyz);
            // θ + π/2: cos → -sin, sin → cos
            let minus = s * s * var(Generator::Qzx, Generator::Qzx) + co * co * var(Generator::Jy, Generator::Jy)
                - 2.0 * s * co * var(Generator::Qzx, Generator::Jy);
            let expect = 0.5 * (plus / n + minus / n);
            assert!((xi_dcz(&m, t).unwrap() - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn optimizer_finds_interior_minimum() {
        let m = anisotropic(50);
        for metric in [Metric::Dcz, Metric::Uv] {
            let (t, x) = optimize_theta(&m, metric).unwrap();
            assert!((0.0..PI).contains(&t));
            let fine = (0..200_000)
                .map(|i| evaluate(&m, metric, i as f64 * PI / 200_000.0, Normalization::Approximate).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert!(x <= fine + 1e-12, "{x} vs {fine}");
        }
    }

    #[test]
    fn missing_and_degenerate_inputs() {
        let empty = MomentSet::new(10);
        assert_eq!(xi_x(&empty), Err(MetricError::MissingCovariance(Generator::Jx, Generator::Jx)));
        let mut m = MomentSet::polar_reference(10);
        m.set_mean(Generator::Y, 0.0);
        assert!(matches!(xi_uv(&m, 0.0), Err(MetricError::DegenerateDenominator { .. })));
        assert!(optimize_theta(&m, Metric::Uv).is_err());
    }

    #[test]
    fn rotation_identities() {
        let m = product_state(20, [c(0.3, 0.1), c(0.8, 0.0), c(-0.2, 0.4)]);
        let r = rf_rotate(&m, 0.5 * PI).unwrap();
        assert!((r.variance(Generator::Jz).unwrap() - m.variance(Generator::Jx).unwrap()).abs() < 1e-12);
        for angle in [0.0, 2.0 * PI] {
            let same = rf_rotate(&m, angle).unwrap();
            for (k, v) in &m.covariances {
                assert!((v - same.covariances[k]).abs() < 1e-12);
            }
            for (k, v) in &m.means {
                assert!((v - same.means[k]).abs() < 1e-12);
            }
        }
        // rotating the spinor itself gives the same moments
        let u = rotation(0.7);
        let v = u * nalgebra::Vector3::new(c(0.3, 0.1), c(0.8, 0.0), c(-0.2, 0.4));
        let direct = product_state(20, [v[0], v[1], v[2]]);
        let via_map = rf_rotate(&m, 0.7).unwrap();
        for (k, v) in &direct.covariances {
            assert!((v - via_map.covariances[k]).abs() < 1e-11, "{k:?}");
        }
        assert!(via_map.min_covariance_eigenvalue(&Generator::ALL).unwrap() > -1e-9);
    }

    #[test]
    fn rotation_needs_full_block() {
        let mut m = MomentSet::new(10);
        m.set_mean(Generator::Jx, 0.0);
        m.set_covariance(Generator::Jx, Generator::Jx, 10.0);
        assert!(matches!(rf_rotate(&m, 0.3), Err(MetricError::IncompleteBlock(_))));
        assert!(rf_rotate(&m, 0.0).is_ok());
    }

    #[test]
    fn populations_of_product_states() {
        let p = product_state(10, [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).populations().unwrap();
        assert!((p.rho_p1 - 1.0).abs() < 1e-14 && p.rho_0.abs() < 1e-14);
        let m = product_state(10, [c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(m.mean(Generator::Jz).unwrap().abs() < 1e-14);
        assert!((m.variance(Generator::Jz).unwrap() - 10.0).abs() < 1e-12);
        let p = m.populations().unwrap();
        assert!((p.rho_p1 - 0.5).abs() < 1e-14 && (p.rho_m1 - 0.5).abs() < 1e-14);
    }

    #[test]
    fn json_round_trip() {
        let m = anisotropic(7);
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("\"Jx,Qyz\""));
        let back: MomentSet = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        let report = squeezing_report(&m, &MetricOptions::default()).unwrap();
        let v: serde_json::Value = serde_json::to_value(&report).unwrap();
        for key in ["xi_x", "xi_dcz_min", "theta_dcz", "xi_uv_min", "theta_uv", "rho_m1", "rho_0", "rho_p1"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert!(v.get("moment_model").is_none());
    }

    proptest! {
        #[test]
        fn period_pi(theta in 0.0f64..6.3, re in -1.0f64..1.0, im in -1.0f64..1.0) {
            let m = product_state(30, [c(re, im), c(1.0, 0.0), c(im, -re)]);
            let a = xi_dcz(&m, theta).unwrap();
            let b = xi_dcz(&m, theta + PI).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
            let a = xi_uv(&m, theta).unwrap();
            let b = xi_uv(&m, theta + PI).unwrap();
            prop_assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
        }
    }
}
