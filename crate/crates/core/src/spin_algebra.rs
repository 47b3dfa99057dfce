//! Spin-1 SU(3) generators: three spin vectors and five nematic tensors.
//!
//! Basis ordering throughout the crate is `(|+1>, |0>, |-1>)`, so that
//! `Jz = diag(1, 0, -1)`. All eight generators are Hermitian, traceless and
//! normalized as `tr(Ga Gb) = 2 δab`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;
pub type Mat3 = Matrix3<C64>;

const FRAC_1_SQRT_3: f64 = 0.577_350_269_189_625_8;

/// Labels of the eight spin-1 generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Generator {
    Jx,
    Jy,
    Jz,
    Qxy,
    Qyz,
    Qzx,
    D,
    Y,
}

impl Generator {
    pub const ALL: [Generator; 8] = [
        Generator::Jx,
        Generator::Jy,
        Generator::Jz,
        Generator::Qxy,
        Generator::Qyz,
        Generator::Qzx,
        Generator::D,
        Generator::Y,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Generator::Jx => "Jx",
            Generator::Jy => "Jy",
            Generator::Jz => "Jz",
            Generator::Qxy => "Qxy",
            Generator::Qyz => "Qyz",
            Generator::Qzx => "Qzx",
            Generator::D => "D",
            Generator::Y => "Y",
        }
    }

    /// The 3x3 matrix of this generator.
    pub fn matrix(self) -> Mat3 {
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        let r = |x: f64| C64::new(x, 0.0);
        let i = |x: f64| C64::new(0.0, x);
        let z = C64::new(0.0, 0.0);
        match self {
            Generator::Jx => Mat3::new(z, r(s2), z, r(s2), z, r(s2), z, r(s2), z),
            Generator::Jy => Mat3::new(z, i(-s2), z, i(s2), z, i(-s2), z, i(s2), z),
            Generator::Jz => Mat3::new(r(1.0), z, z, z, z, z, z, z, r(-1.0)),
            Generator::Qxy => Mat3::new(z, z, i(-1.0), z, z, z, i(1.0), z, z),
            Generator::Qyz => Mat3::new(z, i(-s2), z, i(s2), z, i(s2), z, i(-s2), z),
            Generator::Qzx => Mat3::new(z, r(s2), z, r(s2), z, r(-s2), z, r(-s2), z),
            Generator::D => Mat3::new(z, z, r(1.0), z, z, z, r(1.0), z, z),
            Generator::Y => Mat3::new(
                r(FRAC_1_SQRT_3),
                z,
                z,
                z,
                r(-2.0 * FRAC_1_SQRT_3),
                z,
                z,
                z,
                r(FRAC_1_SQRT_3),
            ),
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown spin generator `{0}`")]
pub struct UnknownGenerator(pub String);

impl FromStr for Generator {
    type Err = UnknownGenerator;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Generator::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownGenerator(s.to_string()))
    }
}

/// A labelled generator together with its matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinOperator {
    pub label: Generator,
    pub matrix: Mat3,
}

impl AsRef<Mat3> for SpinOperator {
    fn as_ref(&self) -> &Mat3 {
        &self.matrix
    }
}

pub fn generator(label: Generator) -> SpinOperator {
    SpinOperator {
        label,
        matrix: label.matrix(),
    }
}

/// `AB - BA`.
pub fn commutator(a: &impl AsRef<Mat3>, b: &impl AsRef<Mat3>) -> Mat3 {
    let (a, b) = (a.as_ref(), b.as_ref());
    a * b - b * a
}

/// One commutator identity and how far the matrices deviate from it.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub identity: &'static str,
    pub max_deviation: f64,
}

/// Largest entrywise modulus of `a - b`.
pub fn max_deviation(a: &Mat3, b: &Mat3) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Checks the six commutator identities of the spin-1 algebra.
///
/// The nematic-nematic identity involving `Qxy` is evaluated against `Qzx`;
/// the explicit matrices give `[Qxy, Qzx] = +i Jx`.
pub fn verify_algebra() -> Vec<IdentityCheck> {
    use Generator::*;
    let i = C64::new(0.0, 1.0);
    let s3 = 3f64.sqrt();
    let m = |g: Generator| g.matrix();
    let cases: [(&'static str, Generator, Generator, Mat3); 6] = [
        ("[Jy,Jz] = i Jx", Jy, Jz, m(Jx) * i),
        ("[Qxy,Qzx] = i Jx", Qxy, Qzx, m(Jx) * i),
        ("[Qyz,D] = i Jx", Qyz, D, m(Jx) * i),
        ("[Qyz,Y] = sqrt3 i Jx", Qyz, Y, m(Jx) * (i * s3)),
        ("[Jx,Qyz] = i(sqrt3 Y + D)", Jx, Qyz, (m(Y) * C64::from(s3) + m(D)) * i),
        ("[Jy,Qzx] = i(-sqrt3 Y + D)", Jy, Qzx, (m(Y) * C64::from(-s3) + m(D)) * i),
    ];
    cases
        .into_iter()
        .map(|(identity, a, b, rhs)| IdentityCheck {
            identity,
            max_deviation: max_deviation(&commutator(&generator(a), &generator(b)), &rhs),
        })
        .collect()
}

/// Weights of a collective observable `F = sum_i sum_g c_g G_g(i)`.
///
/// The zero vector is the null observable: expectation 0 and variance 0.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct CollectiveOperatorSpec {
    pub coefficients: [f64; 8],
}

impl CollectiveOperatorSpec {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(g: Generator) -> Self {
        let mut coefficients = [0.0; 8];
        coefficients[g.index()] = 1.0;
        Self { coefficients }
    }

    pub fn fx() -> Self {
        Self::single(Generator::Jx)
    }
    pub fn fy() -> Self {
        Self::single(Generator::Jy)
    }
    pub fn fz() -> Self {
        Self::single(Generator::Jz)
    }
    pub fn f_yz() -> Self {
        Self::single(Generator::Qyz)
    }
    pub fn f_zx() -> Self {
        Self::single(Generator::Qzx)
    }
    pub fn f_d() -> Self {
        Self::single(Generator::D)
    }
    pub fn f_y_nematic() -> Self {
        Self::single(Generator::Y)
    }

    pub fn weight(&self, g: Generator) -> f64 {
        self.coefficients[g.index()]
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|&c| c == 0.0)
    }

    /// Single-particle matrix `sum_g c_g G_g`.
    pub fn matrix(&self) -> Mat3 {
        Generator::ALL
            .into_iter()
            .filter(|g| self.weight(*g) != 0.0)
            .fold(Mat3::zeros(), |acc, g| acc + g.matrix() * C64::from(self.weight(g)))
    }

    /// Generators carrying a nonzero weight.
    pub fn support(&self) -> impl Iterator<Item = Generator> + '_ {
        Generator::ALL.into_iter().filter(|g| self.weight(*g) != 0.0)
    }
}

impl Add for CollectiveOperatorSpec {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.coefficients.iter_mut().zip(rhs.coefficients) {
            *a += b;
        }
        self
    }
}

impl Sub for CollectiveOperatorSpec {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for CollectiveOperatorSpec {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl Mul<f64> for CollectiveOperatorSpec {
    type Output = Self;
    fn mul(mut self, rhs: f64) -> Self {
        self.coefficients.iter_mut().for_each(|c| *c *= rhs);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(m: usize) -> nalgebra::Vector3<C64> {
        let mut v = nalgebra::Vector3::zeros();
        v[m] = C64::from(1.0);
        v
    }

    #[test]
    fn table_entries() {
        let jz = generator(Generator::Jz).matrix;
        assert_eq!(jz, Mat3::from_diagonal(&nalgebra::Vector3::new(1.0, 0.0, -1.0).map(C64::from)));
        let y = Generator::Y.matrix();
        let s = 1.0 / 3f64.sqrt();
        assert!((y[(0, 0)].re - s).abs() < 1e-16);
        assert!((y[(1, 1)].re + 2.0 * s).abs() < 1e-15);
        assert!((y[(2, 2)].re - s).abs() < 1e-16);
    }

    #[test]
    fn jx_on_zero_state() {
        let v = Generator::Jx.matrix() * basis(1);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[0] - C64::from(s)).norm() < 1e-16);
        assert!(v[1].norm() == 0.0);
        assert!((v[2] - C64::from(s)).norm() < 1e-16);
    }

    #[test]
    fn hermitian_traceless_orthonormal() {
        for a in Generator::ALL {
            let m = a.matrix();
            assert_eq!(m, m.adjoint(), "{a} not Hermitian");
            assert!(m.trace().norm() < 1e-15, "{a} not traceless");
            for b in Generator::ALL {
                let t = (m * b.matrix()).trace();
                let want = if a == b { 2.0 } else { 0.0 };
                assert!((t - C64::from(want)).norm() < 1e-14, "tr({a}{b}) = {t}");
            }
        }
    }

    #[test]
    fn commutator_examples() {
        let i = C64::new(0.0, 1.0);
        let jx = generator(Generator::Jx);
        let c = commutator(&generator(Generator::Jy), &generator(Generator::Jz));
        assert!(max_deviation(&c, &(jx.matrix * i)) < 1e-15);
        assert_eq!(commutator(&jx, &jx), Mat3::zeros());
        let c = commutator(&jx, &generator(Generator::Qyz));
        let rhs = (Generator::Y.matrix() * C64::from(3f64.sqrt()) + Generator::D.matrix()) * i;
        assert!(max_deviation(&c, &rhs) < 1e-14);
    }

    #[test]
    fn algebra_report() {
        let report = verify_algebra();
        assert_eq!(report.len(), 6);
        for check in &report {
            assert!(check.max_deviation <= 1e-14, "{check:?}");
        }
        let qy = report.iter().find(|c| c.identity.starts_with("[Qyz,Y]")).unwrap();
        assert!(qy.max_deviation <= 1e-14);
    }

    #[test]
    fn spec_matrix_and_parse() {
        let spec = CollectiveOperatorSpec::fx() * 2.0 - CollectiveOperatorSpec::f_zx();
        let m = spec.matrix();
        assert!(max_deviation(&m, &(Generator::Jx.matrix() * C64::from(2.0) - Generator::Qzx.matrix())) < 1e-16);
        assert!(CollectiveOperatorSpec::zero().is_zero());
        assert_eq!(CollectiveOperatorSpec::zero().matrix(), Mat3::zeros());
        assert_eq!("qyz".parse::<Generator>().unwrap(), Generator::Qyz);
        assert!("Qxz".parse::<Generator>().is_err());
    }
}
