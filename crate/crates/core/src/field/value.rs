use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

use crate::{CMat2, CVec2, Complex64, Vec3};

/// Storage tag used by the field container format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Scalar,
    Complex,
    Vector,
}

impl Kind {
    pub fn tag(self) -> u64 {
        match self {
            Kind::Scalar => 0,
            Kind::Complex => 1,
            Kind::Vector => 2,
        }
    }

    pub fn from_tag(tag: u64) -> Option<Self> {
        match tag {
            0 => Some(Kind::Scalar),
            1 => Some(Kind::Complex),
            2 => Some(Kind::Vector),
            _ => None,
        }
    }
}

/// Pointwise value carried by a [`Field`](super::Field).
pub trait Value:
    Copy + Debug + Send + Sync + PartialEq + Add<Output = Self> + Sub<Output = Self> + 'static
{
    const KIND: Kind;
    /// Number of `f64` components in the serialized form.
    const WIDTH: usize;

    fn zero() -> Self;
    fn scale(self, s: f64) -> Self;
    /// Squared Euclidean / Frobenius norm.
    fn norm_sqr(self) -> f64;
    fn write(&self, out: &mut Vec<f64>);
    fn read(src: &[f64]) -> Self;

    fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    fn is_finite(self) -> bool {
        self.norm_sqr().is_finite()
    }
}

/// Values that can be multiplied by a complex scalar (needed for ∂z, ∂z̄).
pub trait ComplexValue: Value + Mul<Complex64, Output = Self> {}
impl<T: Value + Mul<Complex64, Output = T>> ComplexValue for T {}

impl Value for f64 {
    const KIND: Kind = Kind::Scalar;
    const WIDTH: usize = 1;
    fn zero() -> Self {
        0.0
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn write(&self, out: &mut Vec<f64>) {
        out.push(*self);
    }
    fn read(src: &[f64]) -> Self {
        src[0]
    }
}

impl Value for Complex64 {
    const KIND: Kind = Kind::Complex;
    const WIDTH: usize = 2;
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    fn write(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(&[self.re, self.im]);
    }
    fn read(src: &[f64]) -> Self {
        Complex64::new(src[0], src[1])
    }
}

impl Value for Vec3 {
    const KIND: Kind = Kind::Vector;
    const WIDTH: usize = 3;
    fn zero() -> Self {
        Vec3::zeros()
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn norm_sqr(self) -> f64 {
        nalgebra::Matrix::norm_squared(&self)
    }
    fn write(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(self.as_slice());
    }
    fn read(src: &[f64]) -> Self {
        Vec3::new(src[0], src[1], src[2])
    }
}

impl Value for CVec2 {
    const KIND: Kind = Kind::Vector;
    const WIDTH: usize = 4;
    fn zero() -> Self {
        CVec2::zeros()
    }
    fn scale(self, s: f64) -> Self {
        self.map(|c| c * s)
    }
    fn norm_sqr(self) -> f64 {
        self.iter().map(|c| c.norm_sqr()).sum()
    }
    fn write(&self, out: &mut Vec<f64>) {
        for c in self.iter() {
            out.extend_from_slice(&[c.re, c.im]);
        }
    }
    fn read(src: &[f64]) -> Self {
        CVec2::new(Complex64::new(src[0], src[1]), Complex64::new(src[2], src[3]))
    }
}

/// 2×2 complex matrices serialize row-major as (re, im) pairs.
impl Value for CMat2 {
    const KIND: Kind = Kind::Vector;
    const WIDTH: usize = 8;
    fn zero() -> Self {
        CMat2::zeros()
    }
    fn scale(self, s: f64) -> Self {
        self.map(|c| c * s)
    }
    fn norm_sqr(self) -> f64 {
        self.iter().map(|c| c.norm_sqr()).sum()
    }
    fn write(&self, out: &mut Vec<f64>) {
        for r in 0..2 {
            for c in 0..2 {
                let v = self[(r, c)];
                out.extend_from_slice(&[v.re, v.im]);
            }
        }
    }
    fn read(src: &[f64]) -> Self {
        let c = |k: usize| Complex64::new(src[2 * k], src[2 * k + 1]);
        CMat2::new(c(0), c(1), c(2), c(3))
    }
}

/// Frame matrices `Q = (e₁, e₂)` (3×2, column-major on disk).
impl Value for nalgebra::Matrix3x2<f64> {
    const KIND: Kind = Kind::Vector;
    const WIDTH: usize = 6;
    fn zero() -> Self {
        nalgebra::Matrix3x2::zeros()
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn norm_sqr(self) -> f64 {
        self.norm_squared()
    }
    fn write(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(self.as_slice());
    }
    fn read(src: &[f64]) -> Self {
        nalgebra::Matrix3x2::from_column_slice(&src[..6])
    }
}
