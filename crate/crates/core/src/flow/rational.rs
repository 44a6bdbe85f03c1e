//! Rational maps `φ: ℂ → ℂ` lifted to harmonic maps into 𝕊² by inverse
//! stereographic projection from the north pole `N = (0, 0, 1)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::field::{GridSpec, ManifoldMap};
use crate::{Complex64, Error, Result, Vec3};

pub const NORTH: Vec3 = Vec3::new(0.0, 0.0, 1.0);

/// Polynomial with coefficients in increasing degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly(pub Vec<Complex64>);

impl Poly {
    pub fn degree(&self) -> Option<usize> {
        self.0.iter().rposition(|c| c.norm() > 0.0)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.0.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    fn trimmed(&self) -> Vec<Complex64> {
        self.0[..=self.degree().unwrap_or(0)].to_vec()
    }
}

/// Resultant via the Sylvester determinant; zero iff a common root exists.
pub fn resultant(p: &Poly, q: &Poly) -> Complex64 {
    let (a, b) = (p.trimmed(), q.trimmed());
    let (m, n) = (a.len() - 1, b.len() - 1);
    if m + n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let size = m + n;
    let mut s = DMatrix::<Complex64>::zeros(size, size);
    // Rows hold coefficients from the leading term down.
    for r in 0..n {
        for (k, c) in a.iter().rev().enumerate() {
            s[(r, r + k)] = *c;
        }
    }
    for r in 0..m {
        for (k, c) in b.iter().rev().enumerate() {
            s[(n + r, r + k)] = *c;
        }
    }
    s.determinant()
}

/// Inverse stereographic projection, `∞ ↦ N`.
#[inline]
pub fn stereographic_inverse(w: Complex64) -> Vec3 {
    let r2 = w.norm_sqr();
    if !r2.is_finite() {
        return NORTH;
    }
    if r2 > 1.0 {
        // Written in 1/w to stay accurate for large |w|.
        let v = w.inv();
        let s2 = v.norm_sqr();
        return Vec3::new(2.0 * v.re, -2.0 * v.im, 1.0 - s2) / (1.0 + s2);
    }
    Vec3::new(2.0 * w.re, 2.0 * w.im, r2 - 1.0) / (r2 + 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalMap {
    pub numerator: Poly,
    pub denominator: Poly,
    /// Compose with conjugation: `z ↦ φ(z̄)`.
    #[serde(default)]
    pub antiholomorphic: bool,
}

impl RationalMap {
    pub fn identity() -> Self {
        Self::monomial(1)
    }

    /// `φ(z) = z^k`.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0); k + 1];
        c[k] = Complex64::new(1.0, 0.0);
        Self { numerator: Poly(c), denominator: Poly(vec![Complex64::new(1.0, 0.0)]), antiholomorphic: false }
    }

    pub fn validate(&self) -> Result<()> {
        let (dp, dq) = (self.numerator.degree(), self.denominator.degree());
        if dq.is_none() {
            return Err(Error::InvalidParameter("rational map: zero denominator".into()));
        }
        if self.degree() == 0 {
            return Err(Error::InvalidParameter("rational map: degree must be at least 1".into()));
        }
        if dp.is_some() && resultant(&self.numerator, &self.denominator).norm() <= 1e-10 {
            return Err(Error::InvalidParameter("rational map: numerator and denominator share a root".into()));
        }
        Ok(())
    }

    /// `max(deg P, deg Q)`: the topological degree of the lifted map.
    pub fn degree(&self) -> usize {
        self.numerator.degree().unwrap_or(0).max(self.denominator.degree().unwrap_or(0))
    }

    pub fn eval(&self, z: Complex64) -> Vec3 {
        let z = if self.antiholomorphic { z.conj() } else { z };
        let (p, q) = (self.numerator.eval(z), self.denominator.eval(z));
        if q.norm() <= 1e-300 || q.norm() < 1e-14 * p.norm() {
            return NORTH;
        }
        stereographic_inverse(p / q)
    }

    /// The value at infinity.
    pub fn at_infinity(&self) -> Vec3 {
        let (dp, dq) = (self.numerator.degree(), self.denominator.degree().unwrap_or(0));
        match dp {
            Some(d) if d > dq => NORTH,
            Some(d) if d == dq => stereographic_inverse(self.numerator.0[d] / self.denominator.0[dq]),
            _ => stereographic_inverse(Complex64::new(0.0, 0.0)),
        }
    }
}

/// Placement of a bubble: `u(x) = S⁻¹(φ((x − center)/scale))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BubbleSpec {
    pub map: RationalMap,
    pub center: [f64; 2],
    pub scale: f64,
}

impl BubbleSpec {
    pub fn eval(&self, p: [f64; 2]) -> Vec3 {
        let z = Complex64::new((p[0] - self.center[0]) / self.scale, (p[1] - self.center[1]) / self.scale);
        self.map.eval(z)
    }
}

pub fn rational_bubble(spec: &BubbleSpec, grid: GridSpec) -> Result<ManifoldMap> {
    spec.map.validate()?;
    if !(spec.scale > 0.0) {
        return Err(Error::InvalidParameter("bubble scale must be positive".into()));
    }
    ManifoldMap::from_fn(grid, |x, y| spec.eval([x, y]))
}
