//! Laurent coefficients by trapezoid contour quadrature.
//!
//! `a_n = (2πi)⁻¹∮ g(z)(z − c)^{−n−1} dz = ρ^{−n} · mean_k g(c + ρe^{iφ_k}) e^{−inφ_k}`,
//! exact for trigonometric polynomials of degree below the sample count.

use std::f64::consts::PI;

use serde::Serialize;

use crate::field::Field;
use crate::gauge::cauchy::ComplexComponents;
use crate::{Complex64, Error, Result};

/// Extra modes computed beyond the requested range to estimate the tail.
pub const TAIL_MODES: i32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnulusSpec {
    pub center: [f64; 2],
    pub r_inner: f64,
    pub r_outer: f64,
}

impl AnnulusSpec {
    pub fn geometric_mid(&self) -> f64 {
        (self.r_inner * self.r_outer).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct LaurentSeries<T> {
    pub center: [f64; 2],
    pub contour_radius: f64,
    pub n_min: i32,
    /// `coeffs[k]` is `a_{n_min + k}`.
    pub coeffs: Vec<T>,
    /// `Σ |a_n| ρ^n` over the extra modes just outside the range.
    pub tail_bound: f64,
    pub samples: usize,
}

/// Number of contour samples for modes up to `|n| ≤ n_abs`.
pub fn sample_count(n_abs: i32) -> usize {
    (4 * (n_abs.max(0) as usize + 8)).max(64)
}

fn zero<T: ComplexComponents>() -> T {
    T::zero()
}

fn axpy<T: ComplexComponents>(acc: &mut T, w: Complex64, x: &T) {
    for c in 0..T::N {
        let v = acc.component(c) + w * x.component(c);
        acc.set_component(c, v);
    }
}

/// Bilinear pairing `⟨a, b⟩ = Σ_c a_c b_c` (no conjugation).
pub fn pairing<T: ComplexComponents>(a: &T, b: &T) -> Complex64 {
    (0..T::N).map(|c| a.component(c) * b.component(c)).sum()
}

/// Contour samples of `g` on `|z − c| = ρ`, `φ_k = 2πk/m + offset`.
fn samples<T, S>(sampler: &S, center: [f64; 2], rho: f64, m: usize, offset: f64) -> Result<Vec<T>>
where
    S: Fn([f64; 2]) -> Option<T>,
{
    (0..m)
        .map(|k| {
            let phi = 2.0 * PI * k as f64 / m as f64 + offset;
            sampler([center[0] + rho * phi.cos(), center[1] + rho * phi.sin()]).ok_or(Error::ContourOutside)
        })
        .collect()
}

fn coefficient<T: ComplexComponents>(vals: &[T], rho: f64, n: i32) -> T {
    let m = vals.len();
    let mut acc = zero::<T>();
    for (k, v) in vals.iter().enumerate() {
        let phi = 2.0 * PI * k as f64 / m as f64;
        axpy(&mut acc, Complex64::from_polar(1.0, -(n as f64) * phi), v);
    }
    let s = rho.powi(-n) / m as f64;
    let mut out = zero::<T>();
    axpy(&mut out, Complex64::new(s, 0.0), &acc);
    out
}

/// Coefficients `a_n`, `n ∈ [n_min, n_max]`, of `sampler` on the circle of
/// radius `rho`; `None` from the sampler means the contour left the data.
pub fn laurent_with<T, S>(sampler: S, center: [f64; 2], rho: f64, n_min: i32, n_max: i32) -> Result<LaurentSeries<T>>
where
    T: ComplexComponents,
    S: Fn([f64; 2]) -> Option<T>,
{
    if !(rho > 0.0) || n_min > n_max {
        return Err(Error::InvalidParameter(format!("contour radius {rho}, range {n_min}..={n_max}")));
    }
    let n_abs = n_min.abs().max(n_max.abs()) + TAIL_MODES;
    let m = sample_count(n_abs);
    let vals = samples(&sampler, center, rho, m, 0.0)?;
    let coeffs: Vec<T> = (n_min..=n_max).map(|n| coefficient(&vals, rho, n)).collect();
    let tail_bound = (n_min - TAIL_MODES..n_min)
        .chain(n_max + 1..=n_max + TAIL_MODES)
        .map(|n| coefficient(&vals, rho, n).norm() * rho.powi(n))
        .sum();
    Ok(LaurentSeries { center, contour_radius: rho, n_min, coeffs, tail_bound, samples: m })
}

/// Laurent coefficients of a grid field (bilinear interpolation) on the
/// geometric mid-circle of `annulus`.
pub fn laurent_coefficients<T: ComplexComponents>(
    g: &Field<T>,
    annulus: &AnnulusSpec,
    n_min: i32,
    n_max: i32,
) -> Result<LaurentSeries<T>> {
    if !(annulus.r_inner >= 0.0 && annulus.r_inner < annulus.r_outer) {
        return Err(Error::InvalidParameter("annulus radii".into()));
    }
    laurent_with(|p| g.bilinear(p), annulus.center, annulus.geometric_mid(), n_min, n_max)
}

impl<T: ComplexComponents> LaurentSeries<T> {
    pub fn n_max(&self) -> i32 {
        self.n_min + self.coeffs.len() as i32 - 1
    }

    pub fn get(&self, n: i32) -> Option<&T> {
        (n >= self.n_min && n <= self.n_max()).then(|| &self.coeffs[(n - self.n_min) as usize])
    }

    pub fn eval(&self, p: [f64; 2]) -> T {
        let z = Complex64::new(p[0] - self.center[0], p[1] - self.center[1]);
        let mut acc = zero::<T>();
        for (k, a) in self.coeffs.iter().enumerate() {
            axpy(&mut acc, z.powi(self.n_min + k as i32), a);
        }
        acc
    }

    /// `max |g − Σ a_n z^n|` at the contour midpoints between quadrature nodes.
    pub fn reconstruction_error<S: Fn([f64; 2]) -> Option<T>>(&self, sampler: S) -> Result<f64> {
        let m = self.samples;
        let vals = samples(&sampler, self.center, self.contour_radius, m, PI / m as f64)?;
        Ok((0..m)
            .map(|k| {
                let phi = 2.0 * PI * (k as f64 + 0.5) / m as f64;
                let p = [
                    self.center[0] + self.contour_radius * phi.cos(),
                    self.center[1] + self.contour_radius * phi.sin(),
                ];
                (vals[k] - self.eval(p)).norm()
            })
            .fold(0.0, f64::max))
    }

    /// `b_n = Σ_m ⟨a_m, a_{n−m}⟩` over the available coefficients.
    pub fn products(&self, n: i32) -> Complex64 {
        (self.n_min..=self.n_max())
            .filter_map(|m| Some(pairing(self.get(m)?, self.get(n - m)?)))
            .sum()
    }

    /// `(n, Re, Im)` rows per component, for CSV output.
    pub fn table(&self) -> Vec<(i32, usize, f64, f64)> {
        let mut rows = Vec::new();
        for (k, a) in self.coeffs.iter().enumerate() {
            for c in 0..T::N {
                let v = a.component(c);
                rows.push((self.n_min + k as i32, c, v.re, v.im));
            }
        }
        rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridSpec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn residue_of_one_over_z() {
        let s = laurent_with(|p| Some(c(p[0], p[1]).inv()), [0.0, 0.0], 0.5, -6, 6).unwrap();
        for n in -6..=6 {
            let expect = if n == -1 { 1.0 } else { 0.0 };
            assert!((s.get(n).unwrap() - c(expect, 0.0)).norm() < 1e-10, "n={n}");
        }
        assert!(s.tail_bound < 1e-10);
    }

    #[test]
    fn term_by_term_coefficients() {
        let g = |p: [f64; 2]| {
            let z = c(p[0] - 0.1, p[1] + 0.2);
            Some(c(3.0, 0.0) / (z * z) + z * 2.0)
        };
        let s = laurent_with(g, [0.1, -0.2], 0.7, -4, 4).unwrap();
        assert!((s.get(-2).unwrap() - c(3.0, 0.0)).norm() < 1e-8);
        assert!((s.get(1).unwrap() - c(2.0, 0.0)).norm() < 1e-8);
        assert!(s.reconstruction_error(g).unwrap() < 1e-8);
    }

    #[test]
    fn gridded_polynomial_coefficients_converge() {
        let coef = [c(0.3, -0.1), c(1.0, 0.5), c(-0.7, 0.2), c(0.4, 0.0), c(0.0, -0.3), c(0.2, 0.1), c(-0.1, 0.05)];
        let poly = move |x: f64, y: f64| {
            let z = c(x, y);
            coef.iter().rev().fold(c(0.0, 0.0), |acc, a| acc * z + a)
        };
        let err = |n: usize| {
            let g = GridSpec::square([0.0, 0.0], 1.0, n).unwrap();
            let f = Field::from_fn(g, poly);
            let s = laurent_coefficients(&f, &AnnulusSpec { center: [0.0, 0.0], r_inner: 0.3, r_outer: 0.9 }, -3, 8)
                .unwrap();
            (-3..=8)
                .map(|k| (s.get(k).unwrap() - if (0..7).contains(&k) { coef[k as usize] } else { c(0.0, 0.0) }).norm())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(64), err(128));
        assert!(e2 < 1e-2 && (e1 / e2).log2() > 1.7, "{e1} {e2}");
    }

    #[test]
    fn contour_outside_data_is_an_error() {
        let g = GridSpec::square([0.0, 0.0], 1.0, 16).unwrap();
        let f = Field::<Complex64>::zeros(g);
        let a = AnnulusSpec { center: [0.5, 0.0], r_inner: 0.6, r_outer: 1.0 };
        assert!(matches!(laurent_coefficients(&f, &a, -2, 2), Err(Error::ContourOutside)));
    }

    #[test]
    fn products_match_direct_contour_integrals() {
        // g = (1/z + 2 + z, 0.5/z² − z): compare Σ⟨a_m, a_{n−m}⟩ with the coefficients of gᵀg.
        let g = |p: [f64; 2]| {
            let z = c(p[0], p[1]);
            Some(crate::CVec2::new(z.inv() + 2.0 + z, c(0.5, 0.0) / (z * z) - z))
        };
        let s = laurent_with(g, [0.0, 0.0], 0.8, -6, 6).unwrap();
        let h2 = laurent_with(
            |p| g(p).map(|v| v[0] * v[0] + v[1] * v[1]),
            [0.0, 0.0],
            0.8,
            -4,
            2,
        )
        .unwrap();
        for n in -4..=2 {
            assert!((s.products(n) - h2.get(n).unwrap()).norm() < 1e-10, "n={n}");
        }
    }
}
