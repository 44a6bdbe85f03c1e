//! Circle averages of the frame matrix, Taylor-projection holomorphic
//! approximation of the Hopf differential, and the `A₀(r)` functional.
//!
//! The infimum over holomorphic functions in `A₀` is not computable; it is
//! bounded above by projecting onto `Σ_{n≤d} c_n z^n` with `c_n` from contour
//! integrals, and taking the best truncation degree.

use std::f64::consts::PI;

use nalgebra::Matrix3x2;
use serde::Serialize;

use super::laurent::{laurent_with, sample_count};
use crate::field::{Field, GridSpec};
use crate::norms::{morrey, Region};
use crate::{Complex64, Error, Result, Vec3};

pub const DEFAULT_MAX_DEGREE: usize = 24;

fn circle_point(c: [f64; 2], rho: f64, phi: f64) -> [f64; 2] {
    [c[0] + rho * phi.cos(), c[1] + rho * phi.sin()]
}

fn circle_samples(q: &Field<Matrix3x2<f64>>, center: [f64; 2], rho: f64, m: usize) -> Result<Vec<Matrix3x2<f64>>> {
    (0..m)
        .map(|k| q.bilinear(circle_point(center, rho, 2.0 * PI * k as f64 / m as f64)).ok_or(Error::ContourOutside))
        .collect()
}

/// Arc-length mean of `Q` over `|w − c| = ρ`.
pub fn circle_average(q: &Field<Matrix3x2<f64>>, center: [f64; 2], rho: f64) -> Result<Matrix3x2<f64>> {
    let m = sample_count((rho / q.spec.h()).ceil() as i32);
    let s = circle_samples(q, center, rho, m)?;
    Ok(s.iter().fold(Matrix3x2::zeros(), |a, b| a + b) / m as f64)
}

/// `‖Q − q‖_{L²(circle)} / (ρ‖∂_s Q‖_{L²(circle)})`; at most one for smooth
/// `Q` by Wirtinger's inequality. `None` when `Q` is constant on the circle.
pub fn poincare_ratio(q: &Field<Matrix3x2<f64>>, center: [f64; 2], rho: f64) -> Result<Option<f64>> {
    let m = sample_count((rho / q.spec.h()).ceil() as i32);
    let s = circle_samples(q, center, rho, m)?;
    let mean = s.iter().fold(Matrix3x2::zeros(), |a, b| a + b) / m as f64;
    let ds = 2.0 * PI * rho / m as f64;
    let dev: f64 = s.iter().map(|v| (v - mean).norm_squared()).sum::<f64>() * ds;
    let grad: f64 = (0..m).map(|k| ((s[(k + 1) % m] - s[k]) / ds).norm_squared()).sum::<f64>() * ds;
    Ok((grad > 1e-300).then(|| dev.sqrt() / (rho * grad.sqrt())))
}

#[derive(Debug, Clone, Serialize)]
pub struct HoloApprox {
    pub center: [f64; 2],
    pub radius: f64,
    pub contour_radius: f64,
    /// Taylor coefficients `c_0..=c_d` of the best truncation.
    pub coeffs: Vec<[f64; 2]>,
    pub degree: usize,
    /// `‖H − h‖_{L¹(disk)}`: an upper bound for the infimum over holomorphic `h`.
    pub residual: f64,
    /// Best residual using degrees up to `d`, for each `d ≤ max_degree`.
    pub residual_by_degree: Vec<f64>,
}

fn disk_inside(spec: &GridSpec, c: [f64; 2], r: f64) -> bool {
    (0..64).all(|k| spec.in_sample_hull(circle_point(c, r, 2.0 * PI * k as f64 / 64.0)))
}

/// Taylor projection of `sampler` from the circle of radius `radius/2`,
/// residual measured against the grid values of `h` on the disk.
pub fn holomorphic_approx_with<S>(
    h: &Field<Complex64>,
    sampler: S,
    center: [f64; 2],
    radius: f64,
    max_degree: usize,
) -> Result<HoloApprox>
where
    S: Fn([f64; 2]) -> Option<Complex64>,
{
    if !disk_inside(&h.spec, center, radius) {
        return Err(Error::ContourOutside);
    }
    let rho = 0.5 * radius;
    let series = laurent_with(sampler, center, rho, 0, max_degree as i32)?;
    let spec = h.spec;
    let mask = Region::disk(center, radius).mask(&spec);
    let d = max_degree + 1;
    let mut raw = vec![0.0; d];
    for k in 0..mask.len() {
        if !mask[k] {
            continue;
        }
        let [x, y] = spec.point(k % spec.nx, k / spec.nx);
        let z = Complex64::new(x - center[0], y - center[1]);
        let (mut zp, mut sum) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        for (n, r) in raw.iter_mut().enumerate() {
            sum += series.coeffs[n] * zp;
            zp *= z;
            *r += (h.values[k] - sum).norm();
        }
    }
    let area = spec.cell_area();
    raw.iter_mut().for_each(|r| *r *= area);
    let mut best = 0;
    let mut by_degree = Vec::with_capacity(d);
    for n in 0..d {
        if raw[n] < raw[best] {
            best = n;
        }
        by_degree.push(raw[best]);
    }
    Ok(HoloApprox {
        center,
        radius,
        contour_radius: rho,
        coeffs: series.coeffs[..=best].iter().map(|c| [c.re, c.im]).collect(),
        degree: best,
        residual: raw[best],
        residual_by_degree: by_degree,
    })
}

pub fn holomorphic_approx(h: &Field<Complex64>, center: [f64; 2], radius: f64, max_degree: usize) -> Result<HoloApprox> {
    holomorphic_approx_with(h, |p| h.bilinear(p), center, radius, max_degree)
}

#[derive(Debug, Clone, Serialize)]
pub struct A0Report {
    pub r: f64,
    pub delta: f64,
    pub holomorphic_residual: f64,
    /// `‖τ‖_{M^{1,δ}}` over the outer region.
    pub tau_morrey: f64,
    /// `r^{2−δ}‖τ‖_{M^{1,δ}}`.
    pub tau_term: f64,
    pub value: f64,
    pub approx: HoloApprox,
}

/// `A₀(r) = ‖ℋ − h‖_{L¹(B_{2r}(c))} + r^{2−δ}‖τ‖_{M^{1,δ}(outer)}`.
pub fn a0_functional(
    h: &Field<Complex64>,
    tau: &Field<Vec3>,
    center: [f64; 2],
    r: f64,
    delta: f64,
    outer: &Region,
    max_degree: usize,
) -> Result<A0Report> {
    let approx = holomorphic_approx(h, center, 2.0 * r, max_degree)?;
    let tau_morrey = morrey(tau, 1.0, delta, outer)?.value;
    let tau_term = r.powf(2.0 - delta) * tau_morrey;
    Ok(A0Report {
        r,
        delta,
        holomorphic_residual: approx.residual,
        tau_morrey,
        tau_term,
        value: approx.residual + tau_term,
        approx,
    })
}

/// Single-scale holomorphic approximation estimate: residual on `B_{r/4}(c)`
/// and `r^{2−δ}‖τ‖_{M^{1,δ}(B_r(c))}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SingleScaleEstimate {
    pub residual: f64,
    pub rhs: f64,
}

pub fn single_scale_estimate(
    h: &Field<Complex64>,
    tau: &Field<Vec3>,
    center: [f64; 2],
    r: f64,
    delta: f64,
    max_degree: usize,
) -> Result<SingleScaleEstimate> {
    let approx = holomorphic_approx(h, center, 0.25 * r, max_degree)?;
    let m = morrey(tau, 1.0, delta, &Region::disk(center, r))?.value;
    Ok(SingleScaleEstimate { residual: approx.residual, rhs: r.powf(2.0 - delta) * m })
}
