//! The ∂̄-decomposition `BᵀG = G₁ + G₂`.
//!
//! `G_α = ⟨∂z u, e_α⟩` and `T_α = ⟨τ, e_α⟩` satisfy `∂z̄G = T + ωG`, and
//! `∂z̄B = ωB` turns this into `∂z̄(BᵀG) = BᵀT`. `G₁` is the Cauchy transform
//! of `BᵀT/2` over the region, so `G₂ = BᵀG − G₁` is holomorphic there.

use serde::Serialize;

use super::cauchy::{cauchy_transform, riesz_potential};
use super::connection::{connection_form, ConnectionForm};
use super::fixed_point::{solve_b, FixedPointOptions, FixedPointReport};
use super::frame::{coulomb_frame, Frame, FrameOptions};
use crate::field::{dz_dzbar, gradient, Field, GridSpec, ManifoldMap};
use crate::norms::{llogl, lorentz2inf, Region};
use crate::{CMat2, CVec2, Complex64, Error, Result, Vec3};

#[derive(Debug, Clone, Default)]
pub struct GaugeOptions {
    pub frame: FrameOptions,
    pub fixed_point: FixedPointOptions,
}

/// Measured ratios and residuals of one decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct GaugeDiagnostics {
    pub coulomb_residual: f64,
    pub coulomb_tolerance: f64,
    pub orthonormality_defect: f64,
    pub metric_residual: f64,
    pub antisymmetry_defect: f64,
    /// `Σ_α ∫|∇e_α|² / ∫|∇u|²`.
    pub frame_energy_ratio: Option<f64>,
    /// `Σ_α ‖∇e_α‖_{L^{2,1}} / ∫|∇u|²`.
    pub frame_l21_ratio: Option<f64>,
    pub fixed_point: FixedPointReport,
    /// `‖∂z̄G₂‖_{L¹}` on the region eroded by two cells.
    pub holomorphy_residual: f64,
    /// `max ||G| − |P_u∇u||` with `P_u` the tangential projection.
    pub covariance_defect: f64,
    /// `max |∇u| / (|G₂| + ℐ₁(|τ|))` on the eroded region.
    pub riesz_constant: Option<f64>,
    /// `‖G₁‖_{L^{2,∞}} / ‖τ‖_{L¹}`.
    pub g1_weak_ratio: Option<f64>,
    /// `‖∇G₁‖_{L¹} / ‖τ‖_{L log L}`.
    pub g1_gradient_ratio: Option<f64>,
}

/// All fields live on the cropped grid `spec`, offset `crop` in the input.
#[derive(Debug, Clone)]
pub struct GaugeData {
    pub spec: GridSpec,
    pub crop: [usize; 2],
    pub frame: Frame,
    pub omega: ConnectionForm,
    pub b: Field<CMat2>,
    pub g: Field<CVec2>,
    pub t_u: Field<CVec2>,
    pub g1: Field<CVec2>,
    pub g2: Field<CVec2>,
    pub diagnostics: GaugeDiagnostics,
}

/// Bounding box of `mask` widened by `margin` cells, at least 8×8 and inside the grid.
pub fn bounding_window(spec: &GridSpec, mask: &[bool], margin: usize) -> Option<(usize, usize, usize, usize)> {
    let (nx, ny) = (spec.nx, spec.ny);
    let (mut i0, mut i1, mut j0, mut j1) = (usize::MAX, 0, usize::MAX, 0);
    for j in 0..ny {
        for i in 0..nx {
            if mask[j * nx + i] {
                i0 = i0.min(i);
                i1 = i1.max(i);
                j0 = j0.min(j);
                j1 = j1.max(j);
            }
        }
    }
    if i0 == usize::MAX {
        return None;
    }
    let span = |lo: usize, hi: usize, n: usize| {
        let mut a = lo.saturating_sub(margin);
        let mut b = (hi + margin + 1).min(n);
        while b - a < 8.min(n) {
            if a > 0 {
                a -= 1;
            }
            if b < n {
                b += 1;
            }
        }
        (a, b - a)
    };
    let (a, w) = span(i0, i1, nx);
    let (b, hgt) = span(j0, j1, ny);
    Some((a, b, w, hgt))
}

/// Cells whose `(2r+1)²` neighbourhood lies in `mask`.
pub fn erode(spec: &GridSpec, mask: &[bool], r: usize) -> Vec<bool> {
    let (nx, ny) = (spec.nx, spec.ny);
    let mut out = vec![false; mask.len()];
    for j in r..ny.saturating_sub(r) {
        for i in r..nx.saturating_sub(r) {
            out[j * nx + i] = (j - r..=j + r).all(|jj| (i - r..=i + r).all(|ii| mask[jj * nx + ii]));
        }
    }
    out
}

fn project(v: Vec3, e1: Vec3, e2: Vec3) -> CVec2 {
    CVec2::new(Complex64::new(v.dot(&e1), 0.0), Complex64::new(v.dot(&e2), 0.0))
}

fn ratio(a: f64, b: f64) -> Option<f64> {
    (b > 1e-300 && a.is_finite()).then(|| a / b)
}

pub fn dbar_decompose(u: &ManifoldMap, tau: &Field<Vec3>, region: &Region, opts: &GaugeOptions) -> Result<GaugeData> {
    if u.spec() != &tau.spec {
        return Err(Error::InconsistentDomains);
    }
    tau.check_finite()?;
    let full_mask = region.mask(u.spec());
    let nx0 = u.spec().nx;
    let (i0, j0, wx, wy) = bounding_window(u.spec(), &full_mask, 3).ok_or(Error::EmptyRegion)?;
    let u = u.crop(i0, j0, wx, wy)?;
    let tau = tau.crop(i0, j0, wx, wy)?;
    let spec = *u.spec();
    let mask: Vec<bool> =
        (0..wy).flat_map(|j| (0..wx).map(move |i| (j + j0) * nx0 + i + i0)).map(|k| full_mask[k]).collect();
    let region = Region::Mask(mask.clone());

    let frame = coulomb_frame(&u, &region, &opts.frame)?;
    let omega = connection_form(&frame);
    let (b, fp) = solve_b(&omega, &opts.fixed_point)?;

    let (ux, uy) = gradient(u.field());
    let mut g = Field::<CVec2>::zeros(spec);
    let mut t_u = Field::<CVec2>::zeros(spec);
    let mut bt_t = Field::<CVec2>::zeros(spec);
    let mut bt_g = Field::<CVec2>::zeros(spec);
    for k in 0..mask.len() {
        if mask[k] {
            let (e1, e2) = (frame.e1.values[k], frame.e2.values[k]);
            let gk = project(ux.values[k], e1, e2) - project(uy.values[k], e1, e2) * Complex64::i();
            let tk = project(tau.values[k], e1, e2);
            g.values[k] = gk;
            t_u.values[k] = tk;
            let bt = b.values[k].transpose();
            bt_g.values[k] = bt * gk;
            bt_t.values[k] = bt * tk;
        }
    }
    let g1 = cauchy_transform(&bt_t, &region)?.map(|v| v * Complex64::new(0.5, 0.0));
    let g1 = Field {
        spec,
        values: g1.values.iter().zip(&mask).map(|(v, &m)| if m { *v } else { CVec2::zeros() }).collect(),
    };
    let g2 = bt_g.zip_map(&g1, |a, c| a - c);

    // Diagnostics.
    let interior = erode(&spec, &mask, 2);
    let (_, g2_dbar) = dz_dzbar(&g2)?;
    let holomorphy_residual = g2_dbar.integral_pow(1.0, Some(&interior));
    let grad_u = ux.zip_map(&uy, |a, c| (a.norm_squared() + c.norm_squared()).sqrt());
    // |G| is compared with the tangential part of ∇u: the discrete gradient
    // is only tangent to O(h²), the frame is exactly.
    let covariance_defect = (0..mask.len())
        .filter(|&k| mask[k])
        .map(|k| {
            let n = u.field().values[k];
            let (a, c) = (ux.values[k] - n * n.dot(&ux.values[k]), uy.values[k] - n * n.dot(&uy.values[k]));
            (g.values[k].norm() - (a.norm_squared() + c.norm_squared()).sqrt()).abs()
        })
        .fold(0.0, f64::max);
    let riesz = riesz_potential(&tau, &region)?;
    let scale = grad_u.max_norm();
    let riesz_constant = (0..mask.len())
        .filter(|&k| interior[k] && grad_u.values[k] > 1e-6 * scale)
        .map(|k| grad_u.values[k] / (g2.values[k].norm() + riesz.values[k]))
        .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));

    let tau_l1 = tau.integral_pow(1.0, Some(&mask));
    let tau_llogl = llogl(&tau, &region)?.value;
    let g1_weak = lorentz2inf(&g1, &region)?.value;
    let (g1x, g1y) = crate::field::masked_gradient(&g1, &mask);
    let g1_grad = g1x.zip_map(&g1y, |a, c| (a.norm_squared() + c.norm_squared()).sqrt()).integral_pow(1.0, Some(&interior));

    let energy = u.energy(Some(&mask));
    let frame_energy = frame.energy();
    let mut frame_l21 = 0.0;
    for e in [&frame.e1, &frame.e2] {
        let (ex, ey) = crate::field::masked_gradient(e, &mask);
        let d = ex.zip_map(&ey, |a, c| (a.norm_squared() + c.norm_squared()).sqrt());
        frame_l21 += crate::norms::lorentz21(&d, &region)?.value;
    }

    let diagnostics = GaugeDiagnostics {
        coulomb_residual: frame.coulomb_residual,
        coulomb_tolerance: frame.coulomb_tolerance,
        orthonormality_defect: frame.orthonormality_defect(&u),
        metric_residual: omega.metric_residual,
        antisymmetry_defect: omega.antisymmetry_defect,
        frame_energy_ratio: ratio(frame_energy, energy),
        frame_l21_ratio: ratio(frame_l21, energy),
        fixed_point: fp,
        holomorphy_residual,
        covariance_defect,
        riesz_constant,
        g1_weak_ratio: ratio(g1_weak, tau_l1),
        g1_gradient_ratio: ratio(g1_grad, tau_llogl),
    };
    Ok(GaugeData { spec, crop: [i0, j0], frame, omega, b, g, t_u, g1, g2, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::tension_field;

    /// Inverse stereographic projection of `z/s`: harmonic, degree one.
    fn bubble(n: usize, s: f64) -> ManifoldMap {
        let g = GridSpec::square([0.0, 0.0], 1.0, n).unwrap();
        ManifoldMap::from_fn(g, move |x, y| {
            let (a, b) = (x / s, y / s);
            let r2 = a * a + b * b;
            Vec3::new(2.0 * a, 2.0 * b, r2 - 1.0) / (r2 + 1.0)
        })
        .unwrap()
    }

    fn run(n: usize) -> GaugeData {
        let u = bubble(n, 2.0);
        let tau = tension_field(&u).tau;
        dbar_decompose(&u, &tau, &Region::disk([0.2, 0.1], 0.5), &GaugeOptions::default()).unwrap()
    }

    #[test]
    fn constant_map_decomposes_trivially() {
        let g = GridSpec::square([0.0, 0.0], 1.0, 32).unwrap();
        let u = ManifoldMap::constant(g, Vec3::new(0.0, 0.6, 0.8)).unwrap();
        let d = dbar_decompose(&u, &Field::zeros(g), &Region::disk([0.0, 0.0], 0.6), &GaugeOptions::default())
            .unwrap();
        for f in [&d.g, &d.g1, &d.g2] {
            assert!(f.max_norm() < 1e-12);
        }
    }

    #[test]
    fn harmonic_map_has_holomorphic_g2() {
        let (c, f) = (run(64), run(128));
        let d = &f.diagnostics;
        assert!(d.covariance_defect < 1e-12);
        assert!(d.coulomb_residual <= d.coulomb_tolerance);
        assert!(d.fixed_point.b_minus_identity <= 0.5);
        assert!(f.g1.max_norm() < 0.05 * f.g.max_norm(), "{}", f.g1.max_norm());
        let order = (c.diagnostics.holomorphy_residual / d.holomorphy_residual).log2();
        assert!(order >= 0.8, "order {order}: {} {}", c.diagnostics.holomorphy_residual, d.holomorphy_residual);
        // BᵀG = G₁ + G₂ exactly.
        let mut m: f64 = 0.0;
        for k in 0..f.g.values.len() {
            let lhs = f.b.values[k].transpose() * f.g.values[k];
            m = m.max((lhs - f.g1.values[k] - f.g2.values[k]).norm());
        }
        assert!(m < 1e-12);
        assert!(d.fixed_point.unitary_drift <= 2.0 * d.fixed_point.kappa);
    }
}
