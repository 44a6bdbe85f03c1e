//! Neck-region bounds for `G₂`, `∇u` and `∇²u` on an annulus `B_η \ B_{r_in}`.
//!
//! In coordinates scaled by `η` the annulus is `B₁ \ B_r` with `r = r_in/η`,
//! and the shrunken neck is `B_{1/λ} \ B_{λr}`. The measured norms are scale
//! invariant; τ-norms are converted to the unit-disk normalisation.

use serde::Serialize;

use super::approx::{a0_functional, A0Report};
use super::differential::hopf_differential;
use super::laurent::{laurent_with, AnnulusSpec, LaurentSeries};
use crate::field::{gradient, hessian_norm, masked_gradient, Field, ManifoldMap};
use crate::gauge::GaugeData;
use crate::norms::{llogl, lorentz21, morrey, Region};
use crate::{CVec2, Complex64, Error, Result, Vec3};

/// `C(λ)² = Σ_{n≤−2}|n+1|λ^{2(n+1)} + Σ_{n≥0}(n+1)λ^{−2(n+1)}`, summed until
/// the next term is below `1e−10` of the partial sum.
pub fn c_lambda(lambda: f64) -> Result<f64> {
    if !(lambda > 1.0) {
        return Err(Error::InvalidParameter(format!("C(λ) needs λ > 1, got {lambda}")));
    }
    let x = lambda.powi(-2);
    let (mut neg, mut pos) = (0.0, 0.0);
    for k in 1.. {
        // n = −1−k and n = k−1 contribute k·x^k each.
        let t = k as f64 * x.powi(k);
        neg += t;
        pos += t;
        if t <= 1e-10 * (neg + pos) || k > 100_000 {
            break;
        }
    }
    Ok((neg + pos).sqrt())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NeckParams {
    pub lambda: f64,
    pub delta: f64,
    pub eps0: f64,
    pub max_degree: usize,
    pub laurent_modes: i32,
}

impl Default for NeckParams {
    fn default() -> Self {
        Self { lambda: 2.0, delta: 1.5, eps0: 0.5, max_degree: super::approx::DEFAULT_MAX_DEGREE, laurent_modes: 16 }
    }
}

/// Right-hand-side constituents, in unit-disk normalisation.
#[derive(Debug, Clone, Serialize)]
pub struct BoundTerms {
    /// `|ln r|`.
    pub log_r: f64,
    pub a_minus_one: f64,
    /// `|a₋₁|·|ln r|` and `|a₋₁|²·|ln r|`.
    pub a_log: f64,
    pub a2_log: f64,
    /// `A₀^{1/2} + r^{1/2}`.
    pub a_bound: f64,
    /// `(A₀ + r)|ln r|`.
    pub a0_log: f64,
    /// `C(λ)‖∇u‖_{L²(B₁\B_r)}`.
    pub c_lambda_term: f64,
    /// `λ⁻²‖∇u‖²_{L²(B₁\B_r)}`.
    pub lambda2_term: f64,
    /// `λ⁻¹‖∇u‖_{L²(B₁\B_r)}`.
    pub lambda1_term: f64,
    pub tau_morrey: f64,
    pub tau_llogl: f64,
    /// `‖G₂‖_{L²(B₁\B_r)}`.
    pub g2_l2_base: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NeckRatios {
    /// `|a₋₁| / (A₀^{1/2} + r^{1/2})`.
    pub a_minus_one: f64,
    /// Lemma bounds for `G₂`: L^{2,1}, `∇G₂` in L¹, L².
    pub g2_l21: Option<f64>,
    pub g2_grad_l1: Option<f64>,
    pub g2_l2: Option<f64>,
    /// Bounds for `∇u` in L² (squared), L^{2,1}, and `∇²u` in L¹.
    pub energy: Option<f64>,
    pub l21: Option<f64>,
    pub hessian: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NeckReport {
    pub center: [f64; 2],
    pub r_inner: f64,
    pub r_outer: f64,
    pub lambda: f64,
    /// `r_in / η`.
    pub r: f64,
    /// Base-annulus energy `∫_{B_η\B_{r_in}} |∇u|²`.
    pub base_energy: f64,
    /// Measured on the shrunken annulus; `None` when it is empty (`λ²r ≥ 1`).
    pub l2_energy: Option<f64>,
    pub l21_norm: Option<f64>,
    pub hessian_l1: Option<f64>,
    pub g2_l21: Option<f64>,
    pub g2_grad_l1: Option<f64>,
    pub g2_l2_sq: Option<f64>,
    pub a_minus_one: [f64; 4],
    /// `a₋₁` from the band integral `∫_{B_{2ρ}\B_ρ} G₂/z̄ = 2π ln2 · a₋₁`, `ρ = η√(r/2)`.
    pub a_minus_one_band: Option<[f64; 4]>,
    /// `|b₋₁|`, `|b₋₂|`: median over the radii `(5/4, 3/2, 7/4)·r_in`.
    pub b_minus_one: Option<f64>,
    pub b_minus_two: Option<f64>,
    pub laurent_tail: f64,
    pub c_lambda: f64,
    pub a0: A0Report,
    pub bound_terms: BoundTerms,
    pub ratios: NeckRatios,
}

fn cvec(v: &CVec2) -> [f64; 4] {
    [v[0].re, v[0].im, v[1].re, v[1].im]
}

fn ratio(a: Option<f64>, b: f64) -> Option<f64> {
    a.filter(|_| b > 1e-300).map(|a| a / b)
}

fn median3(mut v: Vec<f64>) -> Option<f64> {
    if v.len() != 3 {
        return None;
    }
    v.sort_by(f64::total_cmp);
    Some(v[1])
}

/// Shrunken annulus `B_{η/λ} \ B_{λ r_in}`, `None` if empty.
pub fn shrunken(center: [f64; 2], r_in: f64, eta: f64, lambda: f64) -> Option<Region> {
    (lambda * r_in < eta / lambda).then(|| Region::annulus(center, lambda * r_in, eta / lambda))
}

/// Measured neck norms of `u` on `region`: `(∫|∇u|², ‖∇u‖_{L^{2,1}}, ‖∇²u‖_{L¹})`.
pub fn neck_norms(u: &ManifoldMap, region: &Region) -> Result<(f64, f64, f64)> {
    let mask = region.mask(u.spec());
    if !mask.iter().any(|&m| m) {
        return Err(Error::EmptyRegion);
    }
    let (ux, uy) = gradient(u.field());
    let grad = ux.zip_map(&uy, |a, b| (a.norm_squared() + b.norm_squared()).sqrt());
    let energy = grad.integral_pow(2.0, Some(&mask));
    let l21 = lorentz21(&grad, region)?.value;
    let hess = hessian_norm(u.field()).integral_pow(1.0, Some(&mask));
    Ok((energy, l21, hess))
}

/// Laurent series of `G₂` on the circle of radius `rho` around `center`.
fn g2_series(gauge: &GaugeData, center: [f64; 2], rho: f64, modes: i32) -> Result<LaurentSeries<CVec2>> {
    laurent_with(|p| sample_masked(&gauge.g2, &gauge.frame.mask, p), center, rho, -modes, modes)
}

/// Bilinear sample using only in-mask corners.
fn sample_masked(f: &Field<CVec2>, mask: &[bool], p: [f64; 2]) -> Option<CVec2> {
    let s = &f.spec;
    if !s.in_sample_hull(p) {
        return None;
    }
    let fx = (p[0] - s.origin[0]) / s.h() - 0.5;
    let fy = (p[1] - s.origin[1]) / s.h() - 0.5;
    let (i0, j0) = ((fx.floor() as usize).min(s.nx - 2), (fy.floor() as usize).min(s.ny - 2));
    for (i, j) in [(i0, j0), (i0 + 1, j0), (i0, j0 + 1), (i0 + 1, j0 + 1)] {
        if !mask[j * s.nx + i] {
            return None;
        }
    }
    f.bilinear(p)
}

/// Neck analysis on `B_η(c) \ B_{r_in}(c)`. `gauge` must be the decomposition
/// of `u` on this annulus; `tau` the tension of `u` on `u`'s grid.
pub fn neck_bounds(
    u: &ManifoldMap,
    tau: &Field<Vec3>,
    gauge: &GaugeData,
    annulus: &AnnulusSpec,
    params: &NeckParams,
) -> Result<NeckReport> {
    let (c, r_in, eta) = (annulus.center, annulus.r_inner, annulus.r_outer);
    if !(0.0 < r_in && r_in < eta) {
        return Err(Error::InvalidParameter("neck annulus radii".into()));
    }
    let lambda = params.lambda;
    let r = r_in / eta;
    let base = Region::annulus(c, r_in, eta);
    let base_energy = u.energy(Some(&base.mask(u.spec())));
    if base_energy.sqrt() > params.eps0 {
        return Err(Error::SmallEnergy { norm: base_energy.sqrt(), eps0: params.eps0 });
    }
    let c_lam = c_lambda(lambda)?;
    let log_r = r.ln().abs();

    // Measured norms on the shrunken annulus.
    let shrunk = shrunken(c, r_in, eta, lambda);
    let measured = match &shrunk {
        Some(reg) => match neck_norms(u, reg) {
            Ok(v) => Some(v),
            Err(Error::EmptyRegion) => None,
            Err(e) => return Err(e),
        },
        None => None,
    };

    // G₂ norms (gauge grid).
    let gs = gauge.spec;
    let g2_base = gauge.g2.integral_pow(2.0, Some(&base.mask(&gs))).sqrt();
    let g2_norms = match &shrunk {
        Some(reg) if reg.mask(&gs).iter().any(|&m| m) => {
            let m = reg.mask(&gs);
            let l21 = lorentz21(&gauge.g2, reg)?.value;
            let (gx, gy) = masked_gradient(&gauge.g2, &gauge.frame.mask);
            let grad = gx.zip_map(&gy, |a, b| (a.norm_squared() + b.norm_squared()).sqrt());
            Some((l21, grad.integral_pow(1.0, Some(&m)), gauge.g2.integral_pow(2.0, Some(&m))))
        }
        _ => None,
    };

    // Laurent data.
    let series = g2_series(gauge, c, annulus.geometric_mid(), params.laurent_modes)?;
    let a_m1 = *series.get(-1).unwrap();
    let rho_b = eta * (r / 2.0).sqrt();
    let a_band = {
        let band = Region::annulus(c, rho_b, 2.0 * rho_b);
        let m = band.mask(&gs);
        let mut acc = CVec2::zeros();
        let mut any = false;
        for k in 0..m.len() {
            if m[k] && gauge.frame.mask[k] {
                let [x, y] = gs.point(k % gs.nx, k / gs.nx);
                let zbar = Complex64::new(x - c[0], -(y - c[1]));
                acc += gauge.g2.values[k] / zbar;
                any = true;
            }
        }
        any.then(|| cvec(&(acc * Complex64::new(gs.cell_area() / (2.0 * std::f64::consts::PI * 2f64.ln()), 0.0))))
    };
    let b_radii = [1.25 * r_in, 1.5 * r_in, 1.75 * r_in];
    let (mut b1, mut b2) = (Vec::new(), Vec::new());
    for rho in b_radii {
        if rho >= eta {
            continue;
        }
        if let Ok(s) = laurent_with(
            |p| sample_masked(&gauge.g2, &gauge.frame.mask, p).map(|v| v[0] * v[0] + v[1] * v[1]),
            c,
            rho,
            -2,
            -1,
        ) {
            b2.push(s.get(-2).unwrap().norm());
            b1.push(s.get(-1).unwrap().norm());
        }
    }

    // A₀ on the full-data disk B_{2r_in}, τ normalised to the unit disk.
    let h = hopf_differential(u);
    let outer = Region::disk(c, eta);
    let a0 = a0_functional(&h, tau, c, r_in, params.delta, &outer, params.max_degree)?;
    let tau_morrey = eta.powf(2.0 - params.delta) * morrey(tau, 1.0, params.delta, &outer)?.value;
    let scaled_tau = tau.map(|v| v * (eta * eta));
    let tau_llogl = llogl(&scaled_tau, &outer)?.value / (eta * eta);

    let a_abs = a_m1.norm();
    let grad_base = base_energy.sqrt();
    let a_bound = a0.value.sqrt() + r.sqrt();
    let terms = BoundTerms {
        log_r,
        a_minus_one: a_abs,
        a_log: a_abs * log_r,
        a2_log: a_abs * a_abs * log_r,
        a_bound,
        a0_log: (a0.value + r) * log_r,
        c_lambda_term: c_lam * grad_base,
        lambda2_term: base_energy / (lambda * lambda),
        lambda1_term: grad_base / lambda,
        tau_morrey,
        tau_llogl,
        g2_l2_base: g2_base,
    };
    let ratios = NeckRatios {
        a_minus_one: if a_bound > 0.0 { a_abs / a_bound } else { 0.0 },
        g2_l21: ratio(g2_norms.map(|v| v.0), terms.a_log + c_lam * g2_base),
        g2_grad_l1: ratio(g2_norms.map(|v| v.1), terms.a_log + c_lam * g2_base),
        g2_l2: ratio(g2_norms.map(|v| v.2), terms.a2_log + g2_base * g2_base / (lambda * lambda)),
        energy: ratio(measured.map(|v| v.0), terms.a0_log + terms.lambda2_term + tau_morrey * tau_morrey),
        l21: ratio(measured.map(|v| v.1), a_bound * log_r + terms.c_lambda_term + tau_llogl),
        hessian: ratio(
            measured.map(|v| v.2),
            a_bound * log_r + terms.c_lambda_term + terms.lambda1_term + tau_llogl,
        ),
    };
    Ok(NeckReport {
        center: c,
        r_inner: r_in,
        r_outer: eta,
        lambda,
        r,
        base_energy,
        l2_energy: measured.map(|v| v.0),
        l21_norm: measured.map(|v| v.1),
        hessian_l1: measured.map(|v| v.2),
        g2_l21: g2_norms.map(|v| v.0),
        g2_grad_l1: g2_norms.map(|v| v.1),
        g2_l2_sq: g2_norms.map(|v| v.2),
        a_minus_one: cvec(&a_m1),
        a_minus_one_band: a_band,
        b_minus_one: median3(b1),
        b_minus_two: median3(b2),
        laurent_tail: series.tail_bound,
        c_lambda: c_lam,
        a0,
        bound_terms: terms,
        ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{tension_field, GridSpec};
    use crate::gauge::{dbar_decompose, GaugeOptions};

    #[test]
    fn c_lambda_matches_geometric_series() {
        // Σ_{k≥1} k x^k = x/(1−x)², twice, at x = λ⁻².
        for lam in [2.0f64, 4.0, 8.0, 16.0] {
            let x = lam.powi(-2);
            let exact = (2.0 * x / (1.0 - x).powi(2)).sqrt();
            assert!((c_lambda(lam).unwrap() - exact).abs() < 1e-9 * exact);
        }
        assert!((c_lambda(2.0).unwrap() - (8.0f64 / 9.0).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn c_lambda_decreases_like_inverse_lambda() {
        let v: Vec<f64> = [2.0, 4.0, 8.0, 16.0].iter().map(|&l| c_lambda(l).unwrap()).collect();
        assert!(v.windows(2).all(|w| w[1] < w[0]));
        let c: Vec<f64> = v.iter().zip([2.0, 4.0, 8.0, 16.0]).map(|(c, l)| c * l).collect();
        let (lo, hi) = c.iter().fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        assert!(hi / lo < 1.5, "{c:?}");
        assert!(c_lambda(1.0).is_err());
    }

    #[test]
    fn one_over_z_neck_norm_matches_closed_form() {
        // ‖1/|z|‖_{L^{2,1}(B_a \ B_b)} = √π·ln((1 + √(1 − ρ²))/ρ), ρ = b/a.
        let g = GridSpec::square([0.0, 0.0], 1.0, 512).unwrap();
        let f = Field::from_fn(g, |x, y| Complex64::new(x, y).inv());
        for (lam, r) in [(2.0, 0.01), (2.0, 0.02), (4.0, 0.002)] {
            let rho: f64 = lam * lam * r;
            let reg = shrunken([0.0, 0.0], r, 1.0, lam).unwrap();
            let v = lorentz21(&f, &reg).unwrap().value;
            let exact = std::f64::consts::PI.sqrt() * ((1.0 + (1.0 - rho * rho).sqrt()) / rho).ln();
            assert!((v / exact - 1.0).abs() < 0.1, "λ={lam} r={r}: {v} vs {exact}");
        }
    }

    #[test]
    fn harmonic_bubble_neck_is_bounded() {
        let g = GridSpec::square([0.0, 0.0], 1.0, 256).unwrap();
        let s = 0.02;
        let u = ManifoldMap::from_fn(g, |x, y| {
            let (a, b) = (x / s, y / s);
            let r2 = a * a + b * b;
            Vec3::new(2.0 * a, 2.0 * b, r2 - 1.0) / (r2 + 1.0)
        })
        .unwrap();
        let tau = tension_field(&u).tau;
        let ann = AnnulusSpec { center: [0.0, 0.0], r_inner: 0.2, r_outer: 0.9 };
        let gauge =
            dbar_decompose(&u, &tau, &Region::annulus(ann.center, ann.r_inner, ann.r_outer), &GaugeOptions::default())
                .unwrap();
        let rep = neck_bounds(&u, &tau, &gauge, &ann, &NeckParams::default()).unwrap();
        assert!(rep.base_energy < 0.25);
        assert!(rep.ratios.a_minus_one.is_finite() && rep.ratios.a_minus_one < 10.0);
        assert!(rep.ratios.energy.unwrap() < 10.0);
        assert!(rep.l2_energy.unwrap() <= rep.base_energy);
        assert!(rep.b_minus_one.is_some() && rep.b_minus_two.is_some());
    }

    #[test]
    fn large_energy_annulus_is_rejected() {
        let g = GridSpec::square([0.0, 0.0], 1.0, 64).unwrap();
        let u = ManifoldMap::from_fn(g, |x, y| {
            let r2 = (x * x + y * y) / 0.04;
            Vec3::new(2.0 * x / 0.2, 2.0 * y / 0.2, r2 - 1.0) / (r2 + 1.0)
        })
        .unwrap();
        let tau = tension_field(&u).tau;
        let ann = AnnulusSpec { center: [0.0, 0.0], r_inner: 0.1, r_outer: 0.9 };
        let gauge = dbar_decompose(&u, &tau, &Region::annulus([0.0, 0.0], 0.1, 0.9), &GaugeOptions::default());
        if let Ok(gauge) = gauge {
            let r = neck_bounds(&u, &tau, &gauge, &ann, &NeckParams::default());
            assert!(matches!(r, Err(Error::SmallEnergy { .. })));
        }
    }
}
