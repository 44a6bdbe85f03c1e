//! Single-map Hopf report: `ℋ(u)`, its holomorphic approximation on nested
//! disks, `A₀`, and (given a neck analysis) the `a₋₁` bound.

use serde::Serialize;

use super::approx::{a0_functional, holomorphic_approx, A0Report, HoloApprox};
use super::differential::{dbar_residual, hopf_differential};
use super::neck::NeckReport;
use crate::field::{Field, ManifoldMap};
use crate::gauge::decompose::erode;
use crate::norms::Region;
use crate::{Complex64, Result, Vec3};

#[derive(Debug, Clone, Serialize)]
pub struct DiskResidual {
    pub radius: f64,
    pub residual: f64,
    pub degree: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct HopfReport {
    #[serde(skip)]
    pub h: Field<Complex64>,
    pub center: [f64; 2],
    pub r: f64,
    /// Approximation on `B_{2r}`.
    pub h_approx: HoloApprox,
    pub a0: A0Report,
    /// `‖ℋ − h‖_{L¹}` on `B_{r/4}, B_{r/2}, B_r, B_{2r}`.
    pub residuals: Vec<DiskResidual>,
    /// `‖∂z̄ℋ‖_{L¹}` on `B_{2r}` eroded by two cells.
    pub dbar_residual: f64,
    pub a_minus_one: Option<f64>,
    /// `A₀^{1/2} + r^{1/2}` from the neck analysis.
    pub a_minus_one_bound: Option<f64>,
}

pub fn hopf_report(
    u: &ManifoldMap,
    tau: &Field<Vec3>,
    center: [f64; 2],
    r: f64,
    delta: f64,
    outer: &Region,
    max_degree: usize,
    neck: Option<&NeckReport>,
) -> Result<HopfReport> {
    let h = hopf_differential(u);
    let a0 = a0_functional(&h, tau, center, r, delta, outer, max_degree)?;
    let mut residuals = Vec::new();
    for f in [0.25, 0.5, 1.0, 2.0] {
        let a = holomorphic_approx(&h, center, f * r, max_degree)?;
        residuals.push(DiskResidual { radius: f * r, residual: a.residual, degree: a.degree });
    }
    let spec = h.spec;
    let disk = erode(&spec, &Region::disk(center, 2.0 * r).mask(&spec), 2);
    let dbar = dbar_residual(&h, &disk)?;
    Ok(HopfReport {
        center,
        r,
        h_approx: a0.approx.clone(),
        a0,
        residuals,
        dbar_residual: dbar,
        a_minus_one: neck.map(|n| n.bound_terms.a_minus_one),
        a_minus_one_bound: neck.map(|n| n.bound_terms.a_bound),
        h,
    })
}
