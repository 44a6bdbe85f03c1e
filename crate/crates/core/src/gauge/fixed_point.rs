//! The operator `𝒯A = C(ωA χ_U)/2` and the gauge matrix `B = I + 𝒯B`.
//!
//! With `∂z̄ = ∂x + i∂y`, `B` solves `∂z̄B = ωB`; the Cauchy kernel `1/(πz)`
//! inverts `∂z̄/2`, hence the factor ½. The same duality that bounds
//! `‖𝒯A‖_∞ ≤ κ‖A‖_∞` with `κ = ‖ω‖_{L^{2,1}}/√π` makes the Neumann series
//! converge when `κ < 1`.

use serde::Serialize;

use super::cauchy::{convolve, ConvPlan, Kernel};
use super::connection::ConnectionForm;
use crate::field::Field;
use crate::norms::{lorentz21, Region};
use crate::{CMat2, Error, Result};

#[derive(Debug, Clone)]
pub struct FixedPointOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Largest contraction factor accepted.
    pub kappa_max: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 200, kappa_max: 0.9 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPointReport {
    pub kappa: f64,
    /// `‖B_{k+1} − B_k‖_∞` per iteration.
    pub trace: Vec<f64>,
    pub iterations: usize,
    /// `max_{k≥2} trace[k]/trace[k−1]`, if at least three steps were taken.
    pub max_ratio: Option<f64>,
    pub b_minus_identity: f64,
    /// `‖BᵀB − I‖_∞`.
    pub unitary_drift: f64,
}

/// `κ = ‖|ω|‖_{L^{2,1}} / √π`.
pub fn contraction_factor(omega: &ConnectionForm) -> Result<f64> {
    let r = lorentz21(&omega.omega, &Region::Mask(omega.mask.clone()))?;
    Ok(r.value / std::f64::consts::PI.sqrt())
}

/// `𝒯A` with a prepared Cauchy plan for `omega`'s grid.
pub fn t_operator_with(plan: &ConvPlan, omega: &ConnectionForm, a: &Field<CMat2>) -> Field<CMat2> {
    let prod = omega.omega.zip_map(a, |w, m| w * m);
    convolve(plan, &prod, Some(&omega.mask)).map(|m| m.scale(0.5))
}

pub fn t_operator(omega: &ConnectionForm, a: &Field<CMat2>) -> Result<Field<CMat2>> {
    let plan = ConvPlan::new(omega.omega.spec, Kernel::Cauchy)?;
    Ok(t_operator_with(&plan, omega, a))
}

fn sup_diff(a: &Field<CMat2>, b: &Field<CMat2>) -> f64 {
    a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Neumann iteration `B_{k+1} = I + 𝒯B_k` from `B₀ = I`.
pub fn solve_b(omega: &ConnectionForm, opts: &FixedPointOptions) -> Result<(Field<CMat2>, FixedPointReport)> {
    let kappa = contraction_factor(omega)?;
    if kappa >= opts.kappa_max {
        return Err(Error::NoContraction { kappa });
    }
    let spec = omega.omega.spec;
    let plan = ConvPlan::new(spec, Kernel::Cauchy)?;
    let id = Field::constant(spec, CMat2::identity());
    let mut b = id.clone();
    let mut trace = Vec::new();
    loop {
        let t = t_operator_with(&plan, omega, &b);
        let next = t.map(|m| m + CMat2::identity());
        let d = sup_diff(&next, &b);
        b = next;
        trace.push(d);
        if d <= opts.tol {
            break;
        }
        if trace.len() >= opts.max_iter {
            return Err(Error::FixedPointNonConvergence { iterations: trace.len(), last: d, trace });
        }
    }
    let max_ratio = (trace.len() >= 3)
        .then(|| trace.windows(2).skip(1).map(|w| w[1] / w[0]).fold(0.0, f64::max));
    let b_minus_identity = sup_diff(&b, &id);
    let unitary_drift =
        b.values.iter().map(|m| (m.transpose() * m - CMat2::identity()).norm()).fold(0.0, f64::max);
    let report =
        FixedPointReport { kappa, iterations: trace.len(), trace, max_ratio, b_minus_identity, unitary_drift };
    Ok((b, report))
}
