//! Neck ledger: measured norms of `u_n` on shrunken neck annuli
//! `B_{ρ_out/λ} \ B_{λρ_in}` for every bubble and `λ`, log-log fits, the
//! body/bubble/neck energy partition and the gauge/Hopf bound diagnostics.

use serde::Serialize;

use crate::config::AnalysisConfig;
use crate::field::{Field, ManifoldMap};
use crate::gauge::{dbar_decompose, GaugeOptions};
use crate::hopf::{c_lambda, neck_bounds, neck_norms, shrunken, AnnulusSpec, NeckParams, NeckReport};
use crate::norms::Region;
use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NeckKind {
    /// Between the body (scale `η`) and a bubble.
    BodyBubble,
    /// Between two bubbles concentrating at the same point.
    BubbleBubble,
}

#[derive(Debug, Clone, Serialize)]
pub struct NeckAnnulus {
    pub bubble: usize,
    pub kind: NeckKind,
    /// Outer bubble of a bubble–bubble neck.
    pub partner: Option<usize>,
    pub center: [f64; 2],
    pub r_inner: f64,
    pub r_outer: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NeckStatus {
    Ok,
    /// `λ²ρ_in ≥ ρ_out`: nothing left after shrinking.
    Empty,
    /// `λρ_in < 4h`: the inner circle is not resolved.
    Unresolved,
}

#[derive(Debug, Clone, Serialize)]
pub struct NeckRow {
    pub n: u32,
    pub bubble: usize,
    pub kind: NeckKind,
    pub partner: Option<usize>,
    pub lambda: f64,
    pub r_inner: f64,
    pub r_outer: f64,
    pub status: NeckStatus,
    pub l2_energy: Option<f64>,
    pub l21: Option<f64>,
    pub hessian_l1: Option<f64>,
    pub c_lambda: f64,
}

pub fn neck_rows(u: &ManifoldMap, n: u32, annuli: &[NeckAnnulus], lambdas: &[f64]) -> Result<Vec<NeckRow>> {
    let h = u.spec().h();
    let mut out = Vec::new();
    for a in annuli {
        for &lambda in lambdas {
            let mut row = NeckRow {
                n,
                bubble: a.bubble,
                kind: a.kind,
                partner: a.partner,
                lambda,
                r_inner: a.r_inner,
                r_outer: a.r_outer,
                status: NeckStatus::Ok,
                l2_energy: None,
                l21: None,
                hessian_l1: None,
                c_lambda: c_lambda(lambda)?,
            };
            match shrunken(a.center, a.r_inner, a.r_outer, lambda) {
                _ if lambda * a.r_inner < 4.0 * h => row.status = NeckStatus::Unresolved,
                None => row.status = NeckStatus::Empty,
                Some(region) => match neck_norms(u, &region) {
                    Ok((e, l, hs)) => {
                        row.l2_energy = Some(e);
                        row.l21 = Some(l);
                        row.hessian_l1 = Some(hs);
                    }
                    Err(Error::EmptyRegion) => row.status = NeckStatus::Empty,
                    Err(e) => return Err(e),
                },
            }
            out.push(row);
        }
    }
    Ok(out)
}

/// Least-squares slope of `ln y` against `ln x` over the positive pairs.
pub fn loglog_slope(pts: &[(f64, f64)]) -> Option<f64> {
    let p: Vec<(f64, f64)> = pts.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if p.len() < 2 {
        return None;
    }
    let m = p.len() as f64;
    let (mx, my) = (p.iter().map(|v| v.0).sum::<f64>() / m, p.iter().map(|v| v.1).sum::<f64>() / m);
    let sxx: f64 = p.iter().map(|v| (v.0 - mx).powi(2)).sum();
    let sxy: f64 = p.iter().map(|v| (v.0 - mx) * (v.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Decay exponents in `λ` at fixed `n`.
#[derive(Debug, Clone, Serialize)]
pub struct NeckFit {
    pub n: u32,
    pub bubble: usize,
    pub kind: NeckKind,
    pub slope_l2: Option<f64>,
    pub slope_l21: Option<f64>,
    pub slope_hessian: Option<f64>,
}

pub fn fit_lambda(rows: &[NeckRow]) -> Vec<NeckFit> {
    let mut keys: Vec<(u32, usize, NeckKind)> = rows.iter().map(|r| (r.n, r.bubble, r.kind)).collect();
    keys.dedup();
    keys.into_iter()
        .map(|(n, bubble, kind)| {
            let sel: Vec<&NeckRow> = rows.iter().filter(|r| r.n == n && r.bubble == bubble && r.kind == kind).collect();
            let fit = |f: fn(&NeckRow) -> Option<f64>| {
                loglog_slope(&sel.iter().filter_map(|r| f(r).map(|v| (r.lambda, v))).collect::<Vec<_>>())
            };
            NeckFit {
                n,
                bubble,
                kind,
                slope_l2: fit(|r| r.l2_energy),
                slope_l21: fit(|r| r.l21),
                slope_hessian: fit(|r| r.hessian_l1),
            }
        })
        .collect()
}

/// `value(n_last, λ_max) / value(n_first, λ_min)` over the `ok` rows of one neck.
pub fn corner_ratio(rows: &[NeckRow], bubble: usize, kind: NeckKind, value: fn(&NeckRow) -> Option<f64>) -> Option<f64> {
    let ok: Vec<&NeckRow> = rows.iter().filter(|r| r.bubble == bubble && r.kind == kind && value(r).is_some()).collect();
    let first = ok.iter().min_by(|a, b| a.n.cmp(&b.n).then(a.lambda.total_cmp(&b.lambda)))?;
    let last = ok.iter().max_by(|a, b| a.n.cmp(&b.n).then(a.lambda.total_cmp(&b.lambda)))?;
    Some(value(last)? / value(first)?)
}

/// Partition of `∫|∇u_n|²` into bubble discs `B_{ρ_in}(x_i)`, neck annuli
/// `B_{ρ_out}(x_i) \ B_{ρ_in}(x_i)` and the body (everything else).
#[derive(Debug, Clone, Serialize)]
pub struct EnergyLedger {
    pub n: u32,
    pub total: f64,
    pub body: f64,
    pub bubble: f64,
    pub neck: f64,
    /// `|body + bubble + neck − total| / total`.
    pub closure: f64,
}

pub fn energy_ledger(u: &ManifoldMap, n: u32, annuli: &[NeckAnnulus]) -> EnergyLedger {
    let spec = *u.spec();
    let w = u.energy_density();
    let body_necks: Vec<&NeckAnnulus> = annuli.iter().filter(|a| a.kind == NeckKind::BodyBubble).collect();
    let (mut body, mut bubble, mut neck) = (0.0, 0.0, 0.0);
    for (k, d) in w.values.iter().enumerate() {
        let p = spec.point(k % spec.nx, k / spec.nx);
        let dist = |a: &NeckAnnulus| ((p[0] - a.center[0]).powi(2) + (p[1] - a.center[1]).powi(2)).sqrt();
        let e = d * spec.cell_area();
        if body_necks.iter().any(|a| dist(a) < a.r_inner) {
            bubble += e;
        } else if body_necks.iter().any(|a| dist(a) < a.r_outer) {
            neck += e;
        } else {
            body += e;
        }
    }
    let total = w.integral_pow(1.0, None);
    let closure = if total > 0.0 { (body + bubble + neck - total).abs() / total } else { 0.0 };
    EnergyLedger { n, total, body, bubble, neck, closure }
}

/// Gauge/Hopf bound diagnostics on `B_η(x) \ B_ρ(x)` with `η = gauge_eta` and
/// `ρ ≥ ρ_floor` the smallest radius leaving at most `ε₀²/2` of energy.
#[derive(Debug, Clone, Serialize)]
pub struct BoundDiagnostic {
    pub n: u32,
    pub bubble: usize,
    pub lambda: f64,
    pub r_inner: f64,
    pub r_outer: f64,
    pub skipped: Option<String>,
    pub report: Option<NeckReport>,
}

/// Smallest `ρ ≥ floor` with `∫_{B_η \ B_ρ}|∇u|² ≤ budget`.
fn small_energy_radius(u: &ManifoldMap, c: [f64; 2], eta: f64, floor: f64, budget: f64) -> f64 {
    let spec = u.spec();
    let w = u.energy_density();
    let mut cells: Vec<(f64, f64)> = (0..spec.len())
        .filter_map(|k| {
            let p = spec.point(k % spec.nx, k / spec.nx);
            let d = ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt();
            (d < eta).then(|| (d, w.values[k] * spec.cell_area()))
        })
        .collect();
    cells.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut acc = 0.0;
    for (d, e) in cells {
        if acc + e > budget {
            return d.max(floor);
        }
        acc += e;
    }
    floor
}

pub fn bound_diagnostics(
    u: &ManifoldMap,
    tau: &Field<Vec3>,
    n: u32,
    bubble: usize,
    center: [f64; 2],
    floor: f64,
    cfg: &AnalysisConfig,
) -> Result<Vec<BoundDiagnostic>> {
    let eta = cfg.gauge_eta;
    let eps2 = cfg.epsilon0 * cfg.epsilon0;
    let rho = small_energy_radius(u, center, eta, floor, 0.5 * eps2);
    let h = u.spec().h();
    let skip = |lambda: f64, why: String| BoundDiagnostic {
        n,
        bubble,
        lambda,
        r_inner: rho,
        r_outer: eta,
        skipped: Some(why),
        report: None,
    };
    let feasible: Vec<f64> = cfg.lambda_ladder.iter().cloned().filter(|&l| l * l * rho < eta && l * rho >= 4.0 * h).collect();
    if feasible.is_empty() {
        return Ok(cfg
            .lambda_ladder
            .iter()
            .map(|&l| skip(l, format!("small-energy annulus {rho:.3e} < |x - x_i| < {eta} too thin or unresolved")))
            .collect());
    }
    let region = Region::annulus(center, rho, eta);
    let gauge = dbar_decompose(u, tau, &region, &GaugeOptions::default())?;
    let annulus = AnnulusSpec { center, r_inner: rho, r_outer: eta };
    let mut out = Vec::new();
    for &lambda in &cfg.lambda_ladder {
        if !feasible.contains(&lambda) {
            out.push(skip(lambda, "shrunken annulus empty or unresolved".into()));
            continue;
        }
        let params = NeckParams {
            lambda,
            delta: cfg.delta,
            eps0: cfg.epsilon0,
            max_degree: cfg.max_degree,
            laurent_modes: cfg.laurent_modes,
        };
        let report = neck_bounds(u, tau, &gauge, &annulus, &params)?;
        out.push(BoundDiagnostic { n, bubble, lambda, r_inner: rho, r_outer: eta, skipped: None, report: Some(report) });
    }
    Ok(out)
}
