//! Empirical small-energy threshold: run the gauge fixed point on a corpus of
//! annular restrictions of rational bubbles and take half of the largest
//! `‖∇u‖_{L²}` below which the contraction factor always stayed under ½.

use serde::Serialize;

use crate::field::{GridSpec, ManifoldMap};
use crate::flow::{rational_bubble, BubbleSpec, Poly, RationalMap};
use crate::gauge::{connection_form, coulomb_frame, decompose::bounding_window, solve_b, FixedPointOptions, FixedPointReport, FrameOptions};
use crate::norms::Region;
use crate::{Complex64, Result};

/// Contraction factor below which a sample counts as safely small.
pub const KAPPA_SAFE: f64 = 0.5;

pub struct CorpusMember {
    pub label: String,
    pub u: ManifoldMap,
    pub region: Region,
}

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationSample {
    pub label: String,
    pub grad_l2: f64,
    /// `None` when no frame could be built (pole too close).
    pub kappa: Option<f64>,
    pub fixed_point: Option<FixedPointReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Calibration {
    pub epsilon0: f64,
    pub threshold: f64,
    pub samples: Vec<CalibrationSample>,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Annuli `B_η(x) \ B_ρ(x)` around four rational bubbles on a 128² grid.
pub fn default_corpus() -> Result<Vec<CorpusMember>> {
    let g = GridSpec::square([0.0, 0.0], 1.0, 128)?;
    let maps = [
        ("z", RationalMap::identity(), [0.0, 0.0], 0.1),
        ("z", RationalMap::identity(), [0.05, -0.03], 0.15),
        ("z^2", RationalMap::monomial(2), [0.0, 0.0], 0.2),
        (
            "conj(z+1/2)/(z-1/2)",
            RationalMap {
                numerator: Poly(vec![c(0.5, 0.0), c(1.0, 0.0)]),
                denominator: Poly(vec![c(-0.5, 0.0), c(1.0, 0.0)]),
                antiholomorphic: true,
            },
            [0.0, 0.0],
            0.1,
        ),
    ];
    let mut out = Vec::new();
    for (name, map, center, scale) in maps {
        let u = rational_bubble(&BubbleSpec { map, center, scale }, g)?;
        for eta in [0.6, 0.85] {
            for rho in [0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45] {
                if rho < 0.7 * eta {
                    out.push(CorpusMember {
                        label: format!("{name} s={scale} at ({}, {}): {rho} < |x| < {eta}", center[0], center[1]),
                        u: u.clone(),
                        region: Region::annulus(center, rho, eta),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// `‖∇u‖_{L²}`, `κ` and, when `κ < 0.9`, the Neumann iteration for `B`.
pub fn measure(member: &CorpusMember) -> Result<CalibrationSample> {
    let mask = member.region.mask(member.u.spec());
    let grad_l2 = member.u.energy(Some(&mask)).sqrt();
    let (i0, j0, wx, wy) = bounding_window(member.u.spec(), &mask, 3).ok_or(crate::Error::EmptyRegion)?;
    let u = member.u.crop(i0, j0, wx, wy)?;
    let nx0 = member.u.spec().nx;
    let sub: Vec<bool> = (0..wy).flat_map(|j| (0..wx).map(move |i| (j + j0) * nx0 + i + i0)).map(|k| mask[k]).collect();
    let (kappa, fixed_point) = match coulomb_frame(&u, &Region::Mask(sub), &FrameOptions::default()) {
        Ok(frame) => {
            let omega = connection_form(&frame);
            let kappa = crate::gauge::contraction_factor(&omega)?;
            let fp = solve_b(&omega, &FixedPointOptions::default()).ok().map(|(_, r)| r);
            (Some(kappa), fp)
        }
        Err(crate::Error::PoleProximity { .. }) => (None, None),
        Err(e) => return Err(e),
    };
    Ok(CalibrationSample { label: member.label.clone(), grad_l2, kappa, fixed_point })
}

/// `ε₀ = ½ · max{e : κ < KAPPA_SAFE for every sample with ‖∇u‖_{L²} ≤ e}`.
pub fn calibrate_epsilon0(samples: Vec<CalibrationSample>) -> Calibration {
    let mut sorted = samples;
    sorted.sort_by(|a, b| a.grad_l2.total_cmp(&b.grad_l2));
    let mut threshold = 0.0;
    for s in &sorted {
        match s.kappa {
            Some(k) if k < KAPPA_SAFE => threshold = s.grad_l2,
            _ => break,
        }
    }
    Calibration { epsilon0: 0.5 * threshold, threshold, samples: sorted }
}

pub fn run_default_calibration() -> Result<Calibration> {
    let samples = crate::par::map_slice(&default_corpus()?, measure).into_iter().collect::<Result<Vec<_>>>()?;
    Ok(calibrate_epsilon0(samples))
}
