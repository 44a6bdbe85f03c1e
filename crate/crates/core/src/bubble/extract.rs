//! Blow-up extraction: the smallest radius `r` at which the ball energy of
//! `u_n` reaches `ε₀²/C₀`, and the rescaled map `v(x) = u_n(x_n + r x)`.
//!
//! The blow-up radius of a resolved bubble is a fraction of a grid cell, so
//! ball energies are integrals of `|∇(ũ/|ũ|)|²` for the bilinear interpolant
//! `ũ`, evaluated by polar quadrature. Quadrature node counts and candidate
//! offsets depend only on `ρ/h`, which makes the extraction exactly
//! equivariant under rescaling of the domain.

use serde::Serialize;

use crate::config::AnalysisConfig;
use crate::field::{GridSpec, ManifoldMap};
use crate::norms::Region;
use crate::{Error, Result, Vec3};

/// `|∇(ũ/|ũ|)|²` at `p`, `None` outside the sample hull.
pub fn interpolant_density(u: &ManifoldMap, p: [f64; 2]) -> Option<f64> {
    let s = u.spec();
    if !s.in_sample_hull(p) {
        return None;
    }
    let q = s.to_index(p);
    let i0 = (q[0].floor() as usize).min(s.nx - 2);
    let j0 = (q[1].floor() as usize).min(s.ny - 2);
    let (tx, ty) = (q[0] - i0 as f64, q[1] - j0 as f64);
    let (a, b, c, d) = (u.at(i0, j0), u.at(i0 + 1, j0), u.at(i0, j0 + 1), u.at(i0 + 1, j0 + 1));
    let v: Vec3 = a * ((1.0 - tx) * (1.0 - ty)) + b * (tx * (1.0 - ty)) + c * ((1.0 - tx) * ty) + d * (tx * ty);
    let h = s.h();
    let dx = ((b - a) * (1.0 - ty) + (d - c) * ty) / h;
    let dy = ((c - a) * (1.0 - tx) + (d - b) * tx) / h;
    let n = v.norm();
    if n < 1e-12 {
        return None;
    }
    let w = v / n;
    let gx = (dx - w * w.dot(&dx)) / n;
    let gy = (dy - w * w.dot(&dy)) / n;
    Some(gx.norm_squared() + gy.norm_squared())
}

/// `∫_{B_ρ(x)}|∇(ũ/|ũ|)|²` by the polar midpoint rule; `None` if the ball
/// leaves the sample hull.
pub fn interpolant_ball_energy(u: &ManifoldMap, x: [f64; 2], rho: f64) -> Option<f64> {
    let h = u.spec().h();
    let s = rho / h;
    let nr = ((6.0 * s).ceil() as usize).clamp(8, 512);
    let nt = ((12.0 * std::f64::consts::PI * s).ceil() as usize).clamp(24, 4096);
    let (dr, dt) = (rho / nr as f64, std::f64::consts::TAU / nt as f64);
    for k in 0..4 {
        let a = k as f64 * std::f64::consts::FRAC_PI_2;
        if !u.spec().in_sample_hull([x[0] + rho * a.cos(), x[1] + rho * a.sin()]) {
            return None;
        }
    }
    let mut acc = 0.0;
    for ir in 0..nr {
        let r = (ir as f64 + 0.5) * dr;
        let mut ring = 0.0;
        for it in 0..nt {
            let t = (it as f64 + 0.5) * dt;
            ring += interpolant_density(u, [x[0] + r * t.cos(), x[1] + r * t.sin()])?;
        }
        acc += ring * r;
    }
    Some(acc * dr * dt)
}

#[derive(Debug, Clone, Serialize)]
pub struct Blowup {
    pub center: [f64; 2],
    pub radius: f64,
    pub target: f64,
    /// Ball energy at `(center, radius)`.
    pub achieved: f64,
    /// `∫_{B_1(0)}|∇v|²` re-measured on the window grid.
    pub window_energy: f64,
    /// Some window samples fell outside the data and were clamped to its edge.
    pub clipped: bool,
    #[serde(skip)]
    pub window: ManifoldMap,
}

const CANDIDATE_NODES: usize = 4;
const SUB_OFFSETS: i32 = 2;

/// Candidate centres: the highest-density nodes of `region` and a 5×5 lattice
/// of `h/4` offsets around each.
fn candidates(u: &ManifoldMap, region: &Region) -> Vec<[f64; 2]> {
    let spec = u.spec();
    let mask = region.mask(spec);
    let dens = u.energy_density();
    let mut nodes: Vec<usize> = (0..spec.len()).filter(|&k| mask[k]).collect();
    nodes.sort_by(|&a, &b| dens.values[b].total_cmp(&dens.values[a]).then(a.cmp(&b)));
    nodes.truncate(CANDIDATE_NODES);
    let q = spec.h() / 4.0;
    let mut out = Vec::new();
    for k in nodes {
        let p = spec.point(k % spec.nx, k / spec.nx);
        for dj in -SUB_OFFSETS..=SUB_OFFSETS {
            for di in -SUB_OFFSETS..=SUB_OFFSETS {
                out.push([p[0] + di as f64 * q, p[1] + dj as f64 * q]);
            }
        }
    }
    out.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    out.dedup();
    out
}

/// Largest ball energy among the candidates (ties: lexicographic centre).
fn best(u: &ManifoldMap, cands: &[[f64; 2]], rho: f64) -> Option<([f64; 2], f64)> {
    let vals = crate::par::map_slice(cands, |&c| interpolant_ball_energy(u, c, rho));
    cands.iter().zip(vals).filter_map(|(c, v)| v.map(|v| (*c, v))).fold(None, |acc, (c, v)| match acc {
        Some((_, b)) if b >= v => acc,
        _ => Some((c, v)),
    })
}

/// The map `x ↦ u(x_0 + r x)` on `[−w, w]²` with `cells²` nodes, bilinear and
/// renormalised; samples outside the data are clamped to its edge.
pub fn blowup_window(u: &ManifoldMap, x0: [f64; 2], r: f64, half: f64, cells: usize) -> Result<(ManifoldMap, bool)> {
    let g = GridSpec::square([0.0, 0.0], half, cells)?;
    let s = *u.spec();
    let lo = [s.point(0, 0), s.point(s.nx - 1, s.ny - 1)];
    let mut clipped = false;
    let vals: Vec<Vec3> = (0..g.len())
        .map(|k| {
            let p = g.point(k % g.nx, k / g.nx);
            let mut q = [x0[0] + r * p[0], x0[1] + r * p[1]];
            for a in 0..2 {
                let c = q[a].clamp(lo[0][a], lo[1][a]);
                clipped |= c != q[a];
                q[a] = c;
            }
            u.sample(q).unwrap_or_else(Vec3::z)
        })
        .collect();
    Ok((ManifoldMap::new(crate::field::Field::new(g, vals)?)?, clipped))
}

/// The same samples on the rescaled domain `(Σ − x_0)/r`: derivatives of
/// order `k` pick up exactly `r^k`.
pub fn rescaled_domain(u: &ManifoldMap, x0: [f64; 2], r: f64) -> Result<ManifoldMap> {
    let s = u.spec();
    let g = GridSpec::new(
        [(s.origin[0] - x0[0]) / r, (s.origin[1] - x0[1]) / r],
        [s.extent[0] / r, s.extent[1] / r],
        s.nx,
        s.ny,
    )?;
    ManifoldMap::new(crate::field::Field::new(g, u.field().values.clone())?)
}

/// Smallest `r` (over centres in `region`) with `∫_{B_r(x)}|∇u|² = ε₀²/C₀`.
pub fn extract_blowup(u: &ManifoldMap, region: &Region, cfg: &AnalysisConfig) -> Result<Blowup> {
    extract_at_level(u, region, cfg.target_level(), cfg)
}

pub fn extract_at_level(u: &ManifoldMap, region: &Region, target: f64, cfg: &AnalysisConfig) -> Result<Blowup> {
    let cands = candidates(u, region);
    if cands.is_empty() {
        return Err(Error::LevelUnreachable { level: target, reason: "region contains no grid nodes".into() });
    }
    let h = u.spec().h();
    let f = |rho: f64| best(u, &cands, rho);
    let mut lo = 0.05 * h;
    if f(lo).map_or(true, |(_, v)| v >= target) {
        return Err(Error::LevelUnreachable { level: target, reason: "reached below h/20".into() });
    }
    let mut hi = h;
    loop {
        match f(hi) {
            Some((_, v)) if v >= target => break,
            Some(_) => {
                lo = hi;
                hi *= 2.0;
            }
            None => {
                return Err(Error::LevelUnreachable {
                    level: target,
                    reason: format!("ball energy below the level up to radius {lo:.3e}"),
                })
            }
        }
    }
    for _ in 0..200 {
        if hi / lo - 1.0 < 1e-9 {
            break;
        }
        let mid = (lo * hi).sqrt();
        if f(mid).map_or(false, |(_, v)| v >= target) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (center, achieved) = f(hi).expect("bracket endpoint evaluated before");
    if (achieved - target).abs() > 0.01 * target {
        return Err(Error::LevelUnreachable {
            level: target,
            reason: format!("ball energy jumps to {achieved:.4e} at r = {hi:.4e}"),
        });
    }
    let (window, clipped) = blowup_window(u, center, hi, cfg.window_half, cfg.window_cells)?;
    let disk = Region::disk([0.0, 0.0], 1.0).mask(window.spec());
    let window_energy = window.energy(Some(&disk));
    Ok(Blowup { center, radius: hi, target, achieved, window_energy, clipped, window })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::tension_field;
    use crate::flow::{glue_sequence, rational_bubble, BubbleSpec, RationalMap, SequenceSpec};
    use crate::norms::morrey;
    use std::f64::consts::PI;

    fn bubble(s: f64, c: [f64; 2], n: usize) -> ManifoldMap {
        let g = GridSpec::square([0.0, 0.0], 1.0, n).unwrap();
        rational_bubble(&BubbleSpec { map: RationalMap::identity(), center: c, scale: s }, g).unwrap()
    }

    #[test]
    fn interpolant_energy_matches_the_bubble_density() {
        // ∫_{B_ρ} 8s²/(s² + |x|²)² = 8πρ²/(s² + ρ²).
        let s = 0.1;
        let u = bubble(s, [0.0, 0.0], 256);
        for rho in [0.02, 0.05, 0.2] {
            let e = interpolant_ball_energy(&u, [0.0, 0.0], rho).unwrap();
            let exact = 8.0 * PI * rho * rho / (s * s + rho * rho);
            assert!((e / exact - 1.0).abs() < 0.02, "ρ = {rho}: {e} vs {exact}");
        }
        assert!(interpolant_ball_energy(&u, [0.9, 0.0], 0.2).is_none());
    }

    #[test]
    fn extraction_hits_the_level_and_window_is_normalised() {
        let cfg = AnalysisConfig::default();
        let s = 0.05;
        let u = bubble(s, [0.013, -0.021], 256);
        let b = extract_blowup(&u, &Region::disk([0.0, 0.0], 0.2), &cfg).unwrap();
        let t = cfg.target_level();
        assert!((b.achieved / t - 1.0).abs() <= 0.01);
        assert!((b.window_energy / t - 1.0).abs() <= 0.02, "{} vs {t}", b.window_energy);
        // Exact radius: 8πρ²/(s² + ρ²) = t.
        let exact = s * (t / (8.0 * PI - t)).sqrt();
        assert!((b.radius / exact - 1.0).abs() < 0.1, "{} vs {exact}", b.radius);
        assert!((b.center[0] - 0.013).abs() < u.spec().h() && (b.center[1] + 0.021).abs() < u.spec().h());
        assert!(!b.clipped);
    }

    #[test]
    fn extraction_is_scale_equivariant() {
        let cfg = AnalysisConfig::default();
        let u = bubble(0.05, [0.01, 0.02], 128);
        let a = extract_blowup(&u, &Region::disk([0.0, 0.0], 0.3), &cfg).unwrap();
        for s in [0.25, 3.0] {
            let us = rescaled_domain(&u, [0.0, 0.0], s).unwrap();
            let b = extract_blowup(&us, &Region::disk([0.0, 0.0], 0.3 / s), &cfg).unwrap();
            assert!((b.radius * s / a.radius - 1.0).abs() < 1e-9, "{} vs {}", b.radius * s, a.radius);
            let d = b.window.field().values.iter().zip(&a.window.field().values).fold(0.0f64, |m, (p, q)| m.max((p - q).norm()));
            assert!(d < 1e-9, "{d}");
        }
    }

    #[test]
    fn extracted_radius_tracks_the_scale_along_the_ladder() {
        let cfg = AnalysisConfig::default();
        let spec = SequenceSpec::single_bubble(3, 6);
        let ratios: Vec<f64> = spec
            .indices()
            .map(|n| {
                let g = glue_sequence(&spec, n).unwrap();
                let b = extract_blowup(&g.u, &Region::disk([0.0, 0.0], 0.1), &cfg).unwrap();
                b.radius / g.info.bubbles[0].scale
            })
            .collect();
        let (lo, hi) = ratios.iter().fold((f64::MAX, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
        assert!(hi / lo - 1.0 < 0.1, "{ratios:?}");
    }

    #[test]
    fn tension_morrey_scales_with_the_blowup_radius() {
        let cfg = AnalysisConfig::default();
        let spec = crate::flow::parker_counterexample_sequence(3, 6);
        let g = glue_sequence(&spec, 4).unwrap();
        let b = extract_blowup(&g.u, &Region::disk([0.0, 0.0], 0.1), &cfg).unwrap();
        let v = rescaled_domain(&g.u, b.center, b.radius).unwrap();
        let m_u = morrey(&tension_field(&g.u).tau, 1.0, cfg.delta, &Region::All).unwrap().value;
        let m_v = morrey(&tension_field(&v).tau, 1.0, cfg.delta, &Region::All).unwrap().value;
        let expect = b.radius.powf(2.0 - cfg.delta);
        assert!((m_v / m_u / expect - 1.0).abs() < 0.1, "{} vs {expect}", m_v / m_u);
    }

    #[test]
    fn unreachable_level_is_reported() {
        let g = GridSpec::square([0.0, 0.0], 1.0, 32).unwrap();
        let u = ManifoldMap::constant(g, Vec3::z()).unwrap();
        let err = extract_blowup(&u, &Region::All, &AnalysisConfig::default()).unwrap_err();
        assert!(matches!(err, Error::LevelUnreachable { .. }));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(8))]
        #[test]
        fn blowup_radius_is_scale_equivariant(s in 0.04f64..0.1, cx in -0.1f64..0.1, cy in -0.1f64..0.1, k in 0.1f64..10.0) {
            let cfg = AnalysisConfig::default();
            let u = bubble(s, [cx, cy], 64);
            let a = extract_blowup(&u, &Region::disk([cx, cy], 0.3), &cfg).unwrap();
            let us = rescaled_domain(&u, [0.0, 0.0], k).unwrap();
            let b = extract_blowup(&us, &Region::disk([cx / k, cy / k], 0.3 / k), &cfg).unwrap();
            proptest::prop_assert!((b.radius * k / a.radius - 1.0).abs() < 1e-9);
            proptest::prop_assert!((b.center[0] * k - a.center[0]).abs() < 1e-9 && (b.center[1] * k - a.center[1]).abs() < 1e-9);
        }
    }
}
