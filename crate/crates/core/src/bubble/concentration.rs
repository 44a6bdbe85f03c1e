//! Concentration function `ℰ(r) = sup_x ∫_{B_r(x)}|∇u|²` and detection of
//! energy-concentration points along a finite sequence.

use serde::Serialize;

use crate::config::AnalysisConfig;
use crate::field::{GridSpec, ManifoldMap};
use crate::norms::balls::{ball_rows, ball_sum, row_prefix};
use crate::{par, Error, Result};

/// Ball energies `∫_{B_r(x)}|∇u|²` at every node whose ball fits in the grid
/// (`None` elsewhere).
pub fn ball_energies(u: &ManifoldMap, r: f64) -> Result<Vec<Option<f64>>> {
    let spec = *u.spec();
    let h = spec.h();
    if !(r >= 2.0 * h) {
        return Err(Error::InvalidParameter(format!("ball radius {r:.3e} below 2h = {:.3e}", 2.0 * h)));
    }
    let rows = ball_rows(r / h);
    let m = rows.len() - 1;
    if 2 * m + 1 > spec.nx || 2 * m + 1 > spec.ny {
        return Err(Error::InvalidParameter(format!("ball radius {r:.3e} exceeds the grid")));
    }
    let w: Vec<f64> = u.energy_density().values.iter().map(|d| d * spec.cell_area()).collect();
    let prefix = row_prefix(&spec, &w);
    let (nx, ny) = (spec.nx, spec.ny);
    let out = par::map_range(ny, |j| {
        (0..nx)
            .map(|i| {
                (i >= m && j >= m && i + m < nx && j + m < ny).then(|| ball_sum(&prefix, nx, &rows, i, j))
            })
            .collect::<Vec<_>>()
    });
    Ok(out.concat())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcentrationValue {
    pub value: f64,
    /// Maximising node (first in row-major order on ties).
    pub center: [f64; 2],
    pub radius: f64,
}

/// `ℰ(r)` over grid-node centres whose ball lies inside the grid.
pub fn concentration_function(u: &ManifoldMap, r: f64) -> Result<ConcentrationValue> {
    let e = ball_energies(u, r)?;
    let spec = u.spec();
    let (k, v) = e
        .iter()
        .enumerate()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
        .fold((0, f64::NEG_INFINITY), |best, (k, v)| if v > best.1 { (k, v) } else { best });
    Ok(ConcentrationValue { value: v, center: spec.point(k % spec.nx, k / spec.nx), radius: r })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationPoint {
    pub x: [f64; 2],
    /// Largest `min_n ∫_{B_r(x)}|∇u_n|²` over the cluster's nodes.
    pub liminf_energy: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationReport {
    pub points: Vec<ConcentrationPoint>,
    pub epsilon0_used: f64,
    pub radius_ladder: Vec<f64>,
    pub radius_used: f64,
    /// Members (indices into the input) the proxy was evaluated on.
    pub members_used: Vec<usize>,
    /// `E₀` and the admissible point count `⌊E₀/ε₀²⌋ + 1`.
    pub e0: f64,
    pub count_bound: usize,
    /// Grid on which nodes were flagged.
    pub grid: GridSpec,
}

/// Nearest-node lookup of a per-node quantity of another grid on the same domain.
fn resample_nodes(vals: &[Option<f64>], from: &GridSpec, to: &GridSpec) -> Vec<Option<f64>> {
    (0..to.len())
        .map(|k| {
            let (i, j) = from.nearest(to.point(k % to.nx, k / to.nx));
            vals[j * from.nx + i]
        })
        .collect()
}

/// Connected components (8-neighbour) of the flagged nodes, in row-major order
/// of their first node.
fn clusters(flags: &[bool], nx: usize, ny: usize) -> Vec<Vec<usize>> {
    let mut seen = vec![false; flags.len()];
    let mut out = Vec::new();
    for start in 0..flags.len() {
        if !flags[start] || seen[start] {
            continue;
        }
        let mut comp = Vec::new();
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(k) = stack.pop() {
            comp.push(k);
            let (i, j) = ((k % nx) as isize, (k / nx) as isize);
            for dj in -1..=1 {
                for di in -1..=1 {
                    let (a, b) = (i + di, j + dj);
                    if a < 0 || b < 0 || a >= nx as isize || b >= ny as isize {
                        continue;
                    }
                    let q = b as usize * nx + a as usize;
                    if flags[q] && !seen[q] {
                        seen[q] = true;
                        stack.push(q);
                    }
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Finite-sequence proxy for the concentration set: nodes where the ball
/// energy at the smallest resolved ladder radius exceeds `ε₀²` on each of the last
/// `K` members, clustered by connectivity.
pub fn detect_concentration(maps: &[ManifoldMap], cfg: &AnalysisConfig) -> Result<ConcentrationReport> {
    cfg.validate()?;
    if maps.len() < 3 {
        return Err(Error::InvalidParameter(format!("concentration detection needs ≥ 3 members, got {}", maps.len())));
    }
    let first = maps[0].spec();
    if maps.iter().any(|m| !m.spec().same_domain(first)) {
        return Err(Error::InconsistentDomains);
    }
    let k = cfg.last_k.min(maps.len());
    let members: Vec<usize> = (maps.len() - k..maps.len()).collect();
    let grid = members.iter().map(|&i| *maps[i].spec()).fold(*maps[members[0]].spec(), |a, b| if b.h() > a.h() { b } else { a });
    // Smallest ladder radius resolved on the coarsest member.
    let mut ladder = cfg.radius_ladder.clone();
    ladder.sort_by(f64::total_cmp);
    let r = *ladder.iter().find(|&&r| r >= 2.0 * grid.h()).ok_or_else(|| {
        Error::InvalidParameter(format!("no ladder radius resolved at h = {:.3e} (need r >= 2h)", grid.h()))
    })?;
    let eps2 = cfg.epsilon0 * cfg.epsilon0;

    let per_member = par::map_slice(&members, |&i| -> Result<Vec<Option<f64>>> {
        Ok(resample_nodes(&ball_energies(&maps[i], r)?, maps[i].spec(), &grid))
    });
    let mut min_e: Vec<Option<f64>> = vec![Some(f64::INFINITY); grid.len()];
    for e in per_member {
        for (m, v) in min_e.iter_mut().zip(e?) {
            *m = match (*m, v) {
                (Some(a), Some(b)) => Some(a.min(b)),
                _ => None,
            };
        }
    }
    let flags: Vec<bool> = min_e.iter().map(|v| v.map_or(false, |v| v > eps2)).collect();
    let mut points: Vec<ConcentrationPoint> = clusters(&flags, grid.nx, grid.ny)
        .into_iter()
        .map(|comp| {
            let n = comp.len() as f64;
            let (sx, sy) = comp.iter().fold((0.0, 0.0), |(sx, sy), &q| {
                let p = grid.point(q % grid.nx, q / grid.nx);
                (sx + p[0], sy + p[1])
            });
            let liminf_energy = comp.iter().map(|&q| min_e[q].unwrap()).fold(0.0, f64::max);
            ConcentrationPoint { x: [sx / n, sy / n], liminf_energy, nodes: comp.len() }
        })
        .collect();
    points.sort_by(|a, b| b.liminf_energy.total_cmp(&a.liminf_energy).then(a.x[0].total_cmp(&b.x[0])).then(a.x[1].total_cmp(&b.x[1])));

    let e0 = cfg.e0_cap.unwrap_or_else(|| maps.iter().map(|m| m.energy(None)).fold(0.0, f64::max));
    let count_bound = (e0 / eps2).floor() as usize + 1;
    if points.len() > count_bound {
        return Err(Error::Bubble(format!(
            "{} concentration points exceed the bound E0/eps0^2 + 1 = {count_bound}",
            points.len()
        )));
    }
    Ok(ConcentrationReport {
        points,
        epsilon0_used: cfg.epsilon0,
        radius_ladder: cfg.radius_ladder.clone(),
        radius_used: r,
        members_used: members,
        e0,
        count_bound,
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{glue_sequence, rational_bubble, BubbleSpec, RationalMap, SequenceSpec};
    use crate::Vec3;
    use std::f64::consts::PI;

    #[test]
    fn constant_map_has_no_concentration() {
        let g = GridSpec::square([0.0, 0.0], 1.0, 64).unwrap();
        let u = ManifoldMap::constant(g, Vec3::z()).unwrap();
        for r in [0.1, 0.3, 0.9] {
            assert_eq!(concentration_function(&u, r).unwrap().value, 0.0);
        }
        assert!(concentration_function(&u, 0.05).is_err());
        assert!(concentration_function(&u, 1.2).is_err());
    }

    #[test]
    fn bubble_concentrates_within_ten_scales() {
        let g = GridSpec::square([0.0, 0.0], 1.0, 256).unwrap();
        let s = 0.02;
        let u = rational_bubble(&BubbleSpec { map: RationalMap::identity(), center: [0.0, 0.0], scale: s }, g).unwrap();
        let total = u.energy(None);
        let c = concentration_function(&u, 10.0 * s).unwrap();
        assert!(c.value >= 0.9 * total, "{} vs {total}", c.value);
        assert!(c.center[0].abs() <= g.h() && c.center[1].abs() <= g.h());
    }

    #[test]
    fn detects_one_glued_bubble() {
        let s = SequenceSpec::single_bubble(3, 6);
        let maps: Vec<_> = s.indices().map(|n| glue_sequence(&s, n).unwrap().u).collect();
        let rep = detect_concentration(&maps, &AnalysisConfig::default()).unwrap();
        assert_eq!(rep.points.len(), 1);
        let h = rep.grid.h();
        assert!(rep.points[0].x[0].abs() <= 2.0 * h && rep.points[0].x[1].abs() <= 2.0 * h, "{:?}", rep.points);
        // r_4 = 1/16 exceeds the 0.05 ball: 8π·0.05²/(0.05² + r_4²) ≈ 0.39·8π.
        assert!(rep.points[0].liminf_energy > 0.35 * 8.0 * PI);
    }

    #[test]
    fn detects_two_separated_bubbles() {
        let s = SequenceSpec::two_bubbles(3, 6);
        let maps: Vec<_> = s.indices().map(|n| glue_sequence(&s, n).unwrap().u).collect();
        let rep = detect_concentration(&maps, &AnalysisConfig::default()).unwrap();
        assert_eq!(rep.points.len(), 2);
        let mut xs: Vec<f64> = rep.points.iter().map(|p| p.x[0]).collect();
        xs.sort_by(f64::total_cmp);
        assert!((xs[0] + 0.7).abs() < 2.0 * rep.grid.h() && (xs[1] - 0.7).abs() < 2.0 * rep.grid.h(), "{xs:?}");
        assert!(rep.points.len() <= rep.count_bound);
    }

    #[test]
    fn fixed_smooth_sequence_has_no_points() {
        let g = GridSpec::square([0.0, 0.0], 1.0, 128).unwrap();
        let u = ManifoldMap::from_fn(g, |x, y| Vec3::new((0.5 * x).sin(), (0.5 * y).cos(), 2.0)).unwrap();
        let rep = detect_concentration(&[u.clone(), u.clone(), u], &AnalysisConfig::default()).unwrap();
        assert!(rep.points.is_empty());
    }

    #[test]
    fn rejects_short_or_mismatched_sequences() {
        let g = GridSpec::square([0.0, 0.0], 1.0, 32).unwrap();
        let u = ManifoldMap::constant(g, Vec3::z()).unwrap();
        assert!(detect_concentration(&[u.clone(), u.clone()], &AnalysisConfig::default()).is_err());
        let v = ManifoldMap::constant(GridSpec::square([0.5, 0.0], 1.0, 32).unwrap(), Vec3::z()).unwrap();
        let err = detect_concentration(&[u.clone(), u, v], &AnalysisConfig::default()).unwrap_err();
        assert!(matches!(err, Error::InconsistentDomains));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(16))]
        #[test]
        fn ball_energy_grows_with_the_radius(a in 0.5f64..4.0, b in 0.5f64..4.0, r1 in 0.09f64..0.3, dr in 0.0f64..0.3) {
            let g = GridSpec::square([0.0, 0.0], 1.0, 48).unwrap();
            let u = ManifoldMap::from_fn(g, |x, y| Vec3::new((a * x).sin(), (b * y).cos(), 2.0 + (a * x * y).sin())).unwrap();
            let e1 = ball_energies(&u, r1).unwrap();
            let e2 = ball_energies(&u, r1 + dr).unwrap();
            for (p, q) in e1.iter().zip(&e2) {
                if let (Some(p), Some(q)) = (p, q) {
                    proptest::prop_assert!(*p <= *q + 1e-12 * q.abs());
                }
            }
        }
    }
}
