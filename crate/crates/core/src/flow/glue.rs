//! Glued bubbling sequences
//! `v_n = u + Σ_i χ_i·(R_i ω_i((· − x^i)/r_n^i) − R_i ω_i(∞))`, `u_n = v_n/|v_n|`,
//! where `R_i` rotates `ω_i(∞)` onto the base value `u(x^i)`.

use serde::Serialize;

use super::rational::BubbleSpec;
use super::spec::{LeakRing, SequenceSpec};
use crate::field::{project_to_sphere, tension_field, Field, GridSpec, ManifoldMap};
use crate::{Error, Result, Vec3};

/// `1 − smootherstep((ρ − ρ_c/2)/(ρ_c/2))`: 1 on `B_{ρ_c/2}`, 0 outside `B_{ρ_c}`.
#[inline]
pub fn cutoff(rho: f64, rho_c: f64) -> f64 {
    let s = ((rho - 0.5 * rho_c) / (0.5 * rho_c)).clamp(0.0, 1.0);
    1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
}

/// Smallest rotation taking `a` to `b` (both unit).
pub fn rotation_between(a: Vec3, b: Vec3) -> nalgebra::Rotation3<f64> {
    nalgebra::Rotation3::rotation_between(&a, &b).unwrap_or_else(|| {
        // Antipodal: half-turn about any axis orthogonal to `a`.
        let t = if a.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        let axis = nalgebra::Unit::new_normalize(a.cross(&t));
        nalgebra::Rotation3::from_axis_angle(&axis, std::f64::consts::PI)
    })
}

/// Unit tangent at `b` along which the leak ring rotates.
pub fn ring_direction(b: Vec3) -> Vec3 {
    let t = if b.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    (t - b * t.dot(&b)).normalize()
}

#[derive(Debug, Clone, Serialize)]
pub struct PlacedBubble {
    pub center: [f64; 2],
    pub scale: f64,
    pub cutoff_radius: f64,
    pub degree: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RingInfo {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub log_width: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GlueInfo {
    pub n: u32,
    pub grid: GridSpec,
    pub bubbles: Vec<PlacedBubble>,
    pub ring: Option<RingInfo>,
    /// The cutoff was halved after a degenerate projection.
    pub retried: bool,
}

pub struct Glued {
    pub u: ManifoldMap,
    pub tau: Field<Vec3>,
    pub info: GlueInfo,
}

struct Placement {
    bubble: BubbleSpec,
    rot: nalgebra::Rotation3<f64>,
    at_inf: Vec3,
    rho_c: f64,
}

fn ring_profile(ring: &LeakRing, r: f64, r_ref: f64) -> RingInfo {
    let w = ring.log_width(r, r_ref);
    let inner = ring.start * r;
    RingInfo { inner_radius: inner, outer_radius: inner * w.exp(), log_width: w, amplitude: ring.amplitude(w) }
}

fn ring_angle(info: &RingInfo, rho: f64) -> f64 {
    if rho <= info.inner_radius || rho >= info.outer_radius {
        return 0.0;
    }
    let t = (rho / info.inner_radius).ln() / info.log_width;
    info.amplitude * (std::f64::consts::PI * t).sin().powi(2)
}

fn assemble(spec: &SequenceSpec, grid: GridSpec, placed: &[Placement]) -> Field<Vec3> {
    Field::from_fn(grid, |x, y| {
        let base = spec.base.eval([x, y]);
        let mut v = base;
        for p in placed {
            let (dx, dy) = (x - p.bubble.center[0], y - p.bubble.center[1]);
            let rho = (dx * dx + dy * dy).sqrt();
            let chi = cutoff(rho, p.rho_c);
            if chi > 0.0 {
                v += (p.rot * (p.bubble.eval([x, y]) - p.at_inf)) * chi;
            }
        }
        v
    })
}

/// Rotates the map by `ψ(ln ρ)` about `b × T` around each bubble centre,
/// where `b` is the base value there and `T` the ring direction.
fn apply_ring(u: ManifoldMap, placed: &[Placement], ring: &RingInfo) -> Result<ManifoldMap> {
    let axes: Vec<_> = placed
        .iter()
        .map(|p| {
            let b = p.rot * p.at_inf;
            (p.bubble.center, nalgebra::Unit::new_normalize(b.cross(&ring_direction(b))))
        })
        .collect();
    let spec = *u.spec();
    let values = u
        .field()
        .values
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let [x, y] = spec.point(k % spec.nx, k / spec.nx);
            axes.iter().fold(v, |v, (c, axis)| {
                let a = ring_angle(ring, ((x - c[0]).powi(2) + (y - c[1]).powi(2)).sqrt());
                if a == 0.0 {
                    v
                } else {
                    nalgebra::Rotation3::from_axis_angle(axis, a) * v
                }
            })
        })
        .collect();
    project_to_sphere(&Field { spec, values })
}

/// Member `n` of the sequence together with its computed tension field.
pub fn glue_sequence(spec: &SequenceSpec, n: u32) -> Result<Glued> {
    if n < spec.sequence.n_min || n > spec.sequence.n_max {
        return Err(Error::InvalidParameter(format!(
            "index {n} outside the ladder {}..={}",
            spec.sequence.n_min, spec.sequence.n_max
        )));
    }
    let grid = spec.grid(n)?;
    let r_ref = spec.bubbles.first().map(|b| b.scale.at(spec.sequence.n_min));
    let ring = match (&spec.leak, spec.bubbles.first()) {
        (Some(l), Some(b)) => Some(ring_profile(l, b.scale.at(n), r_ref.unwrap())),
        _ => None,
    };
    let mut placed: Vec<Placement> = spec
        .bubbles
        .iter()
        .map(|b| {
            let bubble = b.at(n);
            let at_inf = bubble.map.at_infinity();
            let rot = rotation_between(at_inf, spec.base.eval(bubble.center));
            let rho_c = spec.glue.factor * bubble.scale.powf(spec.glue.beta);
            Placement { bubble, rot, at_inf, rho_c }
        })
        .collect();
    let mut retried = false;
    let u = match project_to_sphere(&assemble(spec, grid, &placed)) {
        Ok(u) => u,
        Err(Error::DegenerateProjection { .. }) => {
            retried = true;
            placed.iter_mut().for_each(|p| p.rho_c *= 0.5);
            project_to_sphere(&assemble(spec, grid, &placed))?
        }
        Err(e) => return Err(e),
    };
    let u = match &ring {
        Some(info) => apply_ring(u, &placed, info)?,
        None => u,
    };
    let tau = tension_field(&u).tau;
    let info = GlueInfo {
        n,
        grid,
        bubbles: placed
            .iter()
            .map(|p| PlacedBubble {
                center: p.bubble.center,
                scale: p.bubble.scale,
                cutoff_radius: p.rho_c,
                degree: p.bubble.map.degree(),
            })
            .collect(),
        ring,
        retried,
    };
    Ok(Glued { u, tau, info })
}

/// The limit map `u` sampled on the grid of index `n`.
pub fn base_map(spec: &SequenceSpec, grid: GridSpec) -> Result<ManifoldMap> {
    ManifoldMap::from_fn(grid, |x, y| spec.base.eval([x, y]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::tension_field;
    use crate::flow::spec::{BaseMap, BubbleEntry, ScaleLaw};
    use crate::norms::{morrey, Region};
    use std::f64::consts::PI;

    #[test]
    fn cutoff_profile() {
        assert_eq!(cutoff(0.2, 1.0), 1.0);
        assert_eq!(cutoff(0.5, 1.0), 1.0);
        assert_eq!(cutoff(1.0, 1.0), 0.0);
        assert!((cutoff(0.75, 1.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn no_bubbles_reproduces_the_base() {
        let mut s = SequenceSpec::single_bubble(3, 4);
        s.bubbles.clear();
        s.base = BaseMap::Rational {
            numerator: vec![crate::Complex64::new(0.0, 0.0), crate::Complex64::new(1.0, 0.0)],
            denominator: vec![crate::Complex64::new(1.0, 0.0)],
            antiholomorphic: false,
            center: [0.3, 0.0],
            scale: 2.0,
        };
        let g = glue_sequence(&s, 3).unwrap();
        let u = base_map(&s, g.info.grid).unwrap();
        assert_eq!(g.u, u);
        assert_eq!(g.tau.values, tension_field(&u).tau.values);
    }

    #[test]
    fn bubble_energy_approaches_8pi() {
        let s = SequenceSpec::single_bubble(3, 6);
        let mut prev = f64::INFINITY;
        for n in s.indices() {
            let g = glue_sequence(&s, n).unwrap();
            let err = (g.u.energy(None) - 8.0 * PI).abs();
            assert!(err < prev, "n = {n}: {err} vs {prev}");
            prev = err;
        }
        assert!(prev / (8.0 * PI) < 0.05, "{prev}");
    }

    #[test]
    fn bubble_on_a_rotated_base_stays_on_the_sphere() {
        let mut s = SequenceSpec::single_bubble(3, 3);
        s.base = BaseMap::Constant { value: [0.0, 0.0, -1.0] };
        let g = glue_sequence(&s, 3).unwrap();
        // Outside the cutoff the map equals the base; at the centre it is the
        // rotated ω(0) = S, i.e. the north pole.
        assert!((g.u.at(0, 0) - Vec3::new(0.0, 0.0, -1.0)).norm() < 1e-12);
        let (i, j) = g.info.grid.nearest([0.0, 0.0]);
        assert!(g.u.at(i, j).z > 0.9);
        assert!((g.u.energy(None) / (8.0 * PI) - 1.0).abs() < 0.35);
    }

    #[test]
    fn degrees_add_for_separated_bubbles() {
        // The degree-2 density peaks on a ring of radius ~r; 8 cells per scale.
        let mut s = SequenceSpec::two_bubbles(5, 6);
        s.sequence.points_per_scale = 8.0;
        s.bubbles[1] = BubbleEntry { numerator: vec![
            crate::Complex64::new(0.0, 0.0), crate::Complex64::new(0.0, 0.0), crate::Complex64::new(1.0, 0.0)],
            ..BubbleEntry::degree_one([0.7, 0.0], ScaleLaw { c: 1.0, q: 1.0 }) };
        let g = glue_sequence(&s, 6).unwrap();
        let e = g.u.energy(None);
        assert!((e / (24.0 * PI) - 1.0).abs() < 0.05, "{e}");
    }

    #[test]
    fn leak_ring_carries_its_design_energy() {
        // Well resolved: 32 cells across the inner ring radius.
        let mut s = SequenceSpec::single_bubble(3, 3);
        s.sequence.points_per_scale = 16.0;
        s.leak = Some(LeakRing { energy: 10.0, start: 2.0, width: 1.0, zeta: 0.25 });
        let with = glue_sequence(&s, 3).unwrap();
        s.leak = None;
        let without = glue_sequence(&s, 3).unwrap();
        let extra = with.u.energy(None) - without.u.energy(None);
        assert!((extra / 10.0 - 1.0).abs() < 0.05, "{extra}");
    }

    #[test]
    fn tension_morrey_stays_bounded_along_the_ladder() {
        let s = SequenceSpec::single_bubble(3, 6);
        let m: Vec<f64> = s
            .indices()
            .map(|n| {
                let g = glue_sequence(&s, n).unwrap();
                morrey(&g.tau, 1.0, 1.5, &Region::All).unwrap().value
            })
            .collect();
        let hi = m.iter().cloned().fold(0.0, f64::max);
        let lo = m.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(hi / lo < 3.0, "{m:?}");
    }
}
