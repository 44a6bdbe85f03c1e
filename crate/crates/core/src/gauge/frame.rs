//! Coulomb frames for 𝕊²-valued maps.
//!
//! The tangent bundle of 𝕊² has structure group SO(2), so a gauge change is a
//! rotation by an angle field θ. A reference frame `(ẽ₁, ẽ₂)` is obtained by
//! parallel-transporting a fixed basis of `T_q𝕊²` along great circles from
//! `q` (the antipode of the pole); rotating by θ adds `∇θ` to the connection
//! `⟨∇ẽ₁, ẽ₂⟩`, so the Coulomb condition `div⟨∇e₁, e₂⟩ = 0` is one Poisson
//! problem for θ.
//!
//! Discretely the connection lives on cell faces as the transport angle
//! `F(c→n)` between neighbouring frames, which changes by exactly
//! `θ_n − θ_c` under rotation, making the discrete Coulomb condition
//! `Σ_n F(c→n) = 0` linear in θ. Faces leaving the region carry no flux.

use nalgebra::Matrix3x2;

use super::poisson;
use crate::field::{masked_gradient, Field, ManifoldMap};
use crate::norms::Region;
use crate::{Error, Result, Vec3};

/// Orthonormal tangent frame on a region (zero outside it).
#[derive(Debug, Clone)]
pub struct Frame {
    pub e1: Field<Vec3>,
    pub e2: Field<Vec3>,
    pub mask: Vec<bool>,
    /// Point of 𝕊² the map must avoid.
    pub pole: Vec3,
    pub theta: Field<f64>,
    /// `max_c |Σ_n F(c→n)| / h` after the gauge fix.
    pub coulomb_residual: f64,
    pub coulomb_tolerance: f64,
    pub solver_iterations: usize,
}

impl Frame {
    /// `Q = (e₁, e₂)` as a 3×2 matrix field.
    pub fn q_matrix(&self) -> Field<Matrix3x2<f64>> {
        self.e1.zip_map(&self.e2, |a, b| Matrix3x2::from_columns(&[a, b]))
    }

    /// `max |⟨e_α, e_β⟩ − δ_αβ|` and `max |⟨e_α, u⟩|` over the region.
    pub fn orthonormality_defect(&self, u: &ManifoldMap) -> f64 {
        let mut m: f64 = 0.0;
        for k in 0..self.mask.len() {
            if !self.mask[k] {
                continue;
            }
            let (a, b, n) = (self.e1.values[k], self.e2.values[k], u.field().values[k]);
            for v in [a.dot(&a) - 1.0, b.dot(&b) - 1.0, a.dot(&b), a.dot(&n), b.dot(&n)] {
                m = m.max(v.abs());
            }
        }
        m
    }

    /// `Σ_α ∫_U |∇e_α|²`.
    pub fn energy(&self) -> f64 {
        let mut e = 0.0;
        for f in [&self.e1, &self.e2] {
            let (fx, fy) = masked_gradient(f, &self.mask);
            let d = fx.zip_map(&fy, |a, b| a.norm_squared() + b.norm_squared());
            e += d.integral_pow(1.0, Some(&self.mask));
        }
        e
    }
}

#[derive(Debug, Clone)]
pub struct FrameOptions {
    /// Minimum distance from the map to the pole.
    pub pole_margin: f64,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
}

impl Default for FrameOptions {
    fn default() -> Self {
        Self { pole_margin: 0.05, cg_tol: 1e-11, cg_max_iter: 4000 }
    }
}

/// `P_{a→b} v = v − ⟨v, b⟩/(1 + ⟨a, b⟩)·(a + b)` for `v ⊥ a`: the rotation
/// along the great circle from `a` to `b`.
#[inline]
pub fn transport(a: Vec3, b: Vec3, v: Vec3) -> Vec3 {
    v - (a + b) * (v.dot(&b) / (1.0 + a.dot(&b)))
}

/// A unit vector of `T_q𝕊²`.
fn tangent_vector(q: Vec3) -> Vec3 {
    let axes = [Vec3::x(), Vec3::y(), Vec3::z()];
    let e = axes
        .iter()
        .min_by(|s, t| s.dot(&q).abs().total_cmp(&t.dot(&q).abs()))
        .copied()
        .unwrap();
    (e - q * e.dot(&q)).normalize()
}

/// Face connection angle: rotation from `e1(c)` to the transport of `e1(n)`.
#[inline]
fn face_angle(uc: Vec3, e1c: Vec3, e2c: Vec3, un: Vec3, e1n: Vec3) -> f64 {
    let t = transport(un, uc, e1n);
    t.dot(&e2c).atan2(t.dot(&e1c))
}

/// Reference frame by transport from `q = −pole`.
pub fn reference_frame(u: &ManifoldMap, mask: &[bool], pole: Vec3) -> (Field<Vec3>, Field<Vec3>) {
    let q = -pole;
    let a = tangent_vector(q);
    let f = u.field();
    let mut e1 = Field::zeros(f.spec);
    let mut e2 = Field::zeros(f.spec);
    for k in 0..mask.len() {
        if mask[k] {
            let n = f.values[k];
            let t1 = transport(q, n, a).normalize();
            let t2 = n.cross(&t1);
            e1.values[k] = t1;
            e2.values[k] = t2;
        }
    }
    (e1, e2)
}

/// Sum of outgoing face angles per cell.
fn face_divergence(u: &ManifoldMap, e1: &Field<Vec3>, e2: &Field<Vec3>, mask: &[bool]) -> Vec<f64> {
    let spec = u.spec();
    let (nx, ny) = (spec.nx, spec.ny);
    let uf = &u.field().values;
    let rows = crate::par::map_range(ny, |j| {
        let mut out = vec![0.0; nx];
        for i in 0..nx {
            let c = j * nx + i;
            if !mask[c] {
                continue;
            }
            let mut s = 0.0;
            let mut nb = |n: usize| {
                if mask[n] {
                    s += face_angle(uf[c], e1.values[c], e2.values[c], uf[n], e1.values[n]);
                }
            };
            if i > 0 {
                nb(c - 1);
            }
            if i + 1 < nx {
                nb(c + 1);
            }
            if j > 0 {
                nb(c - nx);
            }
            if j + 1 < ny {
                nb(c + nx);
            }
            out[i] = s;
        }
        out
    });
    rows.concat()
}

/// Coulomb frame of `u` on `region`.
pub fn coulomb_frame(u: &ManifoldMap, region: &Region, opts: &FrameOptions) -> Result<Frame> {
    let spec = *u.spec();
    let mask = region.mask(&spec);
    let f = u.field();
    let (mut sum, mut count) = (Vec3::zeros(), 0usize);
    for k in 0..mask.len() {
        if mask[k] {
            sum += f.values[k];
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptyRegion);
    }
    // The pole is placed opposite the mean direction; a vanishing mean means
    // no single chart is guaranteed, so fall back to the south pole and let the
    // proximity check decide.
    let pole = if sum.norm() > 1e-12 { -sum.normalize() } else { -Vec3::z() };
    let closest = (0..mask.len())
        .filter(|&k| mask[k])
        .map(|k| (f.values[k] - pole).norm())
        .fold(f64::INFINITY, f64::min);
    if closest < opts.pole_margin {
        return Err(Error::PoleProximity { distance: closest });
    }
    let (t1, t2) = reference_frame(u, &mask, pole);
    let div = face_divergence(u, &t1, &t2, &mask);
    let rhs: Vec<f64> = div.iter().map(|v| -v).collect();
    let sol = poisson::solve_masked(spec.nx, spec.ny, &mask, &rhs, opts.cg_tol, opts.cg_max_iter)?;
    let mut e1 = Field::zeros(spec);
    let mut e2 = Field::zeros(spec);
    for k in 0..mask.len() {
        if mask[k] {
            let (s, c) = sol.theta[k].sin_cos();
            e1.values[k] = t1.values[k] * c + t2.values[k] * s;
            e2.values[k] = t2.values[k] * c - t1.values[k] * s;
        }
    }
    let h = spec.h();
    let residual = face_divergence(u, &e1, &e2, &mask).iter().fold(0.0f64, |m, v| m.max(v.abs())) / h;
    let grad_l2 = u.energy(Some(&mask)).sqrt();
    Ok(Frame {
        e1,
        e2,
        mask,
        pole,
        theta: Field { spec, values: sol.theta },
        coulomb_residual: residual,
        coulomb_tolerance: 1e-6 * grad_l2 / h,
        solver_iterations: sol.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridSpec;

    fn geodesic(n: usize, a: f64) -> ManifoldMap {
        let g = GridSpec::square([0.0, 0.0], 1.0, n).unwrap();
        ManifoldMap::from_fn(g, move |x, _| Vec3::new((a * x).cos(), (a * x).sin(), 0.0)).unwrap()
    }

    #[test]
    fn transport_maps_tangent_spaces() {
        let a = Vec3::new(0.0, 0.0, 1.0);
        let b = Vec3::new(1.0, 2.0, 0.5).normalize();
        let v = Vec3::new(0.3, -0.7, 0.0);
        let t = transport(a, b, v);
        assert!(t.dot(&b).abs() < 1e-14);
        assert!((t.norm() - v.norm()).abs() < 1e-14);
    }

    #[test]
    fn constant_map_has_flat_frame() {
        let g = GridSpec::square([0.0, 0.0], 1.0, 16).unwrap();
        let u = ManifoldMap::constant(g, Vec3::new(0.2, 0.3, 1.0)).unwrap();
        let fr = coulomb_frame(&u, &Region::All, &FrameOptions::default()).unwrap();
        let t0 = fr.theta.values[0];
        assert!(fr.theta.values.iter().all(|t| (t - t0).abs() < 1e-12));
        assert!(fr.energy() < 1e-20);
    }

    #[test]
    fn geodesic_frame_is_coulomb_and_orthonormal() {
        let u = geodesic(64, 1.3);
        let region = Region::disk([0.0, 0.0], 0.9);
        let fr = coulomb_frame(&u, &region, &FrameOptions::default()).unwrap();
        assert!(fr.orthonormality_defect(&u) < 1e-12);
        assert!(fr.coulomb_residual <= fr.coulomb_tolerance, "{} > {}", fr.coulomb_residual, fr.coulomb_tolerance);
    }

    #[test]
    fn pole_proximity_is_rejected() {
        // Equator-covering map: the mean is near zero and the fallback pole is hit.
        let g = GridSpec::square([0.0, 0.0], 1.0, 32).unwrap();
        let u = ManifoldMap::from_fn(g, |x, y| {
            let (t, p) = (std::f64::consts::PI * (y + 1.0) / 2.0, std::f64::consts::PI * x);
            Vec3::new(t.sin() * p.cos(), t.sin() * p.sin(), t.cos())
        })
        .unwrap();
        assert!(matches!(
            coulomb_frame(&u, &Region::All, &FrameOptions::default()),
            Err(Error::PoleProximity { .. })
        ));
    }
}
