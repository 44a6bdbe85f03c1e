//! Second-order finite differences on cell-centred grids.
//!
//! Interior nodes use centred stencils; the first and last node along an axis
//! use the one-sided second-order stencils `(−3f₀ + 4f₁ − f₂)/2h` and
//! `(2f₀ − 5f₁ + 4f₂ − f₃)/h²`. Periodic variants wrap instead.

use super::{ComplexValue, Field, ManifoldMap, Value};
use crate::{par, Complex64, Error, Result, Vec3};

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
}

#[inline]
fn first<T: Value>(f: &[T], at: impl Fn(usize) -> usize, k: usize, n: usize, h: f64) -> T {
    let g = |m: usize| f[at(m)];
    if k == 0 {
        (g(1).scale(4.0) - g(0).scale(3.0) - g(2)).scale(0.5 / h)
    } else if k == n - 1 {
        (g(k).scale(3.0) - g(k - 1).scale(4.0) + g(k - 2)).scale(0.5 / h)
    } else {
        (g(k + 1) - g(k - 1)).scale(0.5 / h)
    }
}

#[inline]
fn second<T: Value>(f: &[T], at: impl Fn(usize) -> usize, k: usize, n: usize, h: f64) -> T {
    let g = |m: usize| f[at(m)];
    let h2 = 1.0 / (h * h);
    if k == 0 {
        (g(0).scale(2.0) - g(1).scale(5.0) + g(2).scale(4.0) - g(3)).scale(h2)
    } else if k == n - 1 {
        (g(k).scale(2.0) - g(k - 1).scale(5.0) + g(k - 2).scale(4.0) - g(k - 3)).scale(h2)
    } else {
        (g(k + 1) + g(k - 1) - g(k).scale(2.0)).scale(h2)
    }
}

fn apply<T: Value>(
    f: &Field<T>,
    axis: Axis,
    periodic: bool,
    order: u8,
) -> Field<T> {
    let s = f.spec;
    let (nx, ny, h) = (s.nx, s.ny, s.h());
    let v = &f.values;
    let rows = par::map_range(ny, |j| {
        let mut row = Vec::with_capacity(nx);
        for i in 0..nx {
            let d = match (axis, periodic) {
                (Axis::X, false) => {
                    let at = |m: usize| j * nx + m;
                    if order == 1 {
                        first(v, at, i, nx, h)
                    } else {
                        second(v, at, i, nx, h)
                    }
                }
                (Axis::Y, false) => {
                    let at = |m: usize| m * nx + i;
                    if order == 1 {
                        first(v, at, j, ny, h)
                    } else {
                        second(v, at, j, ny, h)
                    }
                }
                (Axis::X, true) => {
                    let (a, b, c) = (v[j * nx + (i + nx - 1) % nx], v[j * nx + i], v[j * nx + (i + 1) % nx]);
                    periodic_stencil(a, b, c, h, order)
                }
                (Axis::Y, true) => {
                    let (a, b, c) = (v[((j + ny - 1) % ny) * nx + i], v[j * nx + i], v[((j + 1) % ny) * nx + i]);
                    periodic_stencil(a, b, c, h, order)
                }
            };
            row.push(d);
        }
        row
    });
    Field { spec: s, values: rows.concat() }
}

#[inline]
fn periodic_stencil<T: Value>(a: T, b: T, c: T, h: f64, order: u8) -> T {
    if order == 1 {
        (c - a).scale(0.5 / h)
    } else {
        (a + c - b.scale(2.0)).scale(1.0 / (h * h))
    }
}

/// `(∂x f, ∂y f)`.
pub fn gradient<T: Value>(f: &Field<T>) -> (Field<T>, Field<T>) {
    (apply(f, Axis::X, false, 1), apply(f, Axis::Y, false, 1))
}

/// `(∂x f, ∂y f)` on a periodic grid.
pub fn gradient_periodic<T: Value>(f: &Field<T>) -> (Field<T>, Field<T>) {
    (apply(f, Axis::X, true, 1), apply(f, Axis::Y, true, 1))
}

/// Five-point Laplacian (one-sided second differences at the boundary).
pub fn laplacian<T: Value>(f: &Field<T>) -> Field<T> {
    let xx = apply(f, Axis::X, false, 2);
    let yy = apply(f, Axis::Y, false, 2);
    xx.zip_map(&yy, |a, b| a + b)
}

pub fn laplacian_periodic<T: Value>(f: &Field<T>) -> Field<T> {
    let xx = apply(f, Axis::X, true, 2);
    let yy = apply(f, Axis::Y, true, 2);
    xx.zip_map(&yy, |a, b| a + b)
}

/// `(∂f/∂z, ∂f/∂z̄) = (∂x f − i∂y f, ∂x f + i∂y f)`, without the usual ½.
pub fn dz_dzbar<T: ComplexValue>(f: &Field<T>) -> Result<(Field<T>, Field<T>)> {
    f.check_finite()?;
    let (fx, fy) = gradient(f);
    let i = Complex64::new(0.0, 1.0);
    let dz = fx.zip_map(&fy, |a, b| a - b * i);
    let dzb = fx.zip_map(&fy, |a, b| a + b * i);
    Ok((dz, dzb))
}

/// Gradient using only cells inside `mask`: centred where both neighbours are
/// in the mask, one-sided second order where two cells on one side are,
/// first order as a last resort. Cells outside the mask get zero.
pub fn masked_gradient<T: Value>(f: &Field<T>, mask: &[bool]) -> (Field<T>, Field<T>) {
    let s = f.spec;
    let (nx, ny, h) = (s.nx, s.ny, s.h());
    let v = &f.values;
    let one = |get: &dyn Fn(isize) -> Option<T>| -> T {
        let (m2, m1, p1, p2) = (get(-2), get(-1), get(1), get(2));
        let c = get(0).unwrap();
        match (m1, p1) {
            (Some(a), Some(b)) => (b - a).scale(0.5 / h),
            _ => match (p1, p2, m1, m2) {
                (Some(b), Some(bb), _, _) => (b.scale(4.0) - c.scale(3.0) - bb).scale(0.5 / h),
                (_, _, Some(a), Some(aa)) => (c.scale(3.0) - a.scale(4.0) + aa).scale(0.5 / h),
                (Some(b), None, _, _) => (b - c).scale(1.0 / h),
                (_, _, Some(a), None) => (c - a).scale(1.0 / h),
                _ => T::zero(),
            },
        }
    };
    let rows = par::map_range(ny, |j| {
        let mut gx = Vec::with_capacity(nx);
        let mut gy = Vec::with_capacity(nx);
        for i in 0..nx {
            let k = j * nx + i;
            if !mask[k] {
                gx.push(T::zero());
                gy.push(T::zero());
                continue;
            }
            let get_x = |d: isize| {
                let ii = i as isize + d;
                (ii >= 0 && (ii as usize) < nx && mask[j * nx + ii as usize]).then(|| v[j * nx + ii as usize])
            };
            let get_y = |d: isize| {
                let jj = j as isize + d;
                (jj >= 0 && (jj as usize) < ny && mask[jj as usize * nx + i]).then(|| v[jj as usize * nx + i])
            };
            gx.push(one(&get_x));
            gy.push(one(&get_y));
        }
        (gx, gy)
    });
    let (gx, gy): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    (Field { spec: s, values: gx.concat() }, Field { spec: s, values: gy.concat() })
}

/// Pointwise `|∇²u| = (|uxx|² + 2|uxy|² + |uyy|²)^½`.
pub fn hessian_norm<T: Value>(f: &Field<T>) -> Field<f64> {
    let xx = apply(f, Axis::X, false, 2);
    let yy = apply(f, Axis::Y, false, 2);
    let xy = apply(&apply(f, Axis::X, false, 1), Axis::Y, false, 1);
    let mut out = Vec::with_capacity(f.values.len());
    for k in 0..f.values.len() {
        out.push(
            (xx.values[k].norm_sqr() + 2.0 * xy.values[k].norm_sqr() + yy.values[k].norm_sqr()).sqrt(),
        );
    }
    Field { spec: f.spec, values: out }
}

/// Tension field `τ = Δu + |∇u|²u` with its tangency diagnostic `⟨τ, u⟩`.
#[derive(Debug, Clone)]
pub struct Tension {
    pub tau: Field<Vec3>,
    pub tangency: Field<f64>,
}

impl Tension {
    pub fn max_tangency(&self) -> f64 {
        self.tangency.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn assemble_tension(u: &ManifoldMap, lap: Field<Vec3>, ux: Field<Vec3>, uy: Field<Vec3>) -> Tension {
    let f = u.field();
    let n = f.values.len();
    let mut tau = Vec::with_capacity(n);
    let mut tangency = Vec::with_capacity(n);
    for k in 0..n {
        let e = ux.values[k].norm_squared() + uy.values[k].norm_squared();
        let t = lap.values[k] + f.values[k] * e;
        tangency.push(t.dot(&f.values[k]));
        tau.push(t);
    }
    Tension { tau: Field { spec: f.spec, values: tau }, tangency: Field { spec: f.spec, values: tangency } }
}

pub fn tension_field(u: &ManifoldMap) -> Tension {
    let (ux, uy) = gradient(u.field());
    assemble_tension(u, laplacian(u.field()), ux, uy)
}

pub fn tension_field_periodic(u: &ManifoldMap) -> Tension {
    let (ux, uy) = gradient_periodic(u.field());
    assemble_tension(u, laplacian_periodic(u.field()), ux, uy)
}

/// Nodewise `v/|v|`; fails where `|v| < 0.1`.
pub fn project_to_sphere(v: &Field<Vec3>) -> Result<ManifoldMap> {
    v.check_finite()?;
    let nx = v.spec.nx;
    let mut out = Vec::with_capacity(v.values.len());
    for (k, x) in v.values.iter().enumerate() {
        let n = x.norm();
        if n < 0.1 {
            return Err(Error::DegenerateProjection { i: k % nx, j: k / nx, norm: n });
        }
        out.push(x / n);
    }
    ManifoldMap::new(Field { spec: v.spec, values: out })
}
