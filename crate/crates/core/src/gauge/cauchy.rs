//! Convolution with the Cauchy kernel `1/(πz)` and the Riesz kernel `1/|z|`
//! on a doubled, zero-padded grid via FFT.
//!
//! Kernel entries are cell integrals: Gauss–Legendre quadrature on the cells
//! adjacent to the origin, midpoint values elsewhere; the origin cell is
//! exact (`0` for the Cauchy kernel by symmetry, `4h·ln(1+√2)` for `1/|z|`).

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::field::{Field, GridSpec, Value};
use crate::norms::Region;
use crate::{par, CMat2, CVec2, Complex64, Error, Result};

/// Largest padded grid (entries) a plan may allocate.
pub const PADDED_CAP: usize = 1 << 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// `1/(π z)`: the fundamental solution of `½(∂x + i∂y)`.
    Cauchy,
    /// `1/|z|`.
    Riesz,
}

impl Kernel {
    fn eval(self, x: f64, y: f64) -> Complex64 {
        match self {
            Kernel::Cauchy => Complex64::new(x, -y) / (PI * (x * x + y * y)),
            Kernel::Riesz => Complex64::new(1.0 / (x * x + y * y).sqrt(), 0.0),
        }
    }

    fn origin_cell(self, h: f64) -> Complex64 {
        match self {
            Kernel::Cauchy => Complex64::new(0.0, 0.0),
            Kernel::Riesz => Complex64::new(4.0 * h * (1.0 + 2f64.sqrt()).ln(), 0.0),
        }
    }
}

const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

/// Integral of the kernel over the cell centred at `(cx, cy)` with side `h`,
/// by 8×8 Gauss–Legendre on each of `sub × sub` sub-cells.
fn cell_integral(k: Kernel, cx: f64, cy: f64, h: f64, sub: usize) -> Complex64 {
    let hs = h / sub as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..sub {
        for b in 0..sub {
            let x0 = cx - 0.5 * h + (a as f64 + 0.5) * hs;
            let y0 = cy - 0.5 * h + (b as f64 + 0.5) * hs;
            for &(xi, wi) in &GL8 {
                for &(yj, wj) in &GL8 {
                    acc += k.eval(x0 + 0.5 * hs * xi, y0 + 0.5 * hs * yj) * (wi * wj);
                }
            }
        }
    }
    acc * (0.25 * hs * hs)
}

/// Pre-transformed kernel for repeated convolutions on one grid.
pub struct ConvPlan {
    spec: GridSpec,
    kernel: Kernel,
    px: usize,
    py: usize,
    fx: Arc<dyn Fft<f64>>,
    ifx: Arc<dyn Fft<f64>>,
    fy: Arc<dyn Fft<f64>>,
    ify: Arc<dyn Fft<f64>>,
    /// Kernel spectrum in transposed (`px` rows of length `py`) layout.
    khat: Vec<Complex64>,
}

const ROWS_PER_TASK: usize = 16;

fn fft_rows(buf: &mut [Complex64], len: usize, fft: &Arc<dyn Fft<f64>>) {
    par::for_each_chunk(buf, len * ROWS_PER_TASK, |_, chunk| fft.process(chunk));
}

/// `dst[i * rows + j] = src[j * cols + i]` for a `rows × cols` source.
fn transpose(src: &[Complex64], rows: usize, cols: usize, dst: &mut [Complex64]) {
    par::for_each_chunk(dst, rows, |i, out| {
        for (j, o) in out.iter_mut().enumerate() {
            *o = src[j * cols + i];
        }
    });
}

impl ConvPlan {
    pub fn new(spec: GridSpec, kernel: Kernel) -> Result<Self> {
        let (px, py) = (2 * spec.nx, 2 * spec.ny);
        if px.saturating_mul(py) > PADDED_CAP {
            return Err(Error::MemoryCap { nx: px, ny: py, cap: PADDED_CAP });
        }
        let mut planner = FftPlanner::new();
        let fx = planner.plan_fft_forward(px);
        let ifx = planner.plan_fft_inverse(px);
        let fy = planner.plan_fft_forward(py);
        let ify = planner.plan_fft_inverse(py);
        let h = spec.h();
        // Kernel on the padded torus: offset d maps to index d mod p.
        let offset = |k: usize, p: usize| if k < p / 2 { k as f64 } else { k as f64 - p as f64 };
        let rows = par::map_range(py, |j| {
            let dy = offset(j, py);
            (0..px)
                .map(|i| {
                    let dx = offset(i, px);
                    let (ax, ay) = (dx.abs(), dy.abs());
                    if ax == 0.0 && ay == 0.0 {
                        kernel.origin_cell(h)
                    } else if ax <= 1.0 && ay <= 1.0 {
                        cell_integral(kernel, dx * h, dy * h, h, 4)
                    } else if ax <= 3.0 && ay <= 3.0 {
                        cell_integral(kernel, dx * h, dy * h, h, 1)
                    } else {
                        kernel.eval(dx * h, dy * h) * (h * h)
                    }
                })
                .collect::<Vec<_>>()
        });
        let mut buf = rows.concat();
        fft_rows(&mut buf, px, &fx);
        let mut khat = vec![Complex64::new(0.0, 0.0); px * py];
        transpose(&buf, py, px, &mut khat);
        fft_rows(&mut khat, py, &fy);
        Ok(Self { spec, kernel, px, py, fx, ifx, fy, ify, khat })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    /// `(K * f)(z_i) = Σ_ξ K(z_i − ξ) f(ξ)` for row-major `nx·ny` data.
    pub fn apply(&self, data: &[Complex64]) -> Vec<Complex64> {
        let (nx, ny, px, py) = (self.spec.nx, self.spec.ny, self.px, self.py);
        assert_eq!(data.len(), nx * ny);
        let zero = Complex64::new(0.0, 0.0);
        let mut a = vec![zero; px * py];
        for j in 0..ny {
            a[j * px..j * px + nx].copy_from_slice(&data[j * nx..(j + 1) * nx]);
        }
        fft_rows(&mut a[..ny * px], px, &self.fx);
        let mut b = vec![zero; px * py];
        transpose(&a, py, px, &mut b);
        fft_rows(&mut b, py, &self.fy);
        par::for_each_chunk(&mut b, py * ROWS_PER_TASK, |k, chunk| {
            let base = k * py * ROWS_PER_TASK;
            for (t, v) in chunk.iter_mut().enumerate() {
                *v *= self.khat[base + t];
            }
        });
        fft_rows(&mut b, py, &self.ify);
        // Only the first ny rows of the result are needed.
        par::for_each_chunk(&mut a[..ny * px], px, |j, row| {
            for (i, v) in row.iter_mut().enumerate() {
                *v = b[i * py + j];
            }
        });
        fft_rows(&mut a[..ny * px], px, &self.ifx);
        let norm = 1.0 / (px * py) as f64;
        let mut out = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            out.extend(a[j * px..j * px + nx].iter().map(|v| v * norm));
        }
        out
    }
}

/// Values with complex components that can be convolved entrywise.
pub trait ComplexComponents: Value {
    const N: usize;
    fn component(&self, k: usize) -> Complex64;
    fn set_component(&mut self, k: usize, c: Complex64);
}

impl ComplexComponents for Complex64 {
    const N: usize = 1;
    fn component(&self, _: usize) -> Complex64 {
        *self
    }
    fn set_component(&mut self, _: usize, c: Complex64) {
        *self = c;
    }
}

impl ComplexComponents for CVec2 {
    const N: usize = 2;
    fn component(&self, k: usize) -> Complex64 {
        self[k]
    }
    fn set_component(&mut self, k: usize, c: Complex64) {
        self[k] = c;
    }
}

impl ComplexComponents for CMat2 {
    const N: usize = 4;
    fn component(&self, k: usize) -> Complex64 {
        self[(k / 2, k % 2)]
    }
    fn set_component(&mut self, k: usize, c: Complex64) {
        self[(k / 2, k % 2)] = c;
    }
}

/// Entrywise convolution of a field restricted to `mask` (all cells if `None`).
pub fn convolve<T: ComplexComponents>(plan: &ConvPlan, f: &Field<T>, mask: Option<&[bool]>) -> Field<T> {
    let n = f.values.len();
    let mut out = vec![T::zero(); n];
    for c in 0..T::N {
        let data: Vec<Complex64> = (0..n)
            .map(|k| if mask.map_or(true, |m| m[k]) { f.values[k].component(c) } else { Complex64::new(0.0, 0.0) })
            .collect();
        let r = plan.apply(&data);
        for (o, v) in out.iter_mut().zip(r) {
            o.set_component(c, v);
        }
    }
    Field { spec: f.spec, values: out }
}

/// `(Cf)(z) = ∫_U f(ξ)/(π(z − ξ)) dξ`, evaluated on the grid of `f`.
pub fn cauchy_transform<T: ComplexComponents>(f: &Field<T>, region: &Region) -> Result<Field<T>> {
    f.check_finite()?;
    let plan = ConvPlan::new(f.spec, Kernel::Cauchy)?;
    let mask = region.mask(&f.spec);
    Ok(convolve(&plan, f, Some(&mask)))
}

/// `ℐ₁(f)(z) = ∫_U |f(ξ)|/|z − ξ| dξ`.
pub fn riesz_potential<T: Value>(f: &Field<T>, region: &Region) -> Result<Field<f64>> {
    f.check_finite()?;
    let plan = ConvPlan::new(f.spec, Kernel::Riesz)?;
    let mask = region.mask(&f.spec);
    let m = f.map(|v| Complex64::new(v.norm(), 0.0));
    Ok(convolve(&plan, &m, Some(&mask)).map(|c| c.re))
}
