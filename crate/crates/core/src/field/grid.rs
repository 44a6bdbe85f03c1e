use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Uniform cell-centred grid with square cells.
///
/// Sample `(i, j)` sits at `origin + ((i + ½)h, (j + ½)h)`; storage is
/// row-major with index `j * nx + i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: [f64; 2],
    pub extent: [f64; 2],
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(origin: [f64; 2], extent: [f64; 2], nx: usize, ny: usize) -> Result<Self> {
        if nx < 8 || ny < 8 {
            return Err(Error::Grid(format!("need at least 8x8 cells, got {nx}x{ny}")));
        }
        if !(extent[0] > 0.0 && extent[1] > 0.0) || !origin.iter().all(|v| v.is_finite()) {
            return Err(Error::Grid(format!("bad extent {extent:?} / origin {origin:?}")));
        }
        let hx = extent[0] / nx as f64;
        let hy = extent[1] / ny as f64;
        if ((hx - hy) / hx).abs() > 1e-12 {
            return Err(Error::Grid(format!("cells are not square: hx = {hx}, hy = {hy}")));
        }
        Ok(Self { origin, extent, nx, ny })
    }

    /// Square `[c - half, c + half]²` with `n × n` cells.
    pub fn square(center: [f64; 2], half: f64, n: usize) -> Result<Self> {
        Self::new([center[0] - half, center[1] - half], [2.0 * half, 2.0 * half], n, n)
    }

    /// Rectangle `[x0, x1] × [y0, y1]` with spacing as close to `h` as the
    /// extent allows (the x extent fixes the final spacing).
    pub fn covering(x0: f64, x1: f64, y0: f64, y1: f64, h: f64) -> Result<Self> {
        let nx = ((x1 - x0) / h).round().max(8.0) as usize;
        let h = (x1 - x0) / nx as f64;
        let ny = ((y1 - y0) / h).round().max(8.0) as usize;
        // Absorb the rounding mismatch into the y extent, centred.
        let ext_y = ny as f64 * h;
        let y0 = y0 + 0.5 * ((y1 - y0) - ext_y);
        Self::new([x0, y0], [x1 - x0, ext_y], nx, ny)
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.extent[0] / self.nx as f64
    }

    #[inline]
    pub fn cell_area(&self) -> f64 {
        let h = self.h();
        h * h
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.origin[0] + (i as f64 + 0.5) * self.h()
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.origin[1] + (j as f64 + 0.5) * self.h()
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        [self.x(i), self.y(j)]
    }

    /// Continuous index coordinates of a physical point (cell centres are integers).
    #[inline]
    pub fn to_index(&self, p: [f64; 2]) -> [f64; 2] {
        let h = self.h();
        [(p[0] - self.origin[0]) / h - 0.5, (p[1] - self.origin[1]) / h - 0.5]
    }

    /// Nearest cell to a physical point, clamped to the grid.
    pub fn nearest(&self, p: [f64; 2]) -> (usize, usize) {
        let q = self.to_index(p);
        let i = q[0].round().clamp(0.0, (self.nx - 1) as f64) as usize;
        let j = q[1].round().clamp(0.0, (self.ny - 1) as f64) as usize;
        (i, j)
    }

    pub fn area(&self) -> f64 {
        self.extent[0] * self.extent[1]
    }

    pub fn center(&self) -> [f64; 2] {
        [self.origin[0] + 0.5 * self.extent[0], self.origin[1] + 0.5 * self.extent[1]]
    }

    /// Whether a physical point lies in the hull of sample points, i.e. where
    /// bilinear interpolation needs no extrapolation.
    pub fn in_sample_hull(&self, p: [f64; 2]) -> bool {
        let q = self.to_index(p);
        q[0] >= 0.0 && q[1] >= 0.0 && q[0] <= (self.nx - 1) as f64 && q[1] <= (self.ny - 1) as f64
    }

    /// Sub-grid of cells `[i0, i0+nx) × [j0, j0+ny)`.
    pub fn window(&self, i0: usize, j0: usize, nx: usize, ny: usize) -> Result<Self> {
        let h = self.h();
        Self::new(
            [self.origin[0] + i0 as f64 * h, self.origin[1] + j0 as f64 * h],
            [nx as f64 * h, ny as f64 * h],
            nx,
            ny,
        )
    }

    pub fn same_domain(&self, other: &Self) -> bool {
        let tol = 1e-9 * (self.extent[0] + self.extent[1]);
        (0..2).all(|k| {
            (self.origin[k] - other.origin[k]).abs() <= tol
                && (self.extent[k] - other.extent[k]).abs() <= tol
        })
    }
}
