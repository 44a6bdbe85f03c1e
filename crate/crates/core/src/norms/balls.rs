//! Ball families for Morrey-type suprema.
//!
//! A ball `B_R(x)` is the set of cells whose centres lie within `R` of the
//! cell centre `x`. It is admissible for a region when every such cell is in
//! the region; with `d(x)` the Euclidean distance from `x` to the nearest
//! cell outside the region (cells beyond the grid edge count as outside),
//! admissibility is exactly `R < d(x)`.

use crate::field::GridSpec;

const INF: f64 = 1e30;

/// 1D squared distance transform (Felzenszwalb–Huttenlocher).
fn dt1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = -INF;
    z[1] = INF;
    for q in 1..n {
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] && k > 0 {
                k -= 1;
            } else if s <= z[k] {
                // k == 0 and the new parabola dominates everywhere.
                v[0] = q;
                z[0] = -INF;
                z[1] = INF;
                break;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = INF;
                break;
            }
        }
    }
    k = 0;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q as f64 - p as f64;
        out[q] = d * d + f[p];
    }
}

/// Distance (physical units) from each cell to the nearest cell outside `mask`.
pub fn distance_to_complement(spec: &GridSpec, mask: &[bool]) -> Vec<f64> {
    let (nx, ny) = (spec.nx, spec.ny);
    let (px, py) = (nx + 2, ny + 2);
    let mut g = vec![0.0; px * py];
    for j in 0..ny {
        for i in 0..nx {
            if mask[j * nx + i] {
                g[(j + 1) * px + i + 1] = INF;
            }
        }
    }
    // Columns.
    let cols = crate::par::map_range(px, |i| {
        let f: Vec<f64> = (0..py).map(|j| g[j * px + i]).collect();
        let mut out = vec![0.0; py];
        let mut v = vec![0usize; py];
        let mut z = vec![0.0; py + 1];
        dt1d(&f, &mut out, &mut v, &mut z);
        out
    });
    for (i, col) in cols.iter().enumerate() {
        for j in 0..py {
            g[j * px + i] = col[j];
        }
    }
    // Rows (only the interior ones are needed).
    let h = spec.h();
    let rows = crate::par::map_range(ny, |j| {
        let f = &g[(j + 1) * px..(j + 2) * px];
        let mut out = vec![0.0; px];
        let mut v = vec![0usize; px];
        let mut z = vec![0.0; px + 1];
        dt1d(f, &mut out, &mut v, &mut z);
        out[1..=nx].iter().map(|d2| d2.sqrt() * h).collect::<Vec<_>>()
    });
    rows.concat()
}

/// Row-wise prefix sums `P[j][i] = Σ_{i' < i} w[j][i']`, rows of length `nx + 1`.
pub fn row_prefix(spec: &GridSpec, w: &[f64]) -> Vec<f64> {
    let nx = spec.nx;
    let mut p = vec![0.0; (nx + 1) * spec.ny];
    for j in 0..spec.ny {
        let (src, dst) = (&w[j * nx..(j + 1) * nx], &mut p[j * (nx + 1)..(j + 1) * (nx + 1)]);
        let mut acc = 0.0;
        for i in 0..nx {
            acc += src[i];
            dst[i + 1] = acc;
        }
    }
    p
}

/// Row half-widths (in cells) of the discrete ball of radius `r_cells`.
pub fn ball_rows(r_cells: f64) -> Vec<usize> {
    let m = (r_cells + 1e-9).floor() as usize;
    let r2 = r_cells * r_cells;
    (0..=m)
        .map(|dj| ((r2 - (dj * dj) as f64).max(0.0).sqrt() + 1e-9).floor() as usize)
        .collect()
}

/// Sum of `w` over the ball with the given row half-widths at `(i, j)`; the
/// ball must lie inside the grid.
#[inline]
pub fn ball_sum(prefix: &[f64], nx: usize, rows: &[usize], i: usize, j: usize) -> f64 {
    let stride = nx + 1;
    let mut s = 0.0;
    for (dj, &w) in rows.iter().enumerate() {
        let lo = i - w;
        let hi = i + w + 1;
        let r = (j + dj) * stride;
        s += prefix[r + hi] - prefix[r + lo];
        if dj > 0 {
            let r = (j - dj) * stride;
            s += prefix[r + hi] - prefix[r + lo];
        }
    }
    s
}

/// Values of `w` inside the ball (for per-ball distribution functions).
pub fn ball_values(w: &[f64], nx: usize, rows: &[usize], i: usize, j: usize, out: &mut Vec<f64>) {
    out.clear();
    for (dj, &hw) in rows.iter().enumerate() {
        let r = (j + dj) * nx;
        out.extend_from_slice(&w[r + i - hw..=r + i + hw]);
        if dj > 0 {
            let r = (j - dj) * nx;
            out.extend_from_slice(&w[r + i - hw..=r + i + hw]);
        }
    }
}
