//! Distribution functions and the function-space norms used throughout:
//! Lorentz `L^{2,1}` and `L^{2,∞}`, Zygmund `L log L`, Morrey `M^{p,δ}` and
//! weak Morrey `M^{p,δ}_*`.
//!
//! Normalisations: `‖f‖_{L^{2,1}} = ∫₀^∞ λ_f(t)^½ dt` and
//! `‖f‖_{L^{2,∞}} = sup_t t·λ_f(t)^½` with `λ_f(t) = |{|f| ≥ t}|`.

pub mod balls;
mod region;

pub use region::Region;

use serde::Serialize;

use crate::field::{Field, GridSpec, Value};
use crate::{par, Error, Result};

/// `λ_f(t)` on the sorted distinct sample values of `|f|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionFunction {
    pub thresholds: Vec<f64>,
    pub measures: Vec<f64>,
    /// Measure of the whole region (`λ_f(0)`).
    pub total: f64,
}

impl DistributionFunction {
    /// `λ_f(t)` for arbitrary `t > 0` (step function of the samples).
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.total;
        }
        match self.thresholds.partition_point(|&s| s < t) {
            k if k == self.thresholds.len() => 0.0,
            k => self.measures[k],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridInfo {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
}

impl From<&GridSpec> for GridInfo {
    fn from(s: &GridSpec) -> Self {
        Self { nx: s.nx, ny: s.ny, h: s.h() }
    }
}

/// One computed norm. For Morrey-type norms `value` is the p-th root of the
/// supremum and `sup_value` the supremum itself (the `‖f‖^p` convention).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sup_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub region: String,
    pub grid: GridInfo,
    /// Maximising ball `(x, y, r)` for Morrey-type norms.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub argmax: Option<[f64; 3]>,
}

impl NormReport {
    fn plain(name: &str, value: f64, region: &Region, spec: &GridSpec) -> Self {
        Self {
            name: name.into(),
            value,
            sup_value: None,
            p: None,
            delta: None,
            lambda: None,
            region: region.describe(),
            grid: spec.into(),
            argmax: None,
        }
    }
}

/// Sorted `|f|` over the region.
fn sorted_moduli<T: Value>(f: &Field<T>, mask: &[bool]) -> Result<Vec<f64>> {
    f.check_finite()?;
    let mut v: Vec<f64> =
        f.values.iter().zip(mask).filter(|(_, &m)| m).map(|(x, _)| x.norm()).collect();
    if v.is_empty() {
        return Err(Error::EmptyRegion);
    }
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `(t, #{|f| ≥ t})` for each distinct positive sample value, increasing in `t`.
fn level_counts(sorted: &[f64]) -> Vec<(f64, usize)> {
    let n = sorted.len();
    let mut out = Vec::new();
    let mut k = 0;
    while k < n {
        let t = sorted[k];
        let mut e = k;
        while e < n && sorted[e] == t {
            e += 1;
        }
        if t > 0.0 {
            out.push((t, n - k));
        }
        k = e;
    }
    out
}

pub fn distribution<T: Value>(f: &Field<T>, region: &Region) -> Result<DistributionFunction> {
    let mask = region.mask(&f.spec);
    let v = sorted_moduli(f, &mask)?;
    let a = f.spec.cell_area();
    let lc = level_counts(&v);
    Ok(DistributionFunction {
        thresholds: lc.iter().map(|&(t, _)| t).collect(),
        measures: lc.iter().map(|&(_, c)| c as f64 * a).collect(),
        total: v.len() as f64 * a,
    })
}

fn l21_from_sorted(v: &[f64], a: f64) -> f64 {
    let lc = level_counts(v);
    let mut total = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for (t, c) in lc {
        let s = (c as f64 * a).sqrt();
        total += match prev {
            None => t * s,
            Some((tp, sp)) => 0.5 * (t - tp) * (s + sp),
        };
        prev = Some((t, s));
    }
    total
}

/// `∫ λ^½ dt`: trapezoid between sampled thresholds plus the exact rectangle
/// below the smallest positive sample.
pub fn lorentz21<T: Value>(f: &Field<T>, region: &Region) -> Result<NormReport> {
    let mask = region.mask(&f.spec);
    let v = sorted_moduli(f, &mask)?;
    Ok(NormReport::plain("l21", l21_from_sorted(&v, f.spec.cell_area()), region, &f.spec))
}

/// Minimum superlevel-set size (cells) admitted in the `L^{2,∞}` supremum.
pub fn l2inf_floor(region_cells: usize) -> usize {
    (region_cells / 64).clamp(1, 512)
}

/// `sup_t t·λ(t)^½` over sampled thresholds whose superlevel set spans at
/// least [`l2inf_floor`] cells (all thresholds if none does). Superlevel sets
/// smaller than that are dominated by lattice effects at the singularity.
pub fn lorentz2inf<T: Value>(f: &Field<T>, region: &Region) -> Result<NormReport> {
    let mask = region.mask(&f.spec);
    let v = sorted_moduli(f, &mask)?;
    let a = f.spec.cell_area();
    let floor = l2inf_floor(v.len());
    let lc = level_counts(&v);
    let sup = |min: usize| {
        lc.iter().filter(|&&(_, c)| c >= min).map(|&(t, c)| t * (c as f64 * a).sqrt()).fold(0.0, f64::max)
    };
    let value = if lc.iter().any(|&(_, c)| c >= floor) { sup(floor) } else { sup(0) };
    Ok(NormReport::plain("l2inf", value, region, &f.spec))
}

/// `∫|f| log(2 + |f|)` (natural logarithm).
pub fn llogl<T: Value>(f: &Field<T>, region: &Region) -> Result<NormReport> {
    let mask = region.mask(&f.spec);
    f.check_finite()?;
    if !mask.iter().any(|&m| m) {
        return Err(Error::EmptyRegion);
    }
    let nx = f.spec.nx;
    let s = par::sum_range(f.spec.ny, |j| {
        (0..nx)
            .filter(|&i| mask[j * nx + i])
            .map(|i| {
                let m = f.values[j * nx + i].norm();
                m * (2.0 + m).ln()
            })
            .sum()
    });
    Ok(NormReport::plain("llogl", s * f.spec.cell_area(), region, &f.spec))
}

/// `(∫|f|^p)^{1/p}`.
pub fn lp<T: Value>(f: &Field<T>, p: f64, region: &Region) -> Result<NormReport> {
    let mask = region.mask(&f.spec);
    f.check_finite()?;
    if !mask.iter().any(|&m| m) {
        return Err(Error::EmptyRegion);
    }
    let v = f.integral_pow(p, Some(&mask)).powf(1.0 / p);
    let mut r = NormReport::plain(if p == 2.0 { "l2" } else { "lp" }, v, region, &f.spec);
    r.p = Some(p);
    Ok(r)
}

/// Radius ladder for Morrey-type scans.
#[derive(Debug, Clone, Default)]
pub struct MorreyOptions {
    /// Smallest rung (default `2h`).
    pub r_min: Option<f64>,
    /// Explicit radii, replacing the ladder (the inradius rung is still added
    /// unless `exact_radii` is set).
    pub radii: Option<Vec<f64>>,
    pub exact_radii: bool,
}

struct Scan {
    dist: Vec<f64>,
    radii: Vec<f64>,
}

fn prepare_scan(spec: &GridSpec, mask: &[bool], p: f64, delta: f64, opts: &MorreyOptions) -> Result<Scan> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("Morrey exponent p = {p} must be >= 1")));
    }
    if !(0.0..=2.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!("Morrey delta = {delta} outside [0, 2]")));
    }
    if !mask.iter().any(|&m| m) {
        return Err(Error::EmptyRegion);
    }
    let dist = balls::distance_to_complement(spec, mask);
    let inradius = dist.iter().cloned().fold(0.0, f64::max) * (1.0 - 1e-9);
    let h = spec.h();
    let mut radii: Vec<f64> = match &opts.radii {
        Some(r) => r.iter().cloned().filter(|&r| r > 0.0 && r < inradius).collect(),
        None => {
            let r_min = opts.r_min.unwrap_or(2.0 * h);
            (0..).map(|j| r_min * 2f64.powf(0.5 * j as f64)).take_while(|&r| r < inradius).collect()
        }
    };
    if !opts.exact_radii {
        radii.push(inradius);
    }
    radii.dedup();
    Ok(Scan { dist, radii })
}

fn morrey_report(name: &str, sup: f64, arg: [f64; 3], p: f64, delta: f64, region: &Region, spec: &GridSpec) -> NormReport {
    NormReport {
        name: name.into(),
        value: sup.powf(1.0 / p),
        sup_value: Some(sup),
        p: Some(p),
        delta: Some(delta),
        lambda: None,
        region: region.describe(),
        grid: spec.into(),
        argmax: Some(arg),
    }
}

/// `sup_{B_r(x) ⊂ U} r^{δ−2} ∫_{B_r(x)} |f|^p` over cell-centred balls with
/// radii on the ladder `r_min·2^{j/2}` plus the inradius.
pub fn morrey<T: Value>(f: &Field<T>, p: f64, delta: f64, region: &Region) -> Result<NormReport> {
    morrey_with(f, p, delta, region, &MorreyOptions::default())
}

pub fn morrey_with<T: Value>(
    f: &Field<T>,
    p: f64,
    delta: f64,
    region: &Region,
    opts: &MorreyOptions,
) -> Result<NormReport> {
    f.check_finite()?;
    let spec = f.spec;
    let mask = region.mask(&spec);
    let scan = prepare_scan(&spec, &mask, p, delta, opts)?;
    let (nx, ny, h, a) = (spec.nx, spec.ny, spec.h(), spec.cell_area());
    let w: Vec<f64> = f.values.iter().map(|v| v.norm().powf(p)).collect();
    let prefix = balls::row_prefix(&spec, &w);
    let mut best = (0.0f64, [spec.x(0), spec.y(0), 0.0]);
    for &r in &scan.radii {
        let rows = balls::ball_rows(r / h);
        let scale = r.powf(delta - 2.0) * a;
        let per_row = par::map_range(ny, |j| {
            let mut m = (0.0f64, 0usize);
            for i in 0..nx {
                if scan.dist[j * nx + i] > r {
                    let s = balls::ball_sum(&prefix, nx, &rows, i, j);
                    if s > m.0 {
                        m = (s, i);
                    }
                }
            }
            m
        });
        for (j, (s, i)) in per_row.into_iter().enumerate() {
            let v = s * scale;
            if v > best.0 {
                best = (v, [spec.x(i), spec.y(j), r]);
            }
        }
    }
    Ok(morrey_report("morrey", best.0, best.1, p, delta, region, &spec))
}

/// `sup_{B_r(x) ⊂ U} r^{δ−2} sup_λ λ^p |{y ∈ B_r(x): |f(y)| ≥ λ}|`.
///
/// Centres are taken on the lattice of stride `max(1, ⌊r/2h⌋)` cells; every
/// scanned ball is also scanned by [`morrey`] with the same options, so the
/// weak value never exceeds the strong one.
pub fn weak_morrey<T: Value>(f: &Field<T>, p: f64, delta: f64, region: &Region) -> Result<NormReport> {
    weak_morrey_with(f, p, delta, region, &MorreyOptions::default())
}

pub fn weak_morrey_with<T: Value>(
    f: &Field<T>,
    p: f64,
    delta: f64,
    region: &Region,
    opts: &MorreyOptions,
) -> Result<NormReport> {
    f.check_finite()?;
    let spec = f.spec;
    let mask = region.mask(&spec);
    let scan = prepare_scan(&spec, &mask, p, delta, opts)?;
    let (nx, ny, h, a) = (spec.nx, spec.ny, spec.h(), spec.cell_area());
    let w: Vec<f64> = f.values.iter().map(|v| v.norm()).collect();
    let mut best = (0.0f64, [spec.x(0), spec.y(0), 0.0]);
    for &r in &scan.radii {
        let rows = balls::ball_rows(r / h);
        let stride = ((r / (2.0 * h)).floor() as usize).max(1);
        let scale = r.powf(delta - 2.0) * a;
        let js: Vec<usize> = (0..ny).step_by(stride).collect();
        let per_row = par::map_slice(&js, |&j| {
            let mut buf = Vec::new();
            let mut m = (0.0f64, 0usize);
            for i in (0..nx).step_by(stride) {
                if scan.dist[j * nx + i] > r {
                    balls::ball_values(&w, nx, &rows, i, j, &mut buf);
                    buf.sort_by(|x, y| y.total_cmp(x));
                    let s = buf
                        .iter()
                        .enumerate()
                        .map(|(k, &v)| v.powf(p) * (k + 1) as f64)
                        .fold(0.0, f64::max);
                    if s > m.0 {
                        m = (s, i);
                    }
                }
            }
            m
        });
        for (&j, (s, i)) in js.iter().zip(per_row) {
            let v = s * scale;
            if v > best.0 {
                best = (v, [spec.x(i), spec.y(j), r]);
            }
        }
    }
    Ok(morrey_report("weak_morrey", best.0, best.1, p, delta, region, &spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn disk_indicator(n: usize, half: f64, r: f64) -> Field<f64> {
        let g = GridSpec::square([0.0, 0.0], half, n).unwrap();
        Field::from_fn(g, move |x, y| if x * x + y * y <= r * r { 1.0 } else { 0.0 })
    }

    #[test]
    fn distribution_of_zero_and_disk() {
        let z = Field::<f64>::zeros(GridSpec::square([0.0, 0.0], 1.0, 16).unwrap());
        let d = distribution(&z, &Region::All).unwrap();
        assert!(d.thresholds.is_empty());
        assert_eq!(d.eval(1e-9), 0.0);

        let f = disk_indicator(256, 2.0, 1.0);
        let d = distribution(&f, &Region::All).unwrap();
        assert!((d.eval(0.5) - PI).abs() < 4.0 * f.spec.h() * 2.0 * PI);
    }

    #[test]
    fn distribution_of_inverse_radius() {
        let g = GridSpec::square([0.0, 0.0], 1.0, 256).unwrap();
        let f = Field::from_fn(g, |x, y| 1.0 / (x * x + y * y).sqrt());
        let d = distribution(&f, &Region::disk([0.0, 0.0], 1.0)).unwrap();
        assert!((d.eval(2.0) - PI / 4.0).abs() < 2.0 * PI * 0.5 * g.h());
    }

    #[test]
    fn plateau_norms_are_exact() {
        let g = GridSpec::square([0.5, 0.5], 0.5, 32).unwrap();
        let c = 3.0;
        let f = Field::constant(g, c);
        assert!((lorentz21(&f, &Region::All).unwrap().value - c).abs() < 1e-12);
        assert!((lorentz2inf(&f, &Region::All).unwrap().value - c).abs() < 1e-12);
        assert!((llogl(&f, &Region::All).unwrap().value - c * (2.0 + c).ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_field_norms_vanish() {
        let g = GridSpec::square([0.0, 0.0], 1.0, 32).unwrap();
        let f = Field::<f64>::zeros(g);
        for r in [
            lorentz21(&f, &Region::All),
            lorentz2inf(&f, &Region::All),
            llogl(&f, &Region::All),
            morrey(&f, 1.0, 1.0, &Region::All),
            weak_morrey(&f, 1.0, 1.0, &Region::All),
        ] {
            assert_eq!(r.unwrap().value, 0.0);
        }
    }

    #[test]
    fn empty_region_and_bad_parameters_are_errors() {
        let f = disk_indicator(32, 1.0, 0.5);
        let far = Region::disk([10.0, 10.0], 0.1);
        assert!(matches!(lorentz21(&f, &far), Err(Error::EmptyRegion)));
        assert!(matches!(morrey(&f, 0.5, 1.0, &Region::All), Err(Error::InvalidParameter(_))));
        assert!(matches!(morrey(&f, 1.0, 2.5, &Region::All), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn morrey_of_unit_disk_indicator() {
        let f = disk_indicator(128, 1.0, 1.0);
        let r = morrey(&f, 1.0, 1.0, &Region::disk([0.0, 0.0], 1.0)).unwrap();
        assert!((r.value - PI).abs() < 0.05 * PI, "{}", r.value);
    }

    #[test]
    fn morrey_delta_two_is_lp_of_largest_ball() {
        let g = GridSpec::square([0.0, 0.0], 1.0, 64).unwrap();
        let f = Field::from_fn(g, |x, y| 1.0 + x * x + (3.0 * y).sin());
        let region = Region::disk([0.0, 0.0], 0.9);
        let m = morrey(&f, 2.0, 2.0, &region).unwrap();
        let l = lp(&f, 2.0, &region).unwrap();
        assert!(m.value <= l.value + 1e-12);
        assert!(m.value >= 0.9 * l.value);
    }

    #[test]
    fn weak_morrey_of_inverse_square_root_is_stable() {
        let mut weak = Vec::new();
        for n in [64, 128] {
            let g = GridSpec::square([0.0, 0.0], 1.0, n).unwrap();
            let f = Field::from_fn(g, |x, y| 1.0 / (x * x + y * y).sqrt());
            let region = Region::disk([0.0, 0.0], 1.0);
            let w = weak_morrey(&f, 2.0, 2.0, &region).unwrap();
            let s = morrey(&f, 2.0, 2.0, &region).unwrap();
            assert!(w.value <= s.value);
            weak.push(w.sup_value.unwrap());
        }
        assert!((weak[1] / weak[0] - 1.0).abs() < 0.1, "{weak:?}");
    }
}
