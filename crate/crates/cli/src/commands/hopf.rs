//! `nsk hopf FILE --center x,y --radius r [--emit-laurent --out DIR]`

use std::path::Path;

use nsk_core::config::AnalysisConfig;
use nsk_core::field::tension_field;
use nsk_core::hopf::{hopf_report, laurent_coefficients, AnnulusSpec};
use nsk_core::norms::Region;

use crate::error::{CliError, CliResult};
use crate::experiment::load_map;
use crate::manifest::OutDir;

pub struct HopfArgs<'a> {
    pub file: &'a Path,
    pub center: Option<[f64; 2]>,
    pub radius: Option<f64>,
    pub emit_laurent: bool,
    pub out: Option<&'a Path>,
    pub config: Option<&'a Path>,
    pub seed: u64,
}

/// Hopf report on `B_r(center)`; the Laurent table is taken on the annulus
/// `r < |z − c| < 2r` with modes `−M..=M`.
pub fn run(a: &HopfArgs) -> CliResult<String> {
    let cfg = match a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(format!("{}: {e}", p.display())))?;
            AnalysisConfig::from_toml(&text)?
        }
        None => AnalysisConfig::default(),
    };
    if a.emit_laurent && a.out.is_none() {
        return Err(CliError::usage("--emit-laurent needs --out"));
    }
    if a.radius.is_some_and(|r| !(r > 0.0)) {
        return Err(CliError::usage("radius must be positive"));
    }
    let u = load_map(a.file)?;
    let spec = *u.spec();
    let center = a.center.unwrap_or_else(|| spec.center());
    let r = a.radius.unwrap_or(0.125 * spec.extent[0].min(spec.extent[1]));
    let tau = tension_field(&u).tau;
    let report = hopf_report(&u, &tau, center, r, cfg.delta, &Region::All, cfg.max_degree, None)?;
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    if let Some(out) = a.out {
        let mut dir = OutDir::create(out)?;
        dir.write("hopf.json", json.as_bytes())?;
        if a.emit_laurent {
            let ann = AnnulusSpec { center, r_inner: r, r_outer: 2.0 * r };
            let m = cfg.laurent_modes;
            let series = laurent_coefficients(&report.h, &ann, -m, m)?;
            let mut csv = String::from("n,re,im\n");
            for (k, c) in series.coeffs.iter().enumerate() {
                csv.push_str(&format!("{},{},{}\n", series.n_min + k as i32, c.re, c.im));
            }
            dir.write("laurent.csv", csv.as_bytes())?;
        }
        let fp = serde_json::json!({
            "input_sha256": crate::manifest::sha256_hex(&std::fs::read(a.file)?),
            "center": center,
            "radius": r,
            "emit_laurent": a.emit_laurent,
            "analysis": cfg,
        });
        dir.finish("hopf", &fp, a.seed)?;
    }
    Ok(json)
}
