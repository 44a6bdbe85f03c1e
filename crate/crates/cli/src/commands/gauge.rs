//! `nsk gauge FILE [--region R] [--dump-gauge --out DIR]`

use std::path::Path;

use nsk_core::field::io::RawField;
use nsk_core::field::tension_field;
use nsk_core::gauge::{dbar_decompose, GaugeOptions};

use super::parse_region;
use crate::error::{CliError, CliResult};
use crate::experiment::load_map;
use crate::manifest::OutDir;

/// Prints the decomposition diagnostics; with `dump`, writes every
/// constituent field of the decomposition to `out/gauge/`.
pub fn run(file: &Path, region: &str, dump: bool, out: Option<&Path>, seed: u64) -> CliResult<String> {
    let region = parse_region(region)?;
    if dump && out.is_none() {
        return Err(CliError::usage("--dump-gauge needs --out"));
    }
    let u = load_map(file)?;
    let tau = tension_field(&u).tau;
    let data = dbar_decompose(&u, &tau, &region, &GaugeOptions::default())?;
    let mut json = serde_json::to_string_pretty(&data.diagnostics)?;
    json.push('\n');
    if let Some(out) = out {
        let mut dir = OutDir::create(out)?;
        dir.write("gauge.json", json.as_bytes())?;
        if dump {
            let mut put = |name: &str, raw: RawField| -> CliResult<()> {
                let mut bytes = Vec::new();
                raw.write_to(&mut bytes)?;
                dir.write(&format!("gauge/{name}.nsk"), &bytes)
            };
            put("e1", RawField::from_field(&data.frame.e1))?;
            put("e2", RawField::from_field(&data.frame.e2))?;
            put("theta", RawField::from_field(&data.frame.theta))?;
            put("omega", RawField::from_field(&data.omega.omega))?;
            put("b", RawField::from_field(&data.b))?;
            put("g", RawField::from_field(&data.g))?;
            put("t_u", RawField::from_field(&data.t_u))?;
            put("g1", RawField::from_field(&data.g1))?;
            put("g2", RawField::from_field(&data.g2))?;
        }
        let fp = serde_json::json!({
            "input_sha256": crate::manifest::sha256_hex(&std::fs::read(file)?),
            "region": region.describe(),
            "dump": dump,
        });
        dir.finish("gauge", &fp, seed)?;
    }
    Ok(json)
}
