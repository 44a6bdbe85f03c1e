//! `nsk norms FILE NORM... [--region R]`

use std::path::Path;

use nsk_core::field::io::RawField;
use nsk_core::field::Field;
use nsk_core::norms::{llogl, lorentz21, lorentz2inf, lp, morrey, weak_morrey, NormReport, Region};

use super::parse_region;
use crate::error::{CliError, CliResult};

pub const VALID: &str = "l2, l21, l2inf, llogl, morrey:p:delta, weakmorrey:p:delta";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormName {
    L2,
    L21,
    L2Inf,
    LLogL,
    Morrey { p: f64, delta: f64 },
    WeakMorrey { p: f64, delta: f64 },
}

impl NormName {
    pub fn parse(s: &str) -> CliResult<Self> {
        let unknown = || CliError::usage(format!("unknown norm `{s}`; valid norms: {VALID}"));
        let parts: Vec<&str> = s.split(':').collect();
        let exps = |parts: &[&str]| -> CliResult<(f64, f64)> {
            match parts {
                [p, d] => {
                    let (p, d) = (p.parse::<f64>().map_err(|_| unknown())?, d.parse::<f64>().map_err(|_| unknown())?);
                    if p >= 1.0 && d > 0.0 && d <= 2.0 {
                        Ok((p, d))
                    } else {
                        Err(CliError::usage(format!("`{s}`: need p ≥ 1 and 0 < delta ≤ 2")))
                    }
                }
                _ => Err(unknown()),
            }
        };
        Ok(match parts[0] {
            "l2" if parts.len() == 1 => Self::L2,
            "l21" if parts.len() == 1 => Self::L21,
            "l2inf" if parts.len() == 1 => Self::L2Inf,
            "llogl" if parts.len() == 1 => Self::LLogL,
            "morrey" => {
                let (p, delta) = exps(&parts[1..])?;
                Self::Morrey { p, delta }
            }
            "weakmorrey" => {
                let (p, delta) = exps(&parts[1..])?;
                Self::WeakMorrey { p, delta }
            }
            _ => return Err(unknown()),
        })
    }

    pub fn eval(&self, f: &Field<f64>, region: &Region) -> nsk_core::Result<NormReport> {
        match *self {
            Self::L2 => lp(f, 2.0, region),
            Self::L21 => lorentz21(f, region),
            Self::L2Inf => lorentz2inf(f, region),
            Self::LLogL => llogl(f, region),
            Self::Morrey { p, delta } => morrey(f, p, delta, region),
            Self::WeakMorrey { p, delta } => weak_morrey(f, p, delta, region),
        }
    }
}

/// Norms of the pointwise modulus of the stored field.
pub fn run(file: &Path, names: &[String], region: &str, out: Option<&Path>) -> CliResult<String> {
    // Validate every argument before touching the file.
    let norms: Vec<NormName> = names.iter().map(|s| NormName::parse(s)).collect::<CliResult<_>>()?;
    let region = parse_region(region)?;
    let raw = RawField::load(file).map_err(|e| CliError::io(format!("{}: {e}", file.display())))?;
    let f = raw.modulus();
    let reports: Vec<NormReport> = norms.iter().map(|n| n.eval(&f, &region)).collect::<nsk_core::Result<_>>()?;
    let mut json = serde_json::to_string_pretty(&reports)?;
    json.push('\n');
    if let Some(p) = out {
        std::fs::write(p, &json)?;
    }
    Ok(json)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names() {
        assert_eq!(NormName::parse("l21").unwrap(), NormName::L21);
        assert_eq!(NormName::parse("morrey:1:1.5").unwrap(), NormName::Morrey { p: 1.0, delta: 1.5 });
        for bad in ["l99", "l21:2", "morrey:1", "morrey:x:1", "weakmorrey:0.5:1"] {
            let e = NormName::parse(bad).unwrap_err();
            assert_eq!(e.code, 2, "{bad}");
        }
        assert!(NormName::parse("l99").unwrap_err().message.contains("l2inf"));
    }
}
