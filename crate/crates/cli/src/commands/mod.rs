pub mod analyze;
pub mod fixtures;
pub mod flow;
pub mod gauge;
pub mod hopf;
pub mod norms;

use nsk_core::norms::Region;

use crate::error::{CliError, CliResult};

pub fn parse_region(s: &str) -> CliResult<Region> {
    Region::parse(s).ok_or_else(|| {
        CliError::usage(format!("bad region `{s}`; expected all, disk:cx,cy,r, annulus:cx,cy,r0,r1 or rect:x0,y0,x1,y1"))
    })
}

pub fn parse_pair(s: &str, what: &str) -> CliResult<[f64; 2]> {
    let v: Vec<f64> = s.split(',').map(|t| t.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad_pair(s, what))?;
    match v.as_slice() {
        [a, b] => Ok([*a, *b]),
        _ => Err(bad_pair(s, what)),
    }
}

fn bad_pair(s: &str, what: &str) -> CliError {
    CliError::usage(format!("bad {what} `{s}`; expected two comma-separated numbers"))
}
