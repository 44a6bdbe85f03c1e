//! `nsk analyze (--config FILE | --fields DIR) --out DIR`

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use nsk_core::bubble::{analyze_maps, analyze_spec, BubbleDecomposition, Member, NeckRow};
use nsk_core::field::io::RawField;
use serde::Serialize;

use crate::error::CliResult;
use crate::experiment::{load_map, AnalyzeExperiment, AnalyzeFingerprint, Sequence};
use crate::manifest::{sha256_hex, OutDir, RunManifest};

#[derive(Serialize)]
struct ResidualRow {
    n: u32,
    #[serde(rename = "residual_E")]
    residual_e: f64,
    residual_21: f64,
    residual_osc: Option<f64>,
    residual_hess: f64,
}

fn csv_bytes<T: Serialize>(rows: &[T], header: &[&str]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(header).map_err(|e| crate::error::CliError::io(e.to_string()))?;
    }
    for r in rows {
        w.serialize(r).map_err(|e| crate::error::CliError::io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| crate::error::CliError::io(e.to_string()))
}

/// Two-column plot data with a commented header.
fn xy(header: &str, pts: impl IntoIterator<Item = (f64, f64)>) -> Vec<u8> {
    let mut s = format!("# {header}\n");
    for (x, y) in pts {
        let _ = writeln!(s, "{x} {y}");
    }
    s.into_bytes()
}

fn neck_plots(dir: &mut OutDir, necks: &[NeckRow]) -> CliResult<()> {
    // Keyed by (bubble, kind) so files come out in a fixed order.
    let mut groups: BTreeMap<(usize, String), Vec<&NeckRow>> = BTreeMap::new();
    for r in necks {
        let kind = serde_json::to_value(r.kind)?.as_str().unwrap_or("neck").to_string();
        groups.entry((r.bubble, kind)).or_default().push(r);
    }
    for ((b, kind), rows) in groups {
        let mut ns: Vec<u32> = rows.iter().map(|r| r.n).collect();
        ns.dedup();
        for n in ns {
            let at: Vec<&&NeckRow> = rows.iter().filter(|r| r.n == n).collect();
            let l2 = at.iter().filter_map(|r| r.l2_energy.map(|v| (r.lambda, v)));
            dir.write(&format!("plots/neck_l2_b{b}_{kind}_n{n}.dat"), &xy("lambda l2_energy", l2))?;
        }
        let mut lambdas: Vec<f64> = rows.iter().map(|r| r.lambda).collect();
        lambdas.sort_by(f64::total_cmp);
        lambdas.dedup();
        for lam in lambdas {
            let l21 = rows.iter().filter(|r| r.lambda == lam).filter_map(|r| r.l21.map(|v| (r.n as f64, v)));
            dir.write(&format!("plots/neck_l21_b{b}_{kind}_lambda{lam}.dat"), &xy("n l21", l21))?;
        }
    }
    Ok(())
}

fn emit(dir: &mut OutDir, d: &BubbleDecomposition) -> CliResult<()> {
    dir.write_json("decomposition.json", d)?;
    let res: Vec<ResidualRow> = d
        .members
        .iter()
        .map(|m| ResidualRow {
            n: m.n,
            residual_e: m.residuals.residual_e,
            residual_21: m.residuals.residual_21,
            residual_osc: m.residuals.residual_osc,
            residual_hess: m.residuals.residual_hess,
        })
        .collect();
    dir.write("residuals.csv", &csv_bytes(&res, &["n", "residual_E", "residual_21", "residual_osc", "residual_hess"])?)?;
    let neck_header = [
        "n", "bubble", "kind", "partner", "lambda", "r_inner", "r_outer", "status", "l2_energy", "l21", "hessian_l1",
        "c_lambda",
    ];
    dir.write("neck_ledger.csv", &csv_bytes(&d.necks, &neck_header)?)?;
    let ledger: Vec<_> = d.members.iter().map(|m| &m.ledger).collect();
    dir.write("energy_ledger.csv", &csv_bytes(&ledger, &["n", "total", "body", "bubble", "neck", "closure"])?)?;

    let series = |f: fn(&ResidualRow) -> Option<f64>| res.iter().filter_map(move |r| f(r).map(|v| (r.n as f64, v)));
    dir.write("plots/residual_E.dat", &xy("n residual_E", series(|r| Some(r.residual_e))))?;
    dir.write("plots/residual_21.dat", &xy("n residual_21", series(|r| Some(r.residual_21))))?;
    dir.write("plots/residual_osc.dat", &xy("n residual_osc", series(|r| r.residual_osc)))?;
    dir.write("plots/residual_hess.dat", &xy("n residual_hess", series(|r| Some(r.residual_hess))))?;
    neck_plots(dir, &d.necks)?;

    for m in &d.members {
        for (b, w) in m.bubbles.iter().zip(&m.windows) {
            let mut bytes = Vec::new();
            RawField::from_field(w.field()).write_to(&mut bytes)?;
            dir.write(&format!("windows/n{}_bubble{}.nsk", m.n, b.index), &bytes)?;
        }
    }
    Ok(())
}

/// Per-index residual table and verdict lines; every number printed here
/// is also in `residuals.csv` or `decomposition.json`.
pub fn summary(d: &BubbleDecomposition) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "sequence: {} ({}, identity {}expected)",
        d.name,
        serde_json::to_value(d.source).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
        if d.identity_expected { "" } else { "not " }
    );
    let _ = writeln!(s, "epsilon0_used: {}", d.epsilon0_used);
    let _ = writeln!(s, "concentration points: {}", d.concentration.points.len());
    let _ = writeln!(s, "{:>4} {:>8} {:>14} {:>14} {:>14} {:>14}", "n", "bubbles", "residual_E", "residual_21", "residual_osc", "residual_hess");
    for m in &d.members {
        let r = &m.residuals;
        let osc = r.residual_osc.map_or("-".to_string(), |v| format!("{v:.6}"));
        let _ = writeln!(
            s,
            "{:>4} {:>8} {:>14.6} {:>14.6} {:>14} {:>14.6}",
            m.n,
            m.bubbles.len(),
            r.residual_e,
            r.residual_21,
            osc,
            r.residual_hess
        );
    }
    for v in &d.verdicts {
        let _ = writeln!(s, "{}", v.line());
    }
    s
}

pub fn run(exp: AnalyzeExperiment, out: &Path, seed: u64) -> CliResult<(RunManifest, String)> {
    let mut dir = OutDir::create(out)?;
    let cfg = exp.analysis.clone();
    let (decomposition, fields) = match &exp.sequence {
        Sequence::Spec(spec) => (dir.timed("analysis", |_| Ok(analyze_spec(spec, &cfg)?))?, Vec::new()),
        Sequence::Fields { name, files } => {
            let mut sums = Vec::new();
            let members = dir.timed("load", |_| {
                files
                    .iter()
                    .map(|(n, p)| {
                        sums.push((*n, sha256_hex(&std::fs::read(p)?)));
                        Ok(Member::from_map(*n, load_map(p)?))
                    })
                    .collect::<CliResult<Vec<_>>>()
            })?;
            (dir.timed("analysis", |_| Ok(analyze_maps(name, &members, &cfg)?))?, sums)
        }
    };
    dir.timed("emit", |dir| emit(dir, &decomposition))?;
    let fp = AnalyzeFingerprint {
        spec: match &exp.sequence {
            Sequence::Spec(s) => Some(s),
            Sequence::Fields { .. } => None,
        },
        fields,
        analysis: &cfg,
    };
    let manifest = dir.finish("analyze", &fp, seed)?;
    Ok((manifest, summary(&decomposition)))
}
