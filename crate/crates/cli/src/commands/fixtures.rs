//! `nsk make-fixtures --out DIR [--grid N] [--seed S]`: the analytic test
//! corpus as field files, sequence specs and ready-to-run configs.

use std::path::Path;

use nsk_core::field::io::RawField;
use nsk_core::field::{Field, GridSpec, ManifoldMap, Value};
use nsk_core::flow::{parker_counterexample_sequence, rational_bubble, BubbleSpec, RationalMap, SequenceSpec};
use nsk_core::Vec3;

use crate::error::CliResult;
use crate::experiment::random_map;
use crate::manifest::{OutDir, RunManifest};

pub const DEFAULT_GRID: usize = 256;

fn put<T: Value>(dir: &mut OutDir, name: &str, f: &Field<T>) -> CliResult<()> {
    let mut bytes = Vec::new();
    RawField::from_field(f).write_to(&mut bytes)?;
    dir.write(name, &bytes)
}

const FLOW_CONSTANT: &str = "\
[flow]
steps = 20
stride = 5
boundary = \"dirichlet\"

[initial]
kind = \"constant\"
value = [0.0, 0.0, 1.0]
domain = [-1.0, 1.0, -1.0, 1.0]
cells = 32
";

const FLOW_HARMONIC: &str = "\
[flow]
steps = 100
stride = 20
boundary = \"periodic\"

[initial]
kind = \"geodesic\"
k = 2
cells = 64
";

const FLOW_RANDOM: &str = "\
[flow]
steps = 200
stride = 50
boundary = \"periodic\"

[initial]
kind = \"random\"
modes = 4
amplitude = 0.4
domain = [0.0, 1.0, 0.0, 1.0]
cells = 64
";

const ANALYZE_SINGLE: &str = "\
[input]
spec = \"single.toml\"

[analysis]
c0 = 4.0
";

pub fn run(out: &Path, grid: Option<usize>, seed: u64) -> CliResult<RunManifest> {
    let n = grid.unwrap_or(DEFAULT_GRID);
    if n < 16 {
        return Err(crate::error::CliError::usage("--grid must be at least 16"));
    }
    let mut dir = OutDir::create(out)?;
    dir.timed("fields", |dir| {
        // χ_{B_1}: ‖·‖_{L^{2,1}} = √π, ‖·‖_{L log L} = π log 3.
        let g = GridSpec::square([0.0, 0.0], 1.5, n)?;
        put(dir, "chi_disk.nsk", &Field::from_fn(g, |x, y| if x * x + y * y < 1.0 { 1.0 } else { 0.0 }))?;
        // 1/|z| on B_1: ‖·‖_{L^{2,∞}} = √π.
        let g = GridSpec::square([0.0, 0.0], 1.0, 2 * n)?;
        put(dir, "inv_z.nsk", &Field::from_fn(g, |x, y| {
            let r2 = x * x + y * y;
            if r2 < 1.0 { 1.0 / r2.sqrt() } else { 0.0 }
        }))?;
        let g = GridSpec::square([0.0, 0.0], 1.0, n)?;
        let bubble = |scale: f64| BubbleSpec { map: RationalMap::identity(), center: [0.0, 0.0], scale };
        put(dir, "bubble.nsk", rational_bubble(&bubble(0.2), g)?.field())?;
        put(dir, "bubble_small.nsk", rational_bubble(&bubble(0.1), g)?.field())?;
        put(dir, "constant.nsk", ManifoldMap::constant(g, Vec3::z())?.field())?;
        let tau = 2.0 * std::f64::consts::PI;
        let gp = GridSpec::new([0.0, 0.0], [tau, tau], n, n)?;
        put(dir, "geodesic.nsk", ManifoldMap::from_fn(gp, |x, _| Vec3::new((2.0 * x).cos(), (2.0 * x).sin(), 0.0))?.field())?;
        put(dir, "random.nsk", random_map(GridSpec::square([0.5, 0.5], 0.5, n)?, 4, 0.4, seed)?.field())
    })?;
    dir.timed("configs", |dir| {
        let mut harmonic = SequenceSpec::single_bubble(3, 7);
        harmonic.sequence.name = "harmonic-neck".into();
        harmonic.glue.beta = 0.25;
        for (name, spec) in [
            ("single.toml", SequenceSpec::single_bubble(3, 7)),
            ("quick.toml", SequenceSpec::single_bubble(3, 5)),
            ("two.toml", SequenceSpec::two_bubbles(3, 7)),
            ("harmonic.toml", harmonic),
            ("parker.toml", parker_counterexample_sequence(3, 7)),
        ] {
            dir.write(name, spec.to_toml().as_bytes())?;
        }
        dir.write("flow_constant.toml", FLOW_CONSTANT.as_bytes())?;
        dir.write("flow_harmonic.toml", FLOW_HARMONIC.as_bytes())?;
        dir.write("flow_random.toml", FLOW_RANDOM.as_bytes())?;
        dir.write("analyze_single.toml", ANALYZE_SINGLE.as_bytes())
    })?;
    dir.finish("make-fixtures", &serde_json::json!({ "grid": n, "seed": seed }), seed)
}
