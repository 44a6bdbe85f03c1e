//! Experiment configuration files (TOML: `key = value` lines under `[sections]`).
//!
//! Relative paths inside a config are resolved against the config's directory.

use std::path::{Path, PathBuf};

use nsk_core::config::AnalysisConfig;
use nsk_core::field::{io::RawField, GridSpec, ManifoldMap};
use nsk_core::flow::{glue_sequence, Boundary, SequenceSpec};
use nsk_core::Vec3;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub fn read_toml(path: &Path) -> CliResult<toml::Table> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    text.parse::<toml::Table>().map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn typed<T: serde::de::DeserializeOwned>(table: toml::Table, what: &str) -> CliResult<T> {
    toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| CliError::usage(format!("{what}: {e}")))
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn config_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeInput {
    /// Sequence spec to generate the ladder from.
    pub spec: Option<PathBuf>,
    /// Directory of field files, one per index (the index is the number in the file name).
    pub fields: Option<PathBuf>,
    pub name: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnalyzeFile {
    input: AnalyzeInput,
    #[serde(default)]
    analysis: AnalysisConfig,
}

pub enum Sequence {
    Spec(SequenceSpec),
    Fields { name: String, files: Vec<(u32, PathBuf)> },
}

pub struct AnalyzeExperiment {
    pub sequence: Sequence,
    pub analysis: AnalysisConfig,
}

/// What the config hash covers: the resolved spec or the input file
/// checksums, plus the analysis parameters.
#[derive(Serialize)]
pub struct AnalyzeFingerprint<'a> {
    pub spec: Option<&'a SequenceSpec>,
    pub fields: Vec<(u32, String)>,
    pub analysis: &'a AnalysisConfig,
}

/// Field files in `dir`, ordered by the integer in their names.
pub fn list_fields(dir: &Path) -> CliResult<Vec<(u32, PathBuf)>> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?;
    let mut out = Vec::new();
    for entry in entries {
        let p = entry?.path();
        if p.extension().and_then(|e| e.to_str()) != Some("nsk") {
            continue;
        }
        let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let digits: String = stem.chars().rev().skip_while(|c| !c.is_ascii_digit()).take_while(char::is_ascii_digit).collect();
        let digits: String = digits.chars().rev().collect();
        let n = digits
            .parse::<u32>()
            .map_err(|_| CliError::usage(format!("{}: file name carries no sequence index", p.display())))?;
        out.push((n, p));
    }
    out.sort();
    if out.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(CliError::usage(format!("{}: duplicate sequence indices", dir.display())));
    }
    if out.is_empty() {
        return Err(CliError::usage(format!("{}: empty sequence (no .nsk files)", dir.display())));
    }
    Ok(out)
}

impl AnalyzeExperiment {
    /// Reads either an experiment file (`[input]` + optional `[analysis]`) or a bare sequence spec.
    pub fn load(path: &Path) -> CliResult<Self> {
        let table = read_toml(path)?;
        let base = config_dir(path);
        if table.contains_key("sequence") {
            let spec: SequenceSpec = typed(table, "sequence spec")?;
            spec.validate()?;
            return Ok(Self { sequence: Sequence::Spec(spec), analysis: AnalysisConfig::default() });
        }
        let f: AnalyzeFile = typed(table, "analyze config")?;
        f.analysis.validate()?;
        let sequence = match (f.input.spec, f.input.fields) {
            (Some(s), None) => Sequence::Spec(SequenceSpec::load(&resolve(&base, &s))?),
            (None, Some(d)) => {
                let dir = resolve(&base, &d);
                Sequence::Fields { name: f.input.name.unwrap_or_else(|| dir_name(&dir)), files: list_fields(&dir)? }
            }
            _ => return Err(CliError::usage("[input] needs exactly one of `spec` or `fields`")),
        };
        Ok(Self { sequence, analysis: f.analysis })
    }

    pub fn from_fields(dir: &Path) -> CliResult<Self> {
        Ok(Self {
            sequence: Sequence::Fields { name: dir_name(dir), files: list_fields(dir)? },
            analysis: AnalysisConfig::default(),
        })
    }
}

fn dir_name(dir: &Path) -> String {
    dir.file_name().and_then(|s| s.to_str()).unwrap_or("fields").to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    /// Explicit time step; defaults to `cfl · h²`.
    pub dt: Option<f64>,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub steps: usize,
    #[serde(default = "one")]
    pub stride: usize,
    #[serde(default = "periodic")]
    pub boundary: Boundary,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_cfl() -> f64 {
    0.2
}
fn one() -> usize {
    1
}
fn periodic() -> Boundary {
    Boundary::Periodic
}
fn default_delta() -> f64 {
    1.5
}

/// Initial data of a flow run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Initial {
    /// A stored map.
    Field { path: PathBuf },
    /// Member `n` of a sequence spec.
    Sequence { spec: PathBuf, n: u32 },
    Constant { value: [f64; 3], domain: [f64; 4], cells: usize },
    /// `x ↦ (cos kx, sin kx, 0)` on `[0, 2π]²`, a harmonic map.
    Geodesic { k: u32, cells: usize },
    /// Smooth random map (seeded): a few Fourier modes around the north pole.
    Random { modes: usize, amplitude: f64, domain: [f64; 4], cells: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub flow: FlowSection,
    pub initial: Initial,
}

impl FlowConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let mut c: Self = typed(read_toml(path)?, "flow config")?;
        let base = config_dir(path);
        match &mut c.initial {
            Initial::Field { path } => *path = resolve(&base, path),
            Initial::Sequence { spec, .. } => *spec = resolve(&base, spec),
            _ => {}
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> CliResult<()> {
        let f = &self.flow;
        if f.dt.is_some_and(|dt| !(dt > 0.0)) || !(f.cfl > 0.0) {
            return Err(CliError::usage("dt and cfl must be positive"));
        }
        if f.stride == 0 {
            return Err(CliError::usage("stride must be at least 1"));
        }
        if !(f.delta > 1.0 && f.delta < 2.0) {
            return Err(CliError::usage("delta must lie in (1, 2)"));
        }
        let cells = match &self.initial {
            Initial::Constant { cells, .. } | Initial::Geodesic { cells, .. } | Initial::Random { cells, .. } => *cells,
            _ => 16,
        };
        if cells < 4 {
            return Err(CliError::usage("initial data needs at least 4 cells per side"));
        }
        Ok(())
    }

    /// Replaces the resolution of generated initial data.
    pub fn override_cells(&mut self, n: usize) {
        match &mut self.initial {
            Initial::Constant { cells, .. } | Initial::Geodesic { cells, .. } | Initial::Random { cells, .. } => *cells = n,
            _ => {}
        }
    }

    pub fn initial_map(&self, seed: u64) -> CliResult<ManifoldMap> {
        let square = |d: &[f64; 4], cells: usize| {
            let ny = ((cells as f64) * (d[3] - d[2]) / (d[1] - d[0])).round().max(1.0) as usize;
            GridSpec::new([d[0], d[2]], [d[1] - d[0], d[3] - d[2]], cells, ny)
        };
        Ok(match &self.initial {
            Initial::Field { path } => load_map(path)?,
            Initial::Sequence { spec, n } => glue_sequence(&SequenceSpec::load(spec)?, *n)?.u,
            Initial::Constant { value, domain, cells } => {
                let v = Vec3::from(*value);
                if !(v.norm() > 0.0) {
                    return Err(CliError::usage("constant value must be nonzero"));
                }
                ManifoldMap::constant(square(domain, *cells)?, v.normalize())?
            }
            Initial::Geodesic { k, cells } => {
                let tau = 2.0 * std::f64::consts::PI;
                let g = GridSpec::new([0.0, 0.0], [tau, tau], *cells, *cells)?;
                let k = *k as f64;
                ManifoldMap::from_fn(g, |x, _| Vec3::new((k * x).cos(), (k * x).sin(), 0.0))?
            }
            Initial::Random { modes, amplitude, domain, cells } => {
                let g = square(domain, *cells)?;
                random_map(g, *modes, *amplitude, seed)?
            }
        })
    }
}

/// `(Σ a_k cos(k·x + φ_k), Σ b_k sin(k·x + ψ_k), 1)` normalised; the third
/// component keeps the map away from the south pole for amplitudes below ½.
pub fn random_map(g: GridSpec, modes: usize, amplitude: f64, seed: u64) -> CliResult<ManifoldMap> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let w = [g.extent[0], g.extent[1]];
    let terms: Vec<[f64; 6]> = (0..modes.max(1))
        .map(|_| {
            let kx = rng.gen_range(1..=3) as f64 * 2.0 * std::f64::consts::PI / w[0];
            let ky = rng.gen_range(0..=3) as f64 * 2.0 * std::f64::consts::PI / w[1];
            [kx, ky, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.0..6.3), rng.gen_range(0.0..6.3)]
        })
        .collect();
    let scale = amplitude / modes.max(1) as f64;
    let v = nsk_core::field::Field::from_fn(g, |x, y| {
        let mut p = Vec3::new(0.0, 0.0, 1.0);
        for [kx, ky, a, b, phi, psi] in &terms {
            let t = kx * x + ky * y;
            p.x += scale * a * (t + phi).cos();
            p.y += scale * b * (t + psi).sin();
        }
        p
    });
    Ok(nsk_core::field::project_to_sphere(&v)?)
}

/// Reads a sphere-valued map; any failure to obtain one is an input error.
pub fn load_map(path: &Path) -> CliResult<ManifoldMap> {
    let raw = RawField::load(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    let f = raw.to_field::<Vec3>().map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    ManifoldMap::new(f).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}
