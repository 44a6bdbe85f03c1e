//! Declarative description of a bubbling sequence `u_n`, read from and
//! written to TOML.
//!
//! ```toml
//! [sequence]
//! name = "single"
//! domain = [-1.0, 1.0, -1.0, 1.0]
//! points_per_scale = 4.0
//! n_min = 3
//! n_max = 7
//!
//! [base]
//! kind = "constant"
//! value = [0.0, 0.0, 1.0]
//!
//! [glue]
//! beta = 0.5
//! factor = 1.0
//!
//! [[bubble]]
//! numerator = [[0.0, 0.0], [1.0, 0.0]]
//! denominator = [[1.0, 0.0]]
//! center = [0.0, 0.0]
//! scale = { c = 1.0, q = 1.0 }
//! ```

use serde::{Deserialize, Serialize};

use super::rational::{BubbleSpec, Poly, RationalMap};
use crate::field::GridSpec;
use crate::{Complex64, Error, Result, Vec3};

/// `r_n = c · 2^{−q n}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleLaw {
    pub c: f64,
    pub q: f64,
}

impl ScaleLaw {
    pub fn at(&self, n: u32) -> f64 {
        self.c * 2f64.powf(-self.q * n as f64)
    }
}

fn default_pps() -> f64 {
    4.0
}

fn default_max_cells() -> usize {
    1 << 22
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderSection {
    #[serde(default)]
    pub name: String,
    /// `[x0, x1, y0, y1]`.
    pub domain: [f64; 4],
    /// Cells per smallest bubble scale: `h_n = min_i r_n^i / points_per_scale`.
    #[serde(default = "default_pps")]
    pub points_per_scale: f64,
    /// Fixed number of cells along x, overriding `points_per_scale`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    pub n_min: u32,
    pub n_max: u32,
    #[serde(default = "default_max_cells")]
    pub max_cells: usize,
    /// Whether the energy identity is expected to hold along the ladder.
    #[serde(default = "default_true")]
    pub identity_expected: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BaseMap {
    Constant { value: [f64; 3] },
    /// A fixed smooth rational map `S⁻¹(φ((x − center)/scale))`.
    Rational {
        numerator: Vec<Complex64>,
        denominator: Vec<Complex64>,
        #[serde(default)]
        antiholomorphic: bool,
        center: [f64; 2],
        scale: f64,
    },
}

impl BaseMap {
    pub fn north() -> Self {
        BaseMap::Constant { value: [0.0, 0.0, 1.0] }
    }

    pub fn eval(&self, p: [f64; 2]) -> Vec3 {
        match self {
            BaseMap::Constant { value } => Vec3::from(*value).normalize(),
            BaseMap::Rational { numerator, denominator, antiholomorphic, center, scale } => BubbleSpec {
                map: RationalMap {
                    numerator: Poly(numerator.clone()),
                    denominator: Poly(denominator.clone()),
                    antiholomorphic: *antiholomorphic,
                },
                center: *center,
                scale: *scale,
            }
            .eval(p),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            BaseMap::Constant { value } if Vec3::from(*value).norm() < 1e-12 => {
                Err(Error::Config("constant base value must be non-zero".into()))
            }
            BaseMap::Rational { numerator, denominator, antiholomorphic, scale, .. } => {
                if !(*scale > 0.0) {
                    return Err(Error::Config("base scale must be positive".into()));
                }
                RationalMap {
                    numerator: Poly(numerator.clone()),
                    denominator: Poly(denominator.clone()),
                    antiholomorphic: *antiholomorphic,
                }
                .validate()
            }
            _ => Ok(()),
        }
    }
}

/// Cutoff radius `ρ_c = factor · r^β`; the transition band is `[ρ_c/2, ρ_c]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlueParams {
    pub beta: f64,
    pub factor: f64,
}

impl Default for GlueParams {
    fn default() -> Self {
        Self { beta: 0.5, factor: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BubbleEntry {
    pub numerator: Vec<Complex64>,
    pub denominator: Vec<Complex64>,
    #[serde(default)]
    pub antiholomorphic: bool,
    pub center: [f64; 2],
    pub scale: ScaleLaw,
}

impl BubbleEntry {
    pub fn degree_one(center: [f64; 2], scale: ScaleLaw) -> Self {
        let m = RationalMap::identity();
        Self { numerator: m.numerator.0, denominator: m.denominator.0, antiholomorphic: false, center, scale }
    }

    pub fn map(&self) -> RationalMap {
        RationalMap {
            numerator: Poly(self.numerator.clone()),
            denominator: Poly(self.denominator.clone()),
            antiholomorphic: self.antiholomorphic,
        }
    }

    pub fn at(&self, n: u32) -> BubbleSpec {
        BubbleSpec { map: self.map(), center: self.center, scale: self.scale.at(n) }
    }
}

/// Energy-leaking ring around each bubble centre: the glued map is rotated
/// by `ψ(ln ρ)` about an axis orthogonal to the base value, with
/// `ψ(t) = A sin²(π(t − t₀)/W)` on `[t₀, t₀ + W]`, `t₀ = ln(start · r_n)`,
/// `W_n = width · (r_n / r_{n_min})^ζ` and `A` chosen so that the ring
/// carries `energy` (`∫|∇·|² = π³A²/W`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeakRing {
    pub energy: f64,
    pub start: f64,
    pub width: f64,
    pub zeta: f64,
}

impl LeakRing {
    pub fn log_width(&self, r: f64, r_ref: f64) -> f64 {
        self.width * (r / r_ref).powf(self.zeta)
    }

    pub fn amplitude(&self, w: f64) -> f64 {
        (self.energy * w / std::f64::consts::PI.powi(3)).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub sequence: LadderSection,
    pub base: BaseMap,
    #[serde(default)]
    pub glue: GlueParams,
    #[serde(default, rename = "bubble")]
    pub bubbles: Vec<BubbleEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leak: Option<LeakRing>,
}

/// Pairwise separation `max{r^i/r^j, r^j/r^i, |x^i − x^j|/(r^i + r^j)}`.
pub fn separation(a: &BubbleSpec, b: &BubbleSpec) -> f64 {
    let d = ((a.center[0] - b.center[0]).powi(2) + (a.center[1] - b.center[1]).powi(2)).sqrt();
    (a.scale / b.scale).max(b.scale / a.scale).max(d / (a.scale + b.scale))
}

impl SequenceSpec {
    pub fn from_toml(s: &str) -> Result<Self> {
        let spec: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("sequence spec serialises")
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Single degree-1 bubble at the origin over the constant north-pole
    /// base, `r_n = 2^{−n}`.
    pub fn single_bubble(n_min: u32, n_max: u32) -> Self {
        Self {
            sequence: LadderSection {
                name: "single-bubble".into(),
                domain: [-1.0, 1.0, -1.0, 1.0],
                points_per_scale: default_pps(),
                resolution: None,
                n_min,
                n_max,
                max_cells: default_max_cells(),
                identity_expected: true,
                note: None,
            },
            base: BaseMap::north(),
            glue: GlueParams::default(),
            bubbles: vec![BubbleEntry::degree_one([0.0, 0.0], ScaleLaw { c: 1.0, q: 1.0 })],
            leak: None,
        }
    }

    /// Two degree-1 bubbles at `(±0.7, 0)` on `[−1.5, 1.5] × [−1, 1]`.
    pub fn two_bubbles(n_min: u32, n_max: u32) -> Self {
        let mut s = Self::single_bubble(n_min, n_max);
        s.sequence.name = "two-bubbles".into();
        s.sequence.domain = [-1.5, 1.5, -1.0, 1.0];
        s.bubbles = vec![
            BubbleEntry::degree_one([-0.7, 0.0], ScaleLaw { c: 1.0, q: 1.0 }),
            BubbleEntry::degree_one([0.7, 0.0], ScaleLaw { c: 1.0, q: 1.0 }),
        ];
        s
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<u32> {
        self.sequence.n_min..=self.sequence.n_max
    }

    pub fn bubbles_at(&self, n: u32) -> Vec<BubbleSpec> {
        self.bubbles.iter().map(|b| b.at(n)).collect()
    }

    /// Grid for index `n`.
    pub fn grid(&self, n: u32) -> Result<GridSpec> {
        let [x0, x1, y0, y1] = self.sequence.domain;
        let h = match self.sequence.resolution {
            Some(nx) => (x1 - x0) / nx as f64,
            None => {
                let r = self.bubbles.iter().map(|b| b.scale.at(n)).fold(f64::INFINITY, f64::min);
                let r = if r.is_finite() { r } else { self.bubbles_free_scale() };
                r / self.sequence.points_per_scale
            }
        };
        let g = GridSpec::covering(x0, x1, y0, y1, h)?;
        if g.len() > self.sequence.max_cells {
            return Err(Error::InvalidParameter(format!(
                "index {n} needs a {}x{} grid, above the cap of {} cells",
                g.nx, g.ny, self.sequence.max_cells
            )));
        }
        Ok(g)
    }

    /// Spacing used when there are no bubbles: 1/128 of the domain width.
    fn bubbles_free_scale(&self) -> f64 {
        let [x0, x1, ..] = self.sequence.domain;
        (x1 - x0) / 128.0 * self.sequence.points_per_scale
    }

    /// Separation of every pair at every index, `[pair][n − n_min]`.
    pub fn separation_table(&self) -> Vec<((usize, usize), Vec<f64>)> {
        let mut out = Vec::new();
        for i in 0..self.bubbles.len() {
            for j in i + 1..self.bubbles.len() {
                let row = self.indices().map(|n| separation(&self.bubbles[i].at(n), &self.bubbles[j].at(n))).collect();
                out.push(((i, j), row));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.sequence;
        let [x0, x1, y0, y1] = s.domain;
        if !(x1 > x0 && y1 > y0) {
            return Err(Error::Config(format!("empty domain {:?}", s.domain)));
        }
        if s.n_min > s.n_max {
            return Err(Error::Config(format!("n_min = {} exceeds n_max = {}", s.n_min, s.n_max)));
        }
        if !(s.points_per_scale > 0.0) {
            return Err(Error::Config("points_per_scale must be positive".into()));
        }
        if !(self.glue.beta > 0.0 && self.glue.beta < 1.0 && self.glue.factor > 0.0) {
            return Err(Error::Config("glue needs 0 < beta < 1 and factor > 0".into()));
        }
        self.base.validate()?;
        for (k, b) in self.bubbles.iter().enumerate() {
            b.map().validate().map_err(|e| Error::Config(format!("bubble {k}: {e}")))?;
            if !(b.scale.c > 0.0 && b.scale.q > 0.0) {
                return Err(Error::Config(format!("bubble {k}: scale law needs c > 0 and q > 0")));
            }
            if !(b.center[0] > x0 && b.center[0] < x1 && b.center[1] > y0 && b.center[1] < y1) {
                return Err(Error::Config(format!("bubble {k}: centre outside the domain")));
            }
        }
        if let Some(l) = &self.leak {
            if !(l.energy >= 0.0 && l.start > 0.0 && l.width > 0.0) {
                return Err(Error::Config("leak needs energy >= 0, start > 0, width > 0".into()));
            }
        }
        if s.n_max > s.n_min {
            for ((i, j), row) in self.separation_table() {
                if row.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Config(format!(
                        "bubbles {i} and {j} are not scale-separated along the ladder: {row:?}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_roundtrip() {
        let mut s = SequenceSpec::two_bubbles(3, 5);
        s.leak = Some(LeakRing { energy: 10.0, start: 2.0, width: 1.0, zeta: 0.25 });
        let back = SequenceSpec::from_toml(&s.to_toml()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn parses_the_documented_example() {
        let text = r#"
            [sequence]
            name = "single"
            domain = [-1.0, 1.0, -1.0, 1.0]
            points_per_scale = 4.0
            n_min = 3
            n_max = 7

            [base]
            kind = "constant"
            value = [0.0, 0.0, 1.0]

            [glue]
            beta = 0.5
            factor = 1.0

            [[bubble]]
            numerator = [[0.0, 0.0], [1.0, 0.0]]
            denominator = [[1.0, 0.0]]
            center = [0.0, 0.0]
            scale = { c = 1.0, q = 1.0 }
        "#;
        assert_eq!(SequenceSpec::from_toml(text).unwrap(), SequenceSpec {
            sequence: LadderSection { name: "single".into(), ..SequenceSpec::single_bubble(3, 7).sequence },
            ..SequenceSpec::single_bubble(3, 7)
        });
    }

    #[test]
    fn ladder_grids() {
        let s = SequenceSpec::single_bubble(3, 7);
        assert_eq!(s.grid(7).unwrap().nx, 1024);
        assert_eq!(s.grid(3).unwrap().nx, 64);
        let t = SequenceSpec::two_bubbles(3, 7);
        let g = t.grid(7).unwrap();
        assert_eq!((g.nx, g.ny), (1536, 1024));
    }

    #[test]
    fn rejects_unseparated_and_malformed_specs() {
        let mut s = SequenceSpec::two_bubbles(3, 7);
        s.bubbles[1].center = s.bubbles[0].center;
        assert!(matches!(s.validate(), Err(Error::Config(_))));
        assert!(SequenceSpec::from_toml("[sequence]\nn_min = 1").is_err());
        let mut s = SequenceSpec::single_bubble(3, 7);
        s.sequence.max_cells = 1000;
        assert!(s.grid(7).is_err());
    }
}
