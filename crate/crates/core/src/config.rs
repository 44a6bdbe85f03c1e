//! Parameters of the bubbling analysis.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Working small-energy threshold, calibrated by
/// [`crate::bubble::calibrate_epsilon0`] on the default corpus and frozen
/// here (a test re-runs the calibration).
pub const EPSILON0: f64 = 0.887_532;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    /// Small-energy threshold `ε₀` (units of energy^½).
    pub epsilon0: f64,
    /// Blow-up normalisation: bubbles are extracted at ball energy `ε₀²/C₀`.
    pub c0: f64,
    /// Morrey exponent `δ ∈ (1, 2)`.
    pub delta: f64,
    pub lambda_ladder: Vec<f64>,
    /// Maximum number of bubbles.
    pub m_cap: usize,
    /// Total energy cap `E₀`; the measured supremum is used when absent.
    pub e0_cap: Option<f64>,
    /// Physical ball radii for concentration detection (smallest is used).
    pub radius_ladder: Vec<f64>,
    /// Number of trailing members the concentration test looks at.
    pub last_k: usize,
    /// Outer radius `η` of the body–bubble necks.
    pub neck_eta: f64,
    /// Inner neck radius in units of the extracted blow-up radius. For a
    /// degree-1 bubble of scale `s` at the default level the blow-up radius is
    /// `≈ 0.0889 s`, so the default puts the inner neck circle at `≈ 1.5 s`.
    pub neck_inner_factor: f64,
    /// Outer radius of the annulus used for the gauge/Hopf bound diagnostics.
    pub gauge_eta: f64,
    /// Blow-up window `[−w, w]²` (rescaled units) and its resolution.
    pub window_half: f64,
    pub window_cells: usize,
    /// Truncation radius (bubble-scale units) of the planar bubble reference norms.
    pub reference_half: f64,
    pub max_degree: usize,
    pub laurent_modes: i32,
    /// Energy-identity verdict: final residual at most this fraction of the
    /// total bubble energy, with residuals decreasing along the ladder.
    pub identity_tolerance: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            epsilon0: EPSILON0,
            c0: 4.0,
            delta: 1.5,
            lambda_ladder: vec![2.0, 4.0, 8.0],
            m_cap: 4,
            e0_cap: None,
            radius_ladder: vec![0.05, 0.1, 0.2],
            last_k: 3,
            neck_eta: 1.0,
            neck_inner_factor: 16.9,
            gauge_eta: 0.5,
            window_half: 8.0,
            window_cells: 256,
            reference_half: 64.0,
            max_degree: crate::hopf::DEFAULT_MAX_DEGREE,
            laurent_modes: 16,
            identity_tolerance: 0.05,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if !(self.epsilon0 > 0.0) {
            return bad("epsilon0 must be positive");
        }
        if !(self.c0 > 1.0) {
            return bad("C0 must exceed 1");
        }
        if !(self.delta > 1.0 && self.delta < 2.0) {
            return bad("delta must lie in (1, 2)");
        }
        if self.lambda_ladder.is_empty()
            || self.lambda_ladder[0] <= 1.0
            || self.lambda_ladder.windows(2).any(|w| w[1] <= w[0])
        {
            return bad("lambda_ladder must be strictly increasing with values > 1");
        }
        if self.radius_ladder.is_empty() || self.radius_ladder.iter().any(|&r| !(r > 0.0)) {
            return bad("radius_ladder must hold positive radii");
        }
        if self.m_cap == 0 || self.last_k == 0 {
            return bad("m_cap and last_k must be at least 1");
        }
        if !(self.neck_eta > 0.0 && self.gauge_eta > 0.0 && self.neck_inner_factor > 0.0) {
            return bad("neck radii must be positive");
        }
        if !(self.window_half > 1.0) || self.window_cells < 16 || !(self.reference_half > 1.0) {
            return bad("blow-up window must contain the unit disk with at least 16 cells");
        }
        if !(self.identity_tolerance > 0.0) {
            return bad("identity_tolerance must be positive");
        }
        Ok(())
    }

    pub fn target_level(&self) -> f64 {
        self.epsilon0 * self.epsilon0 / self.c0
    }

    pub fn r_min(&self) -> f64 {
        self.radius_ladder.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        let c: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }
}
