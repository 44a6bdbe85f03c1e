use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Pipeline stage an error originated in; the CLI maps these to exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Usage,
    Io,
    Stability,
    Gauge,
    Hopf,
    Bubble,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("non-finite value at node ({i}, {j})")]
    NonFinite { i: usize, j: usize },
    #[error("degenerate projection: |v| = {norm:.3e} < 0.1 at node ({i}, {j})")]
    DegenerateProjection { i: usize, j: usize, norm: f64 },
    #[error("map is not unit-norm: max ||u| - 1| = {0:.3e}")]
    NotUnit(f64),
    #[error("region contains no cells")]
    EmptyRegion,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("padded convolution grid {nx}x{ny} exceeds the cap of {cap} entries")]
    MemoryCap { nx: usize, ny: usize, cap: usize },
    #[error("map comes within {distance:.3e} of the frame pole (minimum 0.05)")]
    PoleProximity { distance: f64 },
    #[error("Poisson solver stalled: relative residual {residual:.3e} after {iterations} iterations")]
    PoissonNonConvergence { iterations: usize, residual: f64 },
    #[error("operator is not a contraction: kappa = {kappa:.4} >= 0.9")]
    NoContraction { kappa: f64 },
    #[error("fixed-point iteration did not converge in {iterations} steps (last update {last:.3e})")]
    FixedPointNonConvergence { iterations: usize, last: f64, trace: Vec<f64> },
    #[error("contour or disk leaves the sampled region")]
    ContourOutside,
    #[error("small-energy precondition violated: |grad u|_L2 = {norm:.4} > eps0 = {eps0:.4}")]
    SmallEnergy { norm: f64, eps0: f64 },
    #[error("energy increased by {rel:.3e} (relative) at step {step}; dt too large")]
    Stability { step: usize, rel: f64 },
    #[error("unstable time step: dt = {dt:.3e} exceeds 0.2 h^2 = {limit:.3e}")]
    TimeStep { dt: f64, limit: f64 },
    #[error("blow-up level {level:.4e} unreachable: {reason}")]
    LevelUnreachable { level: f64, reason: String },
    #[error("sequence members live on different domains")]
    InconsistentDomains,
    #[error("invalid bubble: {0}")]
    Bubble(String),
    #[error("config: {0}")]
    Config(String),
    #[error("malformed field file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn stage(&self) -> Stage {
        use Error::*;
        match self {
            Io(_) | Csv(_) | Format(_) => Stage::Io,
            Stability { .. } | TimeStep { .. } => Stage::Stability,
            PoleProximity { .. }
            | PoissonNonConvergence { .. }
            | NoContraction { .. }
            | FixedPointNonConvergence { .. }
            | MemoryCap { .. } => Stage::Gauge,
            ContourOutside | SmallEnergy { .. } => Stage::Hopf,
            LevelUnreachable { .. } | InconsistentDomains | Bubble(_) => Stage::Bubble,
            _ => Stage::Usage,
        }
    }
}
