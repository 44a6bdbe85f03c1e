//! Bubbling analysis: concentration detection, blow-up extraction, neck
//! ledgers and the energy / `L^{2,1}` / oscillation / `W^{2,1}` identities.
//!
//! [`analyze_spec`] and [`analyze_maps`] run the whole pipeline and return a
//! [`BubbleDecomposition`]; the other items are its building blocks.

pub mod calibrate;
pub mod concentration;
pub mod decomposition;
pub mod extract;
pub mod identities;
pub mod necks;

pub use calibrate::{calibrate_epsilon0, run_default_calibration, Calibration, CalibrationSample};
pub use concentration::{ball_energies, concentration_function, detect_concentration, ConcentrationPoint, ConcentrationReport, ConcentrationValue};
pub use extract::{blowup_window, extract_at_level, extract_blowup, interpolant_ball_energy, rescaled_domain, Blowup};
pub use identities::{bubble_reference, global_norms, oscillation_residual, residuals, BubbleReference, Residuals};
pub use necks::{bound_diagnostics, corner_ratio, energy_ledger, fit_lambda, loglog_slope, neck_rows, BoundDiagnostic, EnergyLedger, NeckAnnulus, NeckFit, NeckKind, NeckRow, NeckStatus};
pub use decomposition::{analyze_maps, analyze_spec, BubbleDecomposition, C0Sensitivity, ExtractedBubble, Member, MemberAnalysis, Source, Verdict};
