//! Hopf differential, Laurent analysis on annuli, holomorphic approximation
//! and neck-region bounds.

pub mod approx;
pub mod differential;
pub mod laurent;
pub mod neck;
pub mod report;

pub use approx::{
    a0_functional, circle_average, holomorphic_approx, holomorphic_approx_with, poincare_ratio, single_scale_estimate,
    A0Report, HoloApprox, SingleScaleEstimate, DEFAULT_MAX_DEGREE,
};
pub use differential::{dbar_residual, hopf_differential};
pub use laurent::{laurent_coefficients, laurent_with, AnnulusSpec, LaurentSeries};
pub use neck::{c_lambda, neck_bounds, neck_norms, shrunken, BoundTerms, NeckParams, NeckRatios, NeckReport};
pub use report::{hopf_report, DiskResidual, HopfReport};
