//! Coulomb frames, the connection form, the gauge matrix `B` and the
//! ∂̄-decomposition of the moving-frame gradient.

pub mod cauchy;
pub mod connection;
pub mod decompose;
pub mod fixed_point;
pub mod frame;
pub mod poisson;

pub use cauchy::{cauchy_transform, riesz_potential, ConvPlan, Kernel};
pub use connection::{connection_form, ConnectionForm};
pub use decompose::{dbar_decompose, GaugeData, GaugeDiagnostics, GaugeOptions};
pub use fixed_point::{contraction_factor, solve_b, t_operator, FixedPointOptions, FixedPointReport};
pub use frame::{coulomb_frame, Frame, FrameOptions};
