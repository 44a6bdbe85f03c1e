//! Numerical machinery for bubbling analysis of approximate harmonic maps
//! from planar domains into the round sphere.
//!
//! The crate is organised bottom-up:
//!
//! * [`field`] — uniform grids, sampled fields, finite-difference operators,
//!   sphere-valued maps and their tension fields.
//! * [`norms`] — distribution functions, Lorentz `L^{2,1}` / `L^{2,∞}`,
//!   Zygmund `L log L`, Morrey and weak Morrey norms.
//! * [`gauge`] — Coulomb frames, the Cauchy transform, the fixed point
//!   `B = I + 𝒯B` and the ∂̄-decomposition of the moving-frame gradient.
//! * [`hopf`] — Hopf differential, Laurent series on annuli, holomorphic
//!   approximation and neck estimates.
//! * [`flow`] — rational bubbles, glued bubbling sequences, harmonic map heat
//!   flow and a leaking negative-control sequence.
//! * [`bubble`] — concentration detection, blow-up extraction and the
//!   energy / `L^{2,1}` / oscillation / `W^{2,1}` identity checks.
//!
//! Derivative convention: `∂/∂z = ∂x − i∂y` and `∂/∂z̄ = ∂x + i∂y` (no ½).
//! Energy convention: `E(u) = ∫|∇u|²` (no ½).

pub mod bubble;
pub mod config;
pub mod error;
pub mod field;
pub mod flow;
pub mod gauge;
pub mod hopf;
pub mod norms;
pub mod par;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub type Vec3 = nalgebra::Vector3<f64>;
pub type CVec2 = nalgebra::Vector2<Complex64>;
pub type CMat2 = nalgebra::Matrix2<Complex64>;
