//! The Hopf differential `ℋ(u) = (∂u/∂z)²`.

use crate::field::{dz_dzbar, gradient, Field, ManifoldMap};
use crate::{Complex64, Result};

/// `(|u_x|² − |u_y|²) − 2i⟨u_x, u_y⟩` from centred differences.
pub fn hopf_differential(u: &ManifoldMap) -> Field<Complex64> {
    let (ux, uy) = gradient(u.field());
    ux.zip_map(&uy, |a, b| Complex64::new(a.norm_squared() - b.norm_squared(), -2.0 * a.dot(&b)))
}

/// `‖∂z̄ℋ‖_{L¹}` over `mask`.
pub fn dbar_residual(h: &Field<Complex64>, mask: &[bool]) -> Result<f64> {
    let (_, dzb) = dz_dzbar(h)?;
    Ok(dzb.integral_pow(1.0, Some(mask)))
}
