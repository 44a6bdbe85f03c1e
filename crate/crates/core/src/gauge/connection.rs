//! The connection form `ω_{αβ} = ⟨∂z̄ e_α, e_β⟩`.

use super::frame::Frame;
use crate::field::{masked_gradient, Field};
use crate::{CMat2, Complex64, Vec3};

#[derive(Debug, Clone)]
pub struct ConnectionForm {
    /// Zero outside the frame's region.
    pub omega: Field<CMat2>,
    pub mask: Vec<bool>,
    /// `max |∂z̄⟨e_α, e_β⟩|` (the pairing is differentiated after forming it).
    pub metric_residual: f64,
    /// `max |ω_{αβ} + ω_{βα}|`: the discrete product-rule defect, `O(h²)`.
    pub antisymmetry_defect: f64,
}

/// `⟨a, b⟩ + i⟨c, b⟩` for the x- and y-derivatives `a`, `c`.
#[inline]
fn pair(ex: Vec3, ey: Vec3, e: Vec3) -> Complex64 {
    Complex64::new(ex.dot(&e), ey.dot(&e))
}

pub fn connection_form(frame: &Frame) -> ConnectionForm {
    let mask = &frame.mask;
    let (e1x, e1y) = masked_gradient(&frame.e1, mask);
    let (e2x, e2y) = masked_gradient(&frame.e2, mask);
    let spec = frame.e1.spec;
    let n = mask.len();
    let mut omega = Field::<CMat2>::zeros(spec);
    let mut defect: f64 = 0.0;
    for k in 0..n {
        if !mask[k] {
            continue;
        }
        let (a, b) = (frame.e1.values[k], frame.e2.values[k]);
        let w = CMat2::new(
            pair(e1x.values[k], e1y.values[k], a),
            pair(e1x.values[k], e1y.values[k], b),
            pair(e2x.values[k], e2y.values[k], a),
            pair(e2x.values[k], e2y.values[k], b),
        );
        for (p, q) in [(0, 0), (0, 1), (1, 1)] {
            defect = defect.max((w[(p, q)] + w[(q, p)]).norm());
        }
        omega.values[k] = w;
    }
    // ∂z̄ of the pointwise Gram matrix.
    let gram = frame.e1.zip_map(&frame.e2, |a, b| {
        CMat2::new(
            Complex64::new(a.dot(&a), 0.0),
            Complex64::new(a.dot(&b), 0.0),
            Complex64::new(b.dot(&a), 0.0),
            Complex64::new(b.dot(&b), 0.0),
        )
    });
    let (gx, gy) = masked_gradient(&gram, mask);
    let mut metric: f64 = 0.0;
    for k in 0..n {
        if mask[k] {
            let d = gx.values[k] + gy.values[k] * Complex64::i();
            metric = metric.max(d.iter().map(|c| c.norm()).fold(0.0, f64::max));
        }
    }
    ConnectionForm { omega, mask: mask.clone(), metric_residual: metric, antisymmetry_defect: defect }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{GridSpec, ManifoldMap};
    use crate::gauge::frame::{coulomb_frame, FrameOptions};
    use crate::norms::Region;

    fn rotation_frame(n: usize, theta: impl Fn(f64, f64) -> f64 + Sync) -> Frame {
        let g = GridSpec::square([0.0, 0.0], 1.0, n).unwrap();
        let e1 = Field::from_fn(g, |x, y| {
            let t = theta(x, y);
            Vec3::new(t.cos(), t.sin(), 0.0)
        });
        let e2 = Field::from_fn(g, |x, y| {
            let t = theta(x, y);
            Vec3::new(-t.sin(), t.cos(), 0.0)
        });
        Frame {
            e1,
            e2,
            mask: vec![true; g.len()],
            pole: -Vec3::z(),
            theta: Field::zeros(g),
            coulomb_residual: 0.0,
            coulomb_tolerance: 0.0,
            solver_iterations: 0,
        }
    }

    #[test]
    fn constant_frame_has_zero_connection() {
        let g = GridSpec::square([0.0, 0.0], 1.0, 16).unwrap();
        let u = ManifoldMap::constant(g, Vec3::z()).unwrap();
        let fr = coulomb_frame(&u, &Region::All, &FrameOptions::default()).unwrap();
        let c = connection_form(&fr);
        assert!(c.omega.max_norm() < 1e-12);
    }

    /// `e₁ = (cos θ, sin θ, 0)` gives `ω₁₂ = ∂z̄θ = θx + iθy`, `ω₂₁ = −ω₁₂`.
    fn planar_error(n: usize) -> f64 {
        let th = |x: f64, y: f64| 0.7 * x * x + (1.3 * y).sin() + 0.4 * x * y;
        let fr = rotation_frame(n, th);
        let c = connection_form(&fr);
        let g = fr.e1.spec;
        let mut err: f64 = 0.0;
        for j in 0..g.ny {
            for i in 0..g.nx {
                let [x, y] = g.point(i, j);
                let exact = Complex64::new(1.4 * x + 0.4 * y, 1.3 * (1.3 * y).cos() + 0.4 * x);
                let w = c.omega.at(i, j);
                err = err.max((w[(0, 1)] - exact).norm()).max((w[(1, 0)] + exact).norm());
                err = err.max(w[(0, 0)].norm()).max(w[(1, 1)].norm());
            }
        }
        assert!(c.metric_residual < 1e-12);
        err
    }

    #[test]
    fn planar_rotation_frame_matches_symbolic_connection() {
        let (e1, e2) = (planar_error(32), planar_error(64));
        assert!(e2 < 0.02, "{e2}");
        let order = (e1 / e2).log2();
        assert!(order > 1.7, "order {order}");
    }
}
