//! Randomised invariants of the field, norm, gauge, Hopf and flow layers.

use nsk_core::field::{dz_dzbar, gradient, laplacian, project_to_sphere, Field, GridSpec, ManifoldMap};
use nsk_core::flow::{heat_flow, Boundary, HeatOptions};
use nsk_core::gauge::{dbar_decompose, GaugeOptions};
use nsk_core::field::tension_field;
use nsk_core::hopf::{c_lambda, holomorphic_approx, hopf_differential, laurent_with};
use nsk_core::norms::{lorentz21, lp, morrey, weak_morrey, Region};
use nsk_core::{Complex64, Vec3};
use proptest::prelude::*;

fn grid(n: usize) -> GridSpec {
    GridSpec::square([0.0, 0.0], 1.0, n).unwrap()
}

/// Smooth map that stays in the upper hemisphere.
fn smooth_map(g: GridSpec, a: f64, b: f64, k: f64) -> ManifoldMap {
    project_to_sphere(&Field::from_fn(g, |x, y| {
        Vec3::new(a * (k * x + y).sin(), b * (x - k * y).cos(), 1.5 + 0.3 * (x * y).sin())
    }))
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn projection_is_unit(a in -3.0f64..3.0, b in -3.0f64..3.0, k in 0.5f64..6.0) {
        let u = smooth_map(grid(24), a, b, k);
        let dev = u.field().values.iter().fold(0.0f64, |m, v| m.max((v.norm() - 1.0).abs()));
        prop_assert!(dev <= 1e-10);
    }

    #[test]
    fn gradient_exact_on_affine_and_laplacian_on_quadratics(
        c0 in -2.0f64..2.0, cx in -2.0f64..2.0, cy in -2.0f64..2.0, q in -2.0f64..2.0, r in -2.0f64..2.0,
    ) {
        let g = grid(20);
        let (fx, fy) = gradient(&Field::from_fn(g, |x, y| c0 + cx * x + cy * y));
        for k in 0..g.len() {
            prop_assert!((fx.values[k] - cx).abs() <= 1e-12 && (fy.values[k] - cy).abs() <= 1e-12);
        }
        let lap = laplacian(&Field::from_fn(g, |x, y| q * x * x + r * y * y + cx * x * y));
        for j in 1..g.ny - 1 {
            for i in 1..g.nx - 1 {
                prop_assert!((lap.at(i, j) - 2.0 * (q + r)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn dz_and_dzbar_commute(a in -2.0f64..2.0, k in 0.5f64..4.0) {
        let g = grid(24);
        let f = Field::from_fn(g, |x, y| Complex64::new((k * x).sin() * y, a * (x + k * y).cos()));
        let (dz, dzb) = dz_dzbar(&f).unwrap();
        let (_, dzb_dz) = dz_dzbar(&dz).unwrap();
        let (dz_dzb, _) = dz_dzbar(&dzb).unwrap();
        for j in 2..g.ny - 2 {
            for i in 2..g.nx - 2 {
                prop_assert!((dzb_dz.at(i, j) - dz_dzb.at(i, j)).norm() <= 1e-9);
            }
        }
    }

    #[test]
    fn norms_are_monotone_in_the_region(r0 in 0.2f64..0.5, dr in 0.05f64..0.4, k in 0.5f64..5.0) {
        let g = grid(40);
        let f = Field::from_fn(g, |x, y| (k * x).sin() * (y + 0.3).exp());
        let (small, big) = (Region::disk([0.0, 0.0], r0), Region::disk([0.0, 0.0], r0 + dr));
        for norm in [
            |f: &Field<f64>, r: &Region| lp(f, 2.0, r).unwrap().value,
            |f: &Field<f64>, r: &Region| lorentz21(f, r).unwrap().value,
            |f: &Field<f64>, r: &Region| morrey(f, 1.0, 1.5, r).unwrap().value,
        ] {
            prop_assert!(norm(&f, &small) <= norm(&f, &big) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn norm_comparisons(a in 0.1f64..3.0, k in 0.5f64..5.0, p in 1.0f64..2.0, delta in 1.05f64..1.95) {
        let g = grid(32);
        let f = Field::from_fn(g, |x, y| a * (k * x - y).cos() + (x * y).sin());
        prop_assert!(lp(&f, 2.0, &Region::All).unwrap().value <= lorentz21(&f, &Region::All).unwrap().value * 1.01);
        let w = weak_morrey(&f, p, delta, &Region::All).unwrap().value;
        let m = morrey(&f, p, delta, &Region::All).unwrap().value;
        prop_assert!(w <= m * (1.0 + 1e-9), "{w} > {m}");
    }

    #[test]
    fn lorentz21_scales_with_dilation(s in 0.4f64..1.0, k in 1.0f64..3.0) {
        // f_s(x) = f(x/s) on B_s: the distribution scales by s².
        let g = grid(192);
        let f = |x: f64, y: f64| if x * x + y * y < 1.0 { (k * x).cos().abs() + 0.5 } else { 0.0 };
        let a = lorentz21(&Field::from_fn(g, f), &Region::All).unwrap().value;
        let b = lorentz21(&Field::from_fn(g, |x, y| f(x / s, y / s)), &Region::All).unwrap().value;
        prop_assert!((b / (s * a) - 1.0).abs() < 0.02, "{b} vs {}", s * a);
    }

    #[test]
    fn c_lambda_decreases(l in 1.2f64..30.0, dl in 0.1f64..10.0) {
        let (a, b) = (c_lambda(l).unwrap(), c_lambda(l + dl).unwrap());
        prop_assert!(b < a);
        // C(λ) ≤ 2/λ for λ ≥ 2 (the series is √2/λ at leading order).
        if l >= 2.0 {
            prop_assert!(a * l <= 2.0);
        }
    }

    #[test]
    fn laurent_reconstructs_trig_polynomials(
        re in proptest::collection::vec(-1.0f64..1.0, 7), im in proptest::collection::vec(-1.0f64..1.0, 7),
        rho in 0.3f64..0.9,
    ) {
        let coef: Vec<Complex64> = re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)).collect();
        let c2 = coef.clone();
        let g = move |p: [f64; 2]| {
            let z = Complex64::new(p[0], p[1]);
            Some((0..7).map(|k| c2[k] * z.powi(k as i32 - 3)).sum::<Complex64>())
        };
        let s = laurent_with(g, [0.0, 0.0], rho, -3, 3).unwrap();
        for k in -3..=3 {
            prop_assert!((s.get(k).unwrap() - coef[(k + 3) as usize]).norm() < 1e-9 * rho.powi(-3));
        }
    }

    #[test]
    fn holomorphic_residual_is_monotone_in_degree(a in 0.5f64..2.0, k in 0.5f64..2.0) {
        let u = smooth_map(grid(48), a, 1.0, k);
        let h = hopf_differential(&u);
        let approx = holomorphic_approx(&h, [0.0, 0.0], 0.5, 8).unwrap();
        for w in approx.residual_by_degree.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn heat_flow_keeps_the_constraint_and_dissipates(a in -1.0f64..1.0, b in -1.0f64..1.0, k in 0.5f64..4.0) {
        let u0 = smooth_map(grid(24), a, b, k);
        let dt = 0.2 * u0.spec().cell_area();
        let tr = heat_flow(&u0, &HeatOptions::new(dt, 40, Boundary::Dirichlet)).unwrap();
        let dev = tr.last.field().values.iter().fold(0.0f64, |m, v| m.max((v.norm() - 1.0).abs()));
        prop_assert!(dev <= 1e-10);
        for w in tr.energies.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-9));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn gauge_decomposition_invariants(a in 0.05f64..0.3, k in 0.5f64..2.0) {
        let u = smooth_map(grid(40), a, a, k);
        let tau = tension_field(&u).tau;
        let d = dbar_decompose(&u, &tau, &Region::disk([0.0, 0.0], 0.8), &GaugeOptions::default()).unwrap();
        let diag = &d.diagnostics;
        // |G| does not see the frame rotation.
        prop_assert!(diag.covariance_defect < 1e-9, "{}", diag.covariance_defect);
        // Bᵀ G = G₁ + G₂ by construction.
        let mut worst: f64 = 0.0;
        for k in 0..d.spec.len() {
            let lhs = d.b.values[k].transpose() * d.g.values[k];
            worst = worst.max((lhs - d.g1.values[k] - d.g2.values[k]).norm());
        }
        prop_assert!(worst < 1e-9, "{worst}");
        let fp = &diag.fixed_point;
        if fp.kappa <= 0.3 {
            prop_assert!(fp.unitary_drift <= 2.0 * fp.kappa, "{} vs {}", fp.unitary_drift, fp.kappa);
        }
    }
}
