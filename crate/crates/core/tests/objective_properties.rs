//! Property tests for the objective layer: monotonicity of the
//! suboptimality function, invariance under monotone transforms,
//! homogeneity, and the inner/outer ball sandwich.

use nalgebra::DVector;
use onefifth_core::objectives::{
    compose_monotone, make_ellipsoid, make_linf, make_quadratic, make_sphere, unit_ball_root,
    Objective, QuadraticSpec,
};
use onefifth_core::sampling::{random_rotation, RngStream};
use proptest::prelude::*;

fn point(d: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-5.0..5.0f64, d).prop_map(DVector::from_vec)
}

fn test_objectives(d: usize, kappa_f: f64) -> Vec<Objective> {
    vec![
        make_sphere(d),
        make_ellipsoid(d, kappa_f).unwrap(),
        make_linf(d),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn f_mu_is_monotone_in_f(x in point(3), y in point(3), kappa_f in 1.0..100.0f64) {
        for obj in test_objectives(3, kappa_f) {
            let (fx, fy) = (obj.evaluate(&x), obj.evaluate(&y));
            let (mx, my) = (
                obj.suboptimality(&x).unwrap(),
                obj.suboptimality(&y).unwrap(),
            );
            if fx <= fy {
                prop_assert!(mx <= my * (1.0 + 1e-12), "{}: f {fx} <= {fy} but f_mu {mx} > {my}", obj.id());
            }
        }
    }

    #[test]
    fn monotone_transforms_leave_f_mu_alone(x in point(4), kappa_f in 1.0..100.0f64) {
        for obj in test_objectives(4, kappa_f) {
            let log1p = compose_monotone(&obj, |t: f64| t.ln_1p(), "log1p");
            let sqrt = compose_monotone(&obj, |t| t.sqrt(), "sqrt");
            let reference = obj.suboptimality(&x).unwrap();
            prop_assert_eq!(log1p.suboptimality(&x).unwrap(), reference);
            prop_assert_eq!(sqrt.suboptimality(&x).unwrap(), reference);
        }
    }

    #[test]
    fn suboptimality_is_positively_homogeneous(
        x in point(3),
        gamma in 0.01..100.0f64,
        kappa_f in 1.0..100.0f64,
    ) {
        for obj in test_objectives(3, kappa_f) {
            let base = obj.suboptimality(&x).unwrap();
            let scaled = obj.suboptimality(&(&x * gamma)).unwrap();
            prop_assert!(
                (scaled - gamma * base).abs() <= 1e-10 * (1.0 + gamma * base),
                "{}: gamma {gamma}: {scaled} vs {}",
                obj.id(),
                gamma * base
            );
        }
    }

    #[test]
    fn ball_sandwich_on_quadratics(
        x in point(3),
        dir in point(3),
        rho in 0.0..0.999f64,
        kappa_f in 1.0..100.0f64,
    ) {
        prop_assume!(x.norm() > 1e-6);
        prop_assume!(dir.norm() > 1e-6);
        for obj in [make_sphere(3), make_ellipsoid(3, kappa_f).unwrap()] {
            let geo = *obj.geometry().unwrap();
            let f_mu_x = obj.suboptimality(&x).unwrap();
            let u = &dir / dir.norm();

            // Points strictly inside the inner ball improve on x.
            let y = u.clone() * (rho * geo.c_lower * f_mu_x);
            let f_mu_y = obj.suboptimality(&y).unwrap();
            prop_assert!(
                f_mu_y < f_mu_x * (1.0 + 1e-12),
                "{}: inner ball point has f_mu {f_mu_y} >= {f_mu_x}",
                obj.id()
            );

            // Points at least as good as x stay inside the outer ball.
            let z = u * (2.0 * geo.c_upper * f_mu_x) * rho;
            let f_mu_z = obj.suboptimality(&z).unwrap();
            if f_mu_z <= f_mu_x {
                prop_assert!(z.norm() <= geo.c_upper * f_mu_x * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn rotation_preserves_values_at_mapped_points(x in point(3), kappa_f in 1.0..100.0f64) {
        let obj = make_ellipsoid(3, kappa_f).unwrap();
        let mut rng = RngStream::new(777, 0);
        let r = random_rotation(3, &mut rng);
        let rotated = onefifth_core::objectives::rotate(&obj, &r).unwrap();
        let direct = obj.evaluate(&(&r * &x));
        prop_assert!((rotated.evaluate(&x) - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
        // f_mu transforms the same way.
        let fm = obj.suboptimality(&(&r * &x)).unwrap();
        prop_assert!((rotated.suboptimality(&x).unwrap() - fm).abs() <= 1e-12 * (1.0 + fm));
    }
}

#[test]
fn general_quadratic_agrees_with_ellipsoid() {
    // The dedicated ellipsoid construction and the generic quadratic one
    // must produce identical values and geometry.
    let d = 4;
    let kappa_f = 37.0;
    let ell = make_ellipsoid(d, kappa_f).unwrap();
    let h = nalgebra::DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            kappa_f.powf(i as f64 / (d - 1) as f64)
        } else {
            0.0
        }
    });
    let quad = make_quadratic(QuadraticSpec::new(h, DVector::zeros(d)).unwrap()).unwrap();
    let mut rng = RngStream::new(5, 0);
    for _ in 0..100 {
        let x = onefifth_core::sampling::standard_normal(&mut rng, d) * 2.0;
        assert!((ell.evaluate(&x) - quad.evaluate(&x)).abs() <= 1e-12 * (1.0 + quad.evaluate(&x)));
        let a = ell.suboptimality(&x).unwrap();
        let b = quad.suboptimality(&x).unwrap();
        assert!((a - b).abs() <= 1e-12 * (1.0 + b));
    }
    let ga = ell.geometry().unwrap();
    let gb = quad.geometry().unwrap();
    assert!((ga.c_lower - gb.c_lower).abs() < 1e-12);
    assert!((ga.c_upper - gb.c_upper).abs() < 1e-12);
}

#[test]
fn mc_suboptimality_tracks_analytic_on_ellipsoid() {
    let obj = make_ellipsoid(2, 9.0).unwrap();
    let mc = onefifth_core::objectives::with_mc_suboptimality(&obj, 9.0);
    let x = DVector::from_row_slice(&[0.7, -0.2]);
    let exact = obj.suboptimality(&x).unwrap();
    let mut rng = RngStream::new(21, 0);
    let est = mc.suboptimality_mc(&x, 400_000, &mut rng).unwrap();
    assert!(
        (est.value - exact).abs() <= 3.0 * est.std_error + 0.01 * exact,
        "estimate {} vs exact {exact} (se {})",
        est.value,
        est.std_error
    );
}

#[test]
fn unit_ball_root_matches_volume_recursion() {
    // Independent oracle: V_d^d = π^{d/2}/Γ(d/2+1) satisfies the recursion
    // vol_d = vol_{d-2} · 2π/d.
    let mut vol2 = core::f64::consts::PI; // d = 2
    let mut vol1 = 2.0; // d = 1
    for d in 3..=12 {
        let vol = if d % 2 == 0 {
            vol2 * 2.0 * core::f64::consts::PI / d as f64
        } else {
            vol1 * 2.0 * core::f64::consts::PI / d as f64
        };
        if d % 2 == 0 {
            vol2 = vol;
        } else {
            vol1 = vol;
        }
        let from_root = unit_ball_root(d).powi(d as i32);
        assert!(
            (from_root - vol).abs() <= 1e-10 * vol,
            "d={d}: {from_root} vs {vol}"
        );
    }
}
