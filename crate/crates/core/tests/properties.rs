use proptest::prelude::*;

use beltrami_core::analysis::{
    bound_report, check_properties, degree, CheckTolerances, Coupling, FOUR_PI2,
};
use beltrami_core::flow::{flow_grid, reduced_energy, Profile};
use beltrami_core::maps::{make_map, MapFamily};
use beltrami_core::s3geom::{GridS3, GridSpec, Point4};

fn unit() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(-1.0..1.0f64)
        .prop_filter("away from zero", |v| {
            v.iter().map(|x| x * x).sum::<f64>() > 0.05
        })
        .prop_map(|v| *Point4::new(v).coords())
}

fn fourier(seed: u64) -> MapFamily {
    MapFamily::FourierTest {
        seed,
        amplitude: 0.3,
        modes: 4,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn right_translation_keeps_beta_and_the_stretch_bound(seed in 0u64..1000, u in unit(), p in unit()) {
        let m0 = make_map(&fourier(seed)).unwrap();
        let m1 = make_map(&MapFamily::RightTranslate { u, base: Box::new(fourier(seed)) }).unwrap();
        let p = Point4::new(p);
        let (b0, b1) = (m0.pullback_eta(&p), m1.pullback_eta(&p));
        for k in 0..3 {
            prop_assert!((b0.0[k] - b1.0[k]).abs() < 1e-10);
        }
        prop_assert!(b1.norm() <= m1.strain(&p).eigenvalues[2].sqrt() + 1e-12);
    }

    #[test]
    fn degree_is_invariant_under_right_translation(seed in 0u64..1000, u in unit()) {
        let g = GridS3::build(GridSpec::new(12, 8, 8)).unwrap();
        let d0 = degree(&make_map(&fourier(seed)).unwrap(), &g);
        let d1 = degree(
            &make_map(&MapFamily::RightTranslate { u, base: Box::new(fourier(seed)) }).unwrap(),
            &g,
        );
        prop_assert!((d0 - d1).abs() < 1e-10, "{} {}", d0, d1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn reports_are_finite_and_non_negative(seed in 0u64..1000, c in 0.5..4.0f64) {
        let g = GridS3::build(GridSpec::new(10, 8, 8)).unwrap();
        let m = make_map(&fourier(seed)).unwrap();
        let coupling = Coupling::constant(c).unwrap();
        let r = bound_report(&m, &coupling, &g).unwrap();
        prop_assert!(r.energy >= 0.0 && r.defect >= 0.0);
        let props = check_properties(&m, &coupling, &g, &CheckTolerances::default()).unwrap();
        for chk in &props.checks {
            if let Some(v) = chk.residual {
                prop_assert!(v.is_finite() && v >= 0.0, "{} {}", chk.name, v);
            }
        }
    }

    #[test]
    fn degree_one_profiles_respect_the_bound(a1 in -0.2..0.2f64, a2 in -0.1..0.1f64, a3 in -0.05..0.05f64) {
        let f = |s: f64| s + a1 * (2.0 * s).sin() + a2 * (3.0 * s).sin() + a3 * (5.0 * s).sin();
        let p = Profile::from_fn(1, 16, f).unwrap();
        let g = flow_grid(16, 3, 12, 8).unwrap();
        let e = reduced_energy(&p, 2.0, &g).unwrap();
        prop_assert!(e >= FOUR_PI2 * (1.0 - 1e-9), "{}", e / FOUR_PI2);
        let t = p.table();
        prop_assert_eq!(t.s[0], 0.0);
        prop_assert_eq!(*t.alpha.last().unwrap(), std::f64::consts::PI);
        prop_assert!((degree(&p.to_map().unwrap(), &g) - 1.0).abs() < 1e-6);
    }
}
