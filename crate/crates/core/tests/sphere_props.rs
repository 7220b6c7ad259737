use proptest::prelude::*;
use quartic_cert::gen::{choi_lam, rng, sos_plus_eps};
use quartic_cert::poly::HomogPoly;
use quartic_cert::sphere::{min_on_sphere, Classification, SphereOptions};

fn opts(seed: u64) -> SphereOptions {
    SphereOptions {
        seed,
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sos_plus_eps_min_is_at_least_eps(seed in 0u64..10_000, k in 1usize..6, e in 0usize..3) {
        let eps = [0.0, 1e-3, 1.0][e];
        let f = sos_plus_eps(&mut rng(seed), k, eps);
        let m = min_on_sphere(&f, &opts(seed)).unwrap();
        prop_assert!(m.value >= eps - 1e-6, "min {} below eps {}", m.value, eps);
        prop_assert!(((m.xstar.iter().map(|v| v * v).sum::<f64>()).sqrt() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn minimum_scales_with_input(seed in 0u64..10_000, c in 0.01f64..100.0) {
        let f = sos_plus_eps(&mut rng(seed), 3, 0.5);
        let a = min_on_sphere(&f, &opts(1)).unwrap();
        let b = min_on_sphere(&f.scale(c), &opts(1)).unwrap();
        prop_assert!((b.value - c * a.value).abs() <= 1e-9 * c * a.value.abs().max(1.0));
    }
}

#[test]
fn same_seed_same_result() {
    let f = sos_plus_eps(&mut rng(5), 4, 1e-3);
    let a = min_on_sphere(&f, &opts(9)).unwrap();
    let b = min_on_sphere(&f, &opts(9)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn fixtures() {
    let one = min_on_sphere(&HomogPoly::sphere_power(4, 2), &opts(0)).unwrap();
    assert!((one.value - 1.0).abs() < 1e-12);
    assert_eq!(one.classification, Classification::PositiveMin);

    let neg = min_on_sphere(&HomogPoly::sphere_power(4, 2).scale(-1.0), &opts(0)).unwrap();
    assert!((neg.value + 1.0).abs() < 1e-12);
    assert_eq!(neg.classification, Classification::NegativeSomewhere);

    let f = choi_lam();
    let z = min_on_sphere(&f, &opts(0)).unwrap();
    assert_eq!(z.classification, Classification::ZeroOnSphere);
    assert!(z.value.abs() < 1e-12);
    let x = &z.xstar;
    let coord = x.iter().filter(|v| (v.abs() - 1.0).abs() < 1e-6).count() == 1;
    let half = x.iter().all(|v| (v.abs() - 0.5).abs() < 1e-6) && x.iter().product::<f64>() > 0.0;
    assert!(coord || half, "{x:?}");
}
