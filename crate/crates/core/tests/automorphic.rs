use num_complex::Complex64;
use proptest::prelude::*;
use qrlab::automorphic::{
    chordal, evaluate_h, hemisphere_to_square, preimage, square_to_hemisphere,
    strong_automorphy_check, weierstrass_p, AutomorphicMap, ExtendedPoint,
};
use qrlab::geometry::{Lattice, VecN};

fn invariant_under_generators(h: &AutomorphicMap, x: VecN) -> f64 {
    let hx = evaluate_h(h, x);
    h.group()
        .generators()
        .iter()
        .map(|g| chordal(&evaluate_h(h, g.apply(x)), &hx))
        .fold(0.0, f64::max)
}

#[test]
fn automorphy_of_each_family() {
    for h in [
        AutomorphicMap::exp(),
        AutomorphicMap::cos(),
        AutomorphicMap::weierstrass(Lattice::gaussian()),
        AutomorphicMap::zorich(),
    ] {
        let r = strong_automorphy_check(&h, 200, 5);
        assert!(r.max_residual < 1e-6, "{:?}: {r:?}", h.kind());
        assert_eq!(r.transitivity_failures, 0);
    }
}

#[test]
fn exp_omits_zero() {
    let h = AutomorphicMap::exp();
    assert_eq!(h.omitted_value(), Some(VecN::zeros(2)));
    let y = ExtendedPoint::from_vec(VecN::zeros(2));
    assert_eq!(preimage(&h, &y, VecN::zeros(2)).unwrap(), None);
}

#[test]
fn wp_has_double_pole_at_lattice_points() {
    let l = Lattice::gaussian();
    let z = Complex64::new(1.0 + 1e-4, 1e-4);
    let w = weierstrass_p(z, &l, 400.0).value.unwrap();
    let pole = 1.0 / (z - Complex64::new(1.0, 0.0)).powi(2);
    assert!((w - pole).norm() / pole.norm() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exp_and_cos_invariant(x in -4.0f64..4.0, y in -2.0f64..2.0) {
        let p = VecN::new2(x, y);
        prop_assert!(invariant_under_generators(&AutomorphicMap::exp(), p) < 1e-12);
        prop_assert!(invariant_under_generators(&AutomorphicMap::cos(), p) < 1e-12);
    }

    #[test]
    fn zorich_invariant(x in -3.0f64..3.0, y in -3.0f64..3.0, s in -2.0f64..2.0) {
        let p = VecN::new3(x, y, s);
        prop_assert!(invariant_under_generators(&AutomorphicMap::zorich(), p) < 1e-12);
    }

    #[test]
    fn preimage_maps_back(x in -3.0f64..3.0, y in -1.5f64..1.5, s in -1.0f64..1.0) {
        for (h, p) in [
            (AutomorphicMap::exp(), VecN::new2(x, y)),
            (AutomorphicMap::cos(), VecN::new2(x, y)),
            (AutomorphicMap::zorich(), VecN::new3(x, y, s)),
        ] {
            let hp = evaluate_h(&h, p);
            let q = preimage(&h, &hp, p).unwrap().unwrap();
            prop_assert!(chordal(&evaluate_h(&h, q), &hp) < 1e-9);
        }
    }

    #[test]
    fn hemisphere_chart_round_trip(a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let p = square_to_hemisphere(a, b);
        prop_assert!((p.norm() - 1.0).abs() < 1e-14);
        prop_assert!(p[2] >= -1e-15);
        let (a2, b2) = hemisphere_to_square(p);
        prop_assert!((a2 - a).abs() < 1e-9 && (b2 - b).abs() < 1e-9);
    }
}
