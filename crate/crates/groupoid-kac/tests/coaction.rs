use groupoid_kac::coaction::{
    check_coaction, covariant_crossed_functor, crossed_product, crossed_product_records, fiber_product_bracketings,
    induce, is_morphism, verify_duality, verify_duality_hat, Coaction, GeneratorMap, Side, SpatialMorphism,
};
use groupoid_kac::groupoid::{Groupoid, Haar, Measure};
use groupoid_kac::kac::KacSystem;
use groupoid_kac::report::Record;
use groupoid_kac::subspace::{c, hs_norm, op_norm, Mat, Tolerance, C64};
use groupoid_kac::Error;
use proptest::prelude::*;

fn system(g: Groupoid, mu: Vec<f64>) -> KacSystem {
    let m = Measure::new(&g, Haar::counting(&g), mu).unwrap();
    KacSystem::build(&m, &Tolerance::default()).unwrap()
}

fn z2() -> KacSystem {
    system(Groupoid::cyclic(2).unwrap(), vec![1.0])
}

fn pair2() -> KacSystem {
    system(Groupoid::pair(2).unwrap(), vec![1.0, 2.0])
}

fn failing(recs: &[Record]) -> Vec<String> {
    recs.iter().filter(|r| !r.pass).map(|r| format!("{} {:e} {:?}", r.name, r.residual, r.note)).collect()
}

#[test]
fn canonical_coactions_pass_and_are_fine() {
    let tol = Tolerance::default();
    for ks in [z2(), pair2()] {
        for side in [Side::Plain, Side::Hat] {
            let co = Coaction::canonical(&ks.sys, side).unwrap();
            let recs = check_coaction(&co, "co", &tol);
            assert!(failing(&recs).is_empty(), "{:?}", failing(&recs));
            for name in ["co.injective", "co.fine-span", "co.morphism", "co.coassociative"] {
                assert!(recs.iter().any(|r| r.name == name), "{name} missing");
            }
        }
    }
}

#[test]
fn crossed_products_and_dual_coactions() {
    for ks in [z2(), pair2()] {
        for side in [Side::Plain, Side::Hat] {
            let co = Coaction::canonical(&ks.sys, side).unwrap();
            let cp = crossed_product(&co, &ks.sys).unwrap();
            assert_eq!(cp.dual.hopf.side, if side == Side::Plain { Side::Hat } else { Side::Plain });
            let recs = crossed_product_records(&cp, &co, &ks.sys, "cp", true);
            assert!(failing(&recs).is_empty(), "{:?}", failing(&recs));
        }
    }
}

#[test]
fn identity_is_a_covariant_morphism() {
    for ks in [z2(), pair2()] {
        let co = Coaction::canonical(&ks.sys, Side::Plain).unwrap();
        let id = SpatialMorphism::identity(&co.carrier.space);
        let (map, recs) = covariant_crossed_functor(&id, &co, &co, &ks.sys).unwrap();
        assert!(failing(&recs).is_empty(), "{:?}", failing(&recs));
        let cp = crossed_product(&co, &ks.sys).unwrap();
        let tol = Tolerance::default();
        for x in cp.algebra.basis() {
            assert!(op_norm(&(map.image(x, &tol).unwrap() - x)) < 1e-12);
        }
    }
}

#[test]
fn zero_map_is_not_a_morphism() {
    let ks = pair2();
    let co = Coaction::canonical(&ks.sys, Side::Plain).unwrap();
    let n = co.carrier.space.dim();
    let zeros = vec![Mat::zeros(n, n); co.carrier.algebra.dim()];
    let (ok, r) = is_morphism(&zeros, &co.carrier, &co.carrier.gamma, &Tolerance::default()).unwrap();
    assert!(!ok && r >= 0.5, "residual {r}");
    let ids = co.carrier.algebra.basis().to_vec();
    assert!(is_morphism(&ids, &co.carrier, &co.carrier.gamma, &Tolerance::default()).unwrap().0);
}

#[test]
fn corrupted_coaction_fails_the_axioms() {
    let ks = pair2();
    let mut co = Coaction::canonical(&ks.sys, Side::Plain).unwrap();
    co.delta[1] *= c(2.0);
    co.implementer = None;
    let recs = check_coaction(&co, "co", &Tolerance::default());
    let bad = failing(&recs);
    assert!(bad.iter().any(|r| r.starts_with("co.homomorphism")), "{bad:?}");
}

#[test]
fn swapped_images_break_coassociativity_or_the_homomorphism() {
    let ks = pair2();
    let mut co = Coaction::canonical(&ks.sys, Side::Hat).unwrap();
    co.delta.swap(0, 1);
    co.implementer = None;
    assert!(!failing(&check_coaction(&co, "co", &Tolerance::default())).is_empty());
}

#[test]
fn duality_refuses_a_coaction_that_is_not_fine() {
    let ks = z2();
    let mut co = Coaction::canonical(&ks.sys, Side::Plain).unwrap();
    let n = co.target.dim();
    co.delta[0] = Mat::zeros(n, n);
    match verify_duality(&ks.sys, &co, 0) {
        Err(Error::Hypothesis(msg)) => assert!(msg.contains("not fine"), "{msg}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn duality_rejects_the_wrong_leg() {
    let ks = z2();
    let plain = Coaction::canonical(&ks.sys, Side::Plain).unwrap();
    let hat = Coaction::canonical(&ks.sys, Side::Hat).unwrap();
    assert!(matches!(verify_duality(&ks.sys, &hat, 0), Err(Error::Hypothesis(_))));
    assert!(matches!(verify_duality_hat(&ks.sys, &plain, 0), Err(Error::Hypothesis(_))));
}

#[test]
fn duality_on_pair2_weighted() {
    let ks = pair2();
    for side in [Side::Plain, Side::Hat] {
        let co = Coaction::canonical(&ks.sys, side).unwrap();
        let rep = match side {
            Side::Plain => verify_duality(&ks.sys, &co, 3).unwrap(),
            Side::Hat => verify_duality_hat(&ks.sys, &co, 3).unwrap(),
        };
        assert!(rep.pass(), "{:?}", failing(&rep.records));
        let stage: Vec<_> = rep.records.iter().filter(|r| r.name.contains(".stage")).collect();
        assert_eq!(stage.len(), 10);
    }
}

#[test]
fn induced_identity_is_the_identity() {
    let ks = pair2();
    let tol = Tolerance::default();
    let co = Coaction::canonical(&ks.sys, Side::Plain).unwrap();
    let car = &co.carrier;
    let ind = induce(car, car.algebra.basis(), &car.space, car.anchor(), &ks.sys.beta, &tol).unwrap();
    assert!(ind.map.consistency < 1e-12);
    for (x, y) in ind.sources.iter().zip(&ind.images) {
        assert!(op_norm(&(x - y)) < 1e-12);
        assert!(op_norm(&(ind.map.image(x, &tol).unwrap() - x)) < 1e-12);
    }
}

#[test]
fn bracketings_agree() {
    // trivial 1, ℤ/2 8, pair(2) 4
    for (ks, dim) in [(system(Groupoid::cyclic(1).unwrap(), vec![1.0]), 1), (z2(), 8), (pair2(), 4)] {
        assert_eq!(fiber_product_bracketings(&ks.sys).unwrap(), (true, dim, dim));
    }
}

#[test]
fn generator_map_detects_inconsistency() {
    let tol = Tolerance::default();
    let e = |i: usize, j: usize| {
        let mut m = Mat::zeros(2, 2);
        m[(i, j)] = c(1.0);
        m
    };
    let src = vec![e(0, 0), e(0, 1), e(0, 0) * c(2.0)];
    let good = vec![e(1, 1), e(1, 0), e(1, 1) * c(2.0)];
    let bad = vec![e(1, 1), e(1, 0), e(1, 0)];
    assert!(GeneratorMap::new(&src, &good, &tol).unwrap().consistency < 1e-15);
    assert!(GeneratorMap::new(&src, &bad, &tol).unwrap().consistency > 0.1);
    let map = GeneratorMap::new(&src, &good, &tol).unwrap();
    assert!(map.image(&e(1, 1), &tol).is_err());
}

fn complex_mat(n: usize, v: &[(f64, f64)]) -> Mat {
    Mat::from_fn(n, n, |i, j| {
        let (re, im) = v[(i * n + j) % v.len()];
        C64::new(re, im)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn coaction_is_linear_and_multiplicative(coef in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8)) {
        let ks = pair2();
        let tol = Tolerance::default();
        let co = Coaction::canonical(&ks.sys, Side::Plain).unwrap();
        let basis = co.carrier.algebra.basis();
        let comb = |off: usize| {
            let mut x = Mat::zeros(basis[0].nrows(), basis[0].ncols());
            for (k, b) in basis.iter().enumerate() {
                let (re, im) = coef[(k + off) % coef.len()];
                x += b * C64::new(re, im);
            }
            x
        };
        let (x, y) = (comb(0), comb(3));
        let (dx, dy) = (co.apply(&x, &tol).unwrap(), co.apply(&y, &tol).unwrap());
        prop_assert!(op_norm(&(co.apply(&(&x * &y), &tol).unwrap() - &dx * &dy)) < 1e-12);
        prop_assert!(op_norm(&(co.apply(&(&x + &y), &tol).unwrap() - (&dx + &dy))) < 1e-12);
        prop_assert!(op_norm(&(co.apply(&x.adjoint(), &tol).unwrap() - dx.adjoint())) < 1e-12);
    }

    #[test]
    fn generator_map_reproduces_a_linear_map(
        entries in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 9),
        coef in proptest::collection::vec(-1.0f64..1.0, 4),
    ) {
        let tol = Tolerance::default();
        let a = complex_mat(3, &entries);
        let src: Vec<Mat> = (0..4).map(|k| {
            let mut m = Mat::zeros(3, 3);
            m[(k % 3, (k * 2) % 3)] = c(1.0);
            m[(2, k % 3)] += c(0.5);
            m
        }).collect();
        let dst: Vec<Mat> = src.iter().map(|x| &a * x).collect();
        let map = GeneratorMap::new(&src, &dst, &tol).unwrap();
        prop_assert!(map.consistency < 1e-12);
        let mut x = Mat::zeros(3, 3);
        for (k, s) in src.iter().enumerate() {
            x += s * c(coef[k]);
        }
        let y = map.image(&x, &tol).unwrap();
        prop_assert!(hs_norm(&(y - &a * &x)) < 1e-10 * (1.0 + hs_norm(&x)));
    }

    #[test]
    fn multiplicativity_audit_is_small_for_every_seed(seed in 0u64..1000) {
        let ks = z2();
        let co = Coaction::canonical(&ks.sys, Side::Plain).unwrap();
        let tol = Tolerance::default();
        let basis = co.carrier.algebra.basis().to_vec();
        let imgs: Vec<Mat> = basis.iter().map(|x| co.apply(x, &tol).unwrap()).collect();
        let map = GeneratorMap::new(&basis, &imgs, &tol).unwrap();
        let (worst, off) = map.multiplicativity(&basis, 4, seed).unwrap();
        prop_assert!(worst < 1e-12 && off < 1e-12);
    }
}
