use groupoid_kac::groupoid::{Groupoid, Haar, Measure};
use groupoid_kac::kac::{Control, KacSystem};
use groupoid_kac::report::Record;
use groupoid_kac::subspace::Tolerance;
use proptest::prelude::*;

fn build(g: &Groupoid, mu: Vec<f64>, control: Option<Control>) -> KacSystem {
    let m = Measure::new(g, Haar::counting(g), mu).unwrap();
    KacSystem::build_with(&m, control, &Tolerance::default()).unwrap()
}

fn all(ks: &KacSystem) -> Vec<Record> {
    ks.battery().into_iter().flat_map(|(_, r)| r).collect()
}

fn find<'a>(recs: &'a [Record], name: &str) -> &'a Record {
    recs.iter().find(|r| r.name == name).unwrap_or_else(|| panic!("no record {name}"))
}

#[test]
fn z2_battery_passes_with_small_pentagon() {
    let ks = build(&Groupoid::cyclic(2).unwrap(), vec![1.0], None);
    let recs = all(&ks);
    assert!(recs.iter().all(|r| r.pass));
    assert!(find(&recs, "pentagon.V").residual < 1e-12);
}

#[test]
fn battery_has_every_section() {
    let ks = build(&Groupoid::pair(2).unwrap(), vec![1.0, 2.0], None);
    let names: Vec<&str> = ks.battery().iter().map(|(n, _)| *n).collect();
    assert_eq!(
        names,
        ["hypotheses", "pentagon", "derived", "intertwine", "legs", "regularity", "balanced-legs", "weak-kac", "kac", "kac-compact"]
    );
    let recs = all(&ks);
    assert_eq!(recs.iter().filter(|r| r.name.starts_with("pentagon.")).count(), 5);
    assert_eq!(recs.iter().filter(|r| r.name.starts_with("regular.")).count(), 3);
}

#[test]
fn documented_controls_fail_named_checks() {
    let cases = [(Groupoid::cyclic(2).unwrap(), vec![1.0]), (Groupoid::pair(2).unwrap(), vec![1.0, 2.0])];
    for (g, mu) in cases {
        for control in [Control::FlipUSign, Control::PerturbHaarWeight, Control::RotateAlphaHat] {
            let recs = all(&build(&g, mu.clone(), Some(control)));
            let expected = if control == Control::PerturbHaarWeight { "V.unitary" } else { "U.j=jhat-inverse" };
            assert!(!find(&recs, expected).pass, "{control} on {:?}", g.arrows());
            assert!(!find(&recs, "kac.(ΣU₂V)³=1").pass);
            assert!(!find(&recs, "kac.V^VVˇ=U₁Σ").pass);
        }
    }
}

#[test]
fn rotation_breaks_intertwining_on_pair2() {
    let recs = all(&build(&Groupoid::pair(2).unwrap(), vec![1.0, 2.0], Some(Control::RotateAlphaHat)));
    assert!(recs.iter().any(|r| r.name.starts_with("V_*") && !r.pass));
}

#[test]
fn identity_u_is_harmless_on_z2_and_fatal_on_pair2() {
    // every element of ℤ/2 is its own inverse, so U is already the identity
    let z2 = all(&build(&Groupoid::cyclic(2).unwrap(), vec![1.0], Some(Control::IdentityU)));
    assert!(z2.iter().all(|r| r.pass));
    let p2 = all(&build(&Groupoid::pair(2).unwrap(), vec![1.0, 2.0], Some(Control::IdentityU)));
    assert!(!find(&p2, "U.alpha=alpha-hat").pass);
}

#[test]
fn control_names_round_trip() {
    for c in Control::ALL {
        assert_eq!(c.name().parse::<Control>().unwrap(), c);
    }
    assert!("flip-v".parse::<Control>().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn weighted_measures_keep_the_kac_property(mu in proptest::collection::vec(0.05f64..20.0, 2), which in 0usize..3) {
        let g = match which {
            0 => Groupoid::pair(2).unwrap(),
            1 => Groupoid::transformation(&Groupoid::cyclic(2).unwrap(), &[vec![0, 1], vec![1, 0]], &["a", "b"]).unwrap(),
            _ => Groupoid::group_bundle(&[Groupoid::cyclic(2).unwrap(), Groupoid::cyclic(2).unwrap()]).unwrap(),
        };
        let recs = all(&build(&g, mu, None));
        let bad: Vec<_> = recs.iter().filter(|r| !r.pass).map(|r| r.name.clone()).collect();
        prop_assert!(bad.is_empty(), "{:?}", bad);
    }

    #[test]
    fn kac_forms_agree_under_random_haar_scaling(factor in 0.2f64..5.0) {
        let g = Groupoid::pair(2).unwrap();
        let m = Measure::new(&g, Haar::counting(&g), vec![1.0, 2.0]).unwrap();
        let m = m.with_scaled_haar_weight(1, factor).unwrap();
        let ks = KacSystem::build(&m, &Tolerance::default()).unwrap();
        let recs = all(&ks);
        prop_assert_eq!(find(&recs, "kac.(ΣU₂V)³=1").pass, find(&recs, "kac.V^VVˇ=U₁Σ").pass);
    }
}
