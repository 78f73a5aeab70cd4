use proptest::prelude::*;
use translucent::counterfactual::io::{structure_from_json, structure_to_json};
use translucent::counterfactual::*;
use translucent::equilibrium::MixedProfile;
use translucent::games::*;

const SB: u64 = DEFAULT_STRUCTURE_BUDGET;

fn dilemma(kind: u8) -> SocialDilemma {
    match kind % 4 {
        0 => make_prisoners_dilemma(4.0, 1.0).unwrap(),
        1 => make_public_goods(3, 0.5, 2).unwrap(),
        2 => make_bertrand(2, 2, 5).unwrap(),
        _ => make_travelers_dilemma(2, 5, 2.0).unwrap(),
    }
}

fn prob() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(1.0), (1u32..10).prop_map(|k| k as f64 / 10.0)]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn punishment_structures_satisfy_axioms(kind in 0u8..4, betas in prop::collection::vec(prob(), 3)) {
        let d = dilemma(kind);
        let sigma = MixedProfile::two_point(&d, &betas[..d.num_players()]).unwrap();
        let m = build_punishment_structure(&d.game, &sigma, SB).unwrap();
        prop_assert!(validate_structure(&m).is_empty());
        let back = structure_from_json(&structure_to_json(&m)).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn typed_structures_satisfy_axioms(
        kind in 0u8..4,
        alphas in prop::collection::vec(prob(), 3),
        betas in prop::collection::vec(prob(), 3),
        full in any::<bool>(),
    ) {
        let d = dilemma(kind);
        let n = d.num_players();
        let response = if full { DefectorResponse::FullDefection } else { DefectorResponse::Detection };
        let t = build_typed_structure(&d, &alphas[..n], &betas[..n], response, SB).unwrap();
        prop_assert!(validate_structure(&t.structure).is_empty());
    }

    #[test]
    fn greatest_subset_contains_every_witness(betas in prop::collection::vec(prob(), 2)) {
        let d = dilemma(0);
        let sigma = MixedProfile::two_point(&d, &betas).unwrap();
        let m = build_punishment_structure(&d.game, &sigma, SB).unwrap();
        let support = support_states(&m, &sigma);
        let holds = check_translucent_equilibrium(&m, &d.game, &sigma, &support).unwrap().holds();
        let greatest = greatest_te_subset(&m, &d.game, &sigma).unwrap();
        if holds {
            prop_assert!(support.iter().all(|w| greatest.contains(w)));
        }
        prop_assert!(check_translucent_equilibrium(&m, &d.game, &sigma, &greatest).unwrap().failures.is_empty());
    }
}

#[test]
fn nash_structures_satisfy_axioms() {
    for kind in 0..4 {
        let d = dilemma(kind);
        let sigma = MixedProfile::pure(&d.game, &d.nash_profile).unwrap();
        let m = build_nash_structure(&d.game, &sigma, SB).unwrap();
        assert!(validate_structure(&m).is_empty());
        assert_eq!(structure_from_json(&structure_to_json(&m)).unwrap(), m);
    }
}

#[test]
fn structure_budget_is_enforced() {
    let d = make_travelers_dilemma(2, 60, 2.0).unwrap();
    let sigma = MixedProfile::pure(&d.game, &d.welfare_profile).unwrap();
    assert!(matches!(
        build_coherent_structure(&d.game, &sigma, 10_000),
        Err(translucent::Error::BudgetExceeded { .. })
    ));
}
