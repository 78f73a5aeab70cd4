use super::io::{structure_from_json, structure_to_json};
use super::*;
use crate::equilibrium::MixedProfile;
use crate::games::*;

const B: u64 = DEFAULT_STRUCTURE_BUDGET;

fn pd() -> SocialDilemma {
    make_prisoners_dilemma(4.0, 1.0).unwrap()
}

/// States (C,C) and (D,D) with every switch landing on the matching state.
fn tiny(beliefs: Vec<Vec<Vec<f64>>>) -> Result<CounterfactualStructure> {
    let states = vec![State::new(vec![0, 0]), State::new(vec![1, 1])];
    CounterfactualStructure::new(vec![2, 2], states, |_, _, s| s, beliefs)
}

#[test]
fn shape_errors() {
    assert!(tiny(vec![vec![vec![1.0, 0.0]; 2]]).is_err());
    assert!(tiny(vec![vec![vec![1.0]; 2]; 2]).is_err());
    assert!(CounterfactualStructure::new(vec![2, 2], vec![State::new(vec![0, 0])], |_, _, _| 3, vec![vec![vec![1.0]]; 2]).is_err());
}

#[test]
fn axiom_violations_are_reported() {
    let good = tiny(vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]; 2]).unwrap();
    assert!(validate_structure(&good).is_empty());

    let pr1 = tiny(vec![vec![vec![0.5, 0.5], vec![0.5, 0.5]]; 2]).unwrap();
    let v = validate_structure(&pr1);
    assert!(v.iter().any(|x| x.axiom == Axiom::Pr1 && x.state == 0));

    let norm = tiny(vec![vec![vec![0.5, 0.0], vec![0.0, 1.0]]; 2]).unwrap();
    assert!(validate_structure(&norm).iter().any(|x| x.axiom == Axiom::Normalization && x.state == 0));

    // closest(0, i, 1) = 0 plays 0 for player i: CS1
    let states = vec![State::new(vec![0, 0]), State::new(vec![1, 1])];
    let bad = CounterfactualStructure::new(vec![2, 2], states, |w, _, _| w, vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]; 2]).unwrap();
    let v = validate_structure(&bad);
    assert!(v.iter().any(|x| x.axiom == Axiom::Cs1 && x.state == 0));
    assert!(v.iter().any(|x| x.axiom == Axiom::Cs1 && x.state == 1));
    assert!(!v.iter().any(|x| x.axiom == Axiom::Cs2));
}

#[test]
fn cs2_and_pr2_violations() {
    let states = vec![State::new(vec![0, 0]), State::new(vec![0, 1]), State::new(vec![1, 1])];
    let beliefs = vec![
        // player 0 at state 0 splits between states 0 and 1, but holds
        // a point belief at state 1
        vec![vec![0.5, 0.5, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
        vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
    ];
    let m = CounterfactualStructure::new(
        vec![2, 2],
        states,
        |w, i, s| match (w, i, s) {
            (0, 0, 0) => 1, // plays 0, but not the state itself
            (_, 0, 0) => 0,
            (_, 0, 1) => 2,
            (_, 1, 0) => 0,
            _ => 1,
        },
        beliefs,
    )
    .unwrap();
    let v = validate_structure(&m);
    assert!(v.iter().any(|x| x.axiom == Axiom::Cs2 && x.state == 0 && x.player == 0));
    assert!(v.iter().any(|x| x.axiom == Axiom::Pr2 && x.state == 0 && x.player == 0));
}

#[test]
fn nash_structure_for_pd_defection() {
    let d = pd();
    let sigma = MixedProfile::pure(&d.game, &[1, 1]).unwrap();
    let m = build_nash_structure(&d.game, &sigma, B).unwrap();
    assert_eq!(m.num_states(), 3);
    assert_eq!(m.strat(0), &[1, 1]);
    assert!(validate_structure(&m).is_empty());
    let subset = support_states(&m, &sigma);
    assert_eq!(subset, vec![0]);
    assert!(check_translucent_equilibrium(&m, &d.game, &sigma, &subset).unwrap().holds());
}

#[test]
fn nash_structure_rejects_non_nash() {
    let d = pd();
    let sigma = MixedProfile::pure(&d.game, &[0, 0]).unwrap();
    assert!(matches!(
        build_nash_structure(&d.game, &sigma, B),
        Err(Error::NotNash { player: 0, from: 0, to: 1 })
    ));
}

#[test]
fn nash_structure_for_mixed_equilibrium() {
    // matching pennies
    let table = PayoffTable {
        strategies: vec![2, 2],
        payoffs: vec![vec![1.0, -1.0], vec![-1.0, 1.0], vec![-1.0, 1.0], vec![1.0, -1.0]],
    };
    let g = NormalFormGame::from_table(&table).unwrap();
    let sigma = MixedProfile::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
    let m = build_nash_structure(&g, &sigma, B).unwrap();
    assert_eq!(m.num_states(), 4);
    assert!(validate_structure(&m).is_empty());
    let subset = support_states(&m, &sigma);
    assert!(check_translucent_equilibrium(&m, &g, &sigma, &subset).unwrap().holds());
}

#[test]
fn coherent_structure_supports_cooperation() {
    let d = pd();
    let sigma = MixedProfile::pure(&d.game, &[0, 0]).unwrap();
    let m = build_coherent_structure(&d.game, &sigma, B).unwrap();
    assert_eq!(m.num_states(), 4);
    assert!(validate_structure(&m).is_empty());
    let subset = support_states(&m, &sigma);
    assert_eq!(subset, vec![0]);
    assert!(check_translucent_equilibrium(&m, &d.game, &sigma, &subset).unwrap().holds());
    assert_eq!(greatest_te_subset(&m, &d.game, &sigma).unwrap(), vec![0]);
}

#[test]
fn incoherent_profile_fails_rationality() {
    let d = pd();
    let sigma = MixedProfile::pure(&d.game, &[0, 1]).unwrap();
    assert!(matches!(
        build_coherent_structure(&d.game, &sigma, B),
        Err(Error::Incoherent { player: 0, strategy: 0, deviation: 1 })
    ));
    let m = build_punishment_structure(&d.game, &sigma, B).unwrap();
    assert!(validate_structure(&m).is_empty());
    let subset = support_states(&m, &sigma);
    let report = check_translucent_equilibrium(&m, &d.game, &sigma, &subset).unwrap();
    assert!(!report.holds());
    assert!(report
        .failures
        .iter()
        .all(|f| f.condition == TeCondition::Te4 && f.player == Some(0)));
    assert!(greatest_te_subset(&m, &d.game, &sigma).unwrap().is_empty());
}

#[test]
fn te_detects_wrong_marginals_and_leaks() {
    let d = pd();
    let cc = MixedProfile::pure(&d.game, &[0, 0]).unwrap();
    let m = build_coherent_structure(&d.game, &cc, B).unwrap();
    let mix = MixedProfile::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
    let report = check_translucent_equilibrium(&m, &d.game, &mix, &[0]).unwrap();
    assert!(report.failures.iter().any(|f| f.condition == TeCondition::Te3 && f.player == Some(0)));
    // state 1 is (C,D): outside the support, and player 0 believes in state 0
    let report = check_translucent_equilibrium(&m, &d.game, &cc, &[1]).unwrap();
    assert!(report.failures.iter().any(|f| f.condition == TeCondition::Te1));
    assert!(report.failures.iter().any(|f| f.condition == TeCondition::Te2));
}

#[test]
fn state_utilities() {
    let d = pd();
    let cc = MixedProfile::pure(&d.game, &[0, 0]).unwrap();
    let m = build_coherent_structure(&d.game, &cc, B).unwrap();
    let r = is_rational_at(&m, &d.game, 0, 0).unwrap();
    assert_eq!(r.eu, 3.0);
    // switching to D is answered by D: payoff 0
    assert_eq!(r.eu_switch, vec![3.0, 0.0]);
    assert!(r.rational);
}

#[test]
fn typed_pd_matches_closed_form_on_grid() {
    let grid = [0.0, 0.2, 0.25, 0.5, 0.75, 1.0];
    for &a1 in &grid {
        for &a2 in &grid {
            for &b1 in &grid {
                for &b2 in &grid {
                    let t = build_typed_pd_structure(a1, a2, b1, b2, 4.0, 1.0).unwrap();
                    assert!(validate_structure(&t.structure).is_empty());
                    let sub = t.support_states();
                    let rep = check_translucent_equilibrium(&t.structure, &t.dilemma.game, &t.sigma, &sub).unwrap();
                    let cond = |a: f64, b: f64, own: f64| own == 0.0 || a * b * 4.0 >= 1.0;
                    let expect = cond(a1, b2, b1) && cond(a2, b1, b2);
                    assert_eq!(rep.holds(), expect, "a=({a1},{a2}) b=({b1},{b2})");
                }
            }
        }
    }
}

#[test]
fn typed_structure_argument_errors() {
    let d = pd();
    assert!(build_typed_structure(&d, &[0.5], &[0.5, 0.5], DefectorResponse::Detection, B).is_err());
    assert!(build_typed_structure(&d, &[0.5, 1.5], &[0.5, 0.5], DefectorResponse::Detection, B).is_err());
    let pgg = make_public_goods(4, 0.5, 10).unwrap();
    assert!(matches!(
        build_typed_structure(&pgg, &[0.5; 4], &[0.5; 4], DefectorResponse::FullDefection, 1000),
        Err(Error::BudgetExceeded { .. })
    ));
}

#[test]
fn json_round_trip() {
    let t = build_typed_pd_structure(0.5, 0.5, 0.5, 0.5, 4.0, 1.0).unwrap();
    let text = structure_to_json(&t.structure);
    let back = structure_from_json(&text).unwrap();
    assert_eq!(back, t.structure);

    let d = pd();
    let cc = MixedProfile::pure(&d.game, &[0, 0]).unwrap();
    let m = build_coherent_structure(&d.game, &cc, B).unwrap();
    assert_eq!(structure_from_json(&structure_to_json(&m)).unwrap(), m);
}

#[test]
fn json_defaults_and_errors() {
    let text = r#"{
        "strategies": [2, 2],
        "states": [{"profile": [0, 0]}, {"profile": [1, 0]}, {"profile": [0, 1]}, {"profile": [1, 1]}],
        "beliefs": [
            [[[0, 1.0]], [[1, 1.0]], [[2, 1.0]], [[3, 1.0]]],
            [[[0, 1.0]], [[1, 1.0]], [[2, 1.0]], [[3, 1.0]]]
        ]
    }"#;
    let m = structure_from_json(text).unwrap();
    assert_eq!(m.closest(0, 0, 1), 1);
    assert_eq!(m.closest(0, 1, 1), 2);
    assert!(validate_structure(&m).is_empty());

    let missing = r#"{"strategies": [2, 2], "states": [{"profile": [0, 0]}],
        "beliefs": [[[[0, 1.0]]], [[[0, 1.0]]]]}"#;
    let err = structure_from_json(missing).unwrap_err().to_string();
    assert!(err.contains("no entry for state 0"), "{err}");

    let malformed = "{\n  \"strategies\": [2, 2],\n  \"states\": [{\"profile\": [0, \"x\"]}]\n}";
    let err = structure_from_json(malformed).unwrap_err().to_string();
    assert!(err.contains("line 3"), "{err}");
    assert!(err.contains("states[0].profile[1]"), "{err}");
}
