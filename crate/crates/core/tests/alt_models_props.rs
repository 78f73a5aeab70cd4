use translucent::alt_models::*;
use translucent::games::*;

#[test]
fn qre_cooperation_stays_below_half() {
    for (b, c) in [(2.0, 1.0), (4.0, 1.0), (10.0, 0.5), (3.0, 2.5)] {
        let d = make_prisoners_dilemma(b, c).unwrap();
        for k in 0..=100 {
            let lambda = k as f64 * 0.5;
            let r = logit_qre(&d.game, lambda).unwrap();
            assert!(r.residual <= QRE_TOL);
            for i in 0..2 {
                let p = r.profile.prob(i, 0);
                if lambda == 0.0 {
                    assert_eq!(p, 0.5);
                } else {
                    assert!(p < 0.5, "b={b} c={c} lambda={lambda}: {p}");
                    // defection dominates by exactly c, so the fixed point is explicit
                    let expect = 1.0 / (1.0 + (lambda * c).exp());
                    assert!((p - expect).abs() <= 1e-9);
                }
            }
        }
    }
}

#[test]
fn qre_cooperation_falls_with_precision() {
    let d = make_prisoners_dilemma(4.0, 1.0).unwrap();
    let mut prev = 0.5;
    for k in 1..=40 {
        let p = logit_qre(&d.game, k as f64 * 0.5).unwrap().profile.prob(0, 0);
        assert!(p < prev);
        prev = p;
    }
}

#[test]
fn logit_response_stays_normalized() {
    let games = [
        make_prisoners_dilemma(4.0, 1.0).unwrap(),
        make_public_goods(3, 0.5, 4).unwrap(),
        make_bertrand(2, 2, 12).unwrap(),
        make_travelers_dilemma(2, 20, 3.0).unwrap(),
    ];
    for d in &games {
        for lambda in [0.0, 0.7, 5.0, 50.0] {
            let mut probs: Vec<Vec<f64>> = (0..d.num_players())
                .map(|i| vec![1.0 / d.game.num_strategies(i) as f64; d.game.num_strategies(i)])
                .collect();
            for _ in 0..30 {
                let next = logit_response(&d.game, &probs, lambda);
                for row in &next {
                    assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                }
                for (row, target) in probs.iter_mut().zip(&next) {
                    for (p, t) in row.iter_mut().zip(target) {
                        *p = 0.5 * *p + 0.5 * t;
                    }
                    assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                }
            }
        }
    }
}

#[test]
fn fehr_schmidt_is_material_payoff_when_payoffs_are_equal() {
    let games = [
        make_prisoners_dilemma(4.0, 1.0).unwrap(),
        make_public_goods(3, 0.5, 4).unwrap(),
        make_bertrand(3, 2, 7).unwrap(),
        make_travelers_dilemma(2, 9, 2.0).unwrap(),
    ];
    for d in &games {
        let n = d.num_players();
        let p = FehrSchmidtParams::uniform(n, 0.9, 0.6).unwrap();
        for profile in d.game.profiles() {
            let u: Vec<f64> = (0..n).map(|j| d.game.payoff(&profile, j).unwrap()).collect();
            if u.iter().all(|&x| x == u[0]) {
                for i in 0..n {
                    assert_eq!(fehr_schmidt_utility(&d.game, &profile, i, &p).unwrap(), u[i]);
                }
            }
        }
    }
}

/// Brute-force unilateral best replies to a common contribution level.
#[test]
fn fehr_schmidt_pgg_threshold_matches_best_replies() {
    let mut printed_disagreements = 0;
    for n in 2..=3 {
        for grid in [1, 2, 5, 10] {
            for rho10 in 1..10 {
                let rho = rho10 as f64 / 10.0;
                if rho <= 1.0 / n as f64 {
                    continue;
                }
                let d = make_public_goods(n, rho, grid).unwrap();
                for b20 in 0..=30 {
                    let b_fs = b20 as f64 / 20.0;
                    // skip exact ties between guilt and the material gain
                    if (b_fs - (1.0 - rho)).abs() < 1e-9 {
                        continue;
                    }
                    let p = FehrSchmidtParams::uniform(n, b_fs.max(1.0), b_fs).unwrap();
                    let cond = fs_pgg_full_contribution_condition(b_fs, rho).unwrap();
                    for x in 1..=grid as usize {
                        let profile = vec![x; n];
                        let best = fehr_schmidt_best_replies(&d.game, &profile, 0, &p).unwrap();
                        assert_eq!(best == vec![x], cond.holds, "n={n} grid={grid} rho={rho} b_fs={b_fs} x={x}");
                        if cond.holds {
                            continue;
                        }
                        // below the threshold nothing but zero survives
                        assert_eq!(best, vec![0]);
                    }
                    printed_disagreements += (cond.holds != cond.printed_holds) as usize;
                }
            }
        }
    }
    assert!(printed_disagreements > 0);
}

#[test]
fn fehr_schmidt_low_guilt_never_contributes() {
    let d = make_public_goods(3, 0.6, 4).unwrap();
    let p = FehrSchmidtParams::uniform(3, 0.8, 0.3).unwrap();
    for profile in d.game.profiles() {
        assert_eq!(fehr_schmidt_best_replies(&d.game, &profile, 1, &p).unwrap(), vec![0]);
    }
}

#[test]
fn charness_rabin_weight_limits() {
    let d = make_public_goods(3, 0.5, 2).unwrap();
    let selfish = CharnessRabinParams::uniform(3, 0.0, 0.4).unwrap();
    let maximin = CharnessRabinParams::uniform(3, 1.0, 1.0).unwrap();
    for profile in d.game.profiles() {
        let u: Vec<f64> = (0..3).map(|j| d.game.payoff(&profile, j).unwrap()).collect();
        let min = u.iter().copied().fold(f64::INFINITY, f64::min);
        for i in 0..3 {
            assert_eq!(charness_rabin_utility(&d.game, &profile, i, &selfish).unwrap(), u[i]);
            assert_eq!(charness_rabin_utility(&d.game, &profile, i, &maximin).unwrap(), min);
        }
    }
}
