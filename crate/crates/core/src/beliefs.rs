//! The detection-probability belief model and a brute-force engine deciding
//! whether cooperating is a best response for a translucent player.
//!
//! A player of type `(alpha, beta)` who intends to cooperate believes each
//! other player cooperates independently with probability `beta`. If the
//! player instead switches to another strategy, each opponent independently
//! notices with probability `alpha`; those who notice defect, the rest behave
//! as before. Averaging over who noticed gives a product belief in which each
//! opponent cooperates with probability `(1 - alpha) * beta`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::games::{Profile, SocialDilemma};
use crate::numeric::{binomial, decide_nonneg, rational_from_f64, Rational, Scalar};

/// Largest number of (profile, detection subset) pairs the explicit mixture
/// enumeration visits by default.
pub const DEFAULT_MIXTURE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TranslucentType {
    pub alpha: f64,
    pub beta: f64,
}

impl TranslucentType {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParams(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        Ok(TranslucentType { alpha, beta })
    }

    /// Per-opponent cooperation probability after an intended deviation.
    pub fn gamma(&self) -> f64 {
        (1.0 - self.alpha) * self.beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BeliefMode {
    OnPath,
    PostDeviation,
}

/// Independent cooperate/defect beliefs about each of the other players.
///
/// Joint outcomes are indexed by bitmask: bit `j` set means the `j`-th other
/// player (in player order, skipping the believer) cooperates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OthersBehaviorModel {
    pub mode: BeliefMode,
    pub coop_probs: Vec<f64>,
}

impl OthersBehaviorModel {
    pub fn num_others(&self) -> usize {
        self.coop_probs.len()
    }

    pub fn outcome_probability(&self, mask: u64) -> f64 {
        self.coop_probs
            .iter()
            .enumerate()
            .map(|(j, &p)| if mask >> j & 1 == 1 { p } else { 1.0 - p })
            .product()
    }

    /// Probabilities of all `2^(n-1)` joint outcomes, indexed by mask.
    pub fn distribution(&self) -> Vec<f64> {
        (0..1u64 << self.num_others())
            .map(|m| self.outcome_probability(m))
            .collect()
    }
}

pub fn on_path_beliefs(t: TranslucentType, n: usize) -> Result<OthersBehaviorModel> {
    check_players(n)?;
    Ok(OthersBehaviorModel {
        mode: BeliefMode::OnPath,
        coop_probs: vec![t.beta; n - 1],
    })
}

fn check_players(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParams(format!("need at least 2 players, got {n}")));
    }
    if n > 64 {
        return Err(Error::InvalidParams(format!("at most 64 players supported, got {n}")));
    }
    Ok(())
}

/// The post-deviation belief as an explicit mixture over detection subsets.
///
/// Entry `mask` is `sum_J alpha^|J| (1-alpha)^(n-1-|J|) mu_J(mask)` where the
/// players in `J` defect and the others cooperate with probability `beta`.
/// Requires `3^(n-1)` (profile, subset) evaluations.
pub fn mixture_distribution<T: Scalar>(alpha: &T, beta: &T, n: usize) -> Vec<T> {
    let others = n - 1;
    let full: u64 = (1u64 << others) - 1;
    let one = T::one();
    (0..=full)
        .map(|coop| {
            let cooperators = coop.count_ones();
            let mut total = T::zero();
            // J must avoid every cooperator: enumerate submasks of the defectors.
            let defectors = full & !coop;
            let mut j = defectors;
            loop {
                let detected = j.count_ones();
                let undetected = others as u32 - detected;
                let weight = alpha.powi(detected) * (one.clone() - alpha.clone()).powi(undetected);
                let mu = beta.powi(cooperators)
                    * (one.clone() - beta.clone()).powi(undetected - cooperators);
                total = total + weight * mu;
                if j == 0 {
                    break;
                }
                j = (j - 1) & defectors;
            }
            total
        })
        .collect()
}

/// Result of building the post-deviation beliefs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationMixture {
    pub model: OthersBehaviorModel,
    /// Whether the subset mixture was enumerated and compared to the product form.
    pub enumerated: bool,
    /// Largest absolute difference between mixture and product probabilities.
    pub max_abs_error: f64,
}

/// Builds the post-deviation beliefs, cross-checking the subset mixture
/// against the product form when `3^(n-1)` fits in `budget`.
pub fn deviation_belief_mixture(t: TranslucentType, n: usize, budget: u64) -> Result<DeviationMixture> {
    check_players(n)?;
    let model = OthersBehaviorModel {
        mode: BeliefMode::PostDeviation,
        coop_probs: vec![t.gamma(); n - 1],
    };
    let required = 3u128.checked_pow((n - 1) as u32).unwrap_or(u128::MAX);
    if required > budget as u128 {
        return Ok(DeviationMixture {
            model,
            enumerated: false,
            max_abs_error: 0.0,
        });
    }
    let mixture = mixture_distribution(&t.alpha, &t.beta, n);
    let max_abs_error = mixture
        .iter()
        .zip(model.distribution())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if max_abs_error > 1e-12 {
        return Err(Error::InvalidParams(format!(
            "detection mixture disagrees with product form by {max_abs_error:e}"
        )));
    }
    Ok(DeviationMixture {
        model,
        enumerated: true,
        max_abs_error,
    })
}

/// How expectations over the others' joint behavior are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    /// Sum over cooperator counts with binomial weights (symmetric games).
    Binomial,
    /// Sum over every joint outcome in `{C, D}^(n-1)`.
    Enumerate,
}

/// The profile in which player `i` plays `own` and the `j`-th other player
/// cooperates iff bit `j` of `coop_mask` is set.
pub fn profile_from_mask(d: &SocialDilemma, i: usize, own: usize, coop_mask: u64) -> Profile {
    let n = d.num_players();
    let mut profile = Vec::with_capacity(n);
    let mut j = 0;
    for k in 0..n {
        if k == i {
            profile.push(own);
        } else {
            profile.push(if coop_mask >> j & 1 == 1 { d.cooperate(k) } else { d.defect(k) });
            j += 1;
        }
    }
    profile
}

/// `E[u_i(own, s_-i)]` when each other player cooperates independently with probability `p`.
pub fn expected_utility_against<T: Scalar>(
    d: &SocialDilemma,
    i: usize,
    own: usize,
    p: &T,
    aggregation: Aggregation,
) -> T {
    let others = d.num_players() - 1;
    match aggregation {
        Aggregation::Binomial => {
            debug_assert!(d.game.is_symmetric());
            let q = T::one() - p.clone();
            (0..=others as u32).fold(T::zero(), |acc, k| {
                let mask = if k == 0 { 0 } else { (1u64 << k) - 1 };
                let u: T = d.game.payoff_with(&profile_from_mask(d, i, own, mask), i);
                let w = binomial::<T>(others as u32, k) * p.powi(k) * q.powi(others as u32 - k);
                acc + w * u
            })
        }
        Aggregation::Enumerate => {
            let probs = vec![p.clone(); others];
            expected_utility_against_model(d, i, own, &probs)
        }
    }
}

/// `E[u_i(own, s_-i)]` under independent per-opponent cooperation
/// probabilities `probs` (one entry per other player, in player order).
pub fn expected_utility_against_model<T: Scalar>(
    d: &SocialDilemma,
    i: usize,
    own: usize,
    probs: &[T],
) -> T {
    let others = d.num_players() - 1;
    assert_eq!(probs.len(), others, "one probability per other player");
    (0..1u64 << others).fold(T::zero(), |acc, mask| {
        let w = probs.iter().enumerate().fold(T::one(), |w, (j, p)| {
            if mask >> j & 1 == 1 {
                w * p.clone()
            } else {
                w * (T::one() - p.clone())
            }
        });
        if w.is_zero() {
            return acc;
        }
        let u: T = d.game.payoff_with(&profile_from_mask(d, i, own, mask), i);
        acc + w * u
    })
}

fn default_aggregation(d: &SocialDilemma) -> Aggregation {
    if d.game.is_symmetric() {
        Aggregation::Binomial
    } else {
        Aggregation::Enumerate
    }
}

fn check_player(d: &SocialDilemma, i: usize) -> Result<()> {
    if i >= d.num_players() {
        return Err(Error::InvalidProfile(format!(
            "player index {i} out of range for {} players",
            d.num_players()
        )));
    }
    Ok(())
}

/// Expected payoff of cooperating under on-path beliefs.
pub fn expected_utility_cooperate(d: &SocialDilemma, i: usize, t: TranslucentType) -> Result<f64> {
    check_player(d, i)?;
    Ok(expected_utility_against(d, i, d.cooperate(i), &t.beta, default_aggregation(d)))
}

/// Expected payoff of switching to `s_dev` under post-deviation beliefs.
pub fn expected_utility_deviation(
    d: &SocialDilemma,
    i: usize,
    t: TranslucentType,
    s_dev: usize,
) -> Result<f64> {
    check_player(d, i)?;
    if s_dev >= d.game.num_strategies(i) {
        return Err(Error::InvalidProfile(format!(
            "strategy index {s_dev} out of range for player {i}"
        )));
    }
    Ok(expected_utility_against(d, i, s_dev, &t.gamma(), default_aggregation(d)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalityReport {
    pub verdict: bool,
    pub best_deviation: usize,
    pub eu_coop: f64,
    pub eu_best_dev: f64,
}

/// Decides whether cooperating is a best response for a player of type `t`,
/// comparing against every other strategy in the player's strategy set.
///
/// Margins within the exactness band are recomputed over rationals.
pub fn is_cooperation_rational(
    d: &SocialDilemma,
    i: usize,
    t: TranslucentType,
    budget: u64,
) -> Result<RationalityReport> {
    check_player(d, i)?;
    let aggregation = default_aggregation(d);
    let m = d.game.num_strategies(i) as u128;
    let per_eval = match aggregation {
        Aggregation::Binomial => d.num_players() as u128,
        Aggregation::Enumerate => 1u128 << (d.num_players() - 1),
    };
    let required = m * per_eval;
    if required > budget as u128 {
        return Err(Error::BudgetExceeded {
            what: "cooperation best-response check",
            required,
            budget,
        });
    }
    let coop = d.cooperate(i);
    let gamma = t.gamma();
    let eu_coop: f64 = expected_utility_against(d, i, coop, &t.beta, aggregation);
    let exact = ExactType::new(t);
    let mut eu_coop_exact: Option<Rational> = None;
    let mut verdict = true;
    let mut best: Option<(usize, f64)> = None;
    for s in 0..d.game.num_strategies(i) {
        if s == coop {
            continue;
        }
        let eu: f64 = expected_utility_against(d, i, s, &gamma, aggregation);
        if best.is_none_or(|(_, b)| eu > b) {
            best = Some((s, eu));
        }
        if verdict {
            let ok = decide_nonneg(eu_coop - eu, eu_coop.abs().max(eu.abs()), || {
                let c = eu_coop_exact
                    .get_or_insert_with(|| {
                        expected_utility_against(d, i, coop, &exact.beta, aggregation)
                    })
                    .clone();
                c - expected_utility_against(d, i, s, &exact.gamma, aggregation)
            });
            verdict = ok;
        }
    }
    let (best_deviation, eu_best_dev) = best.unwrap_or((coop, eu_coop));
    Ok(RationalityReport {
        verdict,
        best_deviation,
        eu_coop,
        eu_best_dev,
    })
}

/// Exact counterparts of a type's probabilities.
pub struct ExactType {
    pub alpha: Rational,
    pub beta: Rational,
    pub gamma: Rational,
}

impl ExactType {
    pub fn new(t: TranslucentType) -> Self {
        let alpha = rational_from_f64(t.alpha);
        let beta = rational_from_f64(t.beta);
        let gamma = (Rational::from_i64(1) - alpha.clone()) * beta.clone();
        ExactType { alpha, beta, gamma }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::*;

    fn ty(a: f64, b: f64) -> TranslucentType {
        TranslucentType::new(a, b).unwrap()
    }

    #[test]
    fn type_bounds() {
        assert!(TranslucentType::new(1.1, 0.5).is_err());
        assert!(TranslucentType::new(0.5, -0.1).is_err());
        assert!(TranslucentType::new(0.0, 1.0).is_ok());
    }

    #[test]
    fn on_path_examples() {
        let m = on_path_beliefs(ty(0.3, 1.0), 3).unwrap();
        assert_eq!(m.distribution(), vec![0.0, 0.0, 0.0, 1.0]);
        let m = on_path_beliefs(ty(0.3, 0.5), 3).unwrap();
        assert_eq!(m.distribution(), vec![0.25; 4]);
        let m = on_path_beliefs(ty(0.3, 0.3), 4).unwrap();
        // two of three others cooperate
        assert!((m.outcome_probability(0b011) - 0.3 * 0.3 * 0.7).abs() < 1e-15);
    }

    #[test]
    fn deviation_examples() {
        let m = deviation_belief_mixture(ty(1.0, 0.7), 2, DEFAULT_MIXTURE_BUDGET).unwrap();
        assert_eq!(m.model.distribution(), vec![1.0, 0.0]);
        let m = deviation_belief_mixture(ty(0.0, 0.5), 2, DEFAULT_MIXTURE_BUDGET).unwrap();
        assert_eq!(m.model.distribution(), on_path_beliefs(ty(0.0, 0.5), 2).unwrap().distribution());
        let m = deviation_belief_mixture(ty(0.5, 0.8), 3, DEFAULT_MIXTURE_BUDGET).unwrap();
        assert!(m.enumerated);
        assert!(m.model.coop_probs.iter().all(|&p| (p - 0.4).abs() < 1e-15));
        let big = deviation_belief_mixture(ty(0.5, 0.8), 30, 1000).unwrap();
        assert!(!big.enumerated);
    }

    #[test]
    fn mixture_is_product_in_exact_arithmetic() {
        let alpha = Rational::new(1.into(), 3.into());
        let beta = Rational::new(4.into(), 5.into());
        let gamma = (Rational::from_i64(1) - alpha.clone()) * beta.clone();
        let mix = mixture_distribution(&alpha, &beta, 5);
        for (mask, p) in mix.iter().enumerate() {
            let k = (mask as u64).count_ones();
            let expected = gamma.powi(k) * (Rational::from_i64(1) - gamma.clone()).powi(4 - k);
            assert_eq!(p, &expected);
        }
    }

    #[test]
    fn cooperation_utilities() {
        let pd = make_prisoners_dilemma(4.0, 1.0).unwrap();
        assert!((expected_utility_cooperate(&pd, 0, ty(0.2, 0.5)).unwrap() - 1.0).abs() < 1e-12);
        let pgg = make_public_goods(4, 0.5, 100).unwrap();
        assert!((expected_utility_cooperate(&pgg, 0, ty(0.2, 0.9)).unwrap() - 1.85).abs() < 1e-12);
        let bt = make_bertrand(2, 2, 100).unwrap();
        assert!((expected_utility_cooperate(&bt, 0, ty(0.2, 0.9)).unwrap() - 45.0).abs() < 1e-12);
    }

    #[test]
    fn deviation_utilities() {
        let pd = make_prisoners_dilemma(4.0, 1.0).unwrap();
        assert!((expected_utility_deviation(&pd, 0, ty(0.5, 0.5), 1).unwrap() - 1.0).abs() < 1e-12);
        let pgg = make_public_goods(4, 0.5, 100).unwrap();
        assert!((expected_utility_deviation(&pgg, 0, ty(0.4, 0.9), 0).unwrap() - 1.81).abs() < 1e-12);
        let td = make_travelers_dilemma(2, 100, 10.0).unwrap();
        assert!((expected_utility_deviation(&td, 0, ty(0.6, 0.5), 0).unwrap() - 4.0).abs() < 1e-12);
        assert!(expected_utility_deviation(&td, 0, ty(0.6, 0.5), 99).is_err());
    }

    #[test]
    fn pd_boundary_is_rational() {
        let pd = make_prisoners_dilemma(4.0, 1.0).unwrap();
        let r = is_cooperation_rational(&pd, 0, ty(0.5, 0.5), u64::MAX).unwrap();
        assert!(r.verdict);
        assert_eq!(r.best_deviation, 1);
        assert!((r.eu_coop - 1.0).abs() < 1e-12 && (r.eu_best_dev - 1.0).abs() < 1e-12);
    }

    #[test]
    fn td_bonus_threshold() {
        let t = ty(0.6, 0.5);
        let d70 = make_travelers_dilemma(2, 100, 70.0).unwrap();
        assert!(is_cooperation_rational(&d70, 0, t, u64::MAX).unwrap().verdict);
        let d71 = make_travelers_dilemma(2, 100, 71.0).unwrap();
        assert!(!is_cooperation_rational(&d71, 0, t, u64::MAX).unwrap().verdict);
    }

    #[test]
    fn opacity_makes_cooperation_irrational() {
        let t = ty(0.0, 0.7);
        let games = [
            make_prisoners_dilemma(4.0, 1.0).unwrap(),
            make_public_goods(3, 0.5, 10).unwrap(),
            make_bertrand(3, 2, 10).unwrap(),
            make_travelers_dilemma(2, 10, 3.0).unwrap(),
        ];
        for d in &games {
            assert!(!is_cooperation_rational(d, 0, t, u64::MAX).unwrap().verdict, "{:?}", d.kind);
        }
    }

    #[test]
    fn budget_applies() {
        let d = make_public_goods(3, 0.5, 100).unwrap();
        assert!(matches!(
            is_cooperation_rational(&d, 0, ty(0.5, 0.5), 10),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
