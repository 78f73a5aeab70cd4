//! Mixed profiles, coherence, translucent equilibrium, and the per-game
//! conditions under which two-point cooperate/defect mixtures are translucent
//! equilibria.
//!
//! A profile is coherent when every strategy a player uses survives every
//! deviation against *some* opponent profile: for each `s_i` in the support
//! and each alternative `s'`, there is `s'_-i` with
//! `u_i(s_i, sigma_-i) >= u_i(s', s'_-i)`. Coherent profiles are exactly the
//! translucent equilibria.

use num::traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::closed_form::td_condition;
use crate::counterfactual::{
    build_coherent_structure, check_translucent_equilibrium, support_states, TeReport,
};
use crate::error::{Error, Result};
use crate::games::{DilemmaParams, NormalFormGame, Profile, Profiles, SocialDilemma};
use crate::numeric::{decide_nonneg, rational_from_f64, Rational, Scalar, EXACT_BAND};

/// Tolerance on the sum of each player's mixing probabilities.
pub const MIX_TOL: f64 = 1e-9;

/// One probability vector per player over that player's strategies.
///
/// Each probability is also held as a rational, read from the float's
/// shortest decimal form, so that exact comparisons see `1 - 0.9` as `1/10`
/// when the profile was built from cooperation probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct MixedProfile {
    probs: Vec<Vec<f64>>,
    #[serde(skip)]
    exact: Vec<Vec<Rational>>,
}

impl TryFrom<Vec<Vec<f64>>> for MixedProfile {
    type Error = Error;

    fn try_from(probs: Vec<Vec<f64>>) -> Result<Self> {
        MixedProfile::new(probs)
    }
}

impl From<MixedProfile> for Vec<Vec<f64>> {
    fn from(m: MixedProfile) -> Self {
        m.probs
    }
}

impl MixedProfile {
    pub fn new(probs: Vec<Vec<f64>>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidMixedProfile(format!(
                "need at least 2 players, got {}",
                probs.len()
            )));
        }
        for (i, row) in probs.iter().enumerate() {
            if row.is_empty() {
                return Err(Error::InvalidMixedProfile(format!("player {i} has no strategies")));
            }
            if let Some(s) = row.iter().position(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::InvalidMixedProfile(format!(
                    "player {i} strategy {s} has invalid probability {}",
                    row[s]
                )));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > MIX_TOL {
                return Err(Error::InvalidMixedProfile(format!(
                    "player {i} probabilities sum to {total}"
                )));
            }
        }
        let exact = probs
            .iter()
            .map(|row| row.iter().map(|&p| rational_from_f64(p)).collect())
            .collect();
        Ok(MixedProfile { probs, exact })
    }

    /// The degenerate mixture playing `profile` with certainty.
    pub fn pure(game: &NormalFormGame, profile: &[usize]) -> Result<Self> {
        game.check_profile(profile)?;
        let probs = profile
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let mut row = vec![0.0; game.num_strategies(i)];
                row[s] = 1.0;
                row
            })
            .collect();
        MixedProfile::new(probs)
    }

    /// Each player `i` cooperates with probability `betas[i]` and defects otherwise.
    pub fn two_point(d: &SocialDilemma, betas: &[f64]) -> Result<Self> {
        if betas.len() != d.num_players() {
            return Err(Error::InvalidMixedProfile(format!(
                "got {} cooperation probabilities for {} players",
                betas.len(),
                d.num_players()
            )));
        }
        let probs = betas
            .iter()
            .enumerate()
            .map(|(i, &b)| {
                if !(0.0..=1.0).contains(&b) {
                    return Err(Error::InvalidMixedProfile(format!(
                        "player {i} cooperation probability {b} outside [0, 1]"
                    )));
                }
                let mut row = vec![0.0; d.game.num_strategies(i)];
                row[d.cooperate(i)] += b;
                row[d.defect(i)] += 1.0 - b;
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut sigma = MixedProfile::new(probs)?;
        for (i, &b) in betas.iter().enumerate() {
            let row = &mut sigma.exact[i];
            row.iter_mut().for_each(|p| *p = Rational::zero());
            row[d.cooperate(i)] = rational_from_f64(b);
            row[d.defect(i)] = Rational::one() - rational_from_f64(b);
        }
        Ok(sigma)
    }

    pub fn num_players(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn prob(&self, i: usize, s: usize) -> f64 {
        self.probs[i].get(s).copied().unwrap_or(0.0)
    }

    pub fn prob_with<T: Scalar>(&self, i: usize, s: usize) -> T {
        match self.probs[i].get(s) {
            Some(&p) => T::from_pair(p, &self.exact[i][s]),
            None => T::zero(),
        }
    }

    pub fn support(&self, i: usize) -> Vec<usize> {
        (0..self.probs[i].len()).filter(|&s| self.probs[i][s] > 0.0).collect()
    }

    pub fn check_game(&self, game: &NormalFormGame) -> Result<()> {
        let counts: Vec<usize> = self.probs.iter().map(Vec::len).collect();
        if counts != game.strategy_counts() {
            return Err(Error::InvalidMixedProfile(format!(
                "profile has strategy counts {counts:?}, game has {:?}",
                game.strategy_counts()
            )));
        }
        Ok(())
    }

    /// `sigma_-i(others)` where `others` lists the strategies of every player but `i`.
    pub fn opponents_prob_of(&self, i: usize, others: &[usize]) -> f64 {
        (0..self.num_players())
            .filter(|&j| j != i)
            .zip(others)
            .map(|(j, &s)| self.prob(j, s))
            .product()
    }

    /// Number of opponent profiles in the support of `sigma_-i`.
    pub fn opponent_support_size(&self, i: usize) -> u128 {
        (0..self.num_players())
            .filter(|&j| j != i)
            .fold(1u128, |acc, j| acc.saturating_mul(self.support(j).len() as u128))
    }

    /// Every profile in the support of `sigma`, in lexicographic order.
    pub fn support_profiles(&self) -> Vec<Profile> {
        let supports: Vec<Vec<usize>> = (0..self.num_players()).map(|i| self.support(i)).collect();
        Profiles::new(supports.iter().map(Vec::len).collect())
            .map(|idx| idx.iter().enumerate().map(|(i, &k)| supports[i][k]).collect())
            .collect()
    }

    /// `u_i(own, sigma_-i)` in the requested scalar.
    pub fn expected_payoff_with<T: Scalar>(&self, game: &NormalFormGame, i: usize, own: usize) -> T {
        let supports: Vec<Vec<usize>> = (0..self.num_players())
            .map(|j| if j == i { vec![own] } else { self.support(j) })
            .collect();
        let mut total = T::zero();
        for idx in Profiles::new(supports.iter().map(Vec::len).collect()) {
            let profile: Profile = idx.iter().enumerate().map(|(j, &k)| supports[j][k]).collect();
            let w = (0..self.num_players())
                .filter(|&j| j != i)
                .fold(T::one(), |w, j| w * self.prob_with::<T>(j, profile[j]));
            total = total + w * game.payoff_with::<T>(&profile, i);
        }
        total
    }

    pub fn expected_payoff(&self, game: &NormalFormGame, i: usize, own: usize) -> f64 {
        self.expected_payoff_with(game, i, own)
    }

    fn check_budget(&self, game: &NormalFormGame, budget: u64) -> Result<()> {
        let required = (0..self.num_players())
            .map(|i| self.opponent_support_size(i).saturating_mul(game.num_strategies(i) as u128))
            .fold(0u128, u128::saturating_add);
        if required > budget as u128 {
            return Err(Error::BudgetExceeded {
                what: "expected payoffs against a mixed profile",
                required,
                budget,
            });
        }
        Ok(())
    }
}

/// `u_i(a, sigma_-i) >= u_i(b, sigma_-i)`, exactly near ties.
fn mixed_payoff_geq(game: &NormalFormGame, sigma: &MixedProfile, i: usize, a: usize, b: usize) -> bool {
    let x = sigma.expected_payoff(game, i, a);
    let y = sigma.expected_payoff(game, i, b);
    decide_nonneg(x - y, x.abs().max(y.abs()), || {
        sigma.expected_payoff_with::<Rational>(game, i, a)
            - sigma.expected_payoff_with::<Rational>(game, i, b)
    })
}

/// A support strategy and a strictly better reply `(player, from, to)`, if any.
pub fn mixed_nash_violation(
    game: &NormalFormGame,
    sigma: &MixedProfile,
    budget: u64,
) -> Result<Option<(usize, usize, usize)>> {
    sigma.check_game(game)?;
    sigma.check_budget(game, budget)?;
    for i in 0..game.num_players() {
        for from in sigma.support(i) {
            for to in 0..game.num_strategies(i) {
                if to != from && !mixed_payoff_geq(game, sigma, i, from, to) {
                    return Ok(Some((i, from, to)));
                }
            }
        }
    }
    Ok(None)
}

pub fn is_mixed_nash(game: &NormalFormGame, sigma: &MixedProfile, budget: u64) -> Result<bool> {
    Ok(mixed_nash_violation(game, sigma, budget)?.is_none())
}

/// Lexicographically ordered opponent profiles (as full profiles with
/// `own` at position `i`) that cover every payoff `u_i(own, .)` can take.
///
/// For symmetric games only one profile per multiset of opponent strategies
/// is produced.
fn opponent_profiles(game: &NormalFormGame, i: usize, own: usize, budget: u64) -> Result<Vec<Profile>> {
    let n = game.num_players();
    if game.is_symmetric() {
        let m = game.num_strategies(if i == 0 { 1 } else { 0 });
        let required = multiset_count(m as u128, (n - 1) as u128);
        if required > budget as u128 {
            return Err(Error::BudgetExceeded {
                what: "opponent multiset enumeration",
                required,
                budget,
            });
        }
        let mut out = Vec::new();
        let mut combo = vec![0usize; n - 1];
        loop {
            let mut profile = combo.clone();
            profile.insert(i, own);
            out.push(profile);
            // next nondecreasing sequence
            let mut pos = n - 1;
            loop {
                if pos == 0 {
                    return Ok(out);
                }
                pos -= 1;
                if combo[pos] + 1 < m {
                    let v = combo[pos] + 1;
                    for slot in combo.iter_mut().skip(pos) {
                        *slot = v;
                    }
                    break;
                }
            }
        }
    } else {
        let counts: Vec<usize> = (0..n).filter(|&j| j != i).map(|j| game.num_strategies(j)).collect();
        let required = counts.iter().fold(1u128, |a, &c| a.saturating_mul(c as u128));
        if required > budget as u128 {
            return Err(Error::BudgetExceeded {
                what: "opponent profile enumeration",
                required,
                budget,
            });
        }
        Ok(Profiles::new(counts)
            .map(|mut p| {
                p.insert(i, own);
                p
            })
            .collect())
    }
}

fn multiset_count(m: u128, k: u128) -> u128 {
    // C(m + k - 1, k)
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc.saturating_mul(m + j) / (j + 1);
    }
    acc
}

/// `min_{s_-i} u_i(own, s_-i)` with the lexicographically first minimizer.
pub fn min_payoff_against_all(
    game: &NormalFormGame,
    i: usize,
    own: usize,
    budget: u64,
) -> Result<(f64, Profile)> {
    let candidates = opponent_profiles(game, i, own, budget)?;
    let mut best: Option<(f64, Profile)> = None;
    for p in candidates {
        let u: f64 = game.payoff_with(&p, i);
        match &best {
            Some((b, q)) if !(u < *b) => {
                if u == *b && p < *q {
                    best = Some((u, p));
                }
            }
            _ => best = Some((u, p)),
        }
    }
    Ok(best.expect("at least one opponent profile"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CoherenceWitness {
    pub player: usize,
    pub strategy: usize,
    pub deviation: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherenceReport {
    pub coherent: bool,
    /// A support strategy beaten by a deviation against every opponent profile.
    pub witness: Option<CoherenceWitness>,
}

/// `u_i(s_i, sigma_-i) >= min_{s_-i} u_i(dev, s_-i)`, exact near ties.
fn survives(
    game: &NormalFormGame,
    sigma: &MixedProfile,
    i: usize,
    s: usize,
    stay: f64,
    dev: usize,
    worst: &(f64, Profile),
    budget: u64,
) -> Result<bool> {
    let (min_val, _) = worst;
    let margin = stay - min_val;
    let scale = stay.abs().max(min_val.abs()).max(1.0);
    if margin.abs() > EXACT_BAND * scale {
        return Ok(margin >= 0.0);
    }
    let stay_exact = sigma.expected_payoff_with::<Rational>(game, i, s);
    let band = EXACT_BAND * scale * 4.0;
    let mut min_exact: Option<Rational> = None;
    for p in opponent_profiles(game, i, dev, budget)? {
        let u: f64 = game.payoff_with(&p, i);
        if u <= min_val + band {
            let e: Rational = game.payoff_with(&p, i);
            if min_exact.as_ref().is_none_or(|m| e < *m) {
                min_exact = Some(e);
            }
        }
    }
    let min_exact = min_exact.expect("the minimizer itself is within the band");
    Ok(stay_exact >= min_exact)
}

/// Decides coherence of `sigma` by minimizing each deviation's payoff over
/// all opponent profiles.
pub fn is_coherent(game: &NormalFormGame, sigma: &MixedProfile, budget: u64) -> Result<CoherenceReport> {
    sigma.check_game(game)?;
    sigma.check_budget(game, budget)?;
    for i in 0..game.num_players() {
        let support = sigma.support(i);
        let stays: Vec<(usize, f64)> = support
            .iter()
            .map(|&s| (s, sigma.expected_payoff(game, i, s)))
            .collect();
        for dev in 0..game.num_strategies(i) {
            let worst = min_payoff_against_all(game, i, dev, budget)?;
            for &(s, stay) in &stays {
                if s == dev {
                    continue;
                }
                if !survives(game, sigma, i, s, stay, dev, &worst, budget)? {
                    return Ok(CoherenceReport {
                        coherent: false,
                        witness: Some(CoherenceWitness {
                            player: i,
                            strategy: s,
                            deviation: dev,
                        }),
                    });
                }
            }
        }
    }
    Ok(CoherenceReport {
        coherent: true,
        witness: None,
    })
}

/// Translucent equilibrium, decided through its characterization as coherence.
pub fn is_translucent_equilibrium(game: &NormalFormGame, sigma: &MixedProfile, budget: u64) -> Result<bool> {
    Ok(is_coherent(game, sigma, budget)?.coherent)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifiedEquilibrium {
    pub coherent: bool,
    /// TE1-TE4 on the support states of the constructed witness structure,
    /// present when `sigma` is coherent.
    pub structure_report: Option<TeReport>,
}

impl VerifiedEquilibrium {
    pub fn consistent(&self) -> bool {
        match &self.structure_report {
            Some(r) => self.coherent && r.holds(),
            None => !self.coherent,
        }
    }
}

/// Decides translucent equilibrium by coherence and, when coherent, also
/// builds the witness structure and checks TE1-TE4 on its support states.
pub fn verify_translucent_equilibrium(
    game: &NormalFormGame,
    sigma: &MixedProfile,
    budget: u64,
    structure_budget: u64,
) -> Result<VerifiedEquilibrium> {
    let coherent = is_coherent(game, sigma, budget)?.coherent;
    if !coherent {
        return Ok(VerifiedEquilibrium {
            coherent,
            structure_report: None,
        });
    }
    let m = build_coherent_structure(game, sigma, structure_budget)?;
    let subset = support_states(&m, sigma);
    let report = check_translucent_equilibrium(&m, game, sigma, &subset)?;
    Ok(VerifiedEquilibrium {
        coherent,
        structure_report: Some(report),
    })
}

fn r(x: f64) -> Rational {
    rational_from_f64(x)
}

fn ri(x: i64) -> Rational {
    Rational::from_i64(x)
}

fn check_betas(params: &DilemmaParams, name: &str, v: &[f64]) -> Result<()> {
    let n = params.num_players();
    if v.len() != n {
        return Err(Error::InvalidParams(format!(
            "{name}: expected {n} entries, got {}",
            v.len()
        )));
    }
    if let Some(x) = v.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::InvalidParams(format!("{name}: entry {x} outside [0, 1]")));
    }
    Ok(())
}

fn others(n: usize, i: usize) -> impl Iterator<Item = usize> {
    (0..n).filter(move |&j| j != i)
}

/// The closed-form condition for the two-point profile (`betas[i]` on
/// cooperate) to be a translucent equilibrium, with no detection assumed.
pub fn te_condition(params: &DilemmaParams, betas: &[f64]) -> Result<bool> {
    params.validate()?;
    check_betas(params, "betas", betas)?;
    if betas.iter().all(|&b| b == 0.0) {
        return Ok(true);
    }
    let n = betas.len();
    Ok(match *params {
        DilemmaParams::Pd { b, c } => (0..2).all(|i| {
            decide_nonneg(betas[i] * b - c, b, || r(betas[i]) * r(b) - r(c))
        }),
        DilemmaParams::Td { l, h, bonus } => (0..2).all(|i| {
            let spread = (h - l) as f64;
            decide_nonneg(spread * betas[i] - bonus * (1.0 - betas[i]), spread.max(bonus), || {
                ri(h - l) * r(betas[i]) - r(bonus) * (ri(1) - r(betas[i]))
            })
        }),
        DilemmaParams::Pgg { rho, .. } => (0..n).all(|i| {
            let sum: f64 = others(n, i).map(|j| betas[j]).sum();
            // rho * mean_-i * (n - 1) is rho times the sum of the others' betas
            decide_nonneg(rho * sum - (1.0 - rho), n as f64, || {
                r(rho) * others(n, i).fold(Rational::zero(), |a, j| a + r(betas[j])) - (ri(1) - r(rho))
            })
        }),
        DilemmaParams::Bertrand { l, h, .. } => (0..n).all(|i| {
            let prod: f64 = others(n, i).map(|j| betas[j]).product();
            decide_nonneg(prod * h as f64 - l as f64, h as f64, || {
                others(n, i).fold(Rational::one(), |a, j| a * r(betas[j])) * ri(h) - ri(l)
            })
        }),
    })
}

/// Both readings of the typed condition: the commonly quoted one and the
/// one matching per-state rationality in a structure where each player
/// believes each opponent independently notices a deviation with
/// probability `alphas[i]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TypedTeVerdict {
    pub printed: bool,
    pub corrected: bool,
}

/// `sum_{J subset others} prod_{j not in J} gamma_j prod_{j in J} (1 - gamma_j) / (|J| + 1)`.
pub fn generalized_f_with<T: Scalar>(gammas: &[T]) -> T {
    let k = gammas.len();
    let mut total = T::zero();
    for mask in 0u64..(1u64 << k) {
        let mut w = T::one();
        for (j, g) in gammas.iter().enumerate() {
            w = if mask >> j & 1 == 1 {
                w * (T::one() - g.clone())
            } else {
                w * g.clone()
            };
        }
        total = total + w / T::from_i64(mask.count_ones() as i64 + 1);
    }
    total
}

/// The tie-count kernel for heterogeneous per-opponent probabilities `gammas`
/// (one per other player, so `n = gammas.len() + 1`).
pub fn generalized_f(gammas: &[f64], budget: u64) -> Result<f64> {
    if gammas.is_empty() {
        return Err(Error::InvalidParams("need at least one opponent".into()));
    }
    if let Some(g) = gammas.iter().find(|g| !(0.0..=1.0).contains(*g)) {
        return Err(Error::InvalidParams(format!("gamma {g} outside [0, 1]")));
    }
    let required = 1u128.checked_shl(gammas.len() as u32).unwrap_or(u128::MAX);
    if gammas.len() >= 64 || required > budget as u128 {
        return Err(Error::BudgetExceeded {
            what: "subset enumeration for the tie-count kernel",
            required,
            budget,
        });
    }
    Ok(generalized_f_with(gammas))
}

/// The typed condition for the two-point profile, in both readings.
pub fn te_condition_typed(params: &DilemmaParams, alphas: &[f64], betas: &[f64]) -> Result<TypedTeVerdict> {
    params.validate()?;
    check_betas(params, "alphas", alphas)?;
    check_betas(params, "betas", betas)?;
    let n = betas.len();
    let all_zero = betas.iter().all(|&b| b == 0.0);
    let cooperators: Vec<usize> = (0..n).filter(|&i| betas[i] > 0.0).collect();

    let (printed_each, corrected_each): (Vec<bool>, Vec<bool>) = match *params {
        DilemmaParams::Pd { b, c } => (0..2)
            .map(|i| {
                let (a, bo) = (alphas[i], betas[1 - i]);
                let ok = decide_nonneg(a * bo * b - c, b, || r(a) * r(bo) * r(b) - r(c));
                (ok, ok)
            })
            .unzip(),
        DilemmaParams::Td { l, h, bonus } => (0..2)
            .map(|i| {
                let v = td_condition(alphas[i], betas[1 - i], l, h, bonus);
                (v.printed_rational, v.rational)
            })
            .unzip(),
        DilemmaParams::Pgg { rho, .. } => (0..n)
            .map(|i| {
                let a = alphas[i];
                let sum: f64 = others(n, i).map(|j| betas[j]).sum();
                let mean = sum / (n - 1) as f64;
                let exact_sum = || others(n, i).fold(Rational::zero(), |acc, j| acc + r(betas[j]));
                let printed = decide_nonneg(a * rho * mean - (1.0 - rho), n as f64, || {
                    r(a) * r(rho) * exact_sum() / ri(n as i64 - 1) - (ri(1) - r(rho))
                });
                let corrected = decide_nonneg(a * rho * sum - (1.0 - rho), n as f64, || {
                    r(a) * r(rho) * exact_sum() - (ri(1) - r(rho))
                });
                (printed, corrected)
            })
            .unzip(),
        DilemmaParams::Bertrand { l, h, .. } => (0..n)
            .map(|i| bertrand_typed(alphas[i], betas, i, l, h))
            .unzip(),
    };

    let printed = all_zero || printed_each.iter().all(|&x| x);
    let corrected = cooperators.iter().all(|&i| corrected_each[i]);
    Ok(TypedTeVerdict { printed, corrected })
}

/// Player `i` pricing at `H` against opponents pricing at `H` with
/// probabilities `betas[j]`, each noticing a deviation with probability `alpha`.
fn bertrand_typed(alpha: f64, betas: &[f64], i: usize, l: i64, h: i64) -> (bool, bool) {
    let n = betas.len();
    let (lf, hf, nf) = (l as f64, h as f64, n as f64);
    let prod_beta: f64 = others(n, i).map(|j| betas[j]).product();
    let gammas: Vec<f64> = others(n, i).map(|j| (1.0 - alpha) * betas[j]).collect();
    let prod_gamma: f64 = gammas.iter().product();
    let f = generalized_f_with(&gammas);
    let exact_prod_beta = || others(n, i).fold(Rational::one(), |a, j| a * r(betas[j]));
    let exact_gammas = || -> Vec<Rational> {
        others(n, i).map(|j| (ri(1) - r(alpha)) * r(betas[j])).collect()
    };
    let low_ok = decide_nonneg(prod_beta * hf - f * lf * nf, hf * nf, || {
        exact_prod_beta() * ri(h) - generalized_f_with(&exact_gammas()) * ri(l) * ri(n as i64)
    });
    let undercut_ok = h - 1 <= l
        || decide_nonneg(prod_beta * hf - nf * prod_gamma * (hf - 1.0), hf * nf, || {
            let pg = exact_gammas().into_iter().fold(Rational::one(), |a, g| a * g);
            exact_prod_beta() * ri(h) - ri(n as i64) * pg * ri(h - 1)
        });
    (low_ok, low_ok && undercut_ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::*;

    const B: u64 = DEFAULT_BUDGET;

    fn pd() -> SocialDilemma {
        make_prisoners_dilemma(4.0, 1.0).unwrap()
    }

    #[test]
    fn mixed_profile_validation() {
        assert!(MixedProfile::new(vec![vec![0.5, 0.5]]).is_err());
        assert!(MixedProfile::new(vec![vec![0.5, 0.6], vec![1.0]]).is_err());
        assert!(MixedProfile::new(vec![vec![-0.1, 1.1], vec![1.0]]).is_err());
        assert!(MixedProfile::new(vec![vec![0.3, 0.7], vec![1.0, 0.0]]).is_ok());
        let d = pd();
        let s = MixedProfile::two_point(&d, &[0.3, 1.0]).unwrap();
        assert_eq!(s.probs(), &[vec![0.3, 0.7], vec![1.0, 0.0]]);
        assert_eq!(s.support(1), vec![0]);
        assert!(MixedProfile::two_point(&d, &[0.3]).is_err());
    }

    #[test]
    fn mixed_profile_serde() {
        let s: MixedProfile = serde_json::from_str("[[0.25,0.75],[1,0]]").unwrap();
        assert_eq!(s.prob(0, 1), 0.75);
        assert!(serde_json::from_str::<MixedProfile>("[[0.25,0.7],[1,0]]").is_err());
        assert_eq!(serde_json::to_string(&s).unwrap(), "[[0.25,0.75],[1.0,0.0]]");
    }

    #[test]
    fn pd_coherence_examples() {
        let d = pd();
        let g = &d.game;
        let cc = MixedProfile::pure(g, &[0, 0]).unwrap();
        let dd = MixedProfile::pure(g, &[1, 1]).unwrap();
        let cd = MixedProfile::pure(g, &[0, 1]).unwrap();
        assert!(is_coherent(g, &cc, B).unwrap().coherent);
        assert!(is_coherent(g, &dd, B).unwrap().coherent);
        let rep = is_coherent(g, &cd, B).unwrap();
        assert!(!rep.coherent);
        assert_eq!(
            rep.witness,
            Some(CoherenceWitness { player: 0, strategy: 0, deviation: 1 })
        );
        let mix = MixedProfile::two_point(&d, &[0.3, 0.3]).unwrap();
        assert!(is_coherent(g, &mix, B).unwrap().coherent);
    }

    #[test]
    fn coherence_tie_is_exact() {
        // beta b = 0.25 * 4 = 1 = c
        let d = pd();
        let mix = MixedProfile::two_point(&d, &[0.25, 0.25]).unwrap();
        assert!(is_coherent(&d.game, &mix, B).unwrap().coherent);
        let below = MixedProfile::two_point(&d, &[0.24, 0.24]).unwrap();
        assert!(!is_coherent(&d.game, &below, B).unwrap().coherent);
    }

    #[test]
    fn td_high_claims_are_coherent() {
        let d = make_travelers_dilemma(2, 100, 10.0).unwrap();
        let hh = MixedProfile::pure(&d.game, &d.welfare_profile).unwrap();
        assert!(is_translucent_equilibrium(&d.game, &hh, B).unwrap());
    }

    #[test]
    fn mixed_nash_detection() {
        let d = pd();
        let dd = MixedProfile::pure(&d.game, &[1, 1]).unwrap();
        assert!(is_mixed_nash(&d.game, &dd, B).unwrap());
        let cc = MixedProfile::pure(&d.game, &[0, 0]).unwrap();
        assert_eq!(mixed_nash_violation(&d.game, &cc, B).unwrap(), Some((0, 0, 1)));
    }

    #[test]
    fn te_condition_examples() {
        let p = DilemmaParams::Pd { b: 4.0, c: 1.0 };
        assert!(te_condition(&p, &[0.3, 0.3]).unwrap());
        assert!(!te_condition(&p, &[0.2, 0.9]).unwrap());
        for params in [
            p.clone(),
            DilemmaParams::Pgg { n: 3, rho: 0.5, grid: 4 },
            DilemmaParams::Bertrand { n: 3, l: 2, h: 6 },
            DilemmaParams::Td { l: 2, h: 8, bonus: 3.0 },
        ] {
            let zeros = vec![0.0; params.num_players()];
            assert!(te_condition(&params, &zeros).unwrap());
            assert!(te_condition_typed(&params, &zeros, &zeros).unwrap().printed);
            assert!(te_condition_typed(&params, &zeros, &zeros).unwrap().corrected);
        }
    }

    #[test]
    fn typed_pd_boundary() {
        let p = DilemmaParams::Pd { b: 4.0, c: 1.0 };
        let v = te_condition_typed(&p, &[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert!(v.printed && v.corrected);
        let v = te_condition_typed(&p, &[0.5, 0.5], &[0.5, 0.45]).unwrap();
        assert!(!v.printed && !v.corrected);
    }

    #[test]
    fn generalized_f_collapses() {
        use crate::closed_form::f_gamma;
        for n in 2..8 {
            for k in 0..=20 {
                let g = k as f64 / 20.0;
                let gf = generalized_f(&vec![g; n - 1], B).unwrap();
                assert!((gf - f_gamma(g, n).unwrap()).abs() < 1e-12);
            }
            assert!((generalized_f(&vec![1.0; n - 1], B).unwrap() - 1.0).abs() < 1e-15);
            assert!((generalized_f(&vec![0.0; n - 1], B).unwrap() - 1.0 / n as f64).abs() < 1e-15);
        }
        assert!(generalized_f(&[0.5; 20], 1000).is_err());
    }

    #[test]
    fn opponent_multisets_cover_products() {
        let d = make_bertrand(3, 2, 5).unwrap();
        let ms = opponent_profiles(&d.game, 1, 2, B).unwrap();
        assert_eq!(ms.len(), 10); // C(4 + 2 - 1, 2)
        let (min, arg) = min_payoff_against_all(&d.game, 1, 2, B).unwrap();
        assert_eq!(min, 0.0);
        assert_eq!(arg, vec![0, 2, 0]);
    }
}
