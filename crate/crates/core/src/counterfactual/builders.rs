use std::collections::HashMap;

use super::{check_structure_budget, CounterfactualStructure, State};
use crate::equilibrium::{is_coherent, mixed_nash_violation, MixedProfile};
use crate::error::{Error, Result};
use crate::games::{
    make_prisoners_dilemma, DilemmaKind, NormalFormGame, Profile, Profiles, SocialDilemma,
};
use crate::numeric::{decide_nonneg, Rational};

fn index_states(states: &[State]) -> HashMap<Profile, usize> {
    states
        .iter()
        .enumerate()
        .map(|(w, st)| (st.profile.clone(), w))
        .collect()
}

fn replace(profile: &[usize], i: usize, s: usize) -> Profile {
    let mut p = profile.to_vec();
    p[i] = s;
    p
}

/// Opponents' part of `profile`, used to look up `sigma_-i`.
fn others_of(profile: &[usize], i: usize) -> Vec<usize> {
    let mut o = profile.to_vec();
    o.remove(i);
    o
}

/// Beliefs that fix the player's own strategy and draw the opponents from
/// `sigma_-i`. States are matched by profile only.
fn sigma_row(states: &[State], sigma: &MixedProfile, i: usize, own: usize) -> Vec<f64> {
    states
        .iter()
        .map(|st| {
            if st.profile[i] == own {
                sigma.opponents_prob_of(i, &others_of(&st.profile, i))
            } else {
                0.0
            }
        })
        .collect()
}

/// The structure showing a Nash equilibrium is a translucent equilibrium.
///
/// States are the support profiles followed by every unilateral deviation
/// from them. Beliefs draw opponents from `sigma_-i`, and switching strategy
/// leaves the opponents' strategies in place.
pub fn build_nash_structure(
    game: &NormalFormGame,
    sigma: &MixedProfile,
    budget: u64,
) -> Result<CounterfactualStructure> {
    sigma.check_game(game)?;
    if let Some((player, from, to)) = mixed_nash_violation(game, sigma, budget)? {
        return Err(Error::NotNash { player, from, to });
    }
    let n = game.num_players();
    let support = sigma.support_profiles();
    let mut seen: HashMap<Profile, usize> = HashMap::new();
    let mut states: Vec<State> = Vec::new();
    for p in &support {
        seen.insert(p.clone(), states.len());
        states.push(State::new(p.clone()));
    }
    let mut extras: Vec<Profile> = Vec::new();
    for p in &support {
        for i in 0..n {
            for s in 0..game.num_strategies(i) {
                let q = replace(p, i, s);
                if !seen.contains_key(&q) {
                    seen.insert(q.clone(), usize::MAX);
                    extras.push(q);
                }
            }
        }
        check_structure_budget(n, support.len() + extras.len(), budget)?;
    }
    extras.sort();
    states.extend(extras.into_iter().map(State::new));
    check_structure_budget(n, states.len(), budget)?;
    let index = index_states(&states);

    let beliefs = (0..n)
        .map(|i| {
            states
                .iter()
                .map(|st| sigma_row(&states, sigma, i, st.profile[i]))
                .collect()
        })
        .collect();
    CounterfactualStructure::new(
        game.strategy_counts().to_vec(),
        states.clone(),
        |w, i, s| {
            let q = replace(&states[w].profile, i, s);
            index.get(&q).copied().unwrap_or_else(|| {
                states
                    .iter()
                    .position(|st| st.profile[i] == s)
                    .expect("every strategy appears among the deviation states")
            })
        },
        beliefs,
    )
}

/// The opponent profile used to punish player `i` for switching from
/// `s_i` to `dev`: the lexicographically smallest `s_-i` with
/// `u_i(dev, s_-i) <= u_i(s_i, sigma_-i)`. Returns the full profile (with
/// `dev` at position `i`) and whether such a punishment exists; when it does
/// not, the lexicographically smallest minimizer of `u_i(dev, .)` is returned.
pub fn punishment_profile(
    game: &NormalFormGame,
    sigma: &MixedProfile,
    i: usize,
    s_i: usize,
    dev: usize,
    budget: u64,
) -> Result<(Profile, bool)> {
    sigma.check_game(game)?;
    let counts: Vec<usize> = (0..game.num_players())
        .filter(|&j| j != i)
        .map(|j| game.num_strategies(j))
        .collect();
    let required = counts.iter().fold(1u128, |a, &c| a.saturating_mul(c as u128));
    if required > budget as u128 {
        return Err(Error::BudgetExceeded {
            what: "punishment search over opponent profiles",
            required,
            budget,
        });
    }
    let stay = sigma.expected_payoff(game, i, s_i);
    let mut stay_exact: Option<Rational> = None;
    let mut argmin: Option<(f64, Profile)> = None;
    for mut p in Profiles::new(counts) {
        p.insert(i, dev);
        let u: f64 = game.payoff_with(&p, i);
        let ok = decide_nonneg(stay - u, stay.abs().max(u.abs()), || {
            let s = stay_exact
                .get_or_insert_with(|| sigma.expected_payoff_with::<Rational>(game, i, s_i))
                .clone();
            s - game.payoff_with::<Rational>(&p, i)
        });
        if ok {
            return Ok((p, true));
        }
        if argmin.as_ref().is_none_or(|(b, _)| u < *b) {
            argmin = Some((u, p));
        }
    }
    Ok((argmin.expect("opponent profiles are nonempty").1, false))
}

/// The structure over all pure profiles in which a player using a support
/// strategy expects opponents to answer any switch with a punishment
/// profile, and a player off the support holds point beliefs.
///
/// When `sigma` is coherent every support state is rational for every player.
/// No coherence check is made, so an incoherent `sigma` yields a structure
/// where some support state fails rationality.
pub fn build_punishment_structure(
    game: &NormalFormGame,
    sigma: &MixedProfile,
    budget: u64,
) -> Result<CounterfactualStructure> {
    sigma.check_game(game)?;
    let n = game.num_players();
    let count = game.profile_count();
    if count > usize::MAX as u128 {
        return Err(Error::BudgetExceeded {
            what: "counterfactual structure",
            required: count,
            budget,
        });
    }
    check_structure_budget(n, count as usize, budget)?;
    let states: Vec<State> = game.profiles().map(State::new).collect();

    // punish[i][(s_i, dev)] for support strategies s_i
    let mut punish: Vec<HashMap<(usize, usize), usize>> = vec![HashMap::new(); n];
    for i in 0..n {
        for s_i in sigma.support(i) {
            for dev in 0..game.num_strategies(i) {
                if dev != s_i {
                    let (p, _) = punishment_profile(game, sigma, i, s_i, dev, budget)?;
                    punish[i].insert((s_i, dev), game.profile_index(&p));
                }
            }
        }
    }

    let beliefs = (0..n)
        .map(|i| {
            states
                .iter()
                .enumerate()
                .map(|(w, st)| {
                    if sigma.prob(i, st.profile[i]) > 0.0 {
                        sigma_row(&states, sigma, i, st.profile[i])
                    } else {
                        let mut row = vec![0.0; states.len()];
                        row[w] = 1.0;
                        row
                    }
                })
                .collect()
        })
        .collect();
    CounterfactualStructure::new(
        game.strategy_counts().to_vec(),
        states.clone(),
        |w, i, s| {
            let p = &states[w].profile;
            if p[i] == s {
                w
            } else if sigma.prob(i, p[i]) > 0.0 {
                punish[i][&(p[i], s)]
            } else {
                game.profile_index(&replace(p, i, s))
            }
        },
        beliefs,
    )
}

/// [`build_punishment_structure`] for a coherent `sigma`; fails with
/// [`Error::Incoherent`] otherwise.
pub fn build_coherent_structure(
    game: &NormalFormGame,
    sigma: &MixedProfile,
    budget: u64,
) -> Result<CounterfactualStructure> {
    let report = is_coherent(game, sigma, budget)?;
    if let Some(w) = report.witness {
        return Err(Error::Incoherent {
            player: w.player,
            strategy: w.strategy,
            deviation: w.deviation,
        });
    }
    build_punishment_structure(game, sigma, budget)
}

/// What a defecting player expects the others to do after switching.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefectorResponse {
    /// Same rule as for cooperators: noticing opponents switch to defection.
    Detection,
    /// Every opponent defects, regardless of whether it noticed.
    FullDefection,
}

/// A typed structure for a two-point cooperate/defect mixture.
#[derive(Debug, Clone)]
pub struct TypedStructure {
    pub dilemma: SocialDilemma,
    pub structure: CounterfactualStructure,
    pub sigma: MixedProfile,
    pub alphas: Vec<f64>,
}

impl TypedStructure {
    /// States whose profile lies in the support of `sigma`.
    pub fn support_states(&self) -> Vec<usize> {
        super::support_states(&self.structure, &self.sigma)
    }

    /// Whether every player is rational at every support state.
    pub fn all_rational(&self) -> Result<bool> {
        for w in self.support_states() {
            for i in 0..self.structure.num_players() {
                if !super::is_rational_at(&self.structure, &self.dilemma.game, i, w)?.rational {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Whether player `i` is rational at every support state where it cooperates.
    pub fn cooperator_rational(&self, i: usize) -> Result<bool> {
        let coop = self.dilemma.cooperate(i);
        for w in self.support_states() {
            if self.structure.strat(w)[i] == coop
                && !super::is_rational_at(&self.structure, &self.dilemma.game, i, w)?.rational
            {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Structure in which each state carries a profile and a bit per player
/// recording whether that player would notice a deviation.
///
/// Player `i` believes its own profile entry and bit are as at the state,
/// the opponents' strategies follow `sigma_-i` and each opponent's bit is 1
/// with probability `alphas[i]`, independently. A cooperator switching to
/// `s*` is answered by defection from every opponent whose bit is set;
/// the others keep their strategies. A defector is answered per `response`.
pub fn build_typed_structure(
    d: &SocialDilemma,
    alphas: &[f64],
    betas: &[f64],
    response: DefectorResponse,
    budget: u64,
) -> Result<TypedStructure> {
    let n = d.num_players();
    if alphas.len() != n {
        return Err(Error::InvalidParams(format!(
            "alphas: expected {n} entries, got {}",
            alphas.len()
        )));
    }
    if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::InvalidParams(format!("alpha {a} outside [0, 1]")));
    }
    let sigma = MixedProfile::two_point(d, betas)?;
    let game = &d.game;
    let count = game.profile_count();
    if n >= 32 || count.saturating_mul(1u128 << n.min(127)) > usize::MAX as u128 {
        return Err(Error::BudgetExceeded {
            what: "typed counterfactual structure",
            required: u128::MAX,
            budget,
        });
    }
    let masks = 1usize << n;
    let k = count as usize * masks;
    check_structure_budget(n, k, budget)?;

    let mut states = Vec::with_capacity(k);
    for p in game.profiles() {
        for v in 0..masks {
            let aux = (0..n).map(|j| (v >> j & 1) as u8).collect();
            states.push(State { profile: p.clone(), aux });
        }
    }
    let bits = |w: usize| w % masks;
    let state_of = |p: &[usize], v: usize| game.profile_index(p) * masks + v;

    let support: Vec<Vec<usize>> = (0..n).map(|i| sigma.support(i)).collect();
    let mut beliefs = vec![vec![Vec::new(); k]; n];
    for i in 0..n {
        let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        for (w, st) in states.iter().enumerate() {
            let v = bits(w);
            let mut row = vec![0.0; k];
            let opp_counts: Vec<usize> = others.iter().map(|&j| support[j].len()).collect();
            for idx in Profiles::new(opp_counts) {
                let mut q = st.profile.clone();
                let mut weight = 1.0;
                for (slot, &j) in others.iter().enumerate() {
                    q[j] = support[j][idx[slot]];
                    weight *= sigma.prob(j, q[j]);
                }
                let base = game.profile_index(&q) * masks;
                for sub in 0..(1usize << others.len()) {
                    let mut v2 = v & (1 << i);
                    let mut wv = weight;
                    for (slot, &j) in others.iter().enumerate() {
                        if sub >> slot & 1 == 1 {
                            v2 |= 1 << j;
                            wv *= alphas[i];
                        } else {
                            wv *= 1.0 - alphas[i];
                        }
                    }
                    row[base + v2] += wv;
                }
            }
            beliefs[i][w] = row;
        }
    }

    let structure = CounterfactualStructure::new(
        game.strategy_counts().to_vec(),
        states.clone(),
        |w, i, s| {
            let p = &states[w].profile;
            let v = bits(w);
            if p[i] == s {
                return w;
            }
            let mut q = p.clone();
            q[i] = s;
            let detect = p[i] == d.cooperate(i) || response == DefectorResponse::Detection;
            for j in (0..n).filter(|&j| j != i) {
                if !detect || v >> j & 1 == 1 {
                    q[j] = d.defect(j);
                }
            }
            state_of(&q, v)
        },
        beliefs,
    )?;
    Ok(TypedStructure {
        dilemma: d.clone(),
        structure,
        sigma,
        alphas: alphas.to_vec(),
    })
}

/// The two-player typed structure for the Prisoner's Dilemma with benefit `b`
/// and cost `c`, where a defector faces the same detection rule as a cooperator.
pub fn build_typed_pd_structure(
    alpha1: f64,
    alpha2: f64,
    beta1: f64,
    beta2: f64,
    b: f64,
    c: f64,
) -> Result<TypedStructure> {
    let d = make_prisoners_dilemma(b, c)?;
    build_typed_structure(
        &d,
        &[alpha1, alpha2],
        &[beta1, beta2],
        DefectorResponse::Detection,
        super::DEFAULT_STRUCTURE_BUDGET,
    )
}

/// Whether the typed structure for `d` is a translucent equilibrium on its
/// support states. The Prisoner's Dilemma uses [`DefectorResponse::Detection`];
/// the other dilemmas use [`DefectorResponse::FullDefection`].
pub fn typed_structure_holds(d: &SocialDilemma, alphas: &[f64], betas: &[f64], budget: u64) -> Result<bool> {
    let response = match d.kind {
        DilemmaKind::Pd => DefectorResponse::Detection,
        _ => DefectorResponse::FullDefection,
    };
    let t = build_typed_structure(d, alphas, betas, response, budget)?;
    let support = t.support_states();
    Ok(super::check_translucent_equilibrium(&t.structure, &d.game, &t.sigma, &support)?.holds())
}
