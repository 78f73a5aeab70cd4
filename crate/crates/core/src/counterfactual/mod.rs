//! Finite counterfactual structures: states carrying a pure profile, a
//! closest-state function answering "where would we be if player `i` played
//! `s` instead", and per-player beliefs over states.
//!
//! A structure is appropriate for a game when
//!
//! * CS1: `closest(w, i, s)` plays `s` for player `i`;
//! * CS2: `closest(w, i, strat_i(w)) = w`;
//! * PR1: `beliefs_i(w)` is concentrated on states where `i` plays `strat_i(w)`;
//! * PR2: `beliefs_i(w)` is concentrated on states where `i` holds the same beliefs.

mod builders;
pub mod io;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::equilibrium::MixedProfile;
use crate::error::{Error, Result};
use crate::games::{NormalFormGame, Profile};
use crate::numeric::{weakly_geq, TOL};

pub use builders::{
    build_coherent_structure, build_nash_structure, build_punishment_structure,
    build_typed_pd_structure, build_typed_structure, punishment_profile, DefectorResponse,
    typed_structure_holds, TypedStructure,
};

/// Largest `players * states^2` a structure may occupy with dense belief rows.
pub const DEFAULT_STRUCTURE_BUDGET: u64 = 1 << 22;

/// Tolerance for probability sums and belief-row equality.
pub const PROB_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct State {
    pub profile: Profile,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aux: Vec<u8>,
}

impl State {
    pub fn new(profile: Profile) -> Self {
        State {
            profile,
            aux: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterfactualStructure {
    strategy_counts: Vec<usize>,
    offsets: Vec<usize>,
    states: Vec<State>,
    closest: Vec<usize>,
    beliefs: Vec<Vec<Vec<f64>>>,
}

pub(crate) fn check_structure_budget(players: usize, states: usize, budget: u64) -> Result<()> {
    let required = players as u128 * (states as u128) * (states as u128);
    if required > budget as u128 {
        return Err(Error::BudgetExceeded {
            what: "counterfactual structure",
            required,
            budget,
        });
    }
    Ok(())
}

impl CounterfactualStructure {
    /// Assembles a structure from its tables.
    ///
    /// `closest` maps `(state, player, strategy)` to a state and `beliefs[i][w]`
    /// is player `i`'s probability vector over states at `w`. Only shapes and
    /// ranges are checked here; the axioms are checked by [`validate_structure`].
    pub fn new<F>(
        strategy_counts: Vec<usize>,
        states: Vec<State>,
        closest: F,
        beliefs: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self>
    where
        F: Fn(usize, usize, usize) -> usize,
    {
        let n = strategy_counts.len();
        if n < 2 {
            return Err(Error::Structure(format!("need at least 2 players, got {n}")));
        }
        if states.is_empty() {
            return Err(Error::Structure("state set is empty".into()));
        }
        let mut offsets = Vec::with_capacity(n);
        let mut width = 0;
        for &m in &strategy_counts {
            if m == 0 {
                return Err(Error::Structure("every player needs a strategy".into()));
            }
            offsets.push(width);
            width += m;
        }
        for (w, st) in states.iter().enumerate() {
            if st.profile.len() != n {
                return Err(Error::Structure(format!(
                    "state {w} has a profile of length {}, expected {n}",
                    st.profile.len()
                )));
            }
            for (i, (&s, &m)) in st.profile.iter().zip(&strategy_counts).enumerate() {
                if s >= m {
                    return Err(Error::Structure(format!(
                        "state {w}: player {i} strategy {s} out of range"
                    )));
                }
            }
        }
        let k = states.len();
        let mut table = Vec::with_capacity(k * width);
        for w in 0..k {
            for (i, &m) in strategy_counts.iter().enumerate() {
                for s in 0..m {
                    let target = closest(w, i, s);
                    if target >= k {
                        return Err(Error::Structure(format!(
                            "closest({w}, {i}, {s}) = {target} is not a state"
                        )));
                    }
                    table.push(target);
                }
            }
        }
        if beliefs.len() != n {
            return Err(Error::Structure(format!(
                "beliefs given for {} players, expected {n}",
                beliefs.len()
            )));
        }
        for (i, rows) in beliefs.iter().enumerate() {
            if rows.len() != k {
                return Err(Error::Structure(format!(
                    "player {i} has {} belief rows, expected {k}",
                    rows.len()
                )));
            }
            for (w, row) in rows.iter().enumerate() {
                if row.len() != k {
                    return Err(Error::Structure(format!(
                        "player {i} belief row at state {w} has length {}, expected {k}",
                        row.len()
                    )));
                }
                if row.iter().any(|p| !p.is_finite()) {
                    return Err(Error::Structure(format!(
                        "player {i} belief row at state {w} has a non-finite entry"
                    )));
                }
            }
        }
        Ok(CounterfactualStructure {
            strategy_counts,
            offsets,
            states,
            closest: table,
            beliefs,
        })
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_players(&self) -> usize {
        self.strategy_counts.len()
    }

    pub fn strategy_counts(&self) -> &[usize] {
        &self.strategy_counts
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn strat(&self, w: usize) -> &[usize] {
        &self.states[w].profile
    }

    pub fn closest(&self, w: usize, i: usize, s: usize) -> usize {
        let width = self.offsets[self.num_players() - 1] + self.strategy_counts[self.num_players() - 1];
        self.closest[w * width + self.offsets[i] + s]
    }

    pub fn belief(&self, i: usize, w: usize) -> &[f64] {
        &self.beliefs[i][w]
    }

    /// Index of the first state whose profile and aux label match.
    pub fn find_state(&self, profile: &[usize], aux: &[u8]) -> Option<usize> {
        self.states
            .iter()
            .position(|st| st.profile == profile && st.aux == aux)
    }

    pub fn check_game(&self, game: &NormalFormGame) -> Result<()> {
        if game.strategy_counts() != self.strategy_counts.as_slice() {
            return Err(Error::Structure(format!(
                "structure strategy counts {:?} do not match the game's {:?}",
                self.strategy_counts,
                game.strategy_counts()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axiom {
    #[serde(rename = "CS1")]
    Cs1,
    #[serde(rename = "CS2")]
    Cs2,
    #[serde(rename = "PR1")]
    Pr1,
    #[serde(rename = "PR2")]
    Pr2,
    #[serde(rename = "normalization")]
    Normalization,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axiom::Cs1 => "CS1",
            Axiom::Cs2 => "CS2",
            Axiom::Pr1 => "PR1",
            Axiom::Pr2 => "PR2",
            Axiom::Normalization => "normalization",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub axiom: Axiom,
    pub state: usize,
    pub player: usize,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} violated at state {} for player {}: {}",
            self.axiom, self.state, self.player, self.detail
        )
    }
}

fn rows_equal(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= PROB_TOL)
}

/// Lists every axiom failure, at most one per (axiom, state, player).
pub fn validate_structure(m: &CounterfactualStructure) -> Vec<Violation> {
    let mut out = Vec::new();
    let k = m.num_states();
    for w in 0..k {
        for i in 0..m.num_players() {
            let own = m.strat(w)[i];
            let bad: Vec<String> = (0..m.strategy_counts[i])
                .filter_map(|s| {
                    let t = m.closest(w, i, s);
                    (m.strat(t)[i] != s).then(|| {
                        format!("closest state for strategy {s} is {t}, which plays {}", m.strat(t)[i])
                    })
                })
                .collect();
            if !bad.is_empty() {
                out.push(Violation {
                    axiom: Axiom::Cs1,
                    state: w,
                    player: i,
                    detail: bad.join("; "),
                });
            }
            let home = m.closest(w, i, own);
            if home != w {
                out.push(Violation {
                    axiom: Axiom::Cs2,
                    state: w,
                    player: i,
                    detail: format!("closest state for the played strategy {own} is {home}"),
                });
            }

            let row = m.belief(i, w);
            let total: f64 = row.iter().sum();
            let negative = row.iter().position(|&p| p < 0.0);
            if let Some(v) = negative {
                out.push(Violation {
                    axiom: Axiom::Normalization,
                    state: w,
                    player: i,
                    detail: format!("negative probability {} on state {v}", row[v]),
                });
            } else if (total - 1.0).abs() > PROB_TOL {
                out.push(Violation {
                    axiom: Axiom::Normalization,
                    state: w,
                    player: i,
                    detail: format!("probabilities sum to {total}"),
                });
            }

            let same_strategy: f64 = (0..k)
                .filter(|&v| m.strat(v)[i] == own)
                .map(|v| row[v])
                .sum();
            if (same_strategy - total).abs() > PROB_TOL {
                out.push(Violation {
                    axiom: Axiom::Pr1,
                    state: w,
                    player: i,
                    detail: format!(
                        "mass {} on states where the player does not play {own}",
                        total - same_strategy
                    ),
                });
            }
            let same_beliefs: f64 = (0..k)
                .filter(|&v| row[v] != 0.0 && rows_equal(m.belief(i, v), row))
                .map(|v| row[v])
                .sum();
            if (same_beliefs - total).abs() > PROB_TOL {
                out.push(Violation {
                    axiom: Axiom::Pr2,
                    state: w,
                    player: i,
                    detail: format!(
                        "mass {} on states where the player holds different beliefs",
                        total - same_beliefs
                    ),
                });
            }
        }
    }
    out
}

/// Player `i`'s beliefs at `w` pushed through the closest-state function for a switch to `s`.
pub fn derived_beliefs(m: &CounterfactualStructure, i: usize, w: usize, s: usize) -> Vec<f64> {
    let mut out = vec![0.0; m.num_states()];
    for (v, &p) in m.belief(i, w).iter().enumerate() {
        if p != 0.0 {
            out[m.closest(v, i, s)] += p;
        }
    }
    out
}

fn expected_payoff_under(
    m: &CounterfactualStructure,
    game: &NormalFormGame,
    i: usize,
    own: usize,
    measure: &[f64],
) -> f64 {
    let mut profile = vec![0; m.num_players()];
    measure
        .iter()
        .enumerate()
        .filter(|(_, &p)| p != 0.0)
        .map(|(v, &p)| {
            profile.copy_from_slice(m.strat(v));
            profile[i] = own;
            p * game.payoff_with::<f64>(&profile, i)
        })
        .sum()
}

/// `EU_i(w)`: expected payoff of the strategy played at `w` under `i`'s beliefs there.
pub fn eu_at_state(m: &CounterfactualStructure, game: &NormalFormGame, i: usize, w: usize) -> Result<f64> {
    m.check_game(game)?;
    Ok(expected_payoff_under(m, game, i, m.strat(w)[i], m.belief(i, w)))
}

/// `EU_i(w, s)`: expected payoff of switching to `s` under the derived beliefs.
pub fn eu_at_state_switch(
    m: &CounterfactualStructure,
    game: &NormalFormGame,
    i: usize,
    w: usize,
    s: usize,
) -> Result<f64> {
    m.check_game(game)?;
    Ok(expected_payoff_under(m, game, i, s, &derived_beliefs(m, i, w, s)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateUtilityReport {
    pub eu: f64,
    /// Indexed by strategy; the entry for the played strategy equals `eu`.
    pub eu_switch: Vec<f64>,
    pub rational: bool,
}

/// Whether player `i` weakly prefers the played strategy at `w` to every switch.
pub fn is_rational_at(
    m: &CounterfactualStructure,
    game: &NormalFormGame,
    i: usize,
    w: usize,
) -> Result<StateUtilityReport> {
    m.check_game(game)?;
    let eu = eu_at_state(m, game, i, w)?;
    let eu_switch: Vec<f64> = (0..m.strategy_counts[i])
        .map(|s| {
            if s == m.strat(w)[i] {
                eu
            } else {
                expected_payoff_under(m, game, i, s, &derived_beliefs(m, i, w, s))
            }
        })
        .collect();
    let rational = eu_switch.iter().all(|&x| weakly_geq(eu, x));
    Ok(StateUtilityReport {
        eu,
        eu_switch,
        rational,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TeCondition {
    #[serde(rename = "TE1")]
    Te1,
    #[serde(rename = "TE2")]
    Te2,
    #[serde(rename = "TE3")]
    Te3,
    #[serde(rename = "TE4")]
    Te4,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeFailure {
    pub condition: TeCondition,
    pub state: usize,
    pub player: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeReport {
    pub subset: Vec<usize>,
    pub failures: Vec<TeFailure>,
}

impl TeReport {
    /// The subset witnesses the equilibrium: nonempty and no failures.
    pub fn holds(&self) -> bool {
        !self.subset.is_empty() && self.failures.is_empty()
    }
}

fn te_failures_at(
    m: &CounterfactualStructure,
    game: &NormalFormGame,
    sigma: &MixedProfile,
    member: &[bool],
    w: usize,
) -> Vec<TeFailure> {
    let mut out = Vec::new();
    let s = m.strat(w);
    if (0..m.num_players()).any(|i| sigma.prob(i, s[i]) <= 0.0) {
        out.push(TeFailure {
            condition: TeCondition::Te1,
            state: w,
            player: None,
        });
    }
    for i in 0..m.num_players() {
        let row = m.belief(i, w);
        if row.iter().enumerate().any(|(v, &p)| p > 0.0 && !member[v]) {
            out.push(TeFailure {
                condition: TeCondition::Te2,
                state: w,
                player: Some(i),
            });
        }
        if !opponent_marginal_matches(m, sigma, i, row) {
            out.push(TeFailure {
                condition: TeCondition::Te3,
                state: w,
                player: Some(i),
            });
        }
        let rational = is_rational_at(m, game, i, w).map(|r| r.rational).unwrap_or(false);
        if !rational {
            out.push(TeFailure {
                condition: TeCondition::Te4,
                state: w,
                player: Some(i),
            });
        }
    }
    out
}

fn opponent_marginal_matches(
    m: &CounterfactualStructure,
    sigma: &MixedProfile,
    i: usize,
    row: &[f64],
) -> bool {
    let mut marginal: HashMap<Vec<usize>, f64> = HashMap::new();
    for (v, &p) in row.iter().enumerate() {
        if p != 0.0 {
            let mut others = m.strat(v).to_vec();
            others.remove(i);
            *marginal.entry(others).or_insert(0.0) += p;
        }
    }
    let mut covered = 0.0;
    for (others, &p) in &marginal {
        let target = sigma.opponents_prob_of(i, others);
        if (p - target).abs() > TOL {
            return false;
        }
        covered += target;
    }
    // Mass of sigma_-i on opponent profiles the beliefs never mention.
    (1.0 - covered).abs() <= TOL
}

/// Checks TE1-TE4 at every state of `subset`.
pub fn check_translucent_equilibrium(
    m: &CounterfactualStructure,
    game: &NormalFormGame,
    sigma: &MixedProfile,
    subset: &[usize],
) -> Result<TeReport> {
    m.check_game(game)?;
    sigma.check_game(game)?;
    let mut member = vec![false; m.num_states()];
    for &w in subset {
        if w >= m.num_states() {
            return Err(Error::Structure(format!("subset names unknown state {w}")));
        }
        member[w] = true;
    }
    let failures = subset
        .iter()
        .flat_map(|&w| te_failures_at(m, game, sigma, &member, w))
        .collect();
    Ok(TeReport {
        subset: subset.to_vec(),
        failures,
    })
}

/// States whose profile lies in the support of `sigma`.
pub fn support_states(m: &CounterfactualStructure, sigma: &MixedProfile) -> Vec<usize> {
    (0..m.num_states())
        .filter(|&w| {
            m.strat(w)
                .iter()
                .enumerate()
                .all(|(i, &s)| sigma.prob(i, s) > 0.0)
        })
        .collect()
}

/// The largest state set satisfying TE1-TE4, found by discarding failing
/// states until the remaining set is closed under belief support.
pub fn greatest_te_subset(
    m: &CounterfactualStructure,
    game: &NormalFormGame,
    sigma: &MixedProfile,
) -> Result<Vec<usize>> {
    m.check_game(game)?;
    sigma.check_game(game)?;
    let all = vec![true; m.num_states()];
    let mut member: Vec<bool> = (0..m.num_states())
        .map(|w| {
            te_failures_at(m, game, sigma, &all, w)
                .iter()
                .all(|f| f.condition == TeCondition::Te2)
        })
        .collect();
    loop {
        let mut changed = false;
        for w in 0..m.num_states() {
            if member[w]
                && (0..m.num_players())
                    .any(|i| m.belief(i, w).iter().enumerate().any(|(v, &p)| p > 0.0 && !member[v]))
            {
                member[w] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok((0..m.num_states()).filter(|&w| member[w]).collect())
}

#[cfg(test)]
mod tests;
