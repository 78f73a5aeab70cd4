//! JSON form of a counterfactual structure.
//!
//! ```json
//! {
//!   "strategies": [2, 2],
//!   "states": [{"profile": [0, 0]}, {"profile": [1, 0], "aux": [1]}],
//!   "closest": [{"state": 0, "player": 0, "strategy": 1, "target": 1}],
//!   "beliefs": [[[[0, 1.0]], [[1, 1.0]]], [[[0, 1.0]], [[1, 1.0]]]]
//! }
//! ```
//!
//! `beliefs[i][w]` lists `[state, probability]` pairs; omitted states carry
//! zero. A `closest` entry may be omitted: the played strategy defaults to
//! the state itself, any other strategy to the state with the same aux label
//! and the profile differing only in that player's strategy.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{CounterfactualStructure, State};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosestEntry {
    pub state: usize,
    pub player: usize,
    pub strategy: usize,
    pub target: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureFile {
    pub strategies: Vec<usize>,
    pub states: Vec<State>,
    #[serde(default)]
    pub closest: Vec<ClosestEntry>,
    pub beliefs: Vec<Vec<Vec<(usize, f64)>>>,
}

fn default_target(
    states: &[State],
    lookup: &HashMap<(&[usize], &[u8]), usize>,
    w: usize,
    i: usize,
    s: usize,
) -> Option<usize> {
    let st = &states[w];
    if st.profile.get(i) == Some(&s) {
        return Some(w);
    }
    let mut p = st.profile.clone();
    *p.get_mut(i)? = s;
    lookup.get(&(p.as_slice(), st.aux.as_slice())).copied()
}

impl StructureFile {
    pub fn into_structure(self) -> Result<CounterfactualStructure> {
        let k = self.states.len();
        let n = self.strategies.len();
        let mut explicit: HashMap<(usize, usize, usize), usize> = HashMap::new();
        for (e_idx, e) in self.closest.iter().enumerate() {
            if e.state >= k || e.player >= n || e.strategy >= self.strategies[e.player] {
                return Err(Error::Structure(format!(
                    "closest[{e_idx}]: entry ({}, {}, {}) is out of range",
                    e.state, e.player, e.strategy
                )));
            }
            if explicit.insert((e.state, e.player, e.strategy), e.target).is_some() {
                return Err(Error::Structure(format!(
                    "closest[{e_idx}]: duplicate entry for ({}, {}, {})",
                    e.state, e.player, e.strategy
                )));
            }
        }
        let lookup: HashMap<(&[usize], &[u8]), usize> = self
            .states
            .iter()
            .enumerate()
            .rev()
            .map(|(w, st)| ((st.profile.as_slice(), st.aux.as_slice()), w))
            .collect();

        let mut table: HashMap<(usize, usize, usize), usize> = HashMap::new();
        for w in 0..k {
            for (i, &m) in self.strategies.iter().enumerate() {
                for s in 0..m {
                    let t = match explicit.get(&(w, i, s)) {
                        Some(&t) => t,
                        None => default_target(&self.states, &lookup, w, i, s).ok_or_else(|| {
                            Error::Structure(format!(
                                "closest: no entry for state {w}, player {i}, strategy {s} \
                                 and no state with the swapped profile"
                            ))
                        })?,
                    };
                    table.insert((w, i, s), t);
                }
            }
        }

        if self.beliefs.len() != n {
            return Err(Error::Structure(format!(
                "beliefs given for {} players, expected {n}",
                self.beliefs.len()
            )));
        }
        let mut beliefs = Vec::with_capacity(n);
        for (i, rows) in self.beliefs.iter().enumerate() {
            if rows.len() != k {
                return Err(Error::Structure(format!(
                    "beliefs[{i}]: {} rows, expected {k}",
                    rows.len()
                )));
            }
            let mut dense_rows = Vec::with_capacity(k);
            for (w, pairs) in rows.iter().enumerate() {
                let mut row = vec![0.0; k];
                for &(v, p) in pairs {
                    if v >= k {
                        return Err(Error::Structure(format!(
                            "beliefs[{i}][{w}]: state {v} does not exist"
                        )));
                    }
                    row[v] += p;
                }
                dense_rows.push(row);
            }
            beliefs.push(dense_rows);
        }
        CounterfactualStructure::new(
            self.strategies,
            self.states,
            |w, i, s| table[&(w, i, s)],
            beliefs,
        )
    }

    /// Sparse form: closest entries equal to their default are dropped.
    pub fn from_structure(m: &CounterfactualStructure) -> Self {
        let states = m.states().to_vec();
        let lookup: HashMap<(&[usize], &[u8]), usize> = states
            .iter()
            .enumerate()
            .rev()
            .map(|(w, st)| ((st.profile.as_slice(), st.aux.as_slice()), w))
            .collect();
        let mut closest = Vec::new();
        for w in 0..m.num_states() {
            for i in 0..m.num_players() {
                for s in 0..m.strategy_counts()[i] {
                    let t = m.closest(w, i, s);
                    if default_target(&states, &lookup, w, i, s) != Some(t) {
                        closest.push(ClosestEntry {
                            state: w,
                            player: i,
                            strategy: s,
                            target: t,
                        });
                    }
                }
            }
        }
        let beliefs = (0..m.num_players())
            .map(|i| {
                (0..m.num_states())
                    .map(|w| {
                        m.belief(i, w)
                            .iter()
                            .enumerate()
                            .filter(|(_, &p)| p != 0.0)
                            .map(|(v, &p)| (v, p))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        StructureFile {
            strategies: m.strategy_counts().to_vec(),
            states: states.clone(),
            closest,
            beliefs,
        }
    }
}

/// Parses a structure; errors name the JSON path and the line and column.
pub fn structure_from_json(text: &str) -> Result<CounterfactualStructure> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: StructureFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path.is_empty() || path == "." {
            Error::Structure(inner.to_string())
        } else {
            Error::Structure(format!("{path}: {inner}"))
        }
    })?;
    file.into_structure()
}

pub fn structure_to_json(m: &CounterfactualStructure) -> String {
    serde_json::to_string_pretty(&StructureFile::from_structure(m)).expect("structure serializes")
}
