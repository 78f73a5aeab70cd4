//! Finite normal-form games evaluated by payoff rule, the four canonical
//! social dilemmas, and exhaustive verification of the dilemma axioms.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{decide_nonneg, rational_from_f64, Rational, Scalar};

/// A pure profile: one strategy index per player.
pub type Profile = Vec<usize>;

/// Default cap on the number of profiles an exhaustive check may visit.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Default number of contribution steps per unit endowment in the public goods game.
pub const DEFAULT_PGG_GRID: u32 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DilemmaKind {
    Pd,
    Pgg,
    Bertrand,
    Td,
}

impl DilemmaKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DilemmaKind::Pd => "pd",
            DilemmaKind::Pgg => "pgg",
            DilemmaKind::Bertrand => "bertrand",
            DilemmaKind::Td => "td",
        }
    }

    pub const ALL: [DilemmaKind; 4] = [
        DilemmaKind::Pd,
        DilemmaKind::Pgg,
        DilemmaKind::Bertrand,
        DilemmaKind::Td,
    ];
}

impl fmt::Display for DilemmaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Scalar parameters of one of the four dilemmas.
#[derive(Debug, Clone, PartialEq)]
pub enum DilemmaParams {
    Pd { b: f64, c: f64 },
    Pgg { n: usize, rho: f64, grid: u32 },
    Bertrand { n: usize, l: i64, h: i64 },
    Td { l: i64, h: i64, bonus: f64 },
}

impl DilemmaParams {
    pub fn kind(&self) -> DilemmaKind {
        match self {
            DilemmaParams::Pd { .. } => DilemmaKind::Pd,
            DilemmaParams::Pgg { .. } => DilemmaKind::Pgg,
            DilemmaParams::Bertrand { .. } => DilemmaKind::Bertrand,
            DilemmaParams::Td { .. } => DilemmaKind::Td,
        }
    }

    pub fn num_players(&self) -> usize {
        match *self {
            DilemmaParams::Pd { .. } | DilemmaParams::Td { .. } => 2,
            DilemmaParams::Pgg { n, .. } | DilemmaParams::Bertrand { n, .. } => n,
        }
    }

    /// Checks the preconditions under which the game is a social dilemma.
    pub fn validate(&self) -> Result<()> {
        match *self {
            DilemmaParams::Pd { b, c } => {
                if !(b.is_finite() && c.is_finite()) {
                    return Err(Error::InvalidParams("pd: b and c must be finite".into()));
                }
                if !(c > 0.0 && b > c) {
                    return Err(Error::InvalidParams(format!(
                        "pd: need b > c > 0, got b={b}, c={c}"
                    )));
                }
            }
            DilemmaParams::Pgg { n, rho, grid } => {
                if n < 2 {
                    return Err(Error::InvalidParams(format!("pgg: need n >= 2, got {n}")));
                }
                if grid == 0 {
                    return Err(Error::InvalidParams("pgg: grid must be at least 1".into()));
                }
                if !rho.is_finite() {
                    return Err(Error::InvalidParams("pgg: rho must be finite".into()));
                }
                let r = rational_from_f64(rho);
                let n_r = Rational::from_i64(n as i64);
                if !(r.clone() * n_r > Rational::from_i64(1) && r < Rational::from_i64(1)) {
                    return Err(Error::InvalidParams(format!(
                        "pgg: need 1/n < rho < 1, got n={n}, rho={rho}"
                    )));
                }
            }
            DilemmaParams::Bertrand { n, l, h } => {
                if n < 2 {
                    return Err(Error::InvalidParams(format!(
                        "bertrand: need n >= 2, got {n}"
                    )));
                }
                if l < 2 {
                    return Err(Error::InvalidParams(format!(
                        "bertrand: need l >= 2, got l={l}; with l=1 both (1,..,1) and (2,..,2) are Nash equilibria, so the equilibrium is not unique"
                    )));
                }
                if l >= h {
                    return Err(Error::InvalidParams(format!(
                        "bertrand: need l < h, got l={l}, h={h}"
                    )));
                }
            }
            DilemmaParams::Td { l, h, bonus } => {
                if !(0 < l && l < h) {
                    return Err(Error::InvalidParams(format!(
                        "td: need 0 < l < h, got l={l}, h={h}"
                    )));
                }
                if !(bonus.is_finite() && bonus > 0.0) {
                    return Err(Error::InvalidParams(format!(
                        "td: need bonus > 0, got {bonus}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Compact `name=value` listing, e.g. `b=4;c=1`.
    pub fn snapshot(&self) -> String {
        match *self {
            DilemmaParams::Pd { b, c } => format!("b={b};c={c}"),
            DilemmaParams::Pgg { n, rho, grid } => format!("n={n};rho={rho};grid={grid}"),
            DilemmaParams::Bertrand { n, l, h } => format!("n={n};l={l};h={h}"),
            DilemmaParams::Td { l, h, bonus } => format!("l={l};h={h};bonus={bonus}"),
        }
    }

    pub fn to_description(&self) -> GameDescription {
        let (params, grid) = match *self {
            DilemmaParams::Pd { b, c } => (serde_json::json!({ "b": b, "c": c }), None),
            DilemmaParams::Pgg { n, rho, grid } => {
                (serde_json::json!({ "n": n, "rho": rho }), Some(grid))
            }
            DilemmaParams::Bertrand { n, l, h } => {
                (serde_json::json!({ "n": n, "l": l, "h": h }), None)
            }
            DilemmaParams::Td { l, h, bonus } => {
                (serde_json::json!({ "l": l, "h": h, "bonus": bonus }), None)
            }
        };
        GameDescription {
            kind: self.kind(),
            params,
            grid,
        }
    }
}

/// Serialized form of a dilemma: `{"kind": ..., "params": {...}, "grid": int?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameDescription {
    pub kind: DilemmaKind,
    pub params: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<u32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PdFields {
    b: f64,
    c: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PggFields {
    n: usize,
    rho: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BertrandFields {
    n: usize,
    l: i64,
    h: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TdFields {
    l: i64,
    h: i64,
    bonus: f64,
}

fn parse_fields<T: for<'de> Deserialize<'de>>(value: &serde_json::Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." {
            "params".to_string()
        } else {
            format!("params.{path}")
        };
        Error::InvalidParams(format!("{path}: {}", e.into_inner()))
    })
}

impl GameDescription {
    /// Decodes the kind-specific parameter block. Does not check preconditions.
    pub fn params(&self) -> Result<DilemmaParams> {
        if self.grid.is_some() && self.kind != DilemmaKind::Pgg {
            return Err(Error::InvalidParams(format!(
                "grid: only meaningful for pgg, not {}",
                self.kind
            )));
        }
        Ok(match self.kind {
            DilemmaKind::Pd => {
                let p: PdFields = parse_fields(&self.params)?;
                DilemmaParams::Pd { b: p.b, c: p.c }
            }
            DilemmaKind::Pgg => {
                let p: PggFields = parse_fields(&self.params)?;
                DilemmaParams::Pgg {
                    n: p.n,
                    rho: p.rho,
                    grid: self.grid.unwrap_or(DEFAULT_PGG_GRID),
                }
            }
            DilemmaKind::Bertrand => {
                let p: BertrandFields = parse_fields(&self.params)?;
                DilemmaParams::Bertrand { n: p.n, l: p.l, h: p.h }
            }
            DilemmaKind::Td => {
                let p: TdFields = parse_fields(&self.params)?;
                DilemmaParams::Td {
                    l: p.l,
                    h: p.h,
                    bonus: p.bonus,
                }
            }
        })
    }

    pub fn to_dilemma(&self) -> Result<SocialDilemma> {
        make_dilemma(&self.params()?)
    }
}

/// Payoffs listed per profile, profiles in lexicographic order (player 0 most significant).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffTable {
    pub strategies: Vec<usize>,
    pub payoffs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
enum PayoffRule {
    Dilemma(DilemmaParams),
    Table(Vec<f64>),
}

/// A finite N-player game whose payoffs are evaluated on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormGame {
    strategy_counts: Vec<usize>,
    rule: PayoffRule,
}

impl NormalFormGame {
    /// Game whose payoffs follow the named dilemma's rule, without checking
    /// the dilemma preconditions. Use [`make_dilemma`] for validated games.
    pub fn from_params_unchecked(params: &DilemmaParams) -> Result<Self> {
        let counts = match *params {
            DilemmaParams::Pd { .. } => vec![2, 2],
            DilemmaParams::Pgg { n, grid, .. } => {
                if n < 2 || grid == 0 {
                    return Err(Error::InvalidParams(format!(
                        "pgg: need n >= 2 and grid >= 1, got n={n}, grid={grid}"
                    )));
                }
                vec![grid as usize + 1; n]
            }
            DilemmaParams::Bertrand { n, l, h } => {
                if n < 2 || l > h || l < 0 {
                    return Err(Error::InvalidParams(format!(
                        "bertrand: need n >= 2 and 0 <= l <= h, got n={n}, l={l}, h={h}"
                    )));
                }
                vec![(h - l + 1) as usize; n]
            }
            DilemmaParams::Td { l, h, .. } => {
                if l > h {
                    return Err(Error::InvalidParams(format!(
                        "td: need l <= h, got l={l}, h={h}"
                    )));
                }
                vec![(h - l + 1) as usize; 2]
            }
        };
        Ok(NormalFormGame {
            strategy_counts: counts,
            rule: PayoffRule::Dilemma(params.clone()),
        })
    }

    pub fn from_table(table: &PayoffTable) -> Result<Self> {
        let n = table.strategies.len();
        if n < 2 {
            return Err(Error::InvalidParams(format!(
                "payoff table: need at least 2 players, got {n}"
            )));
        }
        if table.strategies.contains(&0) {
            return Err(Error::InvalidParams(
                "payoff table: every player needs at least one strategy".into(),
            ));
        }
        let total = table
            .strategies
            .iter()
            .try_fold(1usize, |acc, &m| acc.checked_mul(m))
            .ok_or_else(|| Error::InvalidParams("payoff table: too many profiles".into()))?;
        if table.payoffs.len() != total {
            return Err(Error::InvalidParams(format!(
                "payoff table: expected {total} rows, got {}",
                table.payoffs.len()
            )));
        }
        let mut flat = Vec::with_capacity(total * n);
        for (row_idx, row) in table.payoffs.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidParams(format!(
                    "payoff table: row {row_idx} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "payoff table: row {row_idx} has a non-finite payoff"
                )));
            }
            flat.extend_from_slice(row);
        }
        Ok(NormalFormGame {
            strategy_counts: table.strategies.clone(),
            rule: PayoffRule::Table(flat),
        })
    }

    pub fn num_players(&self) -> usize {
        self.strategy_counts.len()
    }

    pub fn num_strategies(&self, i: usize) -> usize {
        self.strategy_counts[i]
    }

    pub fn strategy_counts(&self) -> &[usize] {
        &self.strategy_counts
    }

    pub fn dilemma_params(&self) -> Option<&DilemmaParams> {
        match &self.rule {
            PayoffRule::Dilemma(p) => Some(p),
            PayoffRule::Table(_) => None,
        }
    }

    /// True when payoffs are invariant under permuting players, so a player's
    /// payoff depends only on its own strategy and the multiset of the others'.
    pub fn is_symmetric(&self) -> bool {
        matches!(self.rule, PayoffRule::Dilemma(_))
    }

    /// Number of pure profiles, saturating at `u128::MAX`.
    pub fn profile_count(&self) -> u128 {
        self.strategy_counts
            .iter()
            .fold(1u128, |acc, &m| acc.saturating_mul(m as u128))
    }

    /// Human-readable label of strategy `k` of player `i`.
    pub fn strategy_label(&self, i: usize, k: usize) -> String {
        match &self.rule {
            PayoffRule::Dilemma(DilemmaParams::Pd { .. }) => {
                if k == 0 { "C".into() } else { "D".into() }
            }
            PayoffRule::Dilemma(DilemmaParams::Pgg { grid, .. }) => {
                format!("{}", k as f64 / *grid as f64)
            }
            PayoffRule::Dilemma(DilemmaParams::Bertrand { l, .. })
            | PayoffRule::Dilemma(DilemmaParams::Td { l, .. }) => format!("{}", l + k as i64),
            PayoffRule::Table(_) => {
                let _ = i;
                format!("s{k}")
            }
        }
    }

    pub fn check_profile(&self, profile: &[usize]) -> Result<()> {
        if profile.len() != self.num_players() {
            return Err(Error::InvalidProfile(format!(
                "profile has {} entries, game has {} players",
                profile.len(),
                self.num_players()
            )));
        }
        for (i, (&s, &m)) in profile.iter().zip(&self.strategy_counts).enumerate() {
            if s >= m {
                return Err(Error::InvalidProfile(format!(
                    "player {i} strategy index {s} out of range (has {m} strategies)"
                )));
            }
        }
        Ok(())
    }

    /// `u_i(profile)` after validating the profile and player index.
    pub fn payoff(&self, profile: &[usize], i: usize) -> Result<f64> {
        self.check_profile(profile)?;
        if i >= self.num_players() {
            return Err(Error::InvalidProfile(format!(
                "player index {i} out of range for {} players",
                self.num_players()
            )));
        }
        Ok(self.payoff_with::<f64>(profile, i))
    }

    /// `u_i(profile)` in the requested scalar. The profile must be valid.
    pub fn payoff_with<T: Scalar>(&self, profile: &[usize], i: usize) -> T {
        match &self.rule {
            PayoffRule::Table(flat) => T::from_f64(flat[self.profile_index(profile) * self.num_players() + i]),
            PayoffRule::Dilemma(params) => dilemma_payoff(params, profile, i),
        }
    }

    /// Position of `profile` in lexicographic order.
    pub fn profile_index(&self, profile: &[usize]) -> usize {
        profile
            .iter()
            .zip(&self.strategy_counts)
            .fold(0usize, |acc, (&s, &m)| acc * m + s)
    }

    pub fn profiles(&self) -> Profiles {
        Profiles::new(self.strategy_counts.clone())
    }

    /// `u_i(a) >= u_j(b)` with exact re-evaluation near ties.
    pub fn payoff_geq(&self, a: &[usize], i: usize, b: &[usize], j: usize) -> bool {
        let x: f64 = self.payoff_with(a, i);
        let y: f64 = self.payoff_with(b, j);
        decide_nonneg(x - y, x.abs().max(y.abs()), || {
            self.payoff_with::<Rational>(a, i) - self.payoff_with::<Rational>(b, j)
        })
    }

    /// Sum of all players' payoffs in the requested scalar.
    pub fn welfare_with<T: Scalar>(&self, profile: &[usize]) -> T {
        (0..self.num_players()).fold(T::zero(), |acc, i| acc + self.payoff_with::<T>(profile, i))
    }

    /// A strictly profitable unilateral deviation `(player, to)` if one exists.
    pub fn profitable_deviation(&self, profile: &[usize]) -> Option<(usize, usize)> {
        let mut dev = profile.to_vec();
        for i in 0..self.num_players() {
            for s in 0..self.strategy_counts[i] {
                if s == profile[i] {
                    continue;
                }
                dev[i] = s;
                let better = !self.payoff_geq(profile, i, &dev, i);
                dev[i] = profile[i];
                if better {
                    return Some((i, s));
                }
            }
        }
        None
    }

    pub fn is_pure_nash(&self, profile: &[usize]) -> bool {
        self.profitable_deviation(profile).is_none()
    }

    fn check_budget(&self, what: &'static str, budget: u64) -> Result<()> {
        let required = self.profile_count();
        if required > budget as u128 {
            return Err(Error::BudgetExceeded {
                what,
                required,
                budget,
            });
        }
        Ok(())
    }

    /// All pure Nash equilibria, in lexicographic order.
    pub fn pure_nash_equilibria(&self, budget: u64) -> Result<Vec<Profile>> {
        self.check_budget("pure Nash enumeration", budget)?;
        Ok(self.profiles().filter(|p| self.is_pure_nash(p)).collect())
    }

    /// All profiles maximizing the sum of payoffs, in lexicographic order.
    pub fn welfare_maximizers(&self, budget: u64) -> Result<Vec<Profile>> {
        self.check_budget("welfare enumeration", budget)?;
        let mut best: Vec<Profile> = Vec::new();
        let mut best_val = f64::NEG_INFINITY;
        for p in self.profiles() {
            let w: f64 = self.welfare_with(&p);
            if best.is_empty() {
                best_val = w;
                best.push(p);
                continue;
            }
            let diff = w - best_val;
            let scale = w.abs().max(best_val.abs());
            let ge = decide_nonneg(diff, scale, || {
                self.welfare_with::<Rational>(&p) - self.welfare_with::<Rational>(&best[0])
            });
            if !ge {
                continue;
            }
            let le = decide_nonneg(-diff, scale, || {
                self.welfare_with::<Rational>(&best[0]) - self.welfare_with::<Rational>(&p)
            });
            if !le {
                best.clear();
                best_val = w;
            }
            best.push(p);
        }
        Ok(best)
    }
}

fn dilemma_payoff<T: Scalar>(params: &DilemmaParams, profile: &[usize], i: usize) -> T {
    match *params {
        DilemmaParams::Pd { b, c } => {
            let b = T::from_f64(b);
            let c = T::from_f64(c);
            let me_coop = profile[i] == 0;
            let other_coop = profile[1 - i] == 0;
            let mut u = T::zero();
            if me_coop {
                u = u - c;
            }
            if other_coop {
                u = u + b;
            }
            u
        }
        DilemmaParams::Pgg { rho, grid, .. } => {
            let g = T::from_i64(grid as i64);
            let total: u64 = profile.iter().map(|&k| k as u64).sum();
            let own = T::from_i64(profile[i] as i64) / g.clone();
            let pool = T::from_u64(total) / g;
            T::one() - own + T::from_f64(rho) * pool
        }
        DilemmaParams::Bertrand { l, .. } => {
            let low = *profile.iter().min().expect("nonempty profile");
            if profile[i] != low {
                return T::zero();
            }
            let ties = profile.iter().filter(|&&s| s == low).count();
            T::from_i64(l + low as i64) / T::from_i64(ties as i64)
        }
        DilemmaParams::Td { l, bonus, .. } => {
            let mine = profile[i];
            let theirs = profile[1 - i];
            let m = T::from_i64(l + mine.min(theirs) as i64);
            let bonus = T::from_f64(bonus);
            match mine.cmp(&theirs) {
                std::cmp::Ordering::Equal => m,
                std::cmp::Ordering::Less => m + bonus,
                std::cmp::Ordering::Greater => m - bonus,
            }
        }
    }
}

/// Lexicographic odometer over a product of index ranges.
#[derive(Debug, Clone)]
pub struct Profiles {
    counts: Vec<usize>,
    next: Option<Profile>,
}

impl Profiles {
    pub fn new(counts: Vec<usize>) -> Self {
        let next = if counts.contains(&0) {
            None
        } else {
            Some(vec![0; counts.len()])
        };
        Profiles { counts, next }
    }
}

impl Iterator for Profiles {
    type Item = Profile;

    fn next(&mut self) -> Option<Profile> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut pos = succ.len();
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            succ[pos] += 1;
            if succ[pos] < self.counts[pos] {
                self.next = Some(succ);
                break;
            }
            succ[pos] = 0;
        }
        Some(current)
    }
}

/// A game tagged with its unique Nash and unique welfare-maximizing profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct SocialDilemma {
    pub game: NormalFormGame,
    pub nash_profile: Profile,
    pub welfare_profile: Profile,
    pub kind: DilemmaKind,
    pub params: DilemmaParams,
}

impl SocialDilemma {
    pub fn num_players(&self) -> usize {
        self.game.num_players()
    }

    /// Player `i`'s component of the welfare-maximizing profile.
    pub fn cooperate(&self, i: usize) -> usize {
        self.welfare_profile[i]
    }

    /// Player `i`'s component of the Nash profile.
    pub fn defect(&self, i: usize) -> usize {
        self.nash_profile[i]
    }

    pub fn payoff(&self, profile: &[usize], i: usize) -> Result<f64> {
        self.game.payoff(profile, i)
    }
}

/// Builds the dilemma named by `params` after checking its preconditions.
pub fn make_dilemma(params: &DilemmaParams) -> Result<SocialDilemma> {
    params.validate()?;
    let game = NormalFormGame::from_params_unchecked(params)?;
    let n = game.num_players();
    let top = game.num_strategies(0) - 1;
    let (nash, welfare) = match params {
        DilemmaParams::Pd { .. } => (vec![1; 2], vec![0; 2]),
        _ => (vec![0; n], vec![top; n]),
    };
    Ok(SocialDilemma {
        game,
        nash_profile: nash,
        welfare_profile: welfare,
        kind: params.kind(),
        params: params.clone(),
    })
}

pub fn make_prisoners_dilemma(b: f64, c: f64) -> Result<SocialDilemma> {
    make_dilemma(&DilemmaParams::Pd { b, c })
}

pub fn make_public_goods(n: usize, rho: f64, grid: u32) -> Result<SocialDilemma> {
    make_dilemma(&DilemmaParams::Pgg { n, rho, grid })
}

pub fn make_bertrand(n: usize, l: i64, h: i64) -> Result<SocialDilemma> {
    make_dilemma(&DilemmaParams::Bertrand { n, l, h })
}

pub fn make_travelers_dilemma(l: i64, h: i64, bonus: f64) -> Result<SocialDilemma> {
    make_dilemma(&DilemmaParams::Td { l, h, bonus })
}

/// Bertrand competition with no lower bound on `l`; the price floor `l = 1`
/// yields a game with two pure Nash equilibria.
pub fn bertrand_game(n: usize, l: i64, h: i64) -> Result<NormalFormGame> {
    NormalFormGame::from_params_unchecked(&DilemmaParams::Bertrand { n, l, h })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DilemmaReport {
    pub nash_equilibria: Vec<Profile>,
    pub welfare_maximizers: Vec<Profile>,
    pub unique_nash: Option<Profile>,
    pub unique_welfare: Option<Profile>,
    pub dominance_ok: bool,
}

impl DilemmaReport {
    pub fn is_social_dilemma(&self) -> bool {
        self.unique_nash.is_some() && self.unique_welfare.is_some() && self.dominance_ok
    }
}

/// Exhaustively checks the social-dilemma axioms on `game`.
pub fn verify_social_dilemma(game: &NormalFormGame, budget: u64) -> Result<DilemmaReport> {
    let nash = game.pure_nash_equilibria(budget)?;
    let welfare = game.welfare_maximizers(budget)?;
    let unique_nash = (nash.len() == 1).then(|| nash[0].clone());
    let unique_welfare = (welfare.len() == 1).then(|| welfare[0].clone());
    let dominance_ok = match (&unique_nash, &unique_welfare) {
        (Some(sn), Some(sw)) => (0..game.num_players()).all(|i| {
            let x: f64 = game.payoff_with(sw, i);
            let y: f64 = game.payoff_with(sn, i);
            let d = x - y;
            // strict: u_i(sw) - u_i(sn) > 0  <=>  not (u_i(sn) - u_i(sw) >= 0)
            !decide_nonneg(-d, x.abs().max(y.abs()), || {
                game.payoff_with::<Rational>(sn, i) - game.payoff_with::<Rational>(sw, i)
            })
        }),
        _ => false,
    };
    Ok(DilemmaReport {
        nash_equilibria: nash,
        welfare_maximizers: welfare,
        unique_nash,
        unique_welfare,
        dominance_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn payoffs(d: &SocialDilemma, p: &[usize]) -> Vec<f64> {
        (0..d.num_players()).map(|i| d.payoff(p, i).unwrap()).collect()
    }

    #[test]
    fn prisoners_dilemma_payoffs() {
        let d = make_prisoners_dilemma(4.0, 1.0).unwrap();
        assert_eq!(payoffs(&d, &[0, 0]), vec![3.0, 3.0]);
        assert_eq!(payoffs(&d, &[1, 1]), vec![0.0, 0.0]);
        assert_eq!(payoffs(&d, &[0, 1]), vec![-1.0, 4.0]);
        assert_eq!(d.payoff(&[1, 0], 0).unwrap(), 4.0);
        assert_eq!(d.nash_profile, vec![1, 1]);
        assert_eq!(d.welfare_profile, vec![0, 0]);
    }

    #[test]
    fn prisoners_dilemma_rejects_bad_params() {
        assert!(make_prisoners_dilemma(1.0, 1.0).is_err());
        assert!(make_prisoners_dilemma(2.0, 0.0).is_err());
        assert!(make_prisoners_dilemma(0.5, 1.0).is_err());
    }

    #[test]
    fn public_goods_payoffs() {
        let d = make_public_goods(2, 0.6, 100).unwrap();
        assert!((d.payoff(&[100, 100], 0).unwrap() - 1.2).abs() < 1e-12);
        assert!((d.payoff(&[50, 100], 0).unwrap() - 1.4).abs() < 1e-12);
        let d3 = make_public_goods(3, 0.5, 100).unwrap();
        for i in 0..3 {
            assert_eq!(d3.payoff(&[0, 0, 0], i).unwrap(), 1.0);
        }
        assert!(make_public_goods(2, 0.5, 10).is_err());
        assert!(make_public_goods(2, 1.0, 10).is_err());
        assert!(make_public_goods(1, 0.9, 10).is_err());
    }

    #[test]
    fn public_goods_exact_payoff() {
        let d = make_public_goods(2, 0.6, 100).unwrap();
        let u: Rational = d.game.payoff_with(&[50, 100], 0);
        assert_eq!(u, Rational::new(7.into(), 5.into()));
    }

    #[test]
    fn bertrand_payoffs() {
        let d = make_bertrand(2, 2, 100).unwrap();
        // prices 3 and 5 are indices 1 and 3
        assert_eq!(payoffs(&d, &[1, 3]), vec![3.0, 0.0]);
        let d3 = make_bertrand(3, 2, 10).unwrap();
        assert_eq!(payoffs(&d3, &[2, 2, 7]), vec![2.0, 2.0, 0.0]);
        let err = make_bertrand(2, 1, 100).unwrap_err();
        assert!(err.to_string().contains("not unique"));
    }

    #[test]
    fn travelers_dilemma_payoffs() {
        let d = make_travelers_dilemma(2, 100, 10.0).unwrap();
        assert_eq!(payoffs(&d, &[48, 58]), vec![60.0, 40.0]);
        assert_eq!(payoffs(&d, &[78, 78]), vec![80.0, 80.0]);
        assert_eq!(d.payoff(&[0, 98], 1).unwrap(), -8.0);
        let d2 = make_travelers_dilemma(2, 100, 2.0).unwrap();
        assert_eq!(d2.nash_profile, vec![0, 0]);
        assert_eq!(d2.welfare_profile, vec![98, 98]);
        assert!(make_travelers_dilemma(0, 5, 1.0).is_err());
        assert!(make_travelers_dilemma(3, 3, 1.0).is_err());
        assert!(make_travelers_dilemma(1, 3, 0.0).is_err());
    }

    #[test]
    fn payoff_rejects_bad_profiles() {
        let d = make_prisoners_dilemma(4.0, 1.0).unwrap();
        assert!(matches!(d.payoff(&[0], 0), Err(Error::InvalidProfile(_))));
        assert!(matches!(d.payoff(&[0, 2], 0), Err(Error::InvalidProfile(_))));
        assert!(matches!(d.payoff(&[0, 1], 2), Err(Error::InvalidProfile(_))));
    }

    #[test]
    fn verify_prisoners_dilemma() {
        let d = make_prisoners_dilemma(4.0, 1.0).unwrap();
        let r = verify_social_dilemma(&d.game, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.unique_nash, Some(vec![1, 1]));
        assert_eq!(r.unique_welfare, Some(vec![0, 0]));
        assert!(r.dominance_ok);
    }

    #[test]
    fn verify_public_goods_small_grid() {
        let d = make_public_goods(2, 0.6, 10).unwrap();
        let r = verify_social_dilemma(&d.game, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.unique_nash, Some(vec![0, 0]));
        assert_eq!(r.unique_welfare, Some(vec![10, 10]));
        assert!(r.is_social_dilemma());
    }

    #[test]
    fn verify_public_goods_cent_grid() {
        let d = make_public_goods(2, 0.6, 100).unwrap();
        let r = verify_social_dilemma(&d.game, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.unique_nash, Some(vec![0, 0]));
    }

    #[test]
    fn bertrand_with_unit_floor_has_two_equilibria() {
        let g = bertrand_game(2, 1, 5).unwrap();
        let r = verify_social_dilemma(&g, DEFAULT_BUDGET).unwrap();
        // prices 1 and 2
        assert_eq!(r.nash_equilibria, vec![vec![0, 0], vec![1, 1]]);
        assert!(r.unique_nash.is_none());
        assert!(!r.is_social_dilemma());
    }

    #[test]
    fn budget_is_enforced() {
        let d = make_public_goods(4, 0.5, 100).unwrap();
        match verify_social_dilemma(&d.game, 1000) {
            Err(Error::BudgetExceeded { required, budget, .. }) => {
                assert_eq!(required, 101u128.pow(4));
                assert_eq!(budget, 1000);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn table_games() {
        let t = PayoffTable {
            strategies: vec![2, 2],
            payoffs: vec![vec![1.0, -1.0], vec![-1.0, 1.0], vec![-1.0, 1.0], vec![1.0, -1.0]],
        };
        let g = NormalFormGame::from_table(&t).unwrap();
        assert_eq!(g.payoff(&[0, 1], 0).unwrap(), -1.0);
        assert!(g.pure_nash_equilibria(DEFAULT_BUDGET).unwrap().is_empty());
        let bad = PayoffTable {
            strategies: vec![2, 2],
            payoffs: vec![vec![1.0, 1.0]],
        };
        assert!(NormalFormGame::from_table(&bad).is_err());
    }

    #[test]
    fn description_round_trip() {
        let json = r#"{"kind":"pgg","params":{"n":3,"rho":0.5},"grid":10}"#;
        let desc: GameDescription = serde_json::from_str(json).unwrap();
        assert_eq!(
            desc.params().unwrap(),
            DilemmaParams::Pgg { n: 3, rho: 0.5, grid: 10 }
        );
        let back = desc.params().unwrap().to_description();
        assert_eq!(back, desc);
        let bad: GameDescription =
            serde_json::from_str(r#"{"kind":"pd","params":{"b":4}}"#).unwrap();
        let msg = bad.params().unwrap_err().to_string();
        assert!(msg.contains("params") && msg.contains("c"), "{msg}");
        let default_grid: GameDescription =
            serde_json::from_str(r#"{"kind":"pgg","params":{"n":2,"rho":0.6}}"#).unwrap();
        assert!(matches!(
            default_grid.params().unwrap(),
            DilemmaParams::Pgg { grid: 100, .. }
        ));
    }

    #[test]
    fn profiles_are_lexicographic() {
        let all: Vec<Profile> = Profiles::new(vec![2, 3]).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![0, 0]);
        assert_eq!(all[1], vec![0, 1]);
        assert_eq!(all[5], vec![1, 2]);
        let g = make_bertrand(2, 2, 4).unwrap().game;
        for (k, p) in g.profiles().enumerate() {
            assert_eq!(g.profile_index(&p), k);
        }
    }
}
