//! Comparison models: Fehr–Schmidt inequity aversion, Charness–Rabin social
//! preferences, and the logit quantal response equilibrium. All of them are
//! evaluated over the payoffs of a [`NormalFormGame`].

use serde::Serialize;

use crate::equilibrium::MixedProfile;
use crate::error::{Error, Result};
use crate::games::{NormalFormGame, Profile};

/// Per-player envy (`a_fs`) and guilt (`b_fs`) weights, `0 <= b_fs <= a_fs`.
#[derive(Debug, Clone, PartialEq)]
pub struct FehrSchmidtParams {
    pub a_fs: Vec<f64>,
    pub b_fs: Vec<f64>,
}

impl FehrSchmidtParams {
    pub fn new(a_fs: Vec<f64>, b_fs: Vec<f64>) -> Result<Self> {
        if a_fs.len() != b_fs.len() {
            return Err(Error::InvalidParams(format!(
                "a_fs has {} entries, b_fs has {}",
                a_fs.len(),
                b_fs.len()
            )));
        }
        for (i, (&a, &b)) in a_fs.iter().zip(&b_fs).enumerate() {
            if !(b >= 0.0 && b <= a && a.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "player {i}: need 0 <= b_fs <= a_fs, got a_fs={a}, b_fs={b}"
                )));
            }
        }
        Ok(FehrSchmidtParams { a_fs, b_fs })
    }

    pub fn uniform(n: usize, a_fs: f64, b_fs: f64) -> Result<Self> {
        Self::new(vec![a_fs; n], vec![b_fs; n])
    }
}

/// Per-player social weight `a_cr` and maximin weight `d_cr`, both in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharnessRabinParams {
    pub a_cr: Vec<f64>,
    pub d_cr: Vec<f64>,
}

impl CharnessRabinParams {
    pub fn new(a_cr: Vec<f64>, d_cr: Vec<f64>) -> Result<Self> {
        if a_cr.len() != d_cr.len() {
            return Err(Error::InvalidParams(format!(
                "a_cr has {} entries, d_cr has {}",
                a_cr.len(),
                d_cr.len()
            )));
        }
        if let Some(x) = a_cr.iter().chain(&d_cr).find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::InvalidParams(format!("weight {x} outside [0, 1]")));
        }
        Ok(CharnessRabinParams { a_cr, d_cr })
    }

    pub fn uniform(n: usize, a_cr: f64, d_cr: f64) -> Result<Self> {
        Self::new(vec![a_cr; n], vec![d_cr; n])
    }
}

fn material(game: &NormalFormGame, profile: &[usize]) -> Result<Vec<f64>> {
    (0..game.num_players()).map(|j| game.payoff(profile, j)).collect()
}

fn check_len(game: &NormalFormGame, len: usize) -> Result<()> {
    if len != game.num_players() {
        return Err(Error::InvalidParams(format!(
            "weights given for {len} players, game has {}",
            game.num_players()
        )));
    }
    Ok(())
}

/// `u_i - a/(N-1) sum_j max(u_j - u_i, 0) - b/(N-1) sum_j max(u_i - u_j, 0)`.
pub fn fehr_schmidt_utility(
    game: &NormalFormGame,
    profile: &[usize],
    i: usize,
    p: &FehrSchmidtParams,
) -> Result<f64> {
    check_len(game, p.a_fs.len())?;
    let u = material(game, profile)?;
    let others = (u.len() - 1) as f64;
    let (mut envy, mut guilt) = (0.0, 0.0);
    for (j, &uj) in u.iter().enumerate() {
        if j != i {
            envy += (uj - u[i]).max(0.0);
            guilt += (u[i] - uj).max(0.0);
        }
    }
    Ok(u[i] - p.a_fs[i] / others * envy - p.b_fs[i] / others * guilt)
}

/// `(1 - a) u_i + a (d min_j u_j + (1 - d) sum_j u_j)`.
pub fn charness_rabin_utility(
    game: &NormalFormGame,
    profile: &[usize],
    i: usize,
    p: &CharnessRabinParams,
) -> Result<f64> {
    check_len(game, p.a_cr.len())?;
    let u = material(game, profile)?;
    let (a, d) = (p.a_cr[i], p.d_cr[i]);
    let min = u.iter().copied().fold(f64::INFINITY, f64::min);
    let sum: f64 = u.iter().sum();
    Ok((1.0 - a) * u[i] + a * (d * min + (1.0 - d) * sum))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FsPggCondition {
    /// Full contribution is a best reply to full contribution: `b_fs >= 1 - rho`.
    pub holds: bool,
    pub threshold: f64,
    /// The commonly quoted threshold `(1 - rho) / rho`.
    pub printed_holds: bool,
    pub printed_threshold: f64,
}

/// Whether a Fehr–Schmidt player with guilt weight `b_fs` keeps contributing
/// when every other player contributes the same amount.
///
/// Lowering one's contribution by `d` gains `(1 - rho) d` in material payoff
/// and costs `b_fs d` in guilt, since each of the `N - 1` others falls `d`
/// behind; raising it loses material payoff and adds envy. So the threshold
/// is `1 - rho` for every `N` and every common contribution level.
pub fn fs_pgg_full_contribution_condition(b_fs: f64, rho: f64) -> Result<FsPggCondition> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidParams(format!("rho must lie in (0, 1], got {rho}")));
    }
    if !(b_fs >= 0.0 && b_fs.is_finite()) {
        return Err(Error::InvalidParams(format!("b_fs must be finite and nonnegative, got {b_fs}")));
    }
    let threshold = 1.0 - rho;
    let printed_threshold = (1.0 - rho) / rho;
    Ok(FsPggCondition {
        holds: b_fs >= threshold,
        threshold,
        printed_holds: b_fs >= printed_threshold,
        printed_threshold,
    })
}

/// The strategies of player `i` maximizing Fehr–Schmidt utility against the
/// rest of `profile`.
pub fn fehr_schmidt_best_replies(
    game: &NormalFormGame,
    profile: &[usize],
    i: usize,
    p: &FehrSchmidtParams,
) -> Result<Vec<usize>> {
    best_replies_by(game, profile, i, |q| fehr_schmidt_utility(game, q, i, p))
}

/// The strategies of player `i` maximizing Charness–Rabin utility against
/// the rest of `profile`.
pub fn charness_rabin_best_replies(
    game: &NormalFormGame,
    profile: &[usize],
    i: usize,
    p: &CharnessRabinParams,
) -> Result<Vec<usize>> {
    best_replies_by(game, profile, i, |q| charness_rabin_utility(game, q, i, p))
}

fn best_replies_by<F>(game: &NormalFormGame, profile: &[usize], i: usize, utility: F) -> Result<Vec<usize>>
where
    F: Fn(&[usize]) -> Result<f64>,
{
    game.check_profile(profile)?;
    let mut q: Profile = profile.to_vec();
    let utils = (0..game.num_strategies(i))
        .map(|s| {
            q[i] = s;
            utility(&q)
        })
        .collect::<Result<Vec<f64>>>()?;
    let best = utils.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((0..utils.len())
        .filter(|&s| utils[s] >= best - 1e-12 * best.abs().max(1.0))
        .collect())
}

pub const QRE_DAMPING: f64 = 0.5;
pub const QRE_TOL: f64 = 1e-10;
pub const QRE_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QreOptions {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Cap on the number of pure profiles enumerated per iteration.
    pub budget: u64,
}

impl Default for QreOptions {
    fn default() -> Self {
        QreOptions {
            damping: QRE_DAMPING,
            tol: QRE_TOL,
            max_iter: QRE_MAX_ITER,
            budget: crate::games::DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QreResult {
    pub profile: MixedProfile,
    /// Largest absolute gap between the profile and its logit response.
    pub residual: f64,
    pub iterations: usize,
}

/// `EU_i(s, sigma_-i)` for every player and strategy, by full enumeration.
fn expected_utilities(game: &NormalFormGame, probs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = game.num_players();
    let mut eu: Vec<Vec<f64>> = (0..n).map(|i| vec![0.0; game.num_strategies(i)]).collect();
    for profile in game.profiles() {
        let payoffs: Vec<f64> = (0..n).map(|i| game.payoff_with(&profile, i)).collect();
        for i in 0..n {
            let w: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| probs[j][profile[j]])
                .product();
            if w != 0.0 {
                eu[i][profile[i]] += w * payoffs[i];
            }
        }
    }
    eu
}

fn softmax(values: &[f64], lambda: f64) -> Vec<f64> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = values.iter().map(|v| (lambda * (v - max)).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// One logit response: each player's distribution proportional to
/// `exp(lambda * EU_i(s, sigma_-i))`.
pub fn logit_response(game: &NormalFormGame, probs: &[Vec<f64>], lambda: f64) -> Vec<Vec<f64>> {
    expected_utilities(game, probs)
        .iter()
        .map(|eu| softmax(eu, lambda))
        .collect()
}

fn gap(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

/// Logit QRE by damped fixed-point iteration from the uniform profile.
pub fn logit_qre(game: &NormalFormGame, lambda: f64) -> Result<QreResult> {
    logit_qre_with(game, lambda, &QreOptions::default())
}

pub fn logit_qre_with(game: &NormalFormGame, lambda: f64, opts: &QreOptions) -> Result<QreResult> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParams(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::InvalidParams(format!("damping must lie in (0, 1], got {}", opts.damping)));
    }
    let required = game.profile_count();
    if required > opts.budget as u128 {
        return Err(Error::BudgetExceeded {
            what: "logit response enumeration",
            required,
            budget: opts.budget,
        });
    }
    let mut probs: Vec<Vec<f64>> = (0..game.num_players())
        .map(|i| {
            let m = game.num_strategies(i);
            vec![1.0 / m as f64; m]
        })
        .collect();
    let mut residual = f64::INFINITY;
    for iteration in 0..=opts.max_iter {
        let response = logit_response(game, &probs, lambda);
        residual = gap(&probs, &response);
        if residual <= opts.tol {
            return Ok(QreResult {
                profile: MixedProfile::new(probs)?,
                residual,
                iterations: iteration,
            });
        }
        for (row, target) in probs.iter_mut().zip(&response) {
            for (p, t) in row.iter_mut().zip(target) {
                *p = (1.0 - opts.damping) * *p + opts.damping * t;
            }
            let total: f64 = row.iter().sum();
            row.iter_mut().for_each(|p| *p /= total);
        }
    }
    Err(Error::QreNotConverged {
        iterations: opts.max_iter,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::*;

    #[test]
    fn fs_examples() {
        let d = make_prisoners_dilemma(4.0, 1.0).unwrap();
        let p = FehrSchmidtParams::uniform(2, 1.0, 0.0).unwrap();
        assert_eq!(fehr_schmidt_utility(&d.game, &[0, 1], 0, &p).unwrap(), -6.0);
        assert_eq!(fehr_schmidt_utility(&d.game, &[0, 0], 0, &p).unwrap(), 3.0);

        let pgg = make_public_goods(2, 0.6, 1).unwrap();
        let p = FehrSchmidtParams::uniform(2, 0.5, 0.0).unwrap();
        let u = fehr_schmidt_utility(&pgg.game, &[1, 0], 0, &p).unwrap();
        assert!((u - 0.1).abs() < 1e-12, "{u}");
        assert!(FehrSchmidtParams::uniform(2, 0.2, 0.5).is_err());
    }

    #[test]
    fn cr_examples() {
        let d = make_prisoners_dilemma(4.0, 1.0).unwrap();
        let p = CharnessRabinParams::uniform(2, 0.5, 0.5).unwrap();
        assert_eq!(charness_rabin_utility(&d.game, &[0, 0], 0, &p).unwrap(), 3.75);
        let p = CharnessRabinParams::uniform(2, 0.0, 0.3).unwrap();
        assert_eq!(charness_rabin_utility(&d.game, &[0, 1], 0, &p).unwrap(), -1.0);
        let p = CharnessRabinParams::uniform(2, 1.0, 1.0).unwrap();
        assert_eq!(charness_rabin_utility(&d.game, &[0, 1], 1, &p).unwrap(), -1.0);
    }

    #[test]
    fn fs_pgg_thresholds() {
        let v = fs_pgg_full_contribution_condition(1.0, 0.5).unwrap();
        assert!(v.holds && v.printed_holds);
        assert_eq!(v.printed_threshold, 1.0);
        let v = fs_pgg_full_contribution_condition(0.5, 0.6).unwrap();
        assert!(v.holds && !v.printed_holds);
        assert!(fs_pgg_full_contribution_condition(0.0, 1.0).unwrap().holds);
        assert!(fs_pgg_full_contribution_condition(0.5, 0.0).is_err());
    }

    #[test]
    fn qre_uniform_at_zero_and_below_half() {
        let d = make_prisoners_dilemma(4.0, 1.0).unwrap();
        let r = logit_qre(&d.game, 0.0).unwrap();
        assert_eq!(r.profile.probs(), &[vec![0.5, 0.5], vec![0.5, 0.5]]);
        let r = logit_qre(&d.game, 2.0).unwrap();
        assert!(r.residual <= QRE_TOL);
        let expect = 1.0 / (1.0 + 2.0f64.exp());
        assert!((r.profile.prob(0, 0) - expect).abs() < 1e-9);
    }

    #[test]
    fn qre_reports_non_convergence() {
        let d = make_prisoners_dilemma(4.0, 1.0).unwrap();
        let opts = QreOptions { max_iter: 3, ..QreOptions::default() };
        assert!(matches!(
            logit_qre_with(&d.game, 5.0, &opts),
            Err(Error::QreNotConverged { iterations: 3, .. })
        ));
    }
}
