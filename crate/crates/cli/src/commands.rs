//! The JSON-report subcommands.

use serde::{Deserialize, Serialize};
use translucent::alt_models::{
    charness_rabin_best_replies, fehr_schmidt_best_replies, fs_pgg_full_contribution_condition,
    logit_qre_with, CharnessRabinParams, FehrSchmidtParams, FsPggCondition, QreOptions,
};
use translucent::beliefs::{is_cooperation_rational, TranslucentType};
use translucent::closed_form::{cooperation_condition, CooperationVerdict};
use translucent::counterfactual::io::structure_from_json;
use translucent::counterfactual::{
    build_punishment_structure, check_translucent_equilibrium, support_states, typed_structure_holds,
    validate_structure, DEFAULT_STRUCTURE_BUDGET,
};
use translucent::equilibrium::{is_coherent, te_condition, te_condition_typed, CoherenceWitness, MixedProfile};
use translucent::games::{make_dilemma, DilemmaParams, GameDescription, SocialDilemma};

use crate::config::{game_params, parse, unit_values, Values};
use crate::{CliError, Outcome};

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn unit(name: &str, x: f64) -> Result<f64, CliError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(CliError::Input(format!("{name}: must lie in [0, 1], got {x}")));
    }
    Ok(x)
}

fn unit_vec(name: &str, v: &[f64], n: usize) -> Result<(), CliError> {
    if v.len() != n {
        return Err(CliError::Input(format!("{name}: expected {n} entries, got {}", v.len())));
    }
    for (k, &x) in v.iter().enumerate() {
        unit(&format!("{name}[{k}]"), x)?;
    }
    Ok(())
}

fn dilemma(desc: &GameDescription) -> Result<SocialDilemma, CliError> {
    let params = game_params(desc, "game")?;
    Ok(make_dilemma(&params)?)
}

// ---------------------------------------------------------------- check

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    pub game: GameDescription,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub fehr_schmidt: Option<FehrSchmidtBlock>,
    #[serde(default)]
    pub charness_rabin: Option<CharnessRabinBlock>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FehrSchmidtBlock {
    pub a_fs: f64,
    pub b_fs: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharnessRabinBlock {
    pub a_cr: f64,
    pub d_cr: f64,
}

#[derive(Debug, Serialize)]
pub struct EngineReport {
    pub rational: bool,
    pub best_deviation: String,
    pub eu_coop: f64,
    pub eu_dev: f64,
}

/// Best replies to universal cooperation under a social-preference utility.
#[derive(Debug, Serialize)]
pub struct PreferenceReport {
    pub best_replies: Vec<String>,
    pub cooperation_is_best_reply: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pgg_condition: Option<FsPggCondition>,
}

#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub kind: String,
    pub params: String,
    pub alpha: f64,
    pub beta: f64,
    pub closed_form: CooperationVerdict,
    pub engine: EngineReport,
    pub eu_coop: f64,
    pub eu_dev: f64,
    pub agree: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fehr_schmidt: Option<PreferenceReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub charness_rabin: Option<PreferenceReport>,
}

pub fn check_report(text: &str, budget: u64) -> Result<CheckReport, CliError> {
    let cfg: CheckConfig = parse(text)?;
    let d = dilemma(&cfg.game)?;
    let alpha = unit("alpha", cfg.alpha)?;
    let beta = unit("beta", cfg.beta)?;
    let closed = cooperation_condition(&d.params, alpha, beta)?;
    let engine = is_cooperation_rational(&d, 0, TranslucentType::new(alpha, beta)?, budget)?;
    let labels = |v: Vec<usize>| v.into_iter().map(|s| d.game.strategy_label(0, s)).collect::<Vec<_>>();
    let coop = d.cooperate(0);

    let fehr_schmidt = match &cfg.fehr_schmidt {
        Some(b) => {
            let p = FehrSchmidtParams::uniform(d.num_players(), b.a_fs, b.b_fs)
                .map_err(|e| CliError::Input(format!("fehr_schmidt: {e}")))?;
            let best = fehr_schmidt_best_replies(&d.game, &d.welfare_profile, 0, &p)?;
            let pgg_condition = match d.params {
                DilemmaParams::Pgg { rho, .. } => Some(fs_pgg_full_contribution_condition(b.b_fs, rho)?),
                _ => None,
            };
            Some(PreferenceReport {
                cooperation_is_best_reply: best.contains(&coop),
                best_replies: labels(best),
                pgg_condition,
            })
        }
        None => None,
    };
    let charness_rabin = match &cfg.charness_rabin {
        Some(b) => {
            let p = CharnessRabinParams::uniform(d.num_players(), b.a_cr, b.d_cr)
                .map_err(|e| CliError::Input(format!("charness_rabin: {e}")))?;
            let best = charness_rabin_best_replies(&d.game, &d.welfare_profile, 0, &p)?;
            Some(PreferenceReport {
                cooperation_is_best_reply: best.contains(&coop),
                best_replies: labels(best),
                pgg_condition: None,
            })
        }
        None => None,
    };

    Ok(CheckReport {
        kind: d.kind.to_string(),
        params: d.params.snapshot(),
        alpha,
        beta,
        agree: closed.rational == engine.verdict,
        closed_form: closed,
        eu_coop: engine.eu_coop,
        eu_dev: engine.eu_best_dev,
        engine: EngineReport {
            rational: engine.verdict,
            best_deviation: d.game.strategy_label(0, engine.best_deviation),
            eu_coop: engine.eu_coop,
            eu_dev: engine.eu_best_dev,
        },
        note: (alpha == 0.0).then(|| "opaque".to_string()),
        fehr_schmidt,
        charness_rabin,
    })
}

pub fn check(text: &str, budget: u64) -> Result<Outcome, CliError> {
    let r = check_report(text, budget)?;
    Ok(Outcome::new(to_json(&r), !r.agree))
}

// ---------------------------------------------------------------- equilibrium

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriumConfig {
    pub game: GameDescription,
    pub betas: Vec<f64>,
    #[serde(default)]
    pub alphas: Option<Vec<f64>>,
}

#[derive(Debug, Serialize)]
pub struct TypedReport {
    pub alphas: Vec<f64>,
    pub printed: bool,
    pub corrected: bool,
    /// Translucent equilibrium of the typed structure; null when it exceeds the structure budget.
    pub structure: Option<bool>,
    pub agree: bool,
}

#[derive(Debug, Serialize)]
pub struct EquilibriumReport {
    pub kind: String,
    pub params: String,
    pub betas: Vec<f64>,
    pub te_condition: bool,
    pub is_coherent: bool,
    pub coherence_witness: Option<CoherenceWitness>,
    /// Translucent equilibrium of the punishment structure; null when it exceeds the structure budget.
    pub structure: Option<bool>,
    pub agree: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub typed: Option<TypedReport>,
}

fn within_structure_budget<T>(r: translucent::Result<T>) -> Result<Option<T>, CliError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(translucent::Error::BudgetExceeded { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub fn equilibrium_report(text: &str, budget: u64) -> Result<EquilibriumReport, CliError> {
    let cfg: EquilibriumConfig = parse(text)?;
    let d = dilemma(&cfg.game)?;
    let n = d.num_players();
    unit_vec("betas", &cfg.betas, n)?;
    let te = te_condition(&d.params, &cfg.betas)?;
    let sigma = MixedProfile::two_point(&d, &cfg.betas)?;
    let coherence = is_coherent(&d.game, &sigma, budget)?;
    let structure = within_structure_budget(
        build_punishment_structure(&d.game, &sigma, DEFAULT_STRUCTURE_BUDGET).and_then(|m| {
            let support = support_states(&m, &sigma);
            Ok(check_translucent_equilibrium(&m, &d.game, &sigma, &support)?.holds())
        }),
    )?;
    let typed = match &cfg.alphas {
        Some(alphas) => {
            unit_vec("alphas", alphas, n)?;
            let v = te_condition_typed(&d.params, alphas, &cfg.betas)?;
            let s = within_structure_budget(typed_structure_holds(&d, alphas, &cfg.betas, DEFAULT_STRUCTURE_BUDGET))?;
            Some(TypedReport {
                alphas: alphas.clone(),
                printed: v.printed,
                corrected: v.corrected,
                structure: s,
                agree: s.is_none_or(|s| s == v.corrected),
            })
        }
        None => None,
    };
    Ok(EquilibriumReport {
        kind: d.kind.to_string(),
        params: d.params.snapshot(),
        betas: cfg.betas,
        te_condition: te,
        is_coherent: coherence.coherent,
        coherence_witness: coherence.witness,
        structure,
        agree: te == coherence.coherent && structure.is_none_or(|s| s == te),
        typed,
    })
}

pub fn equilibrium(text: &str, budget: u64) -> Result<Outcome, CliError> {
    let r = equilibrium_report(text, budget)?;
    let failed = !r.agree || r.typed.as_ref().is_some_and(|t| !t.agree);
    Ok(Outcome::new(to_json(&r), failed))
}

// ---------------------------------------------------------------- population

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationConfig {
    pub game: GameDescription,
    pub population: PopulationSpec,
}

/// Either explicit weighted types or a uniform `(alpha, beta)` grid.
#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PopulationSpec {
    Types(Vec<WeightedType>),
    Grid { alpha: Values, beta: Values },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedType {
    pub alpha: f64,
    pub beta: f64,
    pub weight: f64,
}

#[derive(Debug, Serialize)]
pub struct PopulationReport {
    pub kind: String,
    pub params: String,
    pub types: usize,
    pub cooperating_types: usize,
    pub cooperation_rate: f64,
}

pub const WEIGHT_TOL: f64 = 1e-9;

pub fn population_report(text: &str) -> Result<PopulationReport, CliError> {
    let cfg: PopulationConfig = parse(text)?;
    let params = game_params(&cfg.game, "game")?;
    let verdict = |a: f64, b: f64| -> Result<bool, CliError> { Ok(cooperation_condition(&params, a, b)?.rational) };
    let (types, cooperating, rate) = match &cfg.population {
        PopulationSpec::Types(list) => {
            if list.is_empty() {
                return Err(CliError::Input("population.types: empty list".into()));
            }
            let mut total = 0.0;
            let mut rate = 0.0;
            let mut cooperating = 0;
            for (k, t) in list.iter().enumerate() {
                let path = format!("population.types[{k}]");
                unit(&format!("{path}.alpha"), t.alpha)?;
                unit(&format!("{path}.beta"), t.beta)?;
                if !(t.weight >= 0.0 && t.weight.is_finite()) {
                    return Err(CliError::Input(format!("{path}.weight: must be nonnegative, got {}", t.weight)));
                }
                total += t.weight;
                if verdict(t.alpha, t.beta)? {
                    rate += t.weight;
                    cooperating += 1;
                }
            }
            if (total - 1.0).abs() > WEIGHT_TOL {
                return Err(CliError::Input(format!("population.types: weights sum to {total}, not 1")));
            }
            (list.len(), cooperating, rate)
        }
        PopulationSpec::Grid { alpha, beta } => {
            let alphas = unit_values(alpha, "population.grid.alpha")?;
            let betas = unit_values(beta, "population.grid.beta")?;
            let mut cooperating = 0;
            for &a in &alphas {
                for &b in &betas {
                    cooperating += verdict(a, b)? as usize;
                }
            }
            let total = alphas.len() * betas.len();
            (total, cooperating, cooperating as f64 / total as f64)
        }
    };
    Ok(PopulationReport {
        kind: params.kind().to_string(),
        params: params.snapshot(),
        types,
        cooperating_types: cooperating,
        cooperation_rate: rate,
    })
}

pub fn population(text: &str) -> Result<Outcome, CliError> {
    Ok(Outcome::new(to_json(&population_report(text)?), false))
}

// ---------------------------------------------------------------- validate-structure

pub fn validate(text: &str) -> Result<Outcome, CliError> {
    let m = structure_from_json(text).map_err(|e| match e {
        translucent::Error::Structure(msg) => CliError::Input(msg),
        other => CliError::Input(other.to_string()),
    })?;
    let violations = validate_structure(&m);
    let mut out = String::new();
    for v in &violations {
        out.push_str(&format!("{v}\n"));
    }
    out.push_str(&format!(
        "{} states, {} players: {} violation(s)\n",
        m.num_states(),
        m.num_players(),
        violations.len()
    ));
    Ok(Outcome::new(out, !violations.is_empty()))
}

// ---------------------------------------------------------------- qre

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QreConfig {
    pub game: GameDescription,
    pub lambda: Values,
    #[serde(default)]
    pub damping: Option<f64>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct QrePoint {
    pub lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cooperation: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct QreReport {
    pub kind: String,
    pub params: String,
    pub points: Vec<QrePoint>,
}

pub fn qre_report(text: &str, budget: u64) -> Result<QreReport, CliError> {
    let cfg: QreConfig = parse(text)?;
    let d = dilemma(&cfg.game)?;
    let lambdas = cfg.lambda.expand("lambda")?;
    if let Some(l) = lambdas.iter().find(|&&l| l < 0.0) {
        return Err(CliError::Input(format!("lambda: must be nonnegative, got {l}")));
    }
    let defaults = QreOptions::default();
    let opts = QreOptions {
        damping: cfg.damping.unwrap_or(defaults.damping),
        tol: cfg.tol.unwrap_or(defaults.tol),
        max_iter: cfg.max_iter.unwrap_or(defaults.max_iter),
        budget,
    };
    if !(opts.tol > 0.0) {
        return Err(CliError::Input(format!("tol: must be positive, got {}", opts.tol)));
    }
    let mut points = Vec::with_capacity(lambdas.len());
    for &lambda in &lambdas {
        points.push(match logit_qre_with(&d.game, lambda, &opts) {
            Ok(r) => QrePoint {
                lambda,
                cooperation: Some((0..d.num_players()).map(|i| r.profile.prob(i, d.cooperate(i))).collect()),
                probs: Some(r.profile.probs().to_vec()),
                residual: Some(r.residual),
                iterations: Some(r.iterations),
                error: None,
            },
            Err(e @ translucent::Error::QreNotConverged { .. }) => QrePoint {
                lambda,
                cooperation: None,
                probs: None,
                residual: None,
                iterations: None,
                error: Some(e.to_string()),
            },
            Err(translucent::Error::InvalidParams(msg)) => return Err(CliError::Input(msg)),
            Err(e) => return Err(e.into()),
        });
    }
    Ok(QreReport {
        kind: d.kind.to_string(),
        params: d.params.snapshot(),
        points,
    })
}

pub fn qre(text: &str, budget: u64) -> Result<Outcome, CliError> {
    let r = qre_report(text, budget)?;
    let failed = r.points.iter().any(|p| p.error.is_some());
    Ok(Outcome::new(to_json(&r), failed))
}
