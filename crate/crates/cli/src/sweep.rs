//! Parameter sweeps emitting CSV feasibility regions.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;
use translucent::alt_models::{logit_qre_with, logit_response, QreOptions, QreResult};
use translucent::beliefs::{is_cooperation_rational, TranslucentType};
use translucent::closed_form::cooperation_condition;
use translucent::counterfactual::{typed_structure_holds, DEFAULT_STRUCTURE_BUDGET};
use translucent::equilibrium::{is_coherent, te_condition, te_condition_typed, MixedProfile};
use translucent::games::{make_dilemma, DilemmaKind, DilemmaParams, SocialDilemma, DEFAULT_PGG_GRID};

use crate::config::{fmt12, unit_values, Values};
use crate::CliError;

pub const GRID_HEADER: &str = "kind,param_snapshot,alpha,beta,rational,binding,threshold";
pub const QRE_HEADER: &str = "kind,param_snapshot,lambda,player,coop_prob,residual";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    #[default]
    Cooperation,
    Te,
    TeTyped,
    Qre,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub kind: DilemmaKind,
    #[serde(default)]
    pub mode: SweepMode,
    pub params: BTreeMap<String, Values>,
    /// Contribution steps for the public goods game.
    #[serde(default)]
    pub grid: Option<u32>,
    #[serde(default)]
    pub alpha: Option<Values>,
    #[serde(default)]
    pub beta: Option<Values>,
    #[serde(default)]
    pub lambda: Option<Values>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub spot_check: SpotCheck,
}

/// Fraction of rows re-verified against the brute-force engine, and the
/// seed choosing them.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpotCheck {
    pub fraction: f64,
    pub seed: u64,
}

impl Default for SpotCheck {
    fn default() -> Self {
        SpotCheck { fraction: 0.01, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub params: DilemmaParams,
    pub alpha: Option<f64>,
    pub beta: f64,
    pub rational: bool,
    pub binding: Option<f64>,
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QreRow {
    pub params: DilemmaParams,
    pub lambda: f64,
    pub player: usize,
    pub coop_prob: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rows {
    Grid(Vec<SweepRow>),
    Qre(Vec<QreRow>),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpotReport {
    pub checked: usize,
    pub mismatches: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub rows: Rows,
    pub csv: String,
    pub spot: SpotReport,
}

pub fn param_names(kind: DilemmaKind) -> &'static [&'static str] {
    match kind {
        DilemmaKind::Pd => &["b", "c"],
        DilemmaKind::Pgg => &["n", "rho"],
        DilemmaKind::Bertrand => &["n", "l", "h"],
        DilemmaKind::Td => &["l", "h", "bonus"],
    }
}

fn is_integer_param(name: &str) -> bool {
    matches!(name, "n" | "l" | "h")
}

fn build_params(kind: DilemmaKind, v: &[f64], grid: u32) -> DilemmaParams {
    match kind {
        DilemmaKind::Pd => DilemmaParams::Pd { b: v[0], c: v[1] },
        DilemmaKind::Pgg => DilemmaParams::Pgg { n: v[0] as usize, rho: v[1], grid },
        DilemmaKind::Bertrand => DilemmaParams::Bertrand { n: v[0] as usize, l: v[1] as i64, h: v[2] as i64 },
        DilemmaKind::Td => DilemmaParams::Td { l: v[0] as i64, h: v[1] as i64, bonus: v[2] },
    }
}

/// Every parameter combination of the sweep, first-named parameter most significant.
pub fn param_grid(spec: &SweepSpec) -> Result<Vec<DilemmaParams>, CliError> {
    let names = param_names(spec.kind);
    if let Some(k) = spec.params.keys().find(|k| !names.contains(&k.as_str())) {
        return Err(CliError::Input(format!(
            "params.{k}: unknown parameter for {}, expected {}",
            spec.kind,
            names.join(", ")
        )));
    }
    if spec.grid.is_some() && spec.kind != DilemmaKind::Pgg {
        return Err(CliError::Input(format!("grid: only meaningful for pgg, not {}", spec.kind)));
    }
    let mut axes = Vec::with_capacity(names.len());
    for name in names {
        let path = format!("params.{name}");
        let values = spec
            .params
            .get(*name)
            .ok_or_else(|| CliError::Input(format!("params: missing parameter `{name}`")))?
            .expand(&path)?;
        if is_integer_param(name) {
            if let Some(x) = values.iter().find(|x| x.fract() != 0.0 || x.abs() > 1e15) {
                return Err(CliError::Input(format!("{path}: {x} is not an integer")));
            }
            if *name == "n" && values.iter().any(|&x| x < 2.0) {
                return Err(CliError::Input(format!("{path}: need n >= 2")));
            }
        }
        axes.push(values);
    }
    let grid = spec.grid.unwrap_or(DEFAULT_PGG_GRID);
    let total: usize = axes.iter().map(Vec::len).product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; axes.len()];
    for _ in 0..total {
        let v: Vec<f64> = idx.iter().zip(&axes).map(|(&k, a)| a[k]).collect();
        let p = build_params(spec.kind, &v, grid);
        p.validate()
            .map_err(|e| CliError::Input(format!("params ({}): {e}", p.snapshot())))?;
        out.push(p);
        for d in (0..idx.len()).rev() {
            idx[d] += 1;
            if idx[d] < axes[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
    Ok(out)
}

fn require(v: &Option<Values>, name: &str, mode: SweepMode) -> Result<(), CliError> {
    if v.is_none() {
        return Err(CliError::Input(format!("{name}: required in {mode:?} mode")));
    }
    Ok(())
}

fn forbid(v: &Option<Values>, name: &str, mode: SweepMode) -> Result<(), CliError> {
    if v.is_some() {
        return Err(CliError::Input(format!("{name}: not used in {mode:?} mode")));
    }
    Ok(())
}

fn check_budget(rows: u128, budget: u64) -> Result<(), CliError> {
    if rows > budget as u128 {
        return Err(CliError::Input(format!(
            "sweep has {rows} rows, budget is {budget}; narrow the grids or raise --budget"
        )));
    }
    Ok(())
}

fn spot_indices(rows: usize, spot: &SpotCheck) -> Result<Vec<usize>, CliError> {
    if !(0.0..=1.0).contains(&spot.fraction) {
        return Err(CliError::Input(format!(
            "spot_check.fraction: must lie in [0, 1], got {}",
            spot.fraction
        )));
    }
    if rows == 0 || spot.fraction == 0.0 {
        return Ok(Vec::new());
    }
    let k = ((rows as f64 * spot.fraction).ceil() as usize).clamp(1, rows);
    let mut rng = ChaCha8Rng::seed_from_u64(spot.seed);
    let mut picked = sample(&mut rng, rows, k).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

/// Runs the sweep: evaluates every grid point, renders the CSV and
/// re-verifies a random sample of rows against the definition-level oracle.
pub fn run_sweep(spec: &SweepSpec, budget: u64) -> Result<SweepOutput, CliError> {
    let combos = param_grid(spec)?;
    let mode = spec.mode;
    match mode {
        SweepMode::Cooperation | SweepMode::TeTyped => {
            require(&spec.alpha, "alpha", mode)?;
            require(&spec.beta, "beta", mode)?;
            forbid(&spec.lambda, "lambda", mode)?;
        }
        SweepMode::Te => {
            forbid(&spec.alpha, "alpha", mode)?;
            require(&spec.beta, "beta", mode)?;
            forbid(&spec.lambda, "lambda", mode)?;
        }
        SweepMode::Qre => {
            forbid(&spec.alpha, "alpha", mode)?;
            forbid(&spec.beta, "beta", mode)?;
            require(&spec.lambda, "lambda", mode)?;
        }
    }
    let dilemmas = combos
        .iter()
        .map(make_dilemma)
        .collect::<translucent::Result<Vec<_>>>()?;
    if mode == SweepMode::Qre {
        return run_qre_sweep(spec, &dilemmas, budget);
    }

    let alphas: Vec<Option<f64>> = match &spec.alpha {
        Some(v) => unit_values(v, "alpha")?.into_iter().map(Some).collect(),
        None => vec![None],
    };
    let betas = unit_values(spec.beta.as_ref().expect("checked above"), "beta")?;
    check_budget(combos.len() as u128 * alphas.len() as u128 * betas.len() as u128, budget)?;

    let mut points = Vec::with_capacity(combos.len() * alphas.len() * betas.len());
    for c in 0..combos.len() {
        for &a in &alphas {
            for &b in &betas {
                points.push((c, a, b));
            }
        }
    }
    let rows = points
        .par_iter()
        .map(|&(c, a, b)| evaluate(mode, &dilemmas[c], a, b))
        .collect::<translucent::Result<Vec<SweepRow>>>()?;

    let mut spot = SpotReport::default();
    let picked = spot_indices(rows.len(), &spec.spot_check)?;
    let verdicts = picked
        .par_iter()
        .map(|&k| {
            let (c, a, b) = points[k];
            oracle(mode, &dilemmas[c], a, b, budget).map(|v| (k, v))
        })
        .collect::<translucent::Result<Vec<(usize, bool)>>>()?;
    for (k, v) in verdicts {
        spot.checked += 1;
        let row = &rows[k];
        if row.rational != v {
            spot.mismatches.push(format!(
                "row {}: {} {} alpha={} beta={}: sweep says {}, oracle says {v}",
                k + 1,
                row.params.kind(),
                row.params.snapshot(),
                row.alpha.map(fmt12).unwrap_or_default(),
                fmt12(row.beta),
                row.rational
            ));
        }
    }

    let mut csv = String::with_capacity(64 * (rows.len() + 1));
    csv.push_str(GRID_HEADER);
    csv.push('\n');
    for r in &rows {
        let opt = |x: Option<f64>| x.map(fmt12).unwrap_or_default();
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            r.params.kind(),
            r.params.snapshot(),
            opt(r.alpha),
            fmt12(r.beta),
            r.rational,
            opt(r.binding),
            opt(r.threshold)
        );
    }
    Ok(SweepOutput {
        rows: Rows::Grid(rows),
        csv,
        spot,
    })
}

fn evaluate(mode: SweepMode, d: &SocialDilemma, alpha: Option<f64>, beta: f64) -> translucent::Result<SweepRow> {
    let n = d.num_players();
    let (rational, binding, threshold) = match mode {
        SweepMode::Cooperation => {
            let v = cooperation_condition(&d.params, alpha.unwrap_or(0.0), beta)?;
            (v.rational, Some(v.binding), Some(v.threshold))
        }
        SweepMode::Te => (te_condition(&d.params, &vec![beta; n])?, None, None),
        SweepMode::TeTyped => {
            let a = alpha.unwrap_or(0.0);
            (te_condition_typed(&d.params, &vec![a; n], &vec![beta; n])?.corrected, None, None)
        }
        SweepMode::Qre => unreachable!("qre rows are produced by run_qre_sweep"),
    };
    Ok(SweepRow {
        params: d.params.clone(),
        alpha,
        beta,
        rational,
        binding,
        threshold,
    })
}

fn oracle(mode: SweepMode, d: &SocialDilemma, alpha: Option<f64>, beta: f64, budget: u64) -> translucent::Result<bool> {
    let n = d.num_players();
    let a = alpha.unwrap_or(0.0);
    match mode {
        SweepMode::Cooperation => {
            Ok(is_cooperation_rational(d, 0, TranslucentType::new(a, beta)?, budget)?.verdict)
        }
        SweepMode::Te => {
            let sigma = MixedProfile::two_point(d, &vec![beta; n])?;
            Ok(is_coherent(&d.game, &sigma, budget)?.coherent)
        }
        SweepMode::TeTyped => typed_structure_holds(d, &vec![a; n], &vec![beta; n], DEFAULT_STRUCTURE_BUDGET),
        SweepMode::Qre => unreachable!("qre rows are checked by run_qre_sweep"),
    }
}

fn run_qre_sweep(spec: &SweepSpec, dilemmas: &[SocialDilemma], budget: u64) -> Result<SweepOutput, CliError> {
    let lambdas = spec.lambda.as_ref().expect("checked above").expand("lambda")?;
    if let Some(l) = lambdas.iter().find(|&&l| l < 0.0) {
        return Err(CliError::Input(format!("lambda: must be nonnegative, got {l}")));
    }
    let players: u128 = dilemmas.iter().map(|d| d.num_players() as u128).sum();
    check_budget(players * lambdas.len() as u128, budget)?;
    let opts = QreOptions {
        budget,
        ..QreOptions::default()
    };
    let mut points = Vec::with_capacity(dilemmas.len() * lambdas.len());
    for c in 0..dilemmas.len() {
        for &l in &lambdas {
            points.push((c, l));
        }
    }
    let results = points
        .par_iter()
        .map(|&(c, l)| logit_qre_with(&dilemmas[c].game, l, &opts))
        .collect::<translucent::Result<Vec<QreResult>>>()?;

    let mut spot = SpotReport::default();
    for k in spot_indices(points.len(), &spec.spot_check)? {
        let (c, l) = points[k];
        let probs = results[k].profile.probs();
        let next = logit_response(&dilemmas[c].game, probs, l);
        let gap = next
            .iter()
            .flatten()
            .zip(probs.iter().flatten())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        spot.checked += 1;
        if gap > opts.tol {
            spot.mismatches.push(format!(
                "point {}: {} lambda={}: logit response moves the profile by {gap:e}",
                k + 1,
                dilemmas[c].params.snapshot(),
                fmt12(l)
            ));
        }
    }

    let mut rows = Vec::new();
    let mut csv = String::new();
    csv.push_str(QRE_HEADER);
    csv.push('\n');
    for (&(c, l), r) in points.iter().zip(&results) {
        let d = &dilemmas[c];
        for i in 0..d.num_players() {
            let row = QreRow {
                params: d.params.clone(),
                lambda: l,
                player: i,
                coop_prob: r.profile.prob(i, d.cooperate(i)),
                residual: r.residual,
            };
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{}",
                d.kind,
                d.params.snapshot(),
                fmt12(l),
                i,
                fmt12(row.coop_prob),
                fmt12(row.residual)
            );
            rows.push(row);
        }
    }
    Ok(SweepOutput {
        rows: Rows::Qre(rows),
        csv,
        spot,
    })
}
