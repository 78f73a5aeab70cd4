//! JSON configuration documents, one per invocation.

use serde::de::DeserializeOwned;
use serde::Deserialize;
use translucent::games::{DilemmaParams, GameDescription};

use crate::CliError;

/// Parses `text` as `T`, reporting the JSON path and position of the first error.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Input(format!("{path}: {}", e.into_inner()))
    })?;
    de.end().map_err(|e| CliError::Input(format!(".: {e}")))?;
    Ok(value)
}

/// Decodes and validates the game block found at `path`.
pub fn game_params(desc: &GameDescription, path: &str) -> Result<DilemmaParams, CliError> {
    let params = desc.params().map_err(|e| CliError::Input(format!("{path}.{}", strip(e))))?;
    params.validate().map_err(|e| CliError::Input(format!("{path}: {}", strip(e))))?;
    Ok(params)
}

fn strip(e: translucent::Error) -> String {
    match e {
        translucent::Error::InvalidParams(msg) => msg,
        other => other.to_string(),
    }
}

/// A scalar axis: one value, an explicit list, or `start..=stop` by `step`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Values {
    Single(f64),
    List(Vec<f64>),
    Range(Range),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

/// Rounds to 12 significant digits, so `0.1 * 3` lands on `0.3`.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Formats a float with at most 12 significant digits, switching to an
/// exponent outside `[1e-6, 1e15)`.
pub fn fmt12(x: f64) -> String {
    let y = round12(x);
    if y != 0.0 && (y.abs() < 1e-6 || y.abs() >= 1e15) {
        format!("{y:e}")
    } else {
        format!("{y}")
    }
}

impl Values {
    pub fn expand(&self, path: &str) -> Result<Vec<f64>, CliError> {
        let out = match self {
            Values::Single(x) => vec![*x],
            Values::List(v) => {
                if v.is_empty() {
                    return Err(CliError::Input(format!("{path}: empty list")));
                }
                v.clone()
            }
            Values::Range(r) => {
                if !(r.step > 0.0 && r.step.is_finite()) {
                    return Err(CliError::Input(format!("{path}.step: must be positive, got {}", r.step)));
                }
                if !(r.start.is_finite() && r.stop.is_finite() && r.stop >= r.start) {
                    return Err(CliError::Input(format!(
                        "{path}: need finite start <= stop, got start={}, stop={}",
                        r.start, r.stop
                    )));
                }
                let steps = ((r.stop - r.start) / r.step + 1e-9).floor() as u64;
                if steps >= 10_000_000 {
                    return Err(CliError::Input(format!("{path}: {} points is too many", steps + 1)));
                }
                (0..=steps).map(|k| round12(r.start + k as f64 * r.step)).collect()
            }
        };
        if let Some(x) = out.iter().find(|x| !x.is_finite()) {
            return Err(CliError::Input(format!("{path}: non-finite value {x}")));
        }
        Ok(out)
    }
}

/// Expands a probability axis and checks every value lies in `[0, 1]`.
pub fn unit_values(v: &Values, path: &str) -> Result<Vec<f64>, CliError> {
    let out = v.expand(path)?;
    if let Some(x) = out.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(CliError::Input(format!("{path}: {x} outside [0, 1]")));
    }
    Ok(out)
}
