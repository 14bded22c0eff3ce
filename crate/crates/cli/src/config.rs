//! Scenario configuration: a JSON document with `scenario`, `physics`,
//! `grids`, `output` and `tolerance` keys. Unknown keys are rejected.
//!
//! Defaults when a block is missing:
//!
//! | key | default |
//! |-----|---------|
//! | `physics.T` | 0.1 |
//! | `physics.mu` | 0 |
//! | `physics.lambda` | 0.05 |
//! | `physics.g` | 1 |
//! | `physics.statistics` | `"fd"` |
//! | `physics.delta_T`, `physics.delta_mu` | 0 |
//! | `physics.n_eq`, `physics.delta_n` | 0.5, 0.1 |
//! | `grids.t` | 0 to 40, 401 points |
//! | `grids.mu` | -4 to 4, 161 points |
//! | `output.path` | `out` |
//! | `output.precision` | 12 |
//! | `tolerance` | 0.05 |
//!
//! A grid is either an explicit array or `{"start": a, "stop": b, "count": n}`.

use std::fmt;
use std::path::PathBuf;

use dephase_core::{QuadratureSpec, SommerfeldForm, Statistics};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{invalid, CliError, Result};

pub const LINEAR_RESPONSE_THRESHOLD: f64 = 0.05;
pub const MIN_PRECISION: usize = 6;
pub const MAX_PRECISION: usize = 17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioId {
    Ons1,
    Onsevo1,
    Onsevo2,
    Entroevo,
    Entroprod,
    Mutint,
    Onsteste1,
    Onsteste2,
    Custom,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 9] = [
        ScenarioId::Ons1,
        ScenarioId::Onsevo1,
        ScenarioId::Onsevo2,
        ScenarioId::Entroevo,
        ScenarioId::Entroprod,
        ScenarioId::Mutint,
        ScenarioId::Onsteste1,
        ScenarioId::Onsteste2,
        ScenarioId::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioId::Ons1 => "ons1",
            ScenarioId::Onsevo1 => "onsevo1",
            ScenarioId::Onsevo2 => "onsevo2",
            ScenarioId::Entroevo => "entroevo",
            ScenarioId::Entroprod => "entroprod",
            ScenarioId::Mutint => "mutint",
            ScenarioId::Onsteste1 => "onsteste1",
            ScenarioId::Onsteste2 => "onsteste2",
            ScenarioId::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Option<ScenarioId> {
        ScenarioId::ALL.into_iter().find(|id| id.as_str() == s)
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl Grid {
    pub fn linspace(start: f64, stop: f64, count: usize) -> Grid {
        Grid::Range { start, stop, count }
    }

    pub fn points(&self) -> Vec<f64> {
        match self {
            Grid::Values(v) => v.clone(),
            Grid::Range { start, stop, count } => match count {
                0 => Vec::new(),
                1 => vec![*start],
                n => {
                    let step = (stop - start) / (*n - 1) as f64;
                    (0..*n)
                        .map(|i| if i == n - 1 { *stop } else { start + step * i as f64 })
                        .collect()
                }
            },
        }
    }

    fn validate(&self, field: &str) -> Result<()> {
        if let Grid::Range { start, stop, count } = self {
            if *count == 1 && start != stop {
                return Err(invalid(field, "a one-point range needs start == stop"));
            }
        }
        check_increasing(field, &self.points())
    }
}

fn check_increasing(field: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(invalid(field, "grid is empty"));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(invalid(field, format!("non-finite value {v}")));
    }
    if let Some(i) = values.windows(2).position(|w| w[1] <= w[0]) {
        return Err(invalid(
            field,
            format!(
                "values must be strictly increasing ({} then {})",
                values[i],
                values[i + 1]
            ),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Physics {
    #[serde(rename = "T")]
    pub temperature: f64,
    /// Temperatures of separate panels; falls back to `T`.
    #[serde(rename = "T_series")]
    pub temperature_series: Option<Vec<f64>>,
    pub mu: f64,
    /// Chemical potentials of separate panels; falls back to `mu`.
    pub mu_series: Option<Vec<f64>>,
    #[serde(rename = "delta_T")]
    pub delta_t: f64,
    pub delta_mu: f64,
    pub lambda: f64,
    /// Dephasing rates of separate panels; falls back to `lambda`.
    pub lambda_series: Option<Vec<f64>>,
    pub g: f64,
    pub statistics: Statistics,
    pub n_eq: f64,
    pub delta_n: f64,
    pub sommerfeld_form: SommerfeldForm,
    pub sommerfeld_terms: usize,
}

impl Default for Physics {
    fn default() -> Self {
        Physics {
            temperature: 0.1,
            temperature_series: None,
            mu: 0.0,
            mu_series: None,
            delta_t: 0.0,
            delta_mu: 0.0,
            lambda: 0.05,
            lambda_series: None,
            g: 1.0,
            statistics: Statistics::FermiDirac,
            n_eq: 0.5,
            delta_n: 0.1,
            sommerfeld_form: SommerfeldForm::default(),
            sommerfeld_terms: dephase_core::analytic::DEFAULT_SOMMERFELD_TERMS,
        }
    }
}

impl Physics {
    pub fn temperatures(&self) -> Vec<f64> {
        self.temperature_series
            .clone()
            .unwrap_or_else(|| vec![self.temperature])
    }

    pub fn mus(&self) -> Vec<f64> {
        self.mu_series.clone().unwrap_or_else(|| vec![self.mu])
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.lambda_series.clone().unwrap_or_else(|| vec![self.lambda])
    }

    fn validate(&self) -> Result<()> {
        positive("physics.T", self.temperature)?;
        finite("physics.mu", self.mu)?;
        non_negative("physics.lambda", self.lambda)?;
        finite("physics.g", self.g)?;
        finite("physics.delta_T", self.delta_t)?;
        finite("physics.delta_mu", self.delta_mu)?;
        if self.delta_t.abs() >= 2.0 * self.temperature {
            return Err(invalid("physics.delta_T", "|delta_T| must be below 2 T"));
        }
        if let Some(ts) = &self.temperature_series {
            non_empty("physics.T_series", ts)?;
            ts.iter().try_for_each(|t| positive("physics.T_series", *t))?;
        }
        if let Some(ms) = &self.mu_series {
            non_empty("physics.mu_series", ms)?;
            ms.iter().try_for_each(|m| finite("physics.mu_series", *m))?;
        }
        if let Some(ls) = &self.lambda_series {
            non_empty("physics.lambda_series", ls)?;
            ls.iter().try_for_each(|l| non_negative("physics.lambda_series", *l))?;
        }
        if !(self.n_eq > 0.0 && self.n_eq < 1.0) {
            return Err(invalid("physics.n_eq", format!("{} is outside (0, 1)", self.n_eq)));
        }
        let (hi, lo) = (self.n_eq + 0.5 * self.delta_n, self.n_eq - 0.5 * self.delta_n);
        if !((0.0..=1.0).contains(&hi) && (0.0..=1.0).contains(&lo)) {
            return Err(invalid("physics.delta_n", "n_eq +- delta_n/2 must lie in [0, 1]"));
        }
        if self.sommerfeld_terms == 0 {
            return Err(invalid("physics.sommerfeld_terms", "must be positive"));
        }
        Ok(())
    }
}

fn non_empty(field: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        Err(invalid(field, "list is empty"))
    } else {
        Ok(())
    }
}

fn finite(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("{v} is not finite")))
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("{v} must be positive")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("{v} must be non-negative")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    pub t: Option<Grid>,
    pub mu: Option<Grid>,
    pub quadrature: QuadratureSpec,
}

impl Grids {
    pub fn t_points(&self) -> Vec<f64> {
        self.t.clone().unwrap_or(Grid::linspace(0.0, 40.0, 401)).points()
    }

    pub fn mu_points(&self) -> Vec<f64> {
        self.mu.clone().unwrap_or(Grid::linspace(-4.0, 4.0, 161)).points()
    }

    fn validate(&self) -> Result<()> {
        if let Some(t) = &self.t {
            t.validate("grids.t")?;
            if t.points()[0] < 0.0 {
                return Err(invalid("grids.t", "times must be non-negative"));
            }
        }
        if let Some(mu) = &self.mu {
            mu.validate("grids.mu")?;
        }
        let q = &self.quadrature;
        if !matches!(q.nodes_per_panel, 15 | 21 | 31) {
            return Err(invalid("grids.quadrature.nodes_per_panel", "must be 15, 21 or 31"));
        }
        positive("grids.quadrature.abs_tol", q.abs_tol)?;
        non_negative("grids.quadrature.rel_tol", q.rel_tol)?;
        if q.max_panels == 0 || q.base_panels == 0 {
            return Err(invalid("grids.quadrature", "panel counts must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub path: PathBuf,
    pub precision: usize,
}

impl Default for Output {
    fn default() -> Self {
        Output {
            path: PathBuf::from("out"),
            precision: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioId,
    #[serde(default)]
    pub physics: Physics,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub output: Output,
    /// Relative tolerance of comparison reports.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_tolerance() -> f64 {
    0.05
}

impl ScenarioConfig {
    pub fn new(scenario: ScenarioId) -> Self {
        ScenarioConfig {
            scenario,
            physics: Physics::default(),
            grids: Grids::default(),
            output: Output::default(),
            tolerance: default_tolerance(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.physics.validate()?;
        self.grids.validate()?;
        if !(MIN_PRECISION..=MAX_PRECISION).contains(&self.output.precision) {
            return Err(invalid(
                "output.precision",
                format!("{} is outside {MIN_PRECISION}..={MAX_PRECISION}", self.output.precision),
            ));
        }
        positive("tolerance", self.tolerance)?;
        Ok(())
    }

    /// Linear-response warnings; the run proceeds regardless.
    pub fn warnings(&self) -> Vec<String> {
        let p = &self.physics;
        let mut out = Vec::new();
        for t in p.temperatures() {
            let rel_t = (p.delta_t / t).abs();
            if rel_t > LINEAR_RESPONSE_THRESHOLD {
                out.push(format!(
                    "delta_T/T = {rel_t:.3} at T = {t} exceeds {LINEAR_RESPONSE_THRESHOLD}; linear response may not hold"
                ));
            }
            let rel_mu = (p.delta_mu / t).abs();
            if rel_mu > LINEAR_RESPONSE_THRESHOLD {
                out.push(format!(
                    "delta_mu/T = {rel_mu:.3} at T = {t} exceeds {LINEAR_RESPONSE_THRESHOLD}; linear response may not hold"
                ));
            }
        }
        out
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = serde_json::from_str(text)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Figure presets, matching the parameters each figure was drawn at.
pub fn preset(id: ScenarioId) -> Value {
    use serde_json::json;
    match id {
        ScenarioId::Ons1 => json!({
            "scenario": "ons1",
            "physics": {"T_series": [0.1, 0.5]},
            "grids": {"mu": {"start": -4.0, "stop": 4.0, "count": 161}},
        }),
        ScenarioId::Onsevo1 => json!({
            "scenario": "onsevo1",
            "physics": {"T": 0.005, "lambda": 0.05, "mu_series": [0.0, 1.0, 1.9]},
            "grids": {"t": {"start": 0.0, "stop": 40.0, "count": 401}},
        }),
        ScenarioId::Onsevo2 => json!({
            "scenario": "onsevo2",
            "physics": {"T": 0.005, "mu": 0.0, "lambda_series": [0.0, 0.05]},
            "grids": {"t": {"start": 0.0, "stop": 40.0, "count": 401}},
        }),
        ScenarioId::Entroevo => json!({
            "scenario": "entroevo",
            "physics": {"n_eq": 0.1, "delta_n": 0.01, "g": 1.0, "lambda_series": [0.0, 0.2]},
            "grids": {"t": {"start": 0.0, "stop": 20.0, "count": 401}},
        }),
        ScenarioId::Entroprod => json!({
            "scenario": "entroprod",
            "physics": {"n_eq": 0.5, "delta_n": 0.1, "g": 1.0, "lambda_series": [0.0, 0.2]},
            "grids": {"t": {"start": 0.0, "stop": 20.0, "count": 401}},
        }),
        ScenarioId::Mutint => json!({
            "scenario": "mutint",
            "physics": {"n_eq": 0.5, "delta_n": 0.1, "g": 1.0, "lambda_series": [0.0, 0.2]},
            "grids": {"t": {"start": 0.0, "stop": 20.0, "count": 401}},
        }),
        ScenarioId::Onsteste1 => json!({
            "scenario": "onsteste1",
            "physics": {"T_series": [0.1, 0.25], "lambda": 0.35},
            "grids": {"mu": {"start": -1.9, "stop": 1.9, "count": 77}},
        }),
        ScenarioId::Onsteste2 => json!({
            "scenario": "onsteste2",
            "physics": {"T": 0.1, "lambda": 0.35, "g": 1.0, "mu_series": [-1.5, 0.0, 1.5]},
            "grids": {"t": {"start": 0.0, "stop": 10.0, "count": 101}},
        }),
        ScenarioId::Custom => json!({"scenario": "custom"}),
    }
}

/// Applies `key.path=value` overrides; values are read as JSON, falling
/// back to a plain string.
pub fn apply_overrides(mut doc: Value, overrides: &[String]) -> Result<Value> {
    for item in overrides {
        let (path, raw) = item.split_once('=').ok_or_else(|| CliError::Override(item.clone()))?;
        let keys: Vec<&str> = path.trim().split('.').collect();
        if keys.iter().any(|k| k.is_empty()) {
            return Err(CliError::Override(item.clone()));
        }
        let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
        let mut node = &mut doc;
        for key in &keys[..keys.len() - 1] {
            let map = node.as_object_mut().ok_or_else(|| CliError::Override(item.clone()))?;
            node = map
                .entry(key.to_string())
                .or_insert_with(|| Value::Object(Default::default()));
        }
        let map = node.as_object_mut().ok_or_else(|| CliError::Override(item.clone()))?;
        let last = keys[keys.len() - 1];
        // a scalar replaces the matching panel series so it takes effect
        if let Some(series) = match last {
            "T" => Some("T_series"),
            "mu" => Some("mu_series"),
            "lambda" => Some("lambda_series"),
            _ => None,
        } {
            map.remove(series);
        }
        map.insert(last.to_string(), value);
    }
    Ok(doc)
}

pub fn config_from_value(doc: Value) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = serde_json::from_value(doc)?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_physics_gets_defaults() {
        let cfg = parse_config(r#"{"scenario": "custom", "physics": {}}"#).unwrap();
        assert_eq!(cfg.physics.temperature, 0.1);
        assert_eq!(cfg.physics.mu, 0.0);
        assert_eq!(cfg.physics.lambda, 0.05);
        assert_eq!(cfg.physics.g, 1.0);
        assert_eq!(cfg.physics.statistics, Statistics::FermiDirac);
        assert_eq!(cfg.output.precision, 12);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = parse_config(r#"{"scenario": "custom", "physics": {"temp": 1}}"#).unwrap_err();
        assert!(err.to_string().contains("temp"), "{err}");
        assert!(parse_config(r#"{"scenario": "custom", "extra": 1}"#).is_err());
        assert!(parse_config(r#"{"scenario": "nope"}"#).is_err());
    }

    #[test]
    fn large_offset_warns_but_parses() {
        let cfg = parse_config(r#"{"scenario": "custom", "physics": {"T": 0.2, "delta_T": 0.1}}"#).unwrap();
        let w = cfg.warnings();
        assert_eq!(w.len(), 1);
        assert!(w[0].contains("delta_T/T"));
        assert!(ScenarioConfig::new(ScenarioId::Custom).warnings().is_empty());
    }

    #[test]
    fn non_monotone_grid_names_field() {
        let err = parse_config(r#"{"scenario": "custom", "grids": {"t": [0, 2, 1]}}"#).unwrap_err();
        assert!(err.to_string().starts_with("grids.t:"), "{err}");
        let err = parse_config(r#"{"scenario": "custom", "grids": {"mu": {"start": 1, "stop": 0, "count": 3}}}"#)
            .unwrap_err();
        assert!(err.to_string().starts_with("grids.mu:"), "{err}");
    }

    #[test]
    fn range_violations_name_field() {
        for (doc, field) in [
            (r#"{"scenario": "custom", "physics": {"T": -1}}"#, "physics.T"),
            (
                r#"{"scenario": "custom", "physics": {"lambda": -0.1}}"#,
                "physics.lambda",
            ),
            (
                r#"{"scenario": "custom", "physics": {"n_eq": 0.1, "delta_n": 0.5}}"#,
                "physics.delta_n",
            ),
            (
                r#"{"scenario": "custom", "output": {"precision": 4}}"#,
                "output.precision",
            ),
        ] {
            let err = parse_config(doc).unwrap_err();
            assert!(err.to_string().starts_with(field), "{err}");
        }
    }

    #[test]
    fn grids_expand() {
        assert_eq!(Grid::linspace(0.0, 1.0, 5).points(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g: Grid = serde_json::from_str("[1, 2, 3]").unwrap();
        assert_eq!(g.points(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn presets_are_valid() {
        for id in ScenarioId::ALL {
            let cfg = config_from_value(preset(id)).unwrap();
            assert_eq!(cfg.scenario, id);
        }
    }

    #[test]
    fn overrides_layer_on_presets() {
        let doc = apply_overrides(
            preset(ScenarioId::Ons1),
            &[
                "physics.T=0.3".into(),
                "physics.statistics=boltzmann".into(),
                "output.precision=8".into(),
            ],
        )
        .unwrap();
        let cfg = config_from_value(doc).unwrap();
        assert_eq!(cfg.physics.temperatures(), vec![0.3]);
        assert_eq!(cfg.physics.statistics, Statistics::Boltzmann);
        assert_eq!(cfg.output.precision, 8);
        assert!(apply_overrides(preset(ScenarioId::Ons1), &["physics".into()]).is_err());
        let bad = apply_overrides(preset(ScenarioId::Ons1), &["physics.bogus=1".into()]).unwrap();
        assert!(config_from_value(bad).is_err());
    }
}
