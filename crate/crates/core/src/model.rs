//! Scenario, prior and response types plus the conjugate Normal posterior
//! arithmetic everything else is built on.
//!
//! The data model is `Y | θ ~ N(θ, s²)` with a known per-observation SD `s`
//! ([`DataModelConfig::sigma_data`]) and a conjugate prior `θ ~ N(μ₀, σ₀²)`.
//! A scenario summarises `n` hypothetical observations by their mean `ȳ`.
//! Priors are carried as an SD so that a point mass is the finite value
//! `σ₀ = 0`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// A hypothetical outcome dataset shown to an expert.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    /// Number of observations; `0` is the "no data" scenario.
    pub sample_size: u32,
    /// Observed mean change (in the set's units). Absent iff `sample_size == 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_change: Option<f64>,
    pub label: String,
}

impl Scenario {
    pub fn no_data(id: impl Into<String>, label: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            sample_size: 0,
            mean_change: None,
            label: label.into(),
        }
    }

    pub fn with_data(
        id: impl Into<String>,
        sample_size: u32,
        mean_change: f64,
        label: impl Into<String>,
    ) -> Self {
        Self {
            id: id.into(),
            sample_size,
            mean_change: Some(mean_change),
            label: label.into(),
        }
    }

    pub fn is_no_data(&self) -> bool {
        self.sample_size == 0
    }

    /// `(n, ȳ)` for data scenarios.
    pub fn data(&self) -> Option<(u32, f64)> {
        match (self.sample_size, self.mean_change) {
            (0, _) | (_, None) => None,
            (n, Some(y)) => Some((n, y)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::InvalidScenarioSet("scenario id must be nonempty".into()));
        }
        match (self.sample_size, self.mean_change) {
            (0, None) => Ok(()),
            (0, Some(_)) => Err(Error::InvalidScenarioSet(format!(
                "scenario `{}` has no data but a mean_change",
                self.id
            ))),
            (_, None) => Err(Error::InvalidScenarioSet(format!(
                "scenario `{}` has sample_size > 0 but no mean_change",
                self.id
            ))),
            (_, Some(y)) if !y.is_finite() => Err(Error::InvalidScenarioSet(format!(
                "scenario `{}` has a non-finite mean_change",
                self.id
            ))),
            _ => Ok(()),
        }
    }
}

/// An ordered, validated collection of scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScenarioSet")]
pub struct ScenarioSet {
    units: String,
    scenarios: Vec<Scenario>,
}

#[derive(Deserialize)]
struct RawScenarioSet {
    #[serde(default = "default_units")]
    units: String,
    scenarios: Vec<Scenario>,
}

fn default_units() -> String {
    "m".to_string()
}

impl TryFrom<RawScenarioSet> for ScenarioSet {
    type Error = Error;

    fn try_from(raw: RawScenarioSet) -> Result<Self> {
        ScenarioSet::with_units(raw.scenarios, raw.units)
    }
}

const CASE_STUDY_SCENARIOS: &str = include_str!("../data/case_study_scenarios.json");
const CASE_STUDY_CONFIG: &str = include_str!("../data/case_study_config.json");

impl ScenarioSet {
    pub fn new(scenarios: Vec<Scenario>) -> Result<Self> {
        Self::with_units(scenarios, default_units())
    }

    pub fn with_units(scenarios: Vec<Scenario>, units: impl Into<String>) -> Result<Self> {
        if scenarios.is_empty() {
            return Err(Error::InvalidScenarioSet("scenario list is empty".into()));
        }
        let mut seen = HashSet::new();
        let mut no_data = 0usize;
        for scenario in &scenarios {
            scenario.validate()?;
            if !seen.insert(scenario.id.as_str()) {
                return Err(Error::InvalidScenarioSet(format!(
                    "duplicate scenario id `{}`",
                    scenario.id
                )));
            }
            if scenario.is_no_data() {
                no_data += 1;
            }
        }
        if no_data > 1 {
            return Err(Error::InvalidScenarioSet(
                "at most one no-data scenario is allowed".into(),
            ));
        }
        Ok(Self {
            units: units.into(),
            scenarios,
        })
    }

    /// The sixteen-scenario walking-distance design: a no-data scenario
    /// followed by `n ∈ {10, 30, 100}` crossed with `ȳ ∈ {0, +10, +30, −10, −30}` m.
    pub fn case_study_default() -> Self {
        serde_json::from_str(CASE_STUDY_SCENARIOS).expect("bundled scenario file is valid")
    }

    pub fn units(&self) -> &str {
        &self.units
    }

    pub fn scenarios(&self) -> &[Scenario] {
        &self.scenarios
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Scenario> {
        self.scenarios.iter().find(|s| s.id == id)
    }

    pub fn no_data_scenario(&self) -> Option<&Scenario> {
        self.scenarios.iter().find(|s| s.is_no_data())
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Scenario> {
        self.scenarios.iter()
    }

    /// Number of distinct `(n, ȳ)` designs, with the no-data scenario counted once.
    pub fn distinct_designs(&self) -> usize {
        let mut seen = HashSet::new();
        for s in &self.scenarios {
            seen.insert((s.sample_size, s.mean_change.map(f64::to_bits)));
        }
        seen.len()
    }
}

impl<'a> IntoIterator for &'a ScenarioSet {
    type Item = &'a Scenario;
    type IntoIter = std::slice::Iter<'a, Scenario>;

    fn into_iter(self) -> Self::IntoIter {
        self.scenarios.iter()
    }
}

/// Sampling model configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig")]
pub struct DataModelConfig {
    /// Per-observation sampling SD `s`.
    pub sigma_data: f64,
}

#[derive(Deserialize)]
struct RawConfig {
    sigma_data: f64,
}

impl TryFrom<RawConfig> for DataModelConfig {
    type Error = Error;

    fn try_from(raw: RawConfig) -> Result<Self> {
        DataModelConfig::new(raw.sigma_data)
    }
}

impl DataModelConfig {
    pub fn new(sigma_data: f64) -> Result<Self> {
        if !(sigma_data.is_finite() && sigma_data > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "sigma_data must be positive and finite, got {sigma_data}"
            )));
        }
        Ok(Self { sigma_data })
    }

    /// The bundled case-study configuration (`s = 50 m`, an assumption).
    pub fn case_study_default() -> Self {
        serde_json::from_str(CASE_STUDY_CONFIG).expect("bundled config file is valid")
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.sigma_data).map(|_| ())
    }
}

/// Normal prior `N(mu0, sigma0²)`; `sigma0 == 0` is a point mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalPrior {
    pub mu0: f64,
    pub sigma0: f64,
}

impl NormalPrior {
    pub fn new(mu0: f64, sigma0: f64) -> Result<Self> {
        let prior = Self { mu0, sigma0 };
        prior.validate()?;
        Ok(prior)
    }

    pub fn point_mass(at: f64) -> Self {
        Self {
            mu0: at,
            sigma0: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite(self.mu0, "mu0")?;
        ensure_finite(self.sigma0, "sigma0")?;
        if self.sigma0 < 0.0 {
            return Err(Error::InvalidPrior(format!(
                "sigma0 must be nonnegative, got {}",
                self.sigma0
            )));
        }
        Ok(())
    }

    /// Precision `τ₀ = 1/σ₀²`; infinite for a point mass.
    pub fn precision(&self) -> f64 {
        1.0 / (self.sigma0 * self.sigma0)
    }

    pub fn is_point_mass(&self) -> bool {
        self.sigma0 == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Round {
    Initial,
    Revised,
}

impl Round {
    pub fn as_str(self) -> &'static str {
        match self {
            Round::Initial => "initial",
            Round::Revised => "revised",
        }
    }
}

impl fmt::Display for Round {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Round {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "initial" => Ok(Round::Initial),
            "revised" => Ok(Round::Revised),
            other => Err(Error::InvalidInput(format!(
                "unknown round `{other}` (expected `initial` or `revised`)"
            ))),
        }
    }
}

/// An expert's point estimate for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElicitedResponse {
    pub scenario_id: String,
    pub theta_tilde: f64,
}

impl ElicitedResponse {
    pub fn new(scenario_id: impl Into<String>, theta_tilde: f64) -> Self {
        Self {
            scenario_id: scenario_id.into(),
            theta_tilde,
        }
    }
}

/// One expert's responses for one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseSet {
    pub expert_id: String,
    pub round: Round,
    pub responses: Vec<ElicitedResponse>,
}

impl ResponseSet {
    pub fn new(expert_id: impl Into<String>, round: Round, responses: Vec<ElicitedResponse>) -> Self {
        Self {
            expert_id: expert_id.into(),
            round,
            responses,
        }
    }

    /// Builds a response set from values listed in scenario order.
    pub fn from_values(
        expert_id: impl Into<String>,
        round: Round,
        scenarios: &ScenarioSet,
        values: &[f64],
    ) -> Self {
        let responses = scenarios
            .iter()
            .zip(values)
            .map(|(s, &v)| ElicitedResponse::new(s.id.clone(), v))
            .collect();
        Self::new(expert_id, round, responses)
    }

    pub fn get(&self, scenario_id: &str) -> Option<f64> {
        self.responses
            .iter()
            .find(|r| r.scenario_id == scenario_id)
            .map(|r| r.theta_tilde)
    }

    /// Scenario id to value, ignoring completeness.
    pub fn as_map(&self) -> BTreeMap<&str, f64> {
        self.responses
            .iter()
            .map(|r| (r.scenario_id.as_str(), r.theta_tilde))
            .collect()
    }

    /// Checks that every scenario has exactly one finite response and no
    /// response names an unknown scenario.
    pub fn validate_against(&self, scenarios: &ScenarioSet) -> Result<()> {
        let mut seen = HashSet::new();
        for r in &self.responses {
            if scenarios.get(&r.scenario_id).is_none() {
                return Err(Error::UnknownScenario(r.scenario_id.clone()));
            }
            if !seen.insert(r.scenario_id.as_str()) {
                return Err(Error::DuplicateResponse(r.scenario_id.clone()));
            }
            ensure_finite(r.theta_tilde, "theta_tilde")?;
        }
        let missing: Vec<String> = scenarios
            .iter()
            .filter(|s| !seen.contains(s.id.as_str()))
            .map(|s| s.id.clone())
            .collect();
        if !missing.is_empty() {
            return Err(Error::IncompleteResponses { missing });
        }
        Ok(())
    }

    /// Responses reordered to follow `scenarios`; requires a complete set.
    pub fn values_in_order(&self, scenarios: &ScenarioSet) -> Result<Vec<f64>> {
        self.validate_against(scenarios)?;
        let map = self.as_map();
        Ok(scenarios.iter().map(|s| map[s.id.as_str()]).collect())
    }
}

fn check_inputs(prior: &NormalPrior, scenario: &Scenario, config: &DataModelConfig) -> Result<()> {
    prior.validate()?;
    config.validate()?;
    if let Some(y) = scenario.mean_change {
        ensure_finite(y, "mean_change")?;
    }
    Ok(())
}

/// Posterior mean of `θ` given the scenario data. Equals `mu0` for the
/// no-data scenario and for a point-mass prior.
pub fn posterior_mean(prior: &NormalPrior, scenario: &Scenario, config: &DataModelConfig) -> Result<f64> {
    check_inputs(prior, scenario, config)?;
    Ok(match scenario.data() {
        None => prior.mu0,
        Some((n, ybar)) => conjugate_mean(prior.mu0, prior.sigma0, n as f64, ybar, config.sigma_data),
    })
}

/// Posterior SD of `θ`; zero for a point-mass prior.
pub fn posterior_sd(prior: &NormalPrior, scenario: &Scenario, config: &DataModelConfig) -> Result<f64> {
    check_inputs(prior, scenario, config)?;
    let n = scenario.data().map_or(0.0, |(n, _)| n as f64);
    Ok(conjugate_variance(prior.sigma0, n, config.sigma_data).sqrt())
}

/// Weight on the prior mean, `τ₀ / (τ₀ + n/s²)`, written as
/// `s² / (s² + n σ₀²)` so that `σ₀ = 0` gives exactly 1.
#[inline]
pub(crate) fn prior_weight(sigma0: f64, n: f64, sigma_data: f64) -> f64 {
    let s2 = sigma_data * sigma_data;
    s2 / (s2 + n * sigma0 * sigma0)
}

#[inline]
pub(crate) fn conjugate_mean(mu0: f64, sigma0: f64, n: f64, ybar: f64, sigma_data: f64) -> f64 {
    if sigma0 == 0.0 {
        return mu0;
    }
    let s2 = sigma_data * sigma_data;
    let data_precision_scaled = n * sigma0 * sigma0;
    (s2 * mu0 + data_precision_scaled * ybar) / (s2 + data_precision_scaled)
}

#[inline]
fn conjugate_variance(sigma0: f64, n: f64, sigma_data: f64) -> f64 {
    let s2 = sigma_data * sigma_data;
    let v0 = sigma0 * sigma0;
    if v0 == 0.0 {
        return 0.0;
    }
    v0 * s2 / (s2 + n * v0)
}

/// Squared-difference discrepancy.
pub fn discrepancy(elicited: f64, fitted: f64) -> Result<f64> {
    ensure_finite(elicited, "elicited")?;
    ensure_finite(fitted, "fitted")?;
    let d = elicited - fitted;
    Ok(d * d)
}

/// Root mean square discrepancy between the responses and the posterior
/// means implied by `prior`, over every scenario in the set.
pub fn rmsd(
    prior: &NormalPrior,
    responses: &ResponseSet,
    scenarios: &ScenarioSet,
    config: &DataModelConfig,
) -> Result<f64> {
    let values = responses.values_in_order(scenarios)?;
    let mut total = 0.0;
    for (scenario, theta) in scenarios.iter().zip(values) {
        total += discrepancy(theta, posterior_mean(prior, scenario, config)?)?;
    }
    Ok((total / scenarios.len() as f64).sqrt())
}
