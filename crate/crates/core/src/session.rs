//! Elicitation sessions: the scenario design, the registered experts and
//! their response rounds, fits and feedback.
//!
//! An expert moves through
//! `invited → initial_submitted → feedback_sent → revised_submitted → closed`;
//! `revised_submitted` may be skipped by closing after feedback. Rounds are
//! append-only once stored.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::diagnostics::{build_feedback_report, cohort_summary, CohortSummary, FeedbackReport};
use crate::error::{Error, Result};
use crate::fitting::{fit_prior, FitOptions, FitResult};
use crate::model::{DataModelConfig, ResponseSet, Round, ScenarioSet};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpertState {
    Invited,
    InitialSubmitted,
    FeedbackSent,
    RevisedSubmitted,
    Closed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub responses: ResponseSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feedback: Option<FeedbackReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertRecord {
    pub expert_id: String,
    pub display_name: String,
    pub access_token: String,
    pub state: ExpertState,
    #[serde(default)]
    pub rounds: BTreeMap<Round, RoundRecord>,
}

impl ExpertRecord {
    pub fn round(&self, round: Round) -> Option<&RoundRecord> {
        self.rounds.get(&round)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub schema_version: u32,
    pub session_id: String,
    pub title: String,
    scenario_set: ScenarioSet,
    config: DataModelConfig,
    #[serde(default)]
    pub fit_options: FitOptions,
    pub facilitator_token: String,
    #[serde(default)]
    pub experts: Vec<ExpertRecord>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

pub fn new_token() -> String {
    uuid::Uuid::new_v4().simple().to_string()
}

impl Session {
    pub fn new(
        title: impl Into<String>,
        scenario_set: ScenarioSet,
        config: DataModelConfig,
        now: DateTime<Utc>,
    ) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            session_id: new_token(),
            title: title.into(),
            scenario_set,
            config,
            fit_options: FitOptions::default(),
            facilitator_token: new_token(),
            experts: Vec::new(),
            created_at: now,
            updated_at: now,
        })
    }

    pub fn scenario_set(&self) -> &ScenarioSet {
        &self.scenario_set
    }

    pub fn config(&self) -> &DataModelConfig {
        &self.config
    }

    fn has_responses(&self) -> bool {
        self.experts.iter().any(|e| !e.rounds.is_empty())
    }

    /// Replaces the design; only allowed before any response is stored.
    pub fn set_design(&mut self, scenario_set: ScenarioSet, config: DataModelConfig) -> Result<()> {
        if self.has_responses() {
            return Err(Error::StateViolation(
                "scenario set and config are fixed once responses exist".into(),
            ));
        }
        config.validate()?;
        self.scenario_set = scenario_set;
        self.config = config;
        Ok(())
    }

    pub fn expert(&self, expert_id: &str) -> Result<&ExpertRecord> {
        self.experts
            .iter()
            .find(|e| e.expert_id == expert_id)
            .ok_or_else(|| Error::NotFound(format!("expert `{expert_id}`")))
    }

    fn expert_mut(&mut self, expert_id: &str) -> Result<&mut ExpertRecord> {
        self.experts
            .iter_mut()
            .find(|e| e.expert_id == expert_id)
            .ok_or_else(|| Error::NotFound(format!("expert `{expert_id}`")))
    }

    pub fn register_expert(
        &mut self,
        expert_id: impl Into<String>,
        display_name: impl Into<String>,
        now: DateTime<Utc>,
    ) -> Result<&ExpertRecord> {
        let expert_id = expert_id.into();
        if expert_id.is_empty() {
            return Err(Error::InvalidInput("expert_id must be nonempty".into()));
        }
        if self.experts.iter().any(|e| e.expert_id == expert_id) {
            return Err(Error::Conflict(format!("expert `{expert_id}` already registered")));
        }
        self.experts.push(ExpertRecord {
            expert_id,
            display_name: display_name.into(),
            access_token: new_token(),
            state: ExpertState::Invited,
            rounds: BTreeMap::new(),
        });
        self.updated_at = now;
        Ok(self.experts.last().expect("just pushed"))
    }

    /// Stores a complete round and its fit, advancing the expert's state.
    /// The response set's own expert id and round are overwritten by the
    /// arguments.
    pub fn submit_round(
        &mut self,
        expert_id: &str,
        round: Round,
        mut responses: ResponseSet,
        now: DateTime<Utc>,
    ) -> Result<&RoundRecord> {
        let scenarios = self.scenario_set.clone();
        let config = self.config;
        let options = self.fit_options;
        let expert = self.expert_mut(expert_id)?;

        if expert.rounds.contains_key(&round) {
            return Err(Error::Conflict(format!(
                "{round} round for `{expert_id}` already submitted"
            )));
        }
        let next_state = match (round, expert.state) {
            (Round::Initial, ExpertState::Invited) => ExpertState::InitialSubmitted,
            (Round::Revised, ExpertState::FeedbackSent) => ExpertState::RevisedSubmitted,
            (round, state) => {
                return Err(Error::StateViolation(format!(
                    "cannot submit the {round} round while expert `{expert_id}` is {state:?}"
                )))
            }
        };

        responses.expert_id = expert_id.to_string();
        responses.round = round;
        let fit = fit_prior(&responses, &scenarios, &config, &options)?;
        let feedback = build_feedback_report(&fit, &responses, &scenarios)?;

        expert.state = next_state;
        expert.rounds.insert(
            round,
            RoundRecord {
                responses,
                fit: Some(fit),
                feedback: Some(feedback),
            },
        );
        self.updated_at = now;
        Ok(&self.expert(expert_id)?.rounds[&round])
    }

    pub fn fit(&self, expert_id: &str, round: Round) -> Result<FitResult> {
        let record = self.round_record(expert_id, round)?;
        match &record.fit {
            Some(fit) => Ok(fit.clone()),
            None => fit_prior(&record.responses, &self.scenario_set, &self.config, &self.fit_options),
        }
    }

    /// The feedback report for a stored round, built from the stored fit if
    /// it was not stored alongside it. Has no side effects.
    pub fn feedback(&self, expert_id: &str, round: Round) -> Result<FeedbackReport> {
        let record = self.round_record(expert_id, round)?;
        if let Some(report) = &record.feedback {
            return Ok(report.clone());
        }
        let fit = self.fit(expert_id, round)?;
        build_feedback_report(&fit, &record.responses, &self.scenario_set)
    }

    /// Returns the feedback for delivery and records the initial-round
    /// feedback as sent.
    pub fn release_feedback(&mut self, expert_id: &str, round: Round, now: DateTime<Utc>) -> Result<FeedbackReport> {
        let report = self.feedback(expert_id, round)?;
        let expert = self.expert_mut(expert_id)?;
        if round == Round::Initial && expert.state == ExpertState::InitialSubmitted {
            expert.state = ExpertState::FeedbackSent;
            self.updated_at = now;
        }
        Ok(report)
    }

    pub fn close_expert(&mut self, expert_id: &str, now: DateTime<Utc>) -> Result<()> {
        let expert = self.expert_mut(expert_id)?;
        match expert.state {
            ExpertState::FeedbackSent | ExpertState::RevisedSubmitted => {
                expert.state = ExpertState::Closed;
                self.updated_at = now;
                Ok(())
            }
            state => Err(Error::StateViolation(format!(
                "cannot close expert `{expert_id}` while {state:?}"
            ))),
        }
    }

    pub fn round_record(&self, expert_id: &str, round: Round) -> Result<&RoundRecord> {
        self.expert(expert_id)?
            .round(round)
            .ok_or_else(|| Error::NotFound(format!("{round} round for expert `{expert_id}`")))
    }

    pub fn summary(&self) -> Result<CohortSummary> {
        let mut fits = Vec::new();
        for expert in &self.experts {
            for &round in expert.rounds.keys() {
                fits.push((expert.expert_id.as_str(), round, self.fit(&expert.expert_id, round)?));
            }
        }
        Ok(cohort_summary(fits.iter().map(|(e, r, f)| (*e, *r, f))))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(crate::to_json_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let session: Session = serde_json::from_str(text)?;
        if session.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion(session.schema_version));
        }
        Ok(session)
    }
}
