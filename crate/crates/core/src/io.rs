//! File formats: scenario-set and config JSON, response CSV
//! (`scenario_id, theta_tilde_m`).

use std::fs;
use std::io::Read;
use std::path::Path;

use serde::de::DeserializeOwned;

use crate::error::{Error, Result};
use crate::model::{DataModelConfig, ElicitedResponse, ResponseSet, Round, ScenarioSet};
use crate::session::Session;

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

pub fn read_scenario_set(path: impl AsRef<Path>) -> Result<ScenarioSet> {
    read_json(path.as_ref())
}

pub fn read_config(path: impl AsRef<Path>) -> Result<DataModelConfig> {
    read_json(path.as_ref())
}

pub fn read_session(path: impl AsRef<Path>) -> Result<Session> {
    let path = path.as_ref();
    Session::from_json(&fs::read_to_string(path)?).map_err(|e| match e {
        Error::Json(e) => Error::InvalidInput(format!("{}: {e}", path.display())),
        other => other,
    })
}

/// Parses response CSV with a `scenario_id,theta_tilde_m` header.
pub fn responses_from_csv(reader: impl Read, expert_id: &str, round: Round) -> Result<ResponseSet> {
    let mut csv = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidInput(format!("response CSV lacks a `{name}` column")))
    };
    let id_col = column("scenario_id")?;
    let value_col = column("theta_tilde_m")?;

    let mut responses = Vec::new();
    for (line, record) in csv.records().enumerate() {
        let record = record.map_err(|e| Error::InvalidInput(format!("response CSV: {e}")))?;
        let row = line + 2;
        let id = record
            .get(id_col)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Error::InvalidInput(format!("response CSV line {row}: missing scenario_id")))?;
        let raw = record.get(value_col).unwrap_or("");
        let value: f64 = raw.parse().map_err(|_| {
            Error::InvalidInput(format!("response CSV line {row}: `{raw}` is not a number"))
        })?;
        if !value.is_finite() {
            return Err(Error::InvalidInput(format!("response CSV line {row}: value must be finite")));
        }
        responses.push(ElicitedResponse::new(id, value));
    }
    Ok(ResponseSet::new(expert_id, round, responses))
}

pub fn read_responses_csv(path: impl AsRef<Path>, expert_id: &str, round: Round) -> Result<ResponseSet> {
    responses_from_csv(fs::File::open(path)?, expert_id, round)
}
