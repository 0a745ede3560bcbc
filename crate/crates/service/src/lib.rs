//! HTTP API over a [`SessionStore`].
//!
//! Every JSON body is rendered with [`pfp_core::to_json_pretty`], so the fit
//! endpoint returns the same bytes as `pfp fit` for the same inputs.
//! Requests authenticate with `Authorization: Bearer <token>`: the
//! facilitator token returned at session creation, or an expert's access
//! token for that expert's own routes.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use chrono::{DateTime, Utc};
use pfp_core::{
    DataModelConfig, ElicitedResponse, Error, ExpertState, FitOptions, ResponseSet, Round,
    ScenarioSet, Session, SessionStore,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    NotFound,
    InvalidInput,
    Conflict,
    StateViolation,
    Unauthorized,
    Internal,
}

impl ErrorCode {
    pub fn status(self) -> StatusCode {
        match self {
            ErrorCode::NotFound => StatusCode::NOT_FOUND,
            ErrorCode::InvalidInput => StatusCode::UNPROCESSABLE_ENTITY,
            ErrorCode::Conflict | ErrorCode::StateViolation => StatusCode::CONFLICT,
            ErrorCode::Unauthorized => StatusCode::UNAUTHORIZED,
            ErrorCode::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(default)]
    pub details: Value,
}

impl ApiError {
    fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            details: Value::Null,
        }
    }

    fn unauthorized() -> Self {
        Self::new(ErrorCode::Unauthorized, "missing or invalid bearer token")
    }
}

impl From<Error> for ApiError {
    fn from(err: Error) -> Self {
        let message = err.to_string();
        match err {
            Error::NotFound(_) => Self::new(ErrorCode::NotFound, message),
            Error::Conflict(_) => Self::new(ErrorCode::Conflict, message),
            Error::StateViolation(_) => Self::new(ErrorCode::StateViolation, message),
            Error::IncompleteResponses { missing } => Self {
                code: ErrorCode::InvalidInput,
                message,
                details: json!({ "missing": missing }),
            },
            Error::UnknownScenario(id) | Error::DuplicateResponse(id) => Self {
                code: ErrorCode::InvalidInput,
                message,
                details: json!({ "scenario_id": id }),
            },
            Error::Io(_) => Self::new(ErrorCode::Internal, message),
            _ => Self::new(ErrorCode::InvalidInput, message),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        json_response(self.code.status(), &self)
    }
}

type ApiResult = Result<Response, ApiError>;

fn json_response<T: Serialize>(status: StatusCode, body: &T) -> Response {
    match pfp_core::to_json_pretty(body) {
        Ok(text) => (status, [(header::CONTENT_TYPE, "application/json")], text).into_response(),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body)
        .map_err(|e| ApiError::new(ErrorCode::InvalidInput, format!("request body: {e}")))
}

fn parse_round(raw: &str) -> Result<Round, ApiError> {
    raw.parse()
        .map_err(|_| ApiError::new(ErrorCode::NotFound, format!("unknown round `{raw}`")))
}

fn bearer(headers: &HeaderMap) -> Option<&str> {
    headers
        .get(header::AUTHORIZATION)?
        .to_str()
        .ok()?
        .strip_prefix("Bearer ")
        .map(str::trim)
}

fn require_facilitator(session: &Session, headers: &HeaderMap) -> Result<(), ApiError> {
    match bearer(headers) {
        Some(token) if token == session.facilitator_token => Ok(()),
        _ => Err(ApiError::unauthorized()),
    }
}

/// Accepts the facilitator token or the named expert's own token.
fn require_expert(session: &Session, expert_id: &str, headers: &HeaderMap) -> Result<(), ApiError> {
    let token = bearer(headers).ok_or_else(ApiError::unauthorized)?;
    if token == session.facilitator_token {
        return Ok(());
    }
    // Unknown experts are reported as 404 only to callers holding the
    // facilitator token.
    match session.experts.iter().find(|e| e.expert_id == expert_id) {
        Some(e) if e.access_token == token => Ok(()),
        _ => Err(ApiError::unauthorized()),
    }
}

/// Public session view: everything but tokens and stored rounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub schema_version: u32,
    pub session_id: String,
    pub title: String,
    pub scenario_set: ScenarioSet,
    pub config: DataModelConfig,
    pub fit_options: FitOptions,
    pub experts: Vec<ExpertView>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertView {
    pub expert_id: String,
    pub display_name: String,
    pub state: ExpertState,
    pub rounds: Vec<Round>,
}

impl From<&Session> for SessionView {
    fn from(s: &Session) -> Self {
        Self {
            schema_version: s.schema_version,
            session_id: s.session_id.clone(),
            title: s.title.clone(),
            scenario_set: s.scenario_set().clone(),
            config: *s.config(),
            fit_options: s.fit_options,
            experts: s
                .experts
                .iter()
                .map(|e| ExpertView {
                    expert_id: e.expert_id.clone(),
                    display_name: e.display_name.clone(),
                    state: e.state,
                    rounds: e.rounds.keys().copied().collect(),
                })
                .collect(),
            created_at: s.created_at,
            updated_at: s.updated_at,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    title: String,
    #[serde(default)]
    scenario_set: Option<ScenarioSet>,
    config: DataModelConfig,
    #[serde(default)]
    fit_options: Option<FitOptions>,
}

#[derive(Debug, Serialize)]
struct Created {
    session_id: String,
    facilitator_token: String,
    session: SessionView,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegisterExpert {
    expert_id: String,
    #[serde(default)]
    display_name: Option<String>,
}

#[derive(Debug, Serialize)]
struct Registered {
    expert_id: String,
    access_token: String,
    state: ExpertState,
}

/// Mirrors a stored `ResponseSet`; `expert_id` and `round` are optional but
/// must agree with the path when present.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubmitResponses {
    #[serde(default)]
    expert_id: Option<String>,
    #[serde(default)]
    round: Option<Round>,
    responses: Vec<ElicitedResponse>,
}

#[derive(Debug, Serialize)]
struct Submitted {
    mu0: f64,
    sigma0: f64,
    rmsd: f64,
}

/// Runs blocking store work (file I/O, fitting) off the async executor.
async fn blocking<F>(f: F) -> ApiResult
where
    F: FnOnce() -> ApiResult + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .unwrap_or_else(|e| Err(ApiError::new(ErrorCode::Internal, e.to_string())))
}

async fn create_session(State(store): State<Arc<SessionStore>>, body: Bytes) -> ApiResult {
    let req: CreateSession = parse_body(&body)?;
    blocking(move || {
        let scenario_set = req.scenario_set.unwrap_or_else(ScenarioSet::case_study_default);
        let mut session = Session::new(req.title, scenario_set, req.config, Utc::now())?;
        if let Some(options) = req.fit_options {
            session.fit_options = options;
        }
        let session = store.insert_session(session)?;
        Ok(json_response(
            StatusCode::CREATED,
            &Created {
                session_id: session.session_id.clone(),
                facilitator_token: session.facilitator_token.clone(),
                session: SessionView::from(&session),
            },
        ))
    })
    .await
}

async fn get_session(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> ApiResult {
    blocking(move || {
        let session = store.load_session(&id)?;
        Ok(json_response(StatusCode::OK, &SessionView::from(&session)))
    })
    .await
}

async fn register_expert(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult {
    let req: RegisterExpert = parse_body(&body)?;
    blocking(move || {
        let registered = store.update_with::<_, ApiError>(&id, |session| {
            require_facilitator(session, &headers)?;
            let name = req.display_name.unwrap_or_else(|| req.expert_id.clone());
            let expert = session.register_expert(&req.expert_id, name, Utc::now())?;
            Ok(Registered {
                expert_id: expert.expert_id.clone(),
                access_token: expert.access_token.clone(),
                state: expert.state,
            })
        });
        Ok(json_response(StatusCode::CREATED, &registered?))
    })
    .await
}

async fn submit_responses(
    State(store): State<Arc<SessionStore>>,
    Path((id, eid, round)): Path<(String, String, String)>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult {
    let round = parse_round(&round)?;
    let req: SubmitResponses = parse_body(&body)?;
    if req.expert_id.as_deref().is_some_and(|e| e != eid) || req.round.is_some_and(|r| r != round) {
        return Err(ApiError::new(
            ErrorCode::InvalidInput,
            "expert_id and round in the body must match the path",
        ));
    }
    blocking(move || {
        let submitted = store.update_with::<_, ApiError>(&id, |session| {
            require_expert(session, &eid, &headers)?;
            let responses = ResponseSet::new(&eid, round, req.responses);
            let record = session.submit_round(&eid, round, responses, Utc::now())?;
            let fit = record.fit.as_ref().expect("submit_round stores the fit");
            Ok(Submitted {
                mu0: fit.prior.mu0,
                sigma0: fit.prior.sigma0,
                rmsd: fit.rmsd,
            })
        });
        Ok(json_response(StatusCode::OK, &submitted?))
    })
    .await
}

async fn get_fit(
    State(store): State<Arc<SessionStore>>,
    Path((id, eid, round)): Path<(String, String, String)>,
    headers: HeaderMap,
) -> ApiResult {
    let round = parse_round(&round)?;
    blocking(move || {
        let session = store.load_session(&id)?;
        require_expert(&session, &eid, &headers)?;
        Ok(json_response(StatusCode::OK, &session.fit(&eid, round)?))
    })
    .await
}

/// Delivers the report; fetching the initial round's feedback marks it sent.
async fn get_feedback(
    State(store): State<Arc<SessionStore>>,
    Path((id, eid, round)): Path<(String, String, String)>,
    headers: HeaderMap,
) -> ApiResult {
    let round = parse_round(&round)?;
    blocking(move || {
        let report = store.update_with::<_, ApiError>(&id, |session| {
            require_expert(session, &eid, &headers)?;
            Ok(session.release_feedback(&eid, round, Utc::now())?)
        });
        Ok(json_response(StatusCode::OK, &report?))
    })
    .await
}

async fn close_expert(
    State(store): State<Arc<SessionStore>>,
    Path((id, eid)): Path<(String, String)>,
    headers: HeaderMap,
) -> ApiResult {
    blocking(move || {
        let closed = store.update_with::<_, ApiError>(&id, |session| {
            require_facilitator(session, &headers)?;
            session.close_expert(&eid, Utc::now())?;
            let view = SessionView::from(&*session);
            Ok(view.experts.into_iter().find(|e| e.expert_id == eid).expect("expert exists"))
        });
        Ok(json_response(StatusCode::OK, &closed?))
    })
    .await
}

async fn summary(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> ApiResult {
    blocking(move || {
        let session = store.load_session(&id)?;
        require_facilitator(&session, &headers)?;
        Ok(json_response(StatusCode::OK, &session.summary()?))
    })
    .await
}

pub fn router(store: Arc<SessionStore>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/experts", post(register_expert))
        .route("/sessions/{id}/experts/{eid}/rounds/{round}/responses", post(submit_responses))
        .route("/sessions/{id}/experts/{eid}/rounds/{round}/fit", get(get_fit))
        .route("/sessions/{id}/experts/{eid}/rounds/{round}/feedback", get(get_feedback))
        .route("/sessions/{id}/experts/{eid}/close", post(close_expert))
        .route("/sessions/{id}/summary", get(summary))
        .fallback(|| async { ApiError::new(ErrorCode::NotFound, "no such route") })
        .with_state(store)
}
