//! Endpoint table and request handlers.

use std::collections::BTreeMap;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use pulsechat_core::analytics::{build_report, AnalyticsError, AnalyticsReport, FeedbackSurvey, ReportConfig};
use pulsechat_core::dialogue::{available_topics, OfferedTopic, Outcome, Phase, TopicChoice, TopicStatus, TurnResult};
use pulsechat_core::storage::{self, ExportFormat, ExportKind};
use pulsechat_core::survey::{validate_role_details, Role};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use tracing::info;

use crate::error::ApiError;
use crate::state::AppState;

/// The literal topic id that asks for a random pick.
pub const RANDOM_TOPIC: &str = "random";

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/healthz", get(health))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}/messages", post(post_message))
        .route("/api/sessions/{id}/topics", get(get_topics))
        .route("/api/sessions/{id}/topic", post(post_topic))
        .route("/api/sessions/{id}/switch-topic", post(switch_topic))
        .route("/api/sessions/{id}/feedback", post(post_feedback))
        .route("/api/admin/report", get(admin_report))
        .route("/api/admin/export", get(admin_export))
        .with_state(state)
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ApiError::bad_request("invalid_body", e.body_text()))
}

async fn health() -> &'static str {
    "ok"
}

#[derive(Debug, Deserialize)]
pub struct CreateSessionRequest {
    pub role: String,
    #[serde(default)]
    pub details: BTreeMap<String, Value>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session_id: String,
    pub template_id: String,
    pub phase: Phase,
    pub assistant_message: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TurnResponse {
    pub session_id: String,
    pub assistant_message: String,
    pub phase: Phase,
    pub offered_topics: Option<Vec<OfferedTopic>>,
    pub elaboration_requested: bool,
}

impl TurnResponse {
    fn new(session_id: String, result: TurnResult) -> Self {
        Self {
            session_id,
            assistant_message: result.assistant_text,
            phase: result.new_phase,
            offered_topics: result.offered_topics,
            elaboration_requested: result.elaboration_requested,
        }
    }
}

/// Quick-click values arrive as strings, booleans or numbers; the profile
/// validator works on their text form.
fn detail_text(key: &str, value: &Value) -> Result<Option<String>, ApiError> {
    match value {
        Value::Null => Ok(None),
        Value::String(s) => Ok(Some(s.clone())),
        Value::Bool(b) => Ok(Some(b.to_string())),
        Value::Number(n) => Ok(Some(n.to_string())),
        _ => Err(ApiError::bad_request(
            "invalid_details",
            format!("detail {key:?} must be a string, boolean or number"),
        )),
    }
}

async fn create_session(
    State(state): State<AppState>,
    payload: Result<Json<CreateSessionRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<SessionCreated>), ApiError> {
    let request = body(payload)?;
    let role: Role = request
        .role
        .parse()
        .map_err(|e: pulsechat_core::survey::UnknownRole| ApiError::bad_request("invalid_role", e.to_string()))?;
    let mut details = BTreeMap::new();
    for (key, value) in &request.details {
        if let Some(text) = detail_text(key, value)? {
            details.insert(key.clone(), text);
        }
    }
    let profile = validate_role_details(role, &details)
        .map_err(|e| ApiError::bad_request("invalid_details", e.to_string()))?;
    let id = uuid::Uuid::new_v4().to_string();
    let outcome = state.create_session(id.clone(), profile).await?;
    info!(session = %id, template = %outcome.session.template_id, "session created");
    Ok((
        StatusCode::CREATED,
        Json(SessionCreated {
            session_id: id,
            template_id: outcome.session.template_id.clone(),
            phase: outcome.result.new_phase,
            assistant_message: outcome.result.assistant_text,
        }),
    ))
}

fn turn(id: String, outcome: Outcome) -> Json<TurnResponse> {
    Json(TurnResponse::new(id, outcome.result))
}

#[derive(Debug, Deserialize)]
pub struct MessageRequest {
    pub text: String,
}

async fn post_message(
    State(state): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<MessageRequest>, JsonRejection>,
) -> Result<Json<TurnResponse>, ApiError> {
    let text = body(payload)?.text;
    let outcome = state
        .run_command(&id, move |orch, session, template, gateway| {
            orch.advance_turn(session, template, &text, gateway)
        })
        .await?;
    Ok(turn(id, outcome))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TopicView {
    pub id: String,
    pub title: String,
    pub status: TopicStatus,
    pub sensitive: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TopicsResponse {
    pub session_id: String,
    pub phase: Phase,
    pub topics: Vec<TopicView>,
    /// Topics that can still be chosen, in template order.
    pub available: Vec<OfferedTopic>,
}

async fn get_topics(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<TopicsResponse>, ApiError> {
    let session = state.snapshot(&id)?;
    let template = state
        .resources()
        .registry
        .get(&session.template_id)
        .ok_or_else(|| ApiError::internal("session template is not loaded"))?;
    let topics = template
        .topics
        .iter()
        .map(|t| TopicView {
            id: t.id.clone(),
            title: t.title.clone(),
            status: session.topic_states.get(&t.id).map_or(TopicStatus::Unvisited, |s| s.status),
            sensitive: t.sensitive,
        })
        .collect();
    let available = available_topics(&session, template)
        .into_iter()
        .map(|t| OfferedTopic {
            id: t.id.clone(),
            title: t.title.clone(),
        })
        .collect();
    Ok(Json(TopicsResponse {
        session_id: id,
        phase: session.phase,
        topics,
        available,
    }))
}

#[derive(Debug, Deserialize)]
pub struct TopicRequest {
    pub topic_id: String,
}

async fn post_topic(
    State(state): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<TopicRequest>, JsonRejection>,
) -> Result<Json<TurnResponse>, ApiError> {
    let topic_id = body(payload)?.topic_id;
    let choice = if topic_id.trim().eq_ignore_ascii_case(RANDOM_TOPIC) {
        TopicChoice::Random
    } else {
        TopicChoice::Topic(topic_id.trim().to_string())
    };
    let outcome = state
        .run_command(&id, move |orch, session, template, _| orch.select_topic(session, template, choice))
        .await?;
    Ok(turn(id, outcome))
}

async fn switch_topic(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<TurnResponse>, ApiError> {
    let outcome = state
        .run_command(&id, |orch, session, template, _| orch.request_topic_switch(session, template))
        .await?;
    Ok(turn(id, outcome))
}

#[derive(Debug, Deserialize)]
pub struct FeedbackRequest {
    pub survey: FeedbackSurvey,
}

async fn post_feedback(
    State(state): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<FeedbackRequest>, JsonRejection>,
) -> Result<Json<TurnResponse>, ApiError> {
    let survey = body(payload)?.survey;
    let outcome = state
        .run_command(&id, move |orch, session, template, _| orch.submit_feedback(session, template, survey))
        .await?;
    Ok(turn(id, outcome))
}

fn authorize(state: &AppState, headers: &HeaderMap) -> Result<(), ApiError> {
    let expected = state.admin_token();
    if expected.is_empty() {
        return Err(ApiError::unauthorized());
    }
    let given = headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .map(str::trim);
    match given {
        Some(token) if token == expected.expose() => Ok(()),
        _ => Err(ApiError::unauthorized()),
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ReportResponse {
    pub surveys: usize,
    pub comments: usize,
    /// `None` when there is nothing to analyze yet.
    pub report: Option<AnalyticsReport>,
}

async fn admin_report(State(state): State<AppState>, headers: HeaderMap) -> Result<Json<ReportResponse>, ApiError> {
    authorize(&state, &headers)?;
    // Copy the inputs out so the analysis never holds the store lock.
    let (surveys, comments) = state.with_store(|store| {
        let surveys: Vec<FeedbackSurvey> = storage::feedback(store).iter().map(|r| r.survey()).collect();
        let comments: Vec<String> = storage::comments(store).into_iter().map(|c| c.text).collect();
        (surveys, comments)
    });
    let res = state.resources();
    let report = match build_report(&surveys, &comments, &res.lexicon, &res.stopwords, ReportConfig::default()) {
        Ok(report) => Some(report),
        Err(AnalyticsError::EmptyInput) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(Json(ReportResponse {
        surveys: surveys.len(),
        comments: comments.len(),
        report,
    }))
}

#[derive(Debug, Deserialize)]
pub struct ExportQuery {
    pub what: String,
    #[serde(default = "default_format")]
    pub format: String,
}

fn default_format() -> String {
    "csv".into()
}

async fn admin_export(
    State(state): State<AppState>,
    headers: HeaderMap,
    query: Result<Query<ExportQuery>, axum::extract::rejection::QueryRejection>,
) -> Result<Response, ApiError> {
    authorize(&state, &headers)?;
    let Query(query) = query.map_err(|e| ApiError::bad_request("invalid_query", e.body_text()))?;
    let kind = ExportKind::parse(&query.what)
        .ok_or_else(|| ApiError::bad_request("invalid_query", format!("unknown export {:?}", query.what)))?;
    let format = ExportFormat::parse(&query.format)
        .ok_or_else(|| ApiError::bad_request("invalid_query", format!("unknown format {:?}", query.format)))?;
    let bytes = state.with_store(|store| storage::export(store, kind, format, &state.resources().lexicon));
    let disposition = format!("attachment; filename=\"{}.{}\"", kind.as_str(), format.extension());
    Ok((
        [
            (header::CONTENT_TYPE, format.content_type().to_string()),
            (header::CONTENT_DISPOSITION, disposition),
        ],
        bytes,
    )
        .into_response())
}
