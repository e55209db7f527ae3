//! Error responses. Every failure is a JSON body `{error, message}` with a
//! stable machine-readable code.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use pulsechat_core::analytics::AnalyticsError;
use pulsechat_core::dialogue::DialogueError;
use pulsechat_core::gateway::GatewayError;
use pulsechat_core::storage::StorageError;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    message: &'a str,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }

    pub fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn not_found(session_id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "session_not_found", format!("no session {session_id:?}"))
    }

    pub fn busy() -> Self {
        Self::new(
            StatusCode::CONFLICT,
            "session_busy",
            "another turn for this session is still in progress",
        )
    }

    pub fn unauthorized() -> Self {
        Self::new(StatusCode::UNAUTHORIZED, "unauthorized", "a valid admin bearer token is required")
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.code,
            message: &self.message,
        };
        (self.status, Json(body)).into_response()
    }
}

impl From<GatewayError> for ApiError {
    fn from(e: GatewayError) -> Self {
        let message = e.to_string();
        match e {
            GatewayError::ProviderUnavailable { .. } | GatewayError::ScriptExhausted { .. } => {
                Self::new(StatusCode::SERVICE_UNAVAILABLE, "provider_unavailable", message)
            }
            GatewayError::ProviderRejected { .. } | GatewayError::EmptyCompletion => {
                Self::new(StatusCode::BAD_GATEWAY, "provider_error", message)
            }
            GatewayError::InvalidRequest(_) | GatewayError::Config(_) => Self::internal(message),
        }
    }
}

impl From<DialogueError> for ApiError {
    fn from(e: DialogueError) -> Self {
        let message = e.to_string();
        match e {
            DialogueError::SessionClosed => Self::new(StatusCode::CONFLICT, "session_closed", message),
            DialogueError::InvalidPhase { .. } => Self::new(StatusCode::CONFLICT, "invalid_phase", message),
            DialogueError::NoTopicsRemain => Self::new(StatusCode::CONFLICT, "no_topics_remain", message),
            DialogueError::TopicUnavailable(_) => Self::bad_request("topic_unavailable", message),
            DialogueError::EmptyInput => Self::bad_request("empty_input", message),
            DialogueError::MessageTooLong { .. } => Self::bad_request("message_too_long", message),
            DialogueError::InvalidFeedback(_) => Self::bad_request("invalid_feedback", message),
            DialogueError::Gateway(g) => g.into(),
            DialogueError::TemplateMismatch { .. } | DialogueError::Prompt(_) | DialogueError::Internal(_) => {
                Self::internal(message)
            }
        }
    }
}

impl From<StorageError> for ApiError {
    fn from(e: StorageError) -> Self {
        let message = e.to_string();
        match e {
            StorageError::SequenceConflict { .. } => Self::new(StatusCode::CONFLICT, "sequence_conflict", message),
            StorageError::SessionClosed(_) => Self::new(StatusCode::CONFLICT, "session_closed", message),
            StorageError::StorageFull => Self::new(StatusCode::INSUFFICIENT_STORAGE, "storage_full", message),
            StorageError::InvalidEvent(_) | StorageError::CorruptRecord { .. } | StorageError::Io(_) => {
                Self::internal(message)
            }
        }
    }
}

impl From<AnalyticsError> for ApiError {
    fn from(e: AnalyticsError) -> Self {
        Self::bad_request("invalid_input", e.to_string())
    }
}
