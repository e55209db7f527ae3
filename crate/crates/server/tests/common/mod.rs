//! In-process harness: the real router driven with `tower::ServiceExt`, a
//! temporary data directory, and reply sources that never touch a network.
#![allow(dead_code)]

use std::path::Path;
use std::sync::mpsc;
use std::sync::{Arc, Mutex};

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use pulsechat_core::gateway::{GatewayError, GenerationRequest, ReplySource, Secret};
use pulsechat_core::prompt::NAME_SENTINEL_OPEN;
use pulsechat_core::storage::EventStore;
use pulsechat_server::{router, AppState, Resources, SeedMode};
use serde_json::{json, Value};
use tower::ServiceExt;

pub const ADMIN_TOKEN: &str = "admin-test-token";

/// Answers name-capture turns with a name sentinel and everything else with
/// a short acknowledgement.
pub struct Polite;

impl ReplySource for Polite {
    fn generate_reply(&self, request: &GenerationRequest) -> Result<String, GatewayError> {
        if request.directive_text.as_deref().is_some_and(|d| d.contains(NAME_SENTINEL_OPEN)) {
            Ok("[[name:Taylor]]".into())
        } else {
            Ok("Thanks for sharing that with me.".into())
        }
    }
}

/// Simulates a provider outage.
pub struct Outage;

impl ReplySource for Outage {
    fn generate_reply(&self, _: &GenerationRequest) -> Result<String, GatewayError> {
        Err(GatewayError::ProviderUnavailable {
            attempts: 3,
            last_error: "connection refused".into(),
        })
    }
}

/// Blocks each call until the test releases it, announcing entry first.
pub struct Gate {
    pub entered: Mutex<mpsc::Sender<()>>,
    pub release: Mutex<mpsc::Receiver<()>>,
}

impl ReplySource for Gate {
    fn generate_reply(&self, _: &GenerationRequest) -> Result<String, GatewayError> {
        self.entered.lock().unwrap().send(()).unwrap();
        self.release.lock().unwrap().recv().unwrap();
        Ok("[[name:Gale]]".into())
    }
}

pub fn state_at(dir: &Path, gateway: Arc<dyn ReplySource>) -> AppState {
    let store = EventStore::open(dir).unwrap();
    AppState::new(Resources::shipped(), store, gateway, SeedMode::Fixed(7), Secret::new(ADMIN_TOKEN))
}

pub struct Harness {
    pub app: Router,
    pub state: AppState,
    pub dir: tempfile::TempDir,
}

impl Harness {
    pub fn new(gateway: Arc<dyn ReplySource>) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let state = state_at(dir.path(), gateway);
        Self {
            app: router(state.clone()),
            state,
            dir,
        }
    }

    pub async fn send(&self, method: Method, uri: &str, body: Option<Value>, token: Option<&str>) -> (StatusCode, Vec<u8>) {
        send(&self.app, method, uri, body, token).await
    }

    pub async fn json(&self, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
        let (status, bytes) = self.send(method, uri, body, None).await;
        (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
    }

    pub async fn admin(&self, uri: &str) -> (StatusCode, Vec<u8>) {
        self.send(Method::GET, uri, None, Some(ADMIN_TOKEN)).await
    }

    pub async fn create(&self, role: &str, details: Value) -> (StatusCode, Value) {
        self.json(Method::POST, "/api/sessions", Some(json!({"role": role, "details": details})))
            .await
    }

    pub async fn create_undergrad(&self) -> String {
        let (status, body) = self
            .create("student", json!({"degree_level": "undergraduate", "international": true}))
            .await;
        assert_eq!(status, StatusCode::CREATED, "{body}");
        body["session_id"].as_str().unwrap().to_string()
    }

    pub async fn post(&self, id: &str, action: &str, body: Value) -> (StatusCode, Value) {
        self.json(Method::POST, &format!("/api/sessions/{id}/{action}"), Some(body)).await
    }

    /// Name, then open and leave every topic, reaching the feedback prompt.
    pub async fn walk_to_feedback(&self, id: &str) {
        let (status, body) = self.post(id, "messages", json!({"text": "Taylor"})).await;
        assert_eq!(status, StatusCode::OK, "{body}");
        loop {
            let (status, body) = self.post(id, "topic", json!({"topic_id": "random"})).await;
            assert_eq!(status, StatusCode::OK, "{body}");
            let (status, body) = self.post(id, "switch-topic", json!({})).await;
            assert_eq!(status, StatusCode::OK, "{body}");
            if body["phase"]["name"] == "feedback_prompt" {
                return;
            }
        }
    }
}

pub async fn send(app: &Router, method: Method, uri: &str, body: Option<Value>, token: Option<&str>) -> (StatusCode, Vec<u8>) {
    let mut builder = Request::builder().method(method).uri(uri);
    if let Some(token) = token {
        builder = builder.header(header::AUTHORIZATION, format!("Bearer {token}"));
    }
    let request = match body {
        Some(v) => builder
            .header(header::CONTENT_TYPE, "application/json")
            .body(Body::from(v.to_string()))
            .unwrap(),
        None => builder.body(Body::empty()).unwrap(),
    };
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

pub fn count_bold(text: &str) -> usize {
    pulsechat_core::prompt::count_bold_segments(text)
}
