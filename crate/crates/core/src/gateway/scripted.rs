//! Deterministic replay of canned replies for tests and offline runs.

use std::path::Path;
use std::sync::Mutex;

use super::{finish_reply, GatewayError, GenerationRequest, ReplySource};

/// Returns the entry at `cursor` and the advanced cursor.
pub fn next_scripted_reply(script: &[String], cursor: usize) -> Result<(&str, usize), GatewayError> {
    script
        .get(cursor)
        .map(|text| (text.as_str(), cursor + 1))
        .ok_or(GatewayError::ScriptExhausted { len: script.len() })
}

#[derive(Debug)]
pub struct ScriptedProvider {
    script: Vec<String>,
    cursor: Mutex<usize>,
}

impl ScriptedProvider {
    pub fn new(script: Vec<String>) -> Self {
        Self {
            script,
            cursor: Mutex::new(0),
        }
    }

    /// Loads a JSON array of strings.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, GatewayError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| GatewayError::Config(format!("cannot read script {}: {e}", path.display())))?;
        let script: Vec<String> = serde_json::from_str(&text)
            .map_err(|e| GatewayError::Config(format!("script {} is not a JSON string array: {e}", path.display())))?;
        Ok(Self::new(script))
    }

    pub fn consumed(&self) -> usize {
        *self.cursor.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn len(&self) -> usize {
        self.script.len()
    }

    pub fn is_empty(&self) -> bool {
        self.script.is_empty()
    }
}

impl ReplySource for ScriptedProvider {
    fn generate_reply(&self, request: &GenerationRequest) -> Result<String, GatewayError> {
        request.validate()?;
        let mut cursor = self.cursor.lock().unwrap_or_else(|e| e.into_inner());
        let (text, next) = next_scripted_reply(&self.script, *cursor)?;
        *cursor = next;
        finish_reply(text)
    }
}
