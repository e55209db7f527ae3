//! Flat exports of transcripts, feedback and comment sentiment.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use thiserror::Error;

use super::{EventKind, EventStore, SessionEvent};
use crate::analytics::{Comprehension, FeedbackSurvey, Preference, ReuseLikelihood, Satisfaction};
use crate::gateway::Author;
use crate::sentiment::{score_text, SentimentLexicon};
use crate::survey::Role;

pub const EXPORTS_DIR: &str = "exports";

pub const TRANSCRIPT_COLUMNS: [&str; 5] = ["session_id", "author", "topic_id", "text", "timestamp"];
pub const FEEDBACK_COLUMNS: [&str; 8] = [
    "session_id",
    "role",
    "satisfaction",
    "reuse_likelihood",
    "comprehension",
    "preference",
    "comment",
    "submitted_at",
];
pub const SENTIMENT_COLUMNS: [&str; 8] = [
    "session_id",
    "source",
    "text",
    "compound",
    "positive",
    "neutral",
    "negative",
    "timestamp",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportKind {
    Transcripts,
    Feedback,
    Sentiment,
}

impl ExportKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExportKind::Transcripts => "transcripts",
            ExportKind::Feedback => "feedback",
            ExportKind::Sentiment => "sentiment",
        }
    }

    pub fn parse(raw: &str) -> Option<Self> {
        match raw.trim().to_ascii_lowercase().as_str() {
            "transcripts" | "transcript" => Some(Self::Transcripts),
            "feedback" => Some(Self::Feedback),
            "sentiment" => Some(Self::Sentiment),
            _ => None,
        }
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            ExportKind::Transcripts => &TRANSCRIPT_COLUMNS,
            ExportKind::Feedback => &FEEDBACK_COLUMNS,
            ExportKind::Sentiment => &SENTIMENT_COLUMNS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    /// One JSON object per line.
    RecordLines,
    Csv,
}

impl ExportFormat {
    pub fn parse(raw: &str) -> Option<Self> {
        match raw.trim().to_ascii_lowercase().as_str() {
            "csv" => Some(Self::Csv),
            "ndjson" | "jsonl" | "record_lines" | "recordlines" => Some(Self::RecordLines),
            _ => None,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::RecordLines => "ndjson",
            ExportFormat::Csv => "csv",
        }
    }

    pub fn content_type(self) -> &'static str {
        match self {
            ExportFormat::RecordLines => "application/x-ndjson",
            ExportFormat::Csv => "text/csv; charset=utf-8",
        }
    }
}

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("record {record} could not be parsed: {reason}")]
    Parse { record: usize, reason: String },
    #[error("unexpected header {found:?}")]
    Header { found: Vec<String> },
    #[error("export I/O error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub session_id: String,
    pub author: Author,
    pub topic_id: Option<String>,
    pub text: String,
    pub timestamp: i64,
}

/// One feedback questionnaire. The preferred name is deliberately absent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackRecord {
    pub session_id: String,
    pub role: Role,
    pub satisfaction: Satisfaction,
    pub reuse_likelihood: ReuseLikelihood,
    pub comprehension: Comprehension,
    pub preference: Preference,
    pub comment: Option<String>,
    pub submitted_at: i64,
}

impl FeedbackRecord {
    pub fn survey(&self) -> FeedbackSurvey {
        FeedbackSurvey {
            satisfaction: self.satisfaction,
            reuse_likelihood: self.reuse_likelihood,
            comprehension: self.comprehension,
            preference: self.preference,
            comment: self.comment.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommentSource {
    /// The free-text field of the feedback form.
    FeedbackForm,
    /// A message typed at the feedback prompt instead of the form.
    FeedbackMessage,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommentRecord {
    pub session_id: String,
    pub source: CommentSource,
    pub text: String,
    pub timestamp: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentRecord {
    pub session_id: String,
    pub source: CommentSource,
    pub text: String,
    pub compound: f64,
    pub positive: f64,
    pub neutral: f64,
    pub negative: f64,
    pub timestamp: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ExportRecords {
    Transcripts(Vec<TranscriptRecord>),
    Feedback(Vec<FeedbackRecord>),
    Sentiment(Vec<SentimentRecord>),
}

impl ExportRecords {
    pub fn kind(&self) -> ExportKind {
        match self {
            ExportRecords::Transcripts(_) => ExportKind::Transcripts,
            ExportRecords::Feedback(_) => ExportKind::Feedback,
            ExportRecords::Sentiment(_) => ExportKind::Sentiment,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ExportRecords::Transcripts(r) => r.len(),
            ExportRecords::Feedback(r) => r.len(),
            ExportRecords::Sentiment(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn render(&self, format: ExportFormat) -> Vec<u8> {
        match self {
            ExportRecords::Transcripts(r) => render_rows(r, ExportKind::Transcripts, format),
            ExportRecords::Feedback(r) => render_rows(r, ExportKind::Feedback, format),
            ExportRecords::Sentiment(r) => render_rows(r, ExportKind::Sentiment, format),
        }
    }

    pub fn parse(kind: ExportKind, format: ExportFormat, bytes: &[u8]) -> Result<Self, ExportError> {
        Ok(match kind {
            ExportKind::Transcripts => ExportRecords::Transcripts(parse_rows(kind, format, bytes)?),
            ExportKind::Feedback => ExportRecords::Feedback(parse_rows(kind, format, bytes)?),
            ExportKind::Sentiment => ExportRecords::Sentiment(parse_rows(kind, format, bytes)?),
        })
    }
}

fn render_rows<T: Serialize>(rows: &[T], kind: ExportKind, format: ExportFormat) -> Vec<u8> {
    match format {
        ExportFormat::RecordLines => {
            let mut out = Vec::new();
            for row in rows {
                serde_json::to_writer(&mut out, row).expect("records serialize");
                out.push(b'\n');
            }
            out
        }
        ExportFormat::Csv => {
            let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
            writer.write_record(kind.columns()).expect("in-memory write");
            for row in rows {
                writer.serialize(row).expect("records serialize");
            }
            writer.into_inner().expect("in-memory flush")
        }
    }
}

fn parse_rows<T: DeserializeOwned>(kind: ExportKind, format: ExportFormat, bytes: &[u8]) -> Result<Vec<T>, ExportError> {
    match format {
        ExportFormat::RecordLines => bytes
            .split(|b| *b == b'\n')
            .filter(|l| !l.is_empty())
            .enumerate()
            .map(|(i, line)| {
                serde_json::from_slice(line).map_err(|e| ExportError::Parse {
                    record: i + 1,
                    reason: e.to_string(),
                })
            })
            .collect(),
        ExportFormat::Csv => {
            let mut reader = csv::Reader::from_reader(bytes);
            let headers = reader.headers().map_err(|e| ExportError::Parse {
                record: 0,
                reason: e.to_string(),
            })?;
            if !headers.iter().eq(kind.columns().iter().copied()) {
                return Err(ExportError::Header {
                    found: headers.iter().map(str::to_string).collect(),
                });
            }
            reader
                .deserialize()
                .enumerate()
                .map(|(i, row)| {
                    row.map_err(|e| ExportError::Parse {
                        record: i + 1,
                        reason: e.to_string(),
                    })
                })
                .collect()
        }
    }
}

fn created_role(events: &[SessionEvent]) -> Option<Role> {
    events.iter().find_map(|e| match &e.kind {
        EventKind::Created { role, .. } => Some(*role),
        _ => None,
    })
}

fn for_sessions(store: &EventStore) -> impl Iterator<Item = &[SessionEvent]> {
    store.session_ids().iter().filter_map(|id| store.events(id))
}

pub fn transcripts(store: &EventStore) -> Vec<TranscriptRecord> {
    store
        .all_events()
        .filter_map(|e| {
            let (author, text, topic_id) = match &e.kind {
                EventKind::ParticipantMessage { text, topic_id } => (Author::Participant, text, topic_id),
                EventKind::AssistantMessage { text, topic_id } => (Author::Assistant, text, topic_id),
                _ => return None,
            };
            Some(TranscriptRecord {
                session_id: e.session_id.clone(),
                author,
                topic_id: topic_id.clone(),
                text: text.clone(),
                timestamp: e.timestamp,
            })
        })
        .collect()
}

pub fn feedback(store: &EventStore) -> Vec<FeedbackRecord> {
    let mut out = Vec::new();
    for events in for_sessions(store) {
        let Some(role) = created_role(events) else { continue };
        for e in events {
            if let EventKind::FeedbackSubmitted { survey: Some(s) } = &e.kind {
                out.push(FeedbackRecord {
                    session_id: e.session_id.clone(),
                    role,
                    satisfaction: s.satisfaction,
                    reuse_likelihood: s.reuse_likelihood,
                    comprehension: s.comprehension,
                    preference: s.preference,
                    comment: s.comment.clone().filter(|c| !c.trim().is_empty()),
                    submitted_at: e.timestamp,
                });
            }
        }
    }
    out
}

/// Written feedback: form comments plus messages typed at the feedback
/// prompt.
pub fn comments(store: &EventStore) -> Vec<CommentRecord> {
    let mut out = Vec::new();
    for events in for_sessions(store) {
        for (i, e) in events.iter().enumerate() {
            match &e.kind {
                EventKind::FeedbackSubmitted { survey: Some(s) } => {
                    if let Some(c) = s.comment.as_ref().filter(|c| !c.trim().is_empty()) {
                        out.push(CommentRecord {
                            session_id: e.session_id.clone(),
                            source: CommentSource::FeedbackForm,
                            text: c.clone(),
                            timestamp: e.timestamp,
                        });
                    }
                }
                EventKind::ParticipantMessage { text, .. } => {
                    let at_prompt = matches!(
                        events.get(i + 1).map(|n| &n.kind),
                        Some(EventKind::FeedbackSubmitted { survey: None })
                    );
                    if at_prompt {
                        out.push(CommentRecord {
                            session_id: e.session_id.clone(),
                            source: CommentSource::FeedbackMessage,
                            text: text.clone(),
                            timestamp: e.timestamp,
                        });
                    }
                }
                _ => {}
            }
        }
    }
    out
}

pub fn sentiment(store: &EventStore, lexicon: &SentimentLexicon) -> Vec<SentimentRecord> {
    comments(store)
        .into_iter()
        .map(|c| {
            let s = score_text(&c.text, lexicon);
            SentimentRecord {
                session_id: c.session_id,
                source: c.source,
                text: c.text,
                compound: s.compound,
                positive: s.positive,
                neutral: s.neutral,
                negative: s.negative,
                timestamp: c.timestamp,
            }
        })
        .collect()
}

pub fn collect(store: &EventStore, kind: ExportKind, lexicon: &SentimentLexicon) -> ExportRecords {
    match kind {
        ExportKind::Transcripts => ExportRecords::Transcripts(transcripts(store)),
        ExportKind::Feedback => ExportRecords::Feedback(feedback(store)),
        ExportKind::Sentiment => ExportRecords::Sentiment(sentiment(store, lexicon)),
    }
}

pub fn export(store: &EventStore, kind: ExportKind, format: ExportFormat, lexicon: &SentimentLexicon) -> Vec<u8> {
    collect(store, kind, lexicon).render(format)
}

/// Writes an export under `<data_dir>/exports/`, named after the UTC time
/// `at_ms` (milliseconds since the Unix epoch).
pub fn write_export(
    data_dir: impl AsRef<Path>,
    kind: ExportKind,
    format: ExportFormat,
    bytes: &[u8],
    at_ms: i64,
) -> Result<PathBuf, ExportError> {
    let at: DateTime<Utc> = DateTime::from_timestamp_millis(at_ms).unwrap_or_default();
    let dir = data_dir.as_ref().join(EXPORTS_DIR);
    fs::create_dir_all(&dir)?;
    let name = format!(
        "{}-{}.{}",
        kind.as_str(),
        at.format("%Y%m%dT%H%M%S%.3fZ"),
        format.extension()
    );
    let path = dir.join(name);
    fs::write(&path, bytes)?;
    Ok(path)
}
