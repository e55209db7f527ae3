//! Event-sourced persistence: the append-only session log, replay, and
//! flat exports.

mod event;
mod export;
mod store;

pub use event::{ChoiceMode, EventKind, SessionEvent};
pub use export::{
    collect, comments, export, feedback, sentiment, transcripts, write_export, CommentRecord, CommentSource,
    ExportError, ExportFormat, ExportKind, ExportRecords, FeedbackRecord, SentimentRecord, TranscriptRecord,
    EXPORTS_DIR, FEEDBACK_COLUMNS, SENTIMENT_COLUMNS, TRANSCRIPT_COLUMNS,
};
pub use store::{EventStore, ReplayError, StorageError, EVENTS_FILE};

/// Rebuilds a session from its logged events.
pub fn replay_session(store: &EventStore, session_id: &str) -> Result<crate::dialogue::Session, ReplayError> {
    store.replay_session(session_id)
}
