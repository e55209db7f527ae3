//! Append-only newline-delimited event log with an in-memory index.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;
use tracing::warn;

use super::{EventKind, SessionEvent};
use crate::dialogue::{replay, Session};

pub const EVENTS_FILE: &str = "events.ndjson";

#[derive(Debug, Error)]
pub enum StorageError {
    #[error("sequence conflict for session {session_id}: expected seq {expected}, got {found}")]
    SequenceConflict {
        session_id: String,
        expected: u64,
        found: u64,
    },
    #[error("session {0} is closed")]
    SessionClosed(String),
    #[error("invalid event: {0}")]
    InvalidEvent(String),
    #[error("storage is full")]
    StorageFull,
    #[error("corrupt record at line {line}: {reason}")]
    CorruptRecord { line: usize, reason: String },
    #[error("storage I/O error: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("corrupt log at seq {0}")]
    CorruptLog(u64),
}

#[derive(Debug)]
enum Backend {
    Memory,
    File { path: PathBuf, file: File, len: u64 },
}

/// Event log for all sessions. Appends are validated against the session's
/// last sequence number and reach the disk before they are acknowledged.
#[derive(Debug)]
pub struct EventStore {
    backend: Backend,
    sessions: HashMap<String, Vec<SessionEvent>>,
    order: Vec<String>,
}

fn map_write_error(e: io::Error) -> StorageError {
    // ENOSPC and EDQUOT.
    if e.kind() == io::ErrorKind::StorageFull || matches!(e.raw_os_error(), Some(28) | Some(122)) {
        StorageError::StorageFull
    } else {
        StorageError::Io(e)
    }
}

impl EventStore {
    pub fn in_memory() -> Self {
        Self {
            backend: Backend::Memory,
            sessions: HashMap::new(),
            order: Vec::new(),
        }
    }

    /// Opens (or creates) `events.ndjson` under `data_dir`. An incomplete
    /// final record left by a crash is cut off; damage elsewhere is an error.
    pub fn open(data_dir: impl AsRef<Path>) -> Result<Self, StorageError> {
        let dir = data_dir.as_ref();
        fs::create_dir_all(dir)?;
        let path = dir.join(EVENTS_FILE);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(e.into()),
        };
        let mut store = Self::in_memory();
        let mut good_len = 0usize;
        let mut offset = 0usize;
        let mut line_no = 0usize;
        while offset < bytes.len() {
            line_no += 1;
            let Some(rel_end) = bytes[offset..].iter().position(|b| *b == b'\n') else {
                warn!(line = line_no, "discarding incomplete trailing record");
                break;
            };
            let line = &bytes[offset..offset + rel_end];
            let next = offset + rel_end + 1;
            if !line.iter().all(u8::is_ascii_whitespace) {
                match serde_json::from_slice::<SessionEvent>(line) {
                    Ok(event) => store.index(event),
                    Err(e) if next >= bytes.len() => {
                        warn!(line = line_no, error = %e, "discarding unreadable trailing record");
                        break;
                    }
                    Err(e) => {
                        return Err(StorageError::CorruptRecord {
                            line: line_no,
                            reason: e.to_string(),
                        })
                    }
                }
            }
            good_len = next;
            offset = next;
        }
        let file = OpenOptions::new().create(true).read(true).append(true).open(&path)?;
        if good_len < bytes.len() {
            file.set_len(good_len as u64)?;
            file.sync_all()?;
        }
        store.backend = Backend::File {
            path,
            file,
            len: good_len as u64,
        };
        Ok(store)
    }

    fn index(&mut self, event: SessionEvent) {
        let entry = self.sessions.entry(event.session_id.clone()).or_insert_with(|| {
            self.order.push(event.session_id.clone());
            Vec::new()
        });
        entry.push(event);
    }

    pub fn path(&self) -> Option<&Path> {
        match &self.backend {
            Backend::Memory => None,
            Backend::File { path, .. } => Some(path),
        }
    }

    fn check(&self, event: &SessionEvent, last: Option<&SessionEvent>) -> Result<(), StorageError> {
        match last {
            None => {
                if event.seq != 0 {
                    return Err(StorageError::SequenceConflict {
                        session_id: event.session_id.clone(),
                        expected: 0,
                        found: event.seq,
                    });
                }
                if !matches!(event.kind, EventKind::Created { .. }) {
                    return Err(StorageError::InvalidEvent("seq 0 must be a created event".into()));
                }
            }
            Some(last) => {
                if matches!(last.kind, EventKind::Closed) {
                    return Err(StorageError::SessionClosed(event.session_id.clone()));
                }
                if event.seq != last.seq + 1 {
                    return Err(StorageError::SequenceConflict {
                        session_id: event.session_id.clone(),
                        expected: last.seq + 1,
                        found: event.seq,
                    });
                }
                if matches!(event.kind, EventKind::Created { .. }) {
                    return Err(StorageError::InvalidEvent("session already created".into()));
                }
            }
        }
        Ok(())
    }

    pub fn append(&mut self, event: SessionEvent) -> Result<(), StorageError> {
        self.append_all(vec![event])
    }

    /// Appends a batch atomically: either every event is durable or none is.
    pub fn append_all(&mut self, events: Vec<SessionEvent>) -> Result<(), StorageError> {
        if events.is_empty() {
            return Ok(());
        }
        let mut tails: HashMap<&str, &SessionEvent> = HashMap::new();
        for event in &events {
            let last = tails
                .get(event.session_id.as_str())
                .copied()
                .or_else(|| self.sessions.get(&event.session_id).and_then(|v| v.last()));
            self.check(event, last)?;
            tails.insert(&event.session_id, event);
        }
        if let Backend::File { file, len, .. } = &mut self.backend {
            let mut buf = Vec::new();
            for event in &events {
                serde_json::to_writer(&mut buf, event).map_err(|e| StorageError::InvalidEvent(e.to_string()))?;
                buf.push(b'\n');
            }
            let written = file.write_all(&buf).and_then(|_| file.sync_data());
            if let Err(e) = written {
                // Roll back a partial write so the log stays well formed.
                let _ = file.set_len(*len);
                return Err(map_write_error(e));
            }
            *len += buf.len() as u64;
        }
        for event in events {
            self.index(event);
        }
        Ok(())
    }

    pub fn events(&self, session_id: &str) -> Option<&[SessionEvent]> {
        self.sessions.get(session_id).map(Vec::as_slice)
    }

    /// Session ids in order of first appearance.
    pub fn session_ids(&self) -> &[String] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Every event of every session, sessions in order of first appearance.
    pub fn all_events(&self) -> impl Iterator<Item = &SessionEvent> {
        self.order.iter().flat_map(|id| self.sessions[id].iter())
    }

    pub fn replay_session(&self, session_id: &str) -> Result<Session, ReplayError> {
        let events = self
            .events(session_id)
            .ok_or_else(|| ReplayError::UnknownSession(session_id.to_string()))?;
        replay(events).map_err(|e| ReplayError::CorruptLog(e.seq()))
    }
}
