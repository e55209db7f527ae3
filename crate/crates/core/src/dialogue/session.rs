//! Session state and the event fold that produces it.

use indexmap::IndexMap;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::FeedbackSurvey;
use crate::gateway::Author;
use crate::storage::{ChoiceMode, EventKind, SessionEvent};
use crate::survey::{Role, UserProfile};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "name", content = "topic_id", rename_all = "snake_case")]
pub enum Phase {
    NameCapture,
    TopicSelection,
    TopicDiscussion(String),
    FeedbackPrompt,
    Closed,
}

impl Phase {
    pub fn label(&self) -> &'static str {
        match self {
            Phase::NameCapture => "name_capture",
            Phase::TopicSelection => "topic_selection",
            Phase::TopicDiscussion(_) => "topic_discussion",
            Phase::FeedbackPrompt => "feedback_prompt",
            Phase::Closed => "closed",
        }
    }

    /// The permitted phase changes. Staying in the same phase is not a change.
    pub fn can_transition_to(&self, next: &Phase) -> bool {
        matches!(
            (self, next),
            (Phase::NameCapture, Phase::TopicSelection)
                | (Phase::TopicSelection, Phase::TopicDiscussion(_))
                | (Phase::TopicDiscussion(_), Phase::TopicSelection)
                | (Phase::TopicDiscussion(_), Phase::FeedbackPrompt)
                | (Phase::FeedbackPrompt, Phase::Closed)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopicStatus {
    Unvisited,
    Active,
    Completed,
    Skipped,
}

impl TopicStatus {
    pub fn label(self) -> &'static str {
        match self {
            TopicStatus::Unvisited => "not yet discussed",
            TopicStatus::Active => "in progress",
            TopicStatus::Completed => "completed",
            TopicStatus::Skipped => "skipped by the participant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicState {
    pub topic_id: String,
    pub status: TopicStatus,
    pub elaboration_requests_sent: u8,
    pub user_turns: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub author: Author,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic_id: Option<String>,
    pub timestamp: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub profile: UserProfile,
    pub template_id: String,
    pub phase: Phase,
    pub topic_states: IndexMap<String, TopicState>,
    pub history: Vec<Message>,
    pub rng_seed: u64,
    /// Random picks made so far; the next pick reads the stream at this index.
    pub rng_draws: u64,
    pub next_seq: u64,
    pub last_event_at: i64,
    pub feedback: Option<FeedbackSurvey>,
}

impl Session {
    /// Unvisited topic ids in template order.
    pub fn available_topic_ids(&self) -> Vec<&str> {
        self.topic_states
            .values()
            .filter(|t| t.status == TopicStatus::Unvisited)
            .map(|t| t.topic_id.as_str())
            .collect()
    }

    pub fn active_topic(&self) -> Option<&str> {
        match &self.phase {
            Phase::TopicDiscussion(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_closed(&self) -> bool {
        self.phase == Phase::Closed
    }

    /// Topic id a random pick at the current draw index would choose.
    pub fn random_pick(&self) -> Option<&str> {
        let available = self.available_topic_ids();
        if available.is_empty() {
            return None;
        }
        Some(available[random_index(self.rng_seed, self.rng_draws, available.len())])
    }
}

/// The `draw`-th 64-bit output of a ChaCha8 stream seeded from `seed`.
pub fn rng_word(seed: u64, draw: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(u128::from(draw) * 2);
    rng.next_u64()
}

/// Maps draw number `draw` of the session stream onto `0..n`.
pub fn random_index(seed: u64, draw: u64, n: usize) -> usize {
    assert!(n > 0, "random pick needs at least one option");
    (rng_word(seed, draw) % n as u64) as usize
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApplyError {
    #[error("event {seq} is out of sequence, expected {expected}")]
    OutOfSequence { seq: u64, expected: u64 },
    #[error("event {seq} ({kind}) is not valid here: {reason}")]
    Invalid { seq: u64, kind: &'static str, reason: String },
    #[error("log ends before event {expected}")]
    Incomplete { expected: u64 },
}

impl ApplyError {
    /// The first sequence number that cannot be trusted.
    pub fn seq(&self) -> u64 {
        match self {
            ApplyError::OutOfSequence { expected, .. } => *expected,
            ApplyError::Invalid { seq, .. } => *seq,
            ApplyError::Incomplete { expected } => *expected,
        }
    }
}

/// Intermediate fold state: a session exists once its profile is known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SessionFold {
    Empty,
    Created {
        session_id: String,
        role: Role,
        template_id: String,
        topic_ids: Vec<String>,
        rng_seed: u64,
        timestamp: i64,
    },
    Live(Box<Session>),
}

fn invalid(event: &SessionEvent, reason: impl Into<String>) -> ApplyError {
    ApplyError::Invalid {
        seq: event.seq,
        kind: event.kind.name(),
        reason: reason.into(),
    }
}

fn check_text(event: &SessionEvent, text: &str) -> Result<(), ApplyError> {
    if text.trim().is_empty() {
        return Err(invalid(event, "message text is empty"));
    }
    Ok(())
}

/// Moves a session out of discussion once its topic is finished.
fn after_topic(session: &mut Session) {
    session.phase = if session.available_topic_ids().is_empty() {
        Phase::FeedbackPrompt
    } else {
        Phase::TopicSelection
    };
}

fn discussing<'a>(session: &Session, event: &SessionEvent, topic_id: &'a str) -> Result<&'a str, ApplyError> {
    match session.active_topic() {
        Some(active) if active == topic_id => Ok(topic_id),
        _ => Err(invalid(event, format!("topic {topic_id:?} is not under discussion"))),
    }
}

/// Applies one event. Every guard the commands enforce is re-checked here, so
/// a log that violates the dialogue rules is rejected on replay.
pub fn apply(fold: SessionFold, event: &SessionEvent) -> Result<SessionFold, ApplyError> {
    match fold {
        SessionFold::Empty => match &event.kind {
            EventKind::Created {
                role,
                template_id,
                topic_ids,
                rng_seed,
            } => {
                if event.seq != 0 {
                    return Err(ApplyError::OutOfSequence {
                        seq: event.seq,
                        expected: 0,
                    });
                }
                if topic_ids.is_empty() {
                    return Err(invalid(event, "template has no topics"));
                }
                Ok(SessionFold::Created {
                    session_id: event.session_id.clone(),
                    role: *role,
                    template_id: template_id.clone(),
                    topic_ids: topic_ids.clone(),
                    rng_seed: *rng_seed,
                    timestamp: event.timestamp,
                })
            }
            _ if event.seq != 0 => Err(ApplyError::OutOfSequence {
                seq: event.seq,
                expected: 0,
            }),
            _ => Err(invalid(event, "first event must be created")),
        },
        SessionFold::Created {
            session_id,
            role,
            template_id,
            topic_ids,
            rng_seed,
            timestamp,
        } => {
            if event.seq != 1 {
                return Err(ApplyError::OutOfSequence {
                    seq: event.seq,
                    expected: 1,
                });
            }
            if event.session_id != session_id || event.timestamp <= timestamp {
                return Err(invalid(event, "session id or timestamp mismatch"));
            }
            let EventKind::RoleDetailsSet { profile } = &event.kind else {
                return Err(invalid(event, "second event must set role details"));
            };
            if profile.role != role || profile.details.role() != role {
                return Err(invalid(event, "profile role differs from the created role"));
            }
            if profile.preferred_name.is_some() {
                return Err(invalid(event, "preferred name is set only during name capture"));
            }
            let topic_states = topic_ids
                .iter()
                .map(|id| {
                    (
                        id.clone(),
                        TopicState {
                            topic_id: id.clone(),
                            status: TopicStatus::Unvisited,
                            elaboration_requests_sent: 0,
                            user_turns: 0,
                        },
                    )
                })
                .collect::<IndexMap<_, _>>();
            if topic_states.len() != topic_ids.len() {
                return Err(invalid(event, "duplicate topic ids"));
            }
            Ok(SessionFold::Live(Box::new(Session {
                id: session_id,
                profile: profile.clone(),
                template_id,
                phase: Phase::NameCapture,
                topic_states,
                history: Vec::new(),
                rng_seed,
                rng_draws: 0,
                next_seq: 2,
                last_event_at: event.timestamp,
                feedback: None,
            })))
        }
        SessionFold::Live(session) => apply_live(*session, event).map(|s| SessionFold::Live(Box::new(s))),
    }
}

fn apply_live(mut s: Session, event: &SessionEvent) -> Result<Session, ApplyError> {
    if event.seq != s.next_seq {
        return Err(ApplyError::OutOfSequence {
            seq: event.seq,
            expected: s.next_seq,
        });
    }
    if event.session_id != s.id {
        return Err(invalid(event, "event belongs to another session"));
    }
    if event.timestamp <= s.last_event_at {
        return Err(invalid(event, "timestamp does not increase"));
    }
    if s.is_closed() {
        return Err(invalid(event, "session is closed"));
    }
    match &event.kind {
        EventKind::Created { .. } | EventKind::RoleDetailsSet { .. } => {
            return Err(invalid(event, "session already initialised"));
        }
        EventKind::NameSet { preferred_name } => {
            if s.phase != Phase::NameCapture {
                return Err(invalid(event, "name is captured only once, at the start"));
            }
            if let Some(name) = preferred_name {
                if crate::survey::clean_preferred_name(name).as_deref() != Some(name.as_str()) {
                    return Err(invalid(event, "preferred name is not in canonical form"));
                }
            }
            s.profile.preferred_name = preferred_name.clone();
            s.phase = Phase::TopicSelection;
        }
        EventKind::TopicChosen { choice, topic_id } => {
            if s.phase != Phase::TopicSelection {
                return Err(invalid(event, "topics are chosen only during selection"));
            }
            match s.topic_states.get(topic_id) {
                Some(t) if t.status == TopicStatus::Unvisited => {}
                _ => return Err(invalid(event, format!("topic {topic_id:?} is not available"))),
            }
            if *choice == ChoiceMode::Random {
                if s.random_pick() != Some(topic_id.as_str()) {
                    return Err(invalid(event, "random pick does not match the session stream"));
                }
                s.rng_draws += 1;
            }
            s.topic_states[topic_id.as_str()].status = TopicStatus::Active;
            s.phase = Phase::TopicDiscussion(topic_id.clone());
        }
        EventKind::ElaborationIssued { topic_id } => {
            let topic_id = discussing(&s, event, topic_id)?;
            let state = &mut s.topic_states[topic_id];
            if state.elaboration_requests_sent >= 1 {
                return Err(invalid(event, "elaboration budget already used"));
            }
            state.elaboration_requests_sent += 1;
        }
        EventKind::TopicCompleted { topic_id } => {
            let topic_id = discussing(&s, event, topic_id)?;
            s.topic_states[topic_id].status = TopicStatus::Completed;
            after_topic(&mut s);
        }
        EventKind::TopicSwitched { topic_id } => {
            let topic_id = discussing(&s, event, topic_id)?;
            s.topic_states[topic_id].status = TopicStatus::Skipped;
            after_topic(&mut s);
        }
        EventKind::ParticipantMessage { text, topic_id } => {
            check_text(event, text)?;
            if s.history.last().map(|m| m.author) == Some(Author::Participant) {
                return Err(invalid(event, "two participant messages in a row"));
            }
            if let Some(t) = topic_id {
                let t = discussing(&s, event, t)?;
                s.topic_states[t].user_turns += 1;
            }
            s.history.push(Message {
                author: Author::Participant,
                text: text.clone(),
                topic_id: topic_id.clone(),
                timestamp: event.timestamp,
            });
        }
        EventKind::AssistantMessage { text, topic_id } => {
            check_text(event, text)?;
            if let Some(t) = topic_id {
                if !s.topic_states.contains_key(t) {
                    return Err(invalid(event, format!("unknown topic {t:?}")));
                }
            }
            s.history.push(Message {
                author: Author::Assistant,
                text: text.clone(),
                topic_id: topic_id.clone(),
                timestamp: event.timestamp,
            });
        }
        EventKind::FeedbackSubmitted { survey } => {
            if s.phase != Phase::FeedbackPrompt {
                return Err(invalid(event, "feedback is accepted only at the feedback prompt"));
            }
            if s.feedback.is_some() {
                return Err(invalid(event, "feedback already submitted"));
            }
            if let Some(survey) = survey {
                survey.validate().map_err(|e| invalid(event, e.to_string()))?;
            }
            s.feedback = survey.clone();
        }
        EventKind::Closed => {
            if s.phase != Phase::FeedbackPrompt {
                return Err(invalid(event, "sessions close only from the feedback prompt"));
            }
            s.phase = Phase::Closed;
        }
    }
    s.next_seq += 1;
    s.last_event_at = event.timestamp;
    Ok(s)
}

/// Folds a complete event list into a session.
pub fn replay<'a>(events: impl IntoIterator<Item = &'a SessionEvent>) -> Result<Session, ApplyError> {
    let mut fold = SessionFold::Empty;
    for event in events {
        fold = apply(fold, event)?;
    }
    match fold {
        SessionFold::Live(s) => Ok(*s),
        SessionFold::Empty => Err(ApplyError::Incomplete { expected: 0 }),
        SessionFold::Created { .. } => Err(ApplyError::Incomplete { expected: 1 }),
    }
}
