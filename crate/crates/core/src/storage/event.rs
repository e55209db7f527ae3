use serde::{Deserialize, Serialize};

use crate::analytics::FeedbackSurvey;
use crate::survey::{Role, UserProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChoiceMode {
    Explicit,
    Random,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum EventKind {
    Created {
        role: Role,
        template_id: String,
        /// Topic ids of the template at creation, in template order.
        topic_ids: Vec<String>,
        rng_seed: u64,
    },
    RoleDetailsSet {
        profile: UserProfile,
    },
    NameSet {
        preferred_name: Option<String>,
    },
    TopicChosen {
        choice: ChoiceMode,
        topic_id: String,
    },
    TopicSwitched {
        topic_id: String,
    },
    TopicCompleted {
        topic_id: String,
    },
    ParticipantMessage {
        text: String,
        topic_id: Option<String>,
    },
    AssistantMessage {
        text: String,
        topic_id: Option<String>,
    },
    ElaborationIssued {
        topic_id: String,
    },
    FeedbackSubmitted {
        survey: Option<FeedbackSurvey>,
    },
    Closed,
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::Created { .. } => "created",
            EventKind::RoleDetailsSet { .. } => "role_details_set",
            EventKind::NameSet { .. } => "name_set",
            EventKind::TopicChosen { .. } => "topic_chosen",
            EventKind::TopicSwitched { .. } => "topic_switched",
            EventKind::TopicCompleted { .. } => "topic_completed",
            EventKind::ParticipantMessage { .. } => "participant_message",
            EventKind::AssistantMessage { .. } => "assistant_message",
            EventKind::ElaborationIssued { .. } => "elaboration_issued",
            EventKind::FeedbackSubmitted { .. } => "feedback_submitted",
            EventKind::Closed => "closed",
        }
    }
}

/// One record of the append-only log. `timestamp` is milliseconds since the
/// Unix epoch and strictly increases within a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionEvent {
    pub session_id: String,
    pub seq: u64,
    pub timestamp: i64,
    #[serde(flatten)]
    pub kind: EventKind,
}
