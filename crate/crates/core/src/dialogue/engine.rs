//! Commands that advance a session. Each command validates its input,
//! decides which events to emit, and folds them onto the session with the
//! same `apply` used for replay.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::policy::{distress_signal, match_topic_choice, needs_elaboration, PolicyConfig, TopicMatch, MAX_MESSAGE_CHARS};
use super::session::{apply, ApplyError, Phase, Session, SessionFold};
use super::Clock;
use crate::analytics::{AnalyticsError, FeedbackSurvey};
use crate::gateway::{GatewayError, GenerationRequest, HistoryEntry, ReplySource};
use crate::prompt::{extract_name_sentinel, DirectiveKind, ProgressEntry, PromptBook, PromptError};
use crate::sentiment::SentimentLexicon;
use crate::storage::{ChoiceMode, EventKind, SessionEvent};
use crate::survey::{SurveyTemplate, Topic, UserProfile};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DialogueError {
    #[error("session is closed")]
    SessionClosed,
    #[error("message is empty")]
    EmptyInput,
    #[error("message exceeds {max} characters")]
    MessageTooLong { max: usize },
    #[error("{operation} is not allowed during {phase}")]
    InvalidPhase { phase: &'static str, operation: &'static str },
    #[error("topic {0:?} is not available")]
    TopicUnavailable(String),
    #[error("no topics remain")]
    NoTopicsRemain,
    #[error("session uses template {session:?} but {given:?} was supplied")]
    TemplateMismatch { session: String, given: String },
    #[error("invalid feedback: {0}")]
    InvalidFeedback(AnalyticsError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("internal state error: {0}")]
    Internal(#[from] ApplyError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TopicChoice {
    Topic(String),
    Random,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OfferedTopic {
    pub id: String,
    pub title: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnResult {
    pub assistant_text: String,
    pub new_phase: Phase,
    /// Present (and nonempty) exactly when the new phase is topic selection.
    pub offered_topics: Option<Vec<OfferedTopic>>,
    pub elaboration_requested: bool,
}

/// A command's result: the new session, the events that produced it, and
/// the reply for the participant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub session: Session,
    pub events: Vec<SessionEvent>,
    pub result: TurnResult,
}

/// Topics not yet discussed, in template order.
pub fn available_topics<'t>(session: &Session, template: &'t SurveyTemplate) -> Vec<&'t Topic> {
    session
        .available_topic_ids()
        .into_iter()
        .filter_map(|id| template.topic(id))
        .collect()
}

struct Pending<'c> {
    fold: SessionFold,
    session_id: String,
    next_seq: u64,
    last_at: i64,
    events: Vec<SessionEvent>,
    clock: &'c dyn Clock,
}

impl<'c> Pending<'c> {
    fn new(session: Session, clock: &'c dyn Clock) -> Self {
        Self {
            session_id: session.id.clone(),
            next_seq: session.next_seq,
            last_at: session.last_event_at,
            fold: SessionFold::Live(Box::new(session)),
            events: Vec::new(),
            clock,
        }
    }

    fn emit(&mut self, kind: EventKind) -> Result<(), ApplyError> {
        let timestamp = self.clock.now_ms().max(self.last_at.saturating_add(1));
        let event = SessionEvent {
            session_id: self.session_id.clone(),
            seq: self.next_seq,
            timestamp,
            kind,
        };
        let fold = std::mem::replace(&mut self.fold, SessionFold::Empty);
        self.fold = apply(fold, &event)?;
        self.next_seq += 1;
        self.last_at = timestamp;
        self.events.push(event);
        Ok(())
    }

    fn session(&self) -> &Session {
        match &self.fold {
            SessionFold::Live(s) => s,
            _ => unreachable!("pending commands operate on live sessions"),
        }
    }

    fn finish(self, template: &SurveyTemplate, elaboration_requested: bool) -> Outcome {
        let SessionFold::Live(session) = self.fold else {
            unreachable!("pending commands operate on live sessions")
        };
        let assistant_text = session
            .history
            .iter()
            .rev()
            .find(|m| m.author == crate::gateway::Author::Assistant)
            .map(|m| m.text.clone())
            .unwrap_or_default();
        let offered_topics = (session.phase == Phase::TopicSelection).then(|| {
            available_topics(&session, template)
                .into_iter()
                .map(|t| OfferedTopic {
                    id: t.id.clone(),
                    title: t.title.clone(),
                })
                .collect()
        });
        let result = TurnResult {
            assistant_text,
            new_phase: session.phase.clone(),
            offered_topics,
            elaboration_requested,
        };
        Outcome {
            session: *session,
            events: self.events,
            result,
        }
    }
}

/// Stateless driver holding the shared read-only resources.
#[derive(Clone, Copy)]
pub struct Orchestrator<'a> {
    pub prompts: &'a PromptBook,
    pub lexicon: &'a SentimentLexicon,
    pub policy: &'a PolicyConfig,
    pub clock: &'a dyn Clock,
}

impl<'a> Orchestrator<'a> {
    pub fn new(
        prompts: &'a PromptBook,
        lexicon: &'a SentimentLexicon,
        policy: &'a PolicyConfig,
        clock: &'a dyn Clock,
    ) -> Self {
        Self {
            prompts,
            lexicon,
            policy,
            clock,
        }
    }

    /// Creates a session in name capture with the opening message.
    pub fn start_session(
        &self,
        session_id: &str,
        profile: UserProfile,
        template: &SurveyTemplate,
        seed: u64,
    ) -> Result<Outcome, DialogueError> {
        let created_at = self.clock.now_ms();
        let mut events = vec![SessionEvent {
            session_id: session_id.to_string(),
            seq: 0,
            timestamp: created_at,
            kind: EventKind::Created {
                role: profile.role,
                template_id: template.id.clone(),
                topic_ids: template.topics.iter().map(|t| t.id.clone()).collect(),
                rng_seed: seed,
            },
        }];
        events.push(SessionEvent {
            session_id: session_id.to_string(),
            seq: 1,
            timestamp: self.clock.now_ms().max(created_at + 1),
            kind: EventKind::RoleDetailsSet { profile },
        });
        let mut fold = SessionFold::Empty;
        for e in &events {
            fold = apply(fold, e)?;
        }
        let SessionFold::Live(session) = fold else {
            unreachable!("created and role details yield a live session")
        };
        let mut pending = Pending::new(*session, self.clock);
        pending.events = events;
        pending.emit(EventKind::AssistantMessage {
            text: self.prompts.render_opening(),
            topic_id: None,
        })?;
        Ok(pending.finish(template, false))
    }

    fn check_template(session: &Session, template: &SurveyTemplate) -> Result<(), DialogueError> {
        if session.template_id != template.id {
            return Err(DialogueError::TemplateMismatch {
                session: session.template_id.clone(),
                given: template.id.clone(),
            });
        }
        Ok(())
    }

    fn request(
        &self,
        session: &Session,
        template: &SurveyTemplate,
        directives: Vec<String>,
    ) -> GenerationRequest {
        let progress: Vec<(String, &'static str)> = session
            .topic_states
            .values()
            .filter_map(|s| template.topic(&s.topic_id).map(|t| (t.title.clone(), s.status.label())))
            .collect();
        let entries: Vec<ProgressEntry<'_>> = progress
            .iter()
            .map(|(title, status)| ProgressEntry { title, status })
            .collect();
        let composed = self.prompts.compose_system_prompt(&session.profile, template, &entries);
        GenerationRequest {
            system_text: composed.system_text,
            history: session
                .history
                .iter()
                .map(|m| HistoryEntry {
                    author: m.author,
                    text: m.text.clone(),
                })
                .collect(),
            directive_text: (!directives.is_empty()).then(|| directives.join("\n\n")),
            params: self.policy.generation.clone(),
        }
    }

    fn menu_or_feedback(&self, session: &Session, template: &SurveyTemplate) -> String {
        let topics = available_topics(session, template);
        if topics.is_empty() {
            self.prompts.render_feedback_request()
        } else {
            self.prompts.render_topic_menu(&topics)
        }
    }

    /// Handles one free-text participant message according to the phase.
    pub fn advance_turn(
        &self,
        session: &Session,
        template: &SurveyTemplate,
        user_text: &str,
        gateway: &dyn ReplySource,
    ) -> Result<Outcome, DialogueError> {
        Self::check_template(session, template)?;
        if session.is_closed() {
            return Err(DialogueError::SessionClosed);
        }
        let text = user_text.trim();
        if text.is_empty() {
            return Err(DialogueError::EmptyInput);
        }
        if text.chars().count() > MAX_MESSAGE_CHARS {
            return Err(DialogueError::MessageTooLong { max: MAX_MESSAGE_CHARS });
        }
        let mut pending = Pending::new(session.clone(), self.clock);
        match session.phase.clone() {
            Phase::NameCapture => {
                pending.emit(EventKind::ParticipantMessage {
                    text: text.to_string(),
                    topic_id: None,
                })?;
                let directive = self.prompts.render_directive(DirectiveKind::Greeting, None)?;
                let req = self.request(pending.session(), template, vec![directive]);
                let reply = gateway.generate_reply(&req)?;
                let name = extract_name_sentinel(&reply);
                pending.emit(EventKind::NameSet {
                    preferred_name: name.clone(),
                })?;
                let menu = self.menu_or_feedback(pending.session(), template);
                pending.emit(EventKind::AssistantMessage {
                    text: format!("{}\n\n{}", self.prompts.render_greeting(name.as_deref()), menu),
                    topic_id: None,
                })?;
                Ok(pending.finish(template, false))
            }
            Phase::TopicSelection => {
                pending.emit(EventKind::ParticipantMessage {
                    text: text.to_string(),
                    topic_id: None,
                })?;
                let offered = available_topics(session, template);
                match match_topic_choice(text, &offered) {
                    TopicMatch::Topic(id) => self.choose(pending, template, TopicChoice::Topic(id)),
                    TopicMatch::Random => self.choose(pending, template, TopicChoice::Random),
                    TopicMatch::Unclear => {
                        pending.emit(EventKind::AssistantMessage {
                            text: self.prompts.render_menu_reoffer(&offered),
                            topic_id: None,
                        })?;
                        Ok(pending.finish(template, false))
                    }
                }
            }
            Phase::TopicDiscussion(topic_id) => {
                let topic = template
                    .topic(&topic_id)
                    .ok_or_else(|| DialogueError::TopicUnavailable(topic_id.clone()))?;
                pending.emit(EventKind::ParticipantMessage {
                    text: text.to_string(),
                    topic_id: Some(topic_id.clone()),
                })?;
                let distress = distress_signal(text, self.lexicon, self.policy);
                let state = &session.topic_states[topic_id.as_str()];
                let elaborate = needs_elaboration(
                    state,
                    text,
                    topic.sensitive,
                    distress,
                    self.policy.elaboration_word_threshold,
                );
                let mut directives = vec![self.prompts.render_directive(
                    if elaborate { DirectiveKind::FollowUp } else { DirectiveKind::Empathy },
                    Some(topic),
                )?];
                if topic.sensitive {
                    directives.push(self.prompts.render_directive(DirectiveKind::Sensitive, Some(topic))?);
                }
                let req = self.request(pending.session(), template, directives);
                let reply = gateway.generate_reply(&req)?;
                if elaborate {
                    pending.emit(EventKind::ElaborationIssued {
                        topic_id: topic_id.clone(),
                    })?;
                    pending.emit(EventKind::AssistantMessage {
                        text: reply,
                        topic_id: Some(topic_id),
                    })?;
                } else {
                    pending.emit(EventKind::TopicCompleted {
                        topic_id: topic_id.clone(),
                    })?;
                    let next = self.menu_or_feedback(pending.session(), template);
                    pending.emit(EventKind::AssistantMessage {
                        text: format!("{reply}\n\n{next}"),
                        topic_id: Some(topic_id),
                    })?;
                }
                Ok(pending.finish(template, elaborate))
            }
            Phase::FeedbackPrompt => {
                pending.emit(EventKind::ParticipantMessage {
                    text: text.to_string(),
                    topic_id: None,
                })?;
                pending.emit(EventKind::FeedbackSubmitted { survey: None })?;
                pending.emit(EventKind::AssistantMessage {
                    text: self.prompts.render_closing(),
                    topic_id: None,
                })?;
                pending.emit(EventKind::Closed)?;
                Ok(pending.finish(template, false))
            }
            Phase::Closed => Err(DialogueError::SessionClosed),
        }
    }

    fn choose(&self, mut pending: Pending<'_>, template: &SurveyTemplate, choice: TopicChoice) -> Result<Outcome, DialogueError> {
        let session = pending.session();
        let (mode, topic_id) = match choice {
            TopicChoice::Random => {
                let id = session.random_pick().ok_or(DialogueError::NoTopicsRemain)?;
                (ChoiceMode::Random, id.to_string())
            }
            TopicChoice::Topic(id) => {
                if !session.available_topic_ids().contains(&id.as_str()) {
                    return Err(DialogueError::TopicUnavailable(id));
                }
                (ChoiceMode::Explicit, id)
            }
        };
        let topic = template
            .topic(&topic_id)
            .ok_or_else(|| DialogueError::TopicUnavailable(topic_id.clone()))?;
        pending.emit(EventKind::TopicChosen {
            choice: mode,
            topic_id: topic_id.clone(),
        })?;
        pending.emit(EventKind::AssistantMessage {
            text: self.prompts.render_topic_opening(topic),
            topic_id: Some(topic_id),
        })?;
        Ok(pending.finish(template, false))
    }

    /// Starts discussing a chosen or randomly drawn topic.
    pub fn select_topic(
        &self,
        session: &Session,
        template: &SurveyTemplate,
        choice: TopicChoice,
    ) -> Result<Outcome, DialogueError> {
        Self::check_template(session, template)?;
        match session.phase {
            Phase::Closed => return Err(DialogueError::SessionClosed),
            Phase::TopicSelection => {}
            ref other => {
                return Err(DialogueError::InvalidPhase {
                    phase: other.label(),
                    operation: "topic selection",
                })
            }
        }
        self.choose(Pending::new(session.clone(), self.clock), template, choice)
    }

    /// Leaves the current topic and offers the ones not yet discussed.
    pub fn request_topic_switch(&self, session: &Session, template: &SurveyTemplate) -> Result<Outcome, DialogueError> {
        Self::check_template(session, template)?;
        let topic_id = match &session.phase {
            Phase::Closed => return Err(DialogueError::SessionClosed),
            Phase::TopicDiscussion(t) => t.clone(),
            other => {
                return Err(DialogueError::InvalidPhase {
                    phase: other.label(),
                    operation: "switching topics",
                })
            }
        };
        let mut pending = Pending::new(session.clone(), self.clock);
        pending.emit(EventKind::TopicSwitched { topic_id })?;
        let next = self.menu_or_feedback(pending.session(), template);
        pending.emit(EventKind::AssistantMessage {
            text: next,
            topic_id: None,
        })?;
        Ok(pending.finish(template, false))
    }

    /// Records the feedback questionnaire and closes the session.
    pub fn submit_feedback(
        &self,
        session: &Session,
        template: &SurveyTemplate,
        survey: FeedbackSurvey,
    ) -> Result<Outcome, DialogueError> {
        Self::check_template(session, template)?;
        match session.phase {
            Phase::Closed => return Err(DialogueError::SessionClosed),
            Phase::FeedbackPrompt => {}
            ref other => {
                return Err(DialogueError::InvalidPhase {
                    phase: other.label(),
                    operation: "feedback submission",
                })
            }
        }
        survey.validate().map_err(DialogueError::InvalidFeedback)?;
        let mut pending = Pending::new(session.clone(), self.clock);
        pending.emit(EventKind::FeedbackSubmitted { survey: Some(survey) })?;
        pending.emit(EventKind::AssistantMessage {
            text: self.prompts.render_closing(),
            topic_id: None,
        })?;
        pending.emit(EventKind::Closed)?;
        Ok(pending.finish(template, false))
    }
}
