//! The survey conversation as a state machine over session events.
//!
//! Phases run name capture, topic selection, topic discussion, the feedback
//! prompt, and finally closed. Commands never mutate in place: they return
//! the events to persist together with the session those events produce.

mod clock;
mod engine;
mod policy;
mod session;

pub use clock::{Clock, StepClock, SystemClock};
pub use engine::{available_topics, DialogueError, OfferedTopic, Orchestrator, Outcome, TopicChoice, TurnResult};
pub use policy::{
    distress_signal, match_topic_choice, needs_elaboration, word_count, PolicyConfig, TopicMatch,
    DEFAULT_DISTRESS_COMPOUND, DEFAULT_ELABORATION_WORD_THRESHOLD, MAX_MESSAGE_CHARS,
};
pub use session::{
    apply, random_index, replay, rng_word, ApplyError, Message, Phase, Session, SessionFold, TopicState,
    TopicStatus,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{Comprehension, FeedbackSurvey, Preference, ReuseLikelihood, Satisfaction};
    use crate::gateway::ScriptedProvider;
    use crate::prompt::{count_bold_segments, PromptBook};
    use crate::sentiment::SentimentLexicon;
    use crate::survey::{DegreeLevel, RoleDetails, SurveyTemplate, TemplateRegistry, UserProfile};
    use crate::survey::{resolve_template, Role};

    struct Fixture {
        prompts: PromptBook,
        lexicon: SentimentLexicon,
        policy: PolicyConfig,
        clock: StepClock,
        registry: TemplateRegistry,
    }

    impl Fixture {
        fn new() -> Self {
            Self {
                prompts: PromptBook::shipped(),
                lexicon: SentimentLexicon::shipped(),
                policy: PolicyConfig::default(),
                clock: StepClock::new(1_700_000_000_000, 1000),
                registry: TemplateRegistry::shipped(),
            }
        }

        fn orch(&self) -> Orchestrator<'_> {
            Orchestrator::new(&self.prompts, &self.lexicon, &self.policy, &self.clock)
        }

        fn template(&self) -> &SurveyTemplate {
            resolve_template(&profile(), &self.registry).unwrap()
        }
    }

    fn profile() -> UserProfile {
        UserProfile {
            role: Role::Student,
            details: RoleDetails::Student {
                degree_level: DegreeLevel::Undergraduate,
                international: true,
            },
            preferred_name: None,
            context_notes: None,
        }
    }

    fn survey() -> FeedbackSurvey {
        FeedbackSurvey {
            satisfaction: Satisfaction::SomewhatSatisfied,
            reuse_likelihood: ReuseLikelihood::VeryLikely,
            comprehension: Comprehension::VeryWell,
            preference: Preference::Chatbot,
            comment: None,
        }
    }

    fn named(fx: &Fixture, reply: &str) -> Session {
        let o = fx.orch();
        let start = o.start_session("s1", profile(), fx.template(), 7).unwrap();
        let gw = ScriptedProvider::new(vec![reply.to_string()]);
        o.advance_turn(&start.session, fx.template(), "call me Sam", &gw).unwrap().session
    }

    #[test]
    fn opening_asks_only_for_a_name() {
        let fx = Fixture::new();
        let out = fx.orch().start_session("s1", profile(), fx.template(), 7).unwrap();
        assert_eq!(out.session.phase, Phase::NameCapture);
        assert_eq!(count_bold_segments(&out.result.assistant_text), 0);
        assert!(out.result.assistant_text.contains("name"));
        assert!(out.session.topic_states.values().all(|t| t.status == TopicStatus::Unvisited));
        assert_eq!(out.events.len(), 3);
        assert_eq!(fx.template().id, "student-undergrad");
        let again = Fixture::new().orch().start_session("s1", profile(), fx.template(), 7).unwrap();
        assert_eq!(again.result.assistant_text, out.result.assistant_text);
    }

    #[test]
    fn name_capture_moves_to_selection() {
        let fx = Fixture::new();
        let s = named(&fx, "[[name:Sam]]");
        assert_eq!(s.profile.preferred_name.as_deref(), Some("Sam"));
        assert_eq!(s.phase, Phase::TopicSelection);
        assert_eq!(s.available_topic_ids().len(), 5);
        let generic = named(&fx, "[[name:]]");
        assert_eq!(generic.profile.preferred_name, None);
        assert!(generic.history.last().unwrap().text.starts_with("Hey there"));
    }

    #[test]
    fn elaboration_once_per_topic() {
        let fx = Fixture::new();
        let o = fx.orch();
        let t = fx.template();
        let s = named(&fx, "[[name:Sam]]");
        let s = o.select_topic(&s, t, TopicChoice::Topic("financial-aid".into())).unwrap().session;
        let gw = ScriptedProvider::new(vec!["Could you tell me more about that?".into(), "Thanks for sharing.".into()]);
        let first = o.advance_turn(&s, t, "it's fine", &gw).unwrap();
        assert!(first.result.elaboration_requested);
        assert_eq!(first.session.topic_states["financial-aid"].elaboration_requests_sent, 1);
        let second = o.advance_turn(&first.session, t, "still fine", &gw).unwrap();
        assert!(!second.result.elaboration_requested);
        assert_eq!(second.session.topic_states["financial-aid"].status, TopicStatus::Completed);
        assert_eq!(second.result.new_phase, Phase::TopicSelection);
        assert_eq!(second.result.offered_topics.as_ref().unwrap().len(), 4);
    }

    #[test]
    fn selection_guards_and_bold_question() {
        let fx = Fixture::new();
        let o = fx.orch();
        let t = fx.template();
        let s = named(&fx, "[[name:Sam]]");
        let out = o.select_topic(&s, t, TopicChoice::Topic("campus-inclusivity".into())).unwrap();
        assert_eq!(out.result.new_phase, Phase::TopicDiscussion("campus-inclusivity".into()));
        assert_eq!(count_bold_segments(&out.result.assistant_text), 1);
        assert!(out.result.offered_topics.is_none());
        let err = o.select_topic(&out.session, t, TopicChoice::Topic("academic-life".into()));
        assert!(matches!(err, Err(DialogueError::InvalidPhase { .. })));
        let switched = o.request_topic_switch(&out.session, t).unwrap().session;
        assert_eq!(
            o.select_topic(&switched, t, TopicChoice::Topic("campus-inclusivity".into())),
            Err(DialogueError::TopicUnavailable("campus-inclusivity".into()))
        );
    }

    #[test]
    fn switch_guards_and_exhaustion() {
        let fx = Fixture::new();
        let o = fx.orch();
        let t = fx.template();
        let start = o.start_session("s1", profile(), t, 7).unwrap().session;
        assert!(matches!(
            o.request_topic_switch(&start, t),
            Err(DialogueError::InvalidPhase { phase: "name_capture", .. })
        ));
        let mut s = named(&fx, "[[name:Sam]]");
        for _ in 0..4 {
            s = o.select_topic(&s, t, TopicChoice::Random).unwrap().session;
            let out = o.request_topic_switch(&s, t).unwrap();
            assert_eq!(
                out.result.offered_topics.as_ref().unwrap().iter().map(|x| x.id.as_str()).collect::<Vec<_>>(),
                out.session.available_topic_ids()
            );
            s = out.session;
        }
        s = o.select_topic(&s, t, TopicChoice::Random).unwrap().session;
        let last = o.request_topic_switch(&s, t).unwrap();
        assert_eq!(last.result.new_phase, Phase::FeedbackPrompt);
        assert!(last.result.offered_topics.is_none());
        assert_eq!(s.rng_draws, 5);
    }

    #[test]
    fn sensitive_distress_is_not_probed() {
        let fx = Fixture::new();
        let o = fx.orch();
        let t = fx.template();
        let s = named(&fx, "[[name:Sam]]");
        let s = o.select_topic(&s, t, TopicChoice::Topic("unfair-treatment".into())).unwrap();
        let opening = &s.result.assistant_text;
        assert!(opening.contains(t.topic("unfair-treatment").unwrap().support_resources.as_deref().unwrap()));
        let gw = ScriptedProvider::new(vec!["That sounds really hard, thank you for trusting me.".into()]);
        let out = o.advance_turn(&s.session, t, "I'd rather not say", &gw).unwrap();
        assert!(!out.result.elaboration_requested);
        assert_eq!(out.session.topic_states["unfair-treatment"].status, TopicStatus::Completed);
    }

    #[test]
    fn closed_sessions_reject_everything() {
        let fx = Fixture::new();
        let o = fx.orch();
        let t = fx.template();
        let mut s = named(&fx, "[[name:Sam]]");
        for _ in 0..5 {
            s = o.select_topic(&s, t, TopicChoice::Random).unwrap().session;
            s = o.request_topic_switch(&s, t).unwrap().session;
        }
        assert_eq!(s.phase, Phase::FeedbackPrompt);
        let closed = o.submit_feedback(&s, t, survey()).unwrap();
        assert_eq!(closed.result.new_phase, Phase::Closed);
        let c = closed.session;
        let gw = ScriptedProvider::new(vec!["x".into()]);
        assert_eq!(o.advance_turn(&c, t, "hello", &gw), Err(DialogueError::SessionClosed));
        assert_eq!(o.request_topic_switch(&c, t), Err(DialogueError::SessionClosed));
        assert_eq!(o.select_topic(&c, t, TopicChoice::Random), Err(DialogueError::SessionClosed));
        assert_eq!(o.submit_feedback(&c, t, survey()), Err(DialogueError::SessionClosed));
    }

    #[test]
    fn empty_input_and_replay_equality() {
        let fx = Fixture::new();
        let o = fx.orch();
        let t = fx.template();
        let start = o.start_session("s1", profile(), t, 7).unwrap();
        let gw = ScriptedProvider::new(vec!["[[name:Sam]]".into()]);
        assert_eq!(o.advance_turn(&start.session, t, "   ", &gw), Err(DialogueError::EmptyInput));
        let next = o.advance_turn(&start.session, t, "Sam", &gw).unwrap();
        let mut log = start.events.clone();
        log.extend(next.events.clone());
        assert_eq!(replay(&log).unwrap(), next.session);
    }

    #[test]
    fn free_text_topic_choice() {
        let fx = Fixture::new();
        let o = fx.orch();
        let t = fx.template();
        let s = named(&fx, "[[name:Sam]]");
        let gw = ScriptedProvider::new(vec![]);
        let unclear = o.advance_turn(&s, t, "hmm not sure", &gw).unwrap();
        assert_eq!(unclear.result.new_phase, Phase::TopicSelection);
        assert_eq!(unclear.result.offered_topics.as_ref().unwrap().len(), 5);
        let chosen = o.advance_turn(&unclear.session, t, "financial aid", &gw).unwrap();
        assert_eq!(chosen.result.new_phase, Phase::TopicDiscussion("financial-aid".into()));
        let random = o.advance_turn(&unclear.session, t, "pick one for me", &gw).unwrap();
        assert_eq!(random.session.rng_draws, 1);
    }
}
