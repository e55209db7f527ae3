//! Randomized session driver shared by the dialogue and storage suites.
#![allow(dead_code)]

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pulsechat_core::analytics::{
    Comprehension, FeedbackSurvey, LikertScale, Preference, ReuseLikelihood, Satisfaction,
};
use pulsechat_core::dialogue::{
    apply, available_topics, DialogueError, Orchestrator, Outcome, Phase, PolicyConfig, Session, SessionFold,
    StepClock, TopicChoice, TopicStatus,
};
use pulsechat_core::prompt::count_bold_segments;
use pulsechat_core::gateway::{GatewayError, ScriptedProvider};
use pulsechat_core::prompt::PromptBook;
use pulsechat_core::sentiment::SentimentLexicon;
use pulsechat_core::storage::SessionEvent;
use pulsechat_core::survey::{
    default_staff_samples, enumerate_details, resolve_template, SurveyTemplate, TemplateRegistry, UserProfile,
};

pub const PARTICIPANT_TEXTS: &[&str] = &[
    "ok",
    "fine I guess",
    "   ",
    "It has honestly been a mixed semester, with some great classes, some stressful deadlines, and a lot of late nights in the library.",
    "I'd rather not say",
    "This is horrible and awful, I hate how unfair everything has been.",
    "surprise me",
    "random",
    "let's talk about work life balance",
    "academic life please",
    "financial aid",
    "campus inclusivity",
    "call me Jordan",
    "no idea",
    "The advisors were kind and responsive, and I felt supported whenever I needed help with planning my courses.",
];

pub const REPLIES: &[&str] = &[
    "[[name:Alex]]",
    "[[name:]]",
    "Thanks for sharing that with me.",
    "Could you tell me a bit more about that?",
    "I hear you. That sounds difficult.",
];

pub struct Env {
    pub prompts: PromptBook,
    pub lexicon: SentimentLexicon,
    pub policy: PolicyConfig,
    pub clock: StepClock,
    pub registry: TemplateRegistry,
}

impl Env {
    pub fn new() -> Self {
        Self {
            prompts: PromptBook::shipped(),
            lexicon: SentimentLexicon::shipped(),
            policy: PolicyConfig::default(),
            clock: StepClock::new(1_700_000_000_000, 250),
            registry: TemplateRegistry::shipped(),
        }
    }

    pub fn orch(&self) -> Orchestrator<'_> {
        Orchestrator::new(&self.prompts, &self.lexicon, &self.policy, &self.clock)
    }
}

#[derive(Debug, Clone)]
pub enum Action {
    Turn(String),
    Select(TopicChoice),
    Switch,
    Feedback(FeedbackSurvey),
}

pub struct Step {
    pub before: Session,
    pub action: Action,
    pub outcome: Result<Outcome, DialogueError>,
}

pub struct Run {
    pub template_id: String,
    pub session: Session,
    pub events: Vec<SessionEvent>,
    pub steps: Vec<Step>,
}

pub fn pick<'a, T>(rng: &mut ChaCha8Rng, items: &'a [T]) -> &'a T {
    &items[(rng.next_u64() % items.len() as u64) as usize]
}

fn chance(rng: &mut ChaCha8Rng, percent: u64) -> bool {
    rng.next_u64() % 100 < percent
}

pub fn random_profile(rng: &mut ChaCha8Rng) -> UserProfile {
    let all = enumerate_details(&default_staff_samples());
    let details = pick(rng, &all).clone();
    UserProfile {
        role: details.role(),
        details,
        preferred_name: None,
        context_notes: None,
    }
}

pub fn random_survey(rng: &mut ChaCha8Rng) -> FeedbackSurvey {
    let comments = [None, Some("It was fine but a bit slow."), Some("Loved it, very easy to use!")];
    FeedbackSurvey {
        satisfaction: *pick(rng, &Satisfaction::LEVELS),
        reuse_likelihood: *pick(rng, &ReuseLikelihood::LEVELS),
        comprehension: *pick(rng, &Comprehension::LEVELS),
        preference: *pick(rng, &Preference::ALL),
        comment: pick(rng, &comments).map(str::to_string),
    }
}

fn choose_action(rng: &mut ChaCha8Rng, session: &Session, template: &SurveyTemplate) -> Action {
    let any_topic = || TopicChoice::Topic(String::new());
    let random_topic = |rng: &mut ChaCha8Rng| {
        if chance(rng, 30) {
            TopicChoice::Random
        } else {
            TopicChoice::Topic(pick(rng, &template.topics).id.clone())
        }
    };
    let text = |rng: &mut ChaCha8Rng| Action::Turn(pick(rng, PARTICIPANT_TEXTS).to_string());
    if chance(rng, 10) {
        // Deliberately out-of-place commands.
        return match rng.next_u64() % 3 {
            0 => Action::Switch,
            1 => Action::Feedback(random_survey(rng)),
            _ => Action::Select(if chance(rng, 50) { any_topic() } else { random_topic(rng) }),
        };
    }
    match session.phase {
        Phase::NameCapture => text(rng),
        Phase::TopicSelection if chance(rng, 50) => Action::Select(random_topic(rng)),
        Phase::TopicSelection => text(rng),
        Phase::TopicDiscussion(_) if chance(rng, 25) => Action::Switch,
        Phase::TopicDiscussion(_) => text(rng),
        Phase::FeedbackPrompt if chance(rng, 70) => Action::Feedback(random_survey(rng)),
        Phase::FeedbackPrompt | Phase::Closed => text(rng),
    }
}

pub fn execute(env: &Env, session: &Session, template: &SurveyTemplate, action: &Action, gw: &ScriptedProvider) -> Result<Outcome, DialogueError> {
    let o = env.orch();
    match action {
        Action::Turn(text) => o.advance_turn(session, template, text, gw),
        Action::Select(choice) => o.select_topic(session, template, choice.clone()),
        Action::Switch => o.request_topic_switch(session, template),
        Action::Feedback(survey) => o.submit_feedback(session, template, survey.clone()),
    }
}

/// Errors a well-behaved client can provoke. Anything else is a defect.
pub fn expected_error(err: &DialogueError) -> bool {
    matches!(
        err,
        DialogueError::SessionClosed
            | DialogueError::EmptyInput
            | DialogueError::InvalidPhase { .. }
            | DialogueError::TopicUnavailable(_)
            | DialogueError::Gateway(GatewayError::ScriptExhausted { .. })
    )
}

/// Drives one session with random commands until it closes (plus a few
/// attempts afterwards) or the step budget runs out.
pub fn run_session(env: &Env, rng_seed: u64, session_id: &str) -> Run {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let profile = random_profile(&mut rng);
    let template = resolve_template(&profile, &env.registry).expect("every profile resolves");
    let script: Vec<String> = (0..60).map(|_| pick(&mut rng, REPLIES).to_string()).collect();
    let gw = ScriptedProvider::new(script);
    let start = env
        .orch()
        .start_session(session_id, profile, template, rng.next_u64())
        .expect("start");
    let mut events = start.events;
    let mut session = start.session;
    let mut steps = Vec::new();
    let mut after_close = 0;
    for _ in 0..80 {
        if session.is_closed() {
            if after_close == 3 {
                break;
            }
            after_close += 1;
        }
        let action = choose_action(&mut rng, &session, template);
        let before = session.clone();
        let outcome = execute(env, &session, template, &action, &gw);
        if let Ok(out) = &outcome {
            events.extend(out.events.iter().cloned());
            session = out.session.clone();
        }
        steps.push(Step {
            before,
            action,
            outcome,
        });
    }
    Run {
        template_id: template.id.clone(),
        session,
        events,
        steps,
    }
}

/// Invariant tallies for one or more runs.
#[derive(Debug, Default)]
pub struct InvariantReport {
    pub violations: Vec<String>,
    pub closed: usize,
    pub topic_starts: usize,
}

/// Checks every step of a run: (a) at most one elaboration per topic, (b)
/// only allowed phase edges, (c) offers equal the unvisited topics, (d) one
/// bold main question per topic start, (e) nothing accepted after closing.
pub fn check_run(env: &Env, run: &Run, report: &mut InvariantReport) {
    let template = env.registry.get(&run.template_id).unwrap();
    for (i, step) in run.steps.iter().enumerate() {
        let ctx = format!("{} step {i} {:?}", run.session.id, step.action);
        let out = match &step.outcome {
            Ok(out) => out,
            Err(e) => {
                if !expected_error(e) {
                    report.violations.push(format!("{ctx}: unexpected error {e}"));
                }
                if step.before.is_closed() && *e != DialogueError::SessionClosed {
                    report.violations.push(format!("{ctx}: closed session answered with {e}"));
                }
                continue;
            }
        };
        // (e) nothing is accepted after closing.
        if step.before.is_closed() {
            report.violations.push(format!("{ctx}: closed session accepted a command"));
        }
        // (b) every event moves along an allowed edge, and folding the
        // events reproduces the returned session.
        let mut fold = Some(SessionFold::Live(Box::new(step.before.clone())));
        let mut phase = step.before.phase.clone();
        for event in &out.events {
            match apply(fold.take().unwrap(), event) {
                Ok(f) => fold = Some(f),
                Err(e) => {
                    report.violations.push(format!("{ctx}: event rejected: {e}"));
                    break;
                }
            }
            if let Some(SessionFold::Live(s)) = &fold {
                if s.phase != phase && !phase.can_transition_to(&s.phase) {
                    report.violations.push(format!("{ctx}: illegal edge {:?} -> {:?}", phase, s.phase));
                }
                phase = s.phase.clone();
            }
        }
        if !matches!(&fold, Some(SessionFold::Live(s)) if **s == out.session) {
            report.violations.push(format!("{ctx}: folded events differ from returned session"));
        }
        // (a) at most one elaboration request per topic.
        for state in out.session.topic_states.values() {
            if state.elaboration_requests_sent > 1 {
                report.violations.push(format!("{ctx}: {} probed {} times", state.topic_id, state.elaboration_requests_sent));
            }
        }
        // (c) any offer lists exactly the unvisited topics.
        if let Some(offered) = &out.result.offered_topics {
            let ids: Vec<&str> = offered.iter().map(|t| t.id.as_str()).collect();
            let expected: Vec<&str> = available_topics(&out.session, template).iter().map(|t| t.id.as_str()).collect();
            let unvisited: Vec<&str> = out
                .session
                .topic_states
                .values()
                .filter(|t| t.status == TopicStatus::Unvisited)
                .map(|t| t.topic_id.as_str())
                .collect();
            if ids != expected || ids != unvisited || ids.is_empty() {
                report.violations.push(format!("{ctx}: offered {ids:?}, unvisited {unvisited:?}"));
            }
        }
        if (out.result.new_phase == Phase::TopicSelection) != out.result.offered_topics.is_some() {
            report.violations.push(format!("{ctx}: offer presence disagrees with phase"));
        }
        // (d) starting a topic shows exactly one bold main question.
        if let Phase::TopicDiscussion(topic) = &out.result.new_phase {
            if step.before.phase != out.result.new_phase {
                report.topic_starts += 1;
                let text = &out.result.assistant_text;
                let question = &template.topic(topic).unwrap().main_question;
                if count_bold_segments(text) != 1 || !text.contains(&format!("**{question}**")) {
                    report.violations.push(format!("{ctx}: main question turn has wrong emphasis: {text:?}"));
                }
            }
        }
        if out.session.phase != out.result.new_phase {
            report.violations.push(format!("{ctx}: reported phase differs from session"));
        }
    }
    if run.session.is_closed() {
        report.closed += 1;
    }
}
