//! Conversation policy: when to ask for elaboration and how to read topic
//! choices typed as free text.

use serde::{Deserialize, Serialize};

use super::TopicState;
use crate::gateway::GenerationParams;
use crate::sentiment::{score_text, SentimentLexicon};
use crate::survey::Topic;

pub const DEFAULT_ELABORATION_WORD_THRESHOLD: usize = 15;
pub const DEFAULT_DISTRESS_COMPOUND: f64 = -0.4;
pub const MAX_MESSAGE_CHARS: usize = 4000;

const DEFAULT_OPT_OUT_PHRASES: &[&str] = &[
    "i'd rather not",
    "i would rather not",
    "rather not say",
    "rather not talk",
    "skip this",
    "prefer not to",
    "don't want to talk",
    "do not want to talk",
    "not comfortable",
    "uncomfortable talking",
];

const RANDOM_PHRASES: &[&str] = &[
    "random",
    "pick one for me",
    "pick for me",
    "you pick",
    "you choose",
    "surprise me",
    "any of them",
    "dont mind",
    "don't mind",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    /// Replies with fewer words than this may get one elaboration request.
    pub elaboration_word_threshold: usize,
    /// Compound score at or below which a reply counts as distressed.
    pub distress_compound: f64,
    pub opt_out_phrases: Vec<String>,
    pub generation: GenerationParams,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            elaboration_word_threshold: DEFAULT_ELABORATION_WORD_THRESHOLD,
            distress_compound: DEFAULT_DISTRESS_COMPOUND,
            opt_out_phrases: DEFAULT_OPT_OUT_PHRASES.iter().map(|p| p.to_string()).collect(),
            generation: GenerationParams::default(),
        }
    }
}

pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

fn normalize(text: &str) -> String {
    text.to_lowercase().replace(['\u{2019}', '\u{2018}'], "'")
}

/// True iff the topic's elaboration budget is unused, the reply is short, and
/// the reply is not a distressed answer on a sensitive topic.
pub fn needs_elaboration(
    topic_state: &TopicState,
    user_text: &str,
    sensitive: bool,
    distress_signal: bool,
    word_threshold: usize,
) -> bool {
    topic_state.elaboration_requests_sent == 0
        && word_count(user_text) < word_threshold
        && !(sensitive && distress_signal)
}

/// A strongly negative reply or an explicit wish not to go on.
pub fn distress_signal(user_text: &str, lexicon: &SentimentLexicon, policy: &PolicyConfig) -> bool {
    let lowered = normalize(user_text);
    if policy.opt_out_phrases.iter().any(|p| lowered.contains(&normalize(p))) {
        return true;
    }
    score_text(user_text, lexicon).compound <= policy.distress_compound
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TopicMatch {
    Random,
    Topic(String),
    Unclear,
}

fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric() && c != '\'')
        .filter(|w| !w.is_empty())
        .map(|w| w.to_lowercase())
        .collect()
}

fn contains_words(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

/// Reads a free-text topic choice against the offered topics. A single
/// unambiguous title or id mention selects that topic.
pub fn match_topic_choice(text: &str, offered: &[&Topic]) -> TopicMatch {
    let lowered = normalize(text);
    let text_words = words(&lowered);
    let hits: Vec<&Topic> = offered
        .iter()
        .copied()
        .filter(|t| {
            let title = words(&t.title);
            let id = words(&t.id.replace('-', " "));
            contains_words(&text_words, &title) || contains_words(&text_words, &id) || lowered.trim() == t.id
        })
        .collect();
    if hits.len() == 1 {
        return TopicMatch::Topic(hits[0].id.clone());
    }
    if hits.is_empty() && RANDOM_PHRASES.iter().any(|p| lowered.contains(p)) {
        return TopicMatch::Random;
    }
    TopicMatch::Unclear
}
