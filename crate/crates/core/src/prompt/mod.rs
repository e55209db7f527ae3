//! Provider-facing prompt text and the fixed assistant messages.
//!
//! Every text comes from a versioned prompt file of named-slot templates.
//! All rendering is pure: identical inputs give identical output.

mod template;

pub use template::SlotTemplate;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::survey::{SurveyTemplate, Topic, UserProfile};

const SHIPPED_PROMPTS: &str = include_str!("../../config/prompts.toml");

pub const PROMPT_FILE_VERSION: u32 = 1;
pub const MAX_SYSTEM_PROMPT_CHARS: usize = 4000;
pub const MAX_EMOJIS_PER_TURN: usize = 2;
pub const PROFILE_BLOCK_OPEN: &str = "<participant_profile>";
pub const NAME_SENTINEL_OPEN: &str = "[[name:";
pub const NAME_SENTINEL_CLOSE: &str = "]]";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("prompt file could not be parsed: {0}")]
    Parse(String),
    #[error("unsupported prompt file version {found}, expected {expected}")]
    Version { found: u32, expected: u32 },
    #[error("prompt file is missing template {0:?}")]
    MissingTemplate(String),
    #[error("prompt file has unknown template {0:?}")]
    UnknownTemplate(String),
    #[error("template {template:?} uses unknown slot {slot:?}")]
    UnknownSlot { template: String, slot: String },
    #[error("template {template:?} has an unterminated slot")]
    Unterminated { template: String },
    #[error("template {template:?} is invalid: {reason}")]
    Invalid { template: String, reason: String },
    #[error("a sensitive directive needs a topic marked sensitive")]
    DirectiveTopicMismatch,
    #[error("directive {0:?} needs a topic")]
    TopicRequired(DirectiveKind),
    #[error("prompt file could not be read: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectiveKind {
    Empathy,
    FollowUp,
    Sensitive,
    Greeting,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComposedPrompt {
    pub system_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directive_text: Option<String>,
}

/// One line of the progress summary given to the provider.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProgressEntry<'a> {
    pub title: &'a str,
    pub status: &'a str,
}

const TOPIC_SLOTS: &[&str] = &["topic.title", "topic.main_question", "topic.guidance_example"];
const PROFILE_SLOTS: &[&str] = &[
    "profile.role",
    "profile.details",
    "profile.preferred_name",
    "profile.context_notes",
];

/// Template names with the slots each one accepts.
const SCHEMA: &[(&str, &[&str])] = &[
    ("system", &["profile", "address", "topics", "progress"]),
    ("profile_block", PROFILE_SLOTS),
    ("address_named", &["profile.preferred_name"]),
    ("address_generic", &[]),
    ("topic_line", &["topic.title"]),
    ("progress_header", &[]),
    ("progress_line", &["topic.title", "topic.status"]),
    ("opening", &[]),
    ("greeting_named", &["name"]),
    ("greeting_generic", &[]),
    ("topic_menu", &["topics"]),
    ("menu_item", &["topic.title"]),
    ("menu_reoffer", &["topics"]),
    ("main_question", TOPIC_SLOTS),
    ("sensitive_note", &["topic.title", "topic.support_resources"]),
    ("directive_greeting", &[]),
    ("directive_empathy", &["topic.title"]),
    ("directive_followup", &["topic.title"]),
    ("directive_sensitive", &["topic.title", "topic.support_resources"]),
    ("feedback_request", &[]),
    ("closing", &[]),
];

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PromptFile {
    version: u32,
    templates: BTreeMap<String, String>,
}

/// The loaded set of prompt templates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptBook {
    templates: BTreeMap<&'static str, SlotTemplate>,
}

/// Counts non-overlapping `**text**` segments whose inner text has no `*`,
/// scanning left to right.
pub fn count_bold_segments(text: &str) -> usize {
    let bytes = text.as_bytes();
    let mut count = 0;
    let mut i = 0;
    while i + 1 < bytes.len() {
        if bytes[i] == b'*' && bytes[i + 1] == b'*' {
            let inner_start = i + 2;
            let mut j = inner_start;
            while j < bytes.len() && bytes[j] != b'*' {
                j += 1;
            }
            if j > inner_start && j + 1 < bytes.len() && bytes[j + 1] == b'*' {
                count += 1;
                i = j + 2;
                continue;
            }
        }
        i += 1;
    }
    count
}

/// Removes control characters other than newline and tab.
pub fn strip_control_chars(text: &str) -> String {
    text.chars()
        .filter(|c| !c.is_control() || *c == '\n' || *c == '\t')
        .collect()
}

/// Profile values are user supplied; keep them from forging markup or the
/// profile block delimiters.
fn clean_field(text: &str) -> String {
    text.chars()
        .filter(|c| !c.is_control() && !matches!(c, '*' | '<' | '>' | '`'))
        .collect::<String>()
        .trim()
        .to_string()
}

fn clean_topic_field(text: &str) -> String {
    text.replace('*', "").trim().to_string()
}

/// Extracts the name the provider returned between `[[name:` and `]]`.
/// Returns `None` when there is no sentinel or it is empty.
pub fn extract_name_sentinel(reply: &str) -> Option<String> {
    let start = reply.find(NAME_SENTINEL_OPEN)? + NAME_SENTINEL_OPEN.len();
    let len = reply[start..].find(NAME_SENTINEL_CLOSE)?;
    crate::survey::clean_preferred_name(&reply[start..start + len])
}

fn topic_values(topic: &Topic) -> BTreeMap<&'static str, String> {
    BTreeMap::from([
        ("topic.title", clean_topic_field(&topic.title)),
        ("topic.main_question", clean_topic_field(&topic.main_question)),
        ("topic.guidance_example", clean_topic_field(&topic.guidance_example)),
        (
            "topic.support_resources",
            topic.support_resources.as_deref().map(clean_topic_field).unwrap_or_default(),
        ),
    ])
}

impl PromptBook {
    pub fn shipped() -> Self {
        Self::from_toml(SHIPPED_PROMPTS).expect("shipped prompt file is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PromptError> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| PromptError::Io(e.to_string()))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, PromptError> {
        let file: PromptFile = toml::from_str(text).map_err(|e| PromptError::Parse(e.to_string()))?;
        if file.version != PROMPT_FILE_VERSION {
            return Err(PromptError::Version {
                found: file.version,
                expected: PROMPT_FILE_VERSION,
            });
        }
        if let Some(unknown) = file.templates.keys().find(|k| !SCHEMA.iter().any(|(n, _)| n == k)) {
            return Err(PromptError::UnknownTemplate(unknown.clone()));
        }
        let mut templates = BTreeMap::new();
        for (name, slots) in SCHEMA {
            let source = file
                .templates
                .get(*name)
                .ok_or_else(|| PromptError::MissingTemplate(name.to_string()))?;
            let parsed = SlotTemplate::parse(name, source.trim_matches('\n'), slots)?;
            if *name != "main_question" && parsed.literal_text().contains("**") {
                return Err(PromptError::Invalid {
                    template: name.to_string(),
                    reason: "only the main question may be bold".into(),
                });
            }
            templates.insert(*name, parsed);
        }
        let book = Self { templates };
        book.check_invariants()?;
        Ok(book)
    }

    fn check_invariants(&self) -> Result<(), PromptError> {
        let probe = Topic {
            id: "probe".into(),
            title: "Probe".into(),
            main_question: "Probe question?".into(),
            guidance_example: "Probe example.".into(),
            sensitive: false,
            support_resources: None,
        };
        let rendered = self.render_main_question(&probe);
        if count_bold_segments(&rendered) != 1 || !rendered.contains("**Probe question?**") {
            return Err(PromptError::Invalid {
                template: "main_question".into(),
                reason: "must contain exactly one **{{topic.main_question}}** segment".into(),
            });
        }
        if !rendered.contains("Probe example.") {
            return Err(PromptError::Invalid {
                template: "main_question".into(),
                reason: "must include {{topic.guidance_example}}".into(),
            });
        }
        if !self.get("directive_greeting").literal_text().contains(NAME_SENTINEL_OPEN) {
            return Err(PromptError::Invalid {
                template: "directive_greeting".into(),
                reason: format!("must describe the {NAME_SENTINEL_OPEN}NAME{NAME_SENTINEL_CLOSE} reply format"),
            });
        }
        let block = self.get("profile_block").literal_text();
        if block.matches(PROFILE_BLOCK_OPEN).count() != 1 {
            return Err(PromptError::Invalid {
                template: "profile_block".into(),
                reason: format!("must contain {PROFILE_BLOCK_OPEN} exactly once"),
            });
        }
        if !self.get("system").slots().any(|s| s == "profile") {
            return Err(PromptError::Invalid {
                template: "system".into(),
                reason: "must embed {{profile}}".into(),
            });
        }
        Ok(())
    }

    fn get(&self, name: &str) -> &SlotTemplate {
        self.templates.get(name).expect("schema templates are always loaded")
    }

    fn fixed(&self, name: &str) -> String {
        self.get(name).render(&BTreeMap::new())
    }

    fn profile_block(&self, profile: &UserProfile) -> String {
        let values = BTreeMap::from([
            ("profile.role", profile.role.as_str().to_string()),
            ("profile.details", clean_field(&profile.details.describe())),
            (
                "profile.preferred_name",
                profile
                    .preferred_name
                    .as_deref()
                    .map(clean_field)
                    .unwrap_or_else(|| "not shared".into()),
            ),
            (
                "profile.context_notes",
                profile
                    .context_notes
                    .as_deref()
                    .map(clean_field)
                    .filter(|n| !n.is_empty())
                    .unwrap_or_else(|| "none".into()),
            ),
        ]);
        self.get("profile_block").render(&values)
    }

    /// System prompt combining the participant profile with the active
    /// template and, when it fits, a per-topic progress summary.
    pub fn compose_system_prompt(
        &self,
        profile: &UserProfile,
        template: &SurveyTemplate,
        progress: &[ProgressEntry<'_>],
    ) -> ComposedPrompt {
        let address = match profile.preferred_name.as_deref().map(clean_field) {
            Some(name) if !name.is_empty() => self
                .get("address_named")
                .render(&BTreeMap::from([("profile.preferred_name", name)])),
            _ => self.fixed("address_generic"),
        };
        let topics = template
            .topics
            .iter()
            .map(|t| self.get("topic_line").render(&topic_values(t)))
            .collect::<Vec<_>>()
            .join("\n");
        let mut progress_text = String::new();
        if !progress.is_empty() {
            progress_text.push_str(&self.fixed("progress_header"));
            for entry in progress {
                progress_text.push('\n');
                progress_text.push_str(&self.get("progress_line").render(&BTreeMap::from([
                    ("topic.title", clean_topic_field(entry.title)),
                    ("topic.status", entry.status.to_string()),
                ])));
            }
        }
        let mut values = BTreeMap::from([
            ("profile", self.profile_block(profile)),
            ("address", address),
            ("topics", topics),
            ("progress", progress_text),
        ]);
        let mut system_text = self.get("system").render(&values);
        if system_text.chars().count() > MAX_SYSTEM_PROMPT_CHARS {
            values.insert("progress", String::new());
            system_text = self.get("system").render(&values);
        }
        if system_text.chars().count() > MAX_SYSTEM_PROMPT_CHARS {
            system_text = system_text.chars().take(MAX_SYSTEM_PROMPT_CHARS).collect();
        }
        ComposedPrompt {
            system_text: system_text.trim_end().to_string(),
            directive_text: None,
        }
    }

    /// The topic's main question in bold followed by its guidance example.
    pub fn render_main_question(&self, topic: &Topic) -> String {
        self.get("main_question").render(&topic_values(topic))
    }

    /// Main question plus, for sensitive topics, the comfort-level note with
    /// support resources.
    pub fn render_topic_opening(&self, topic: &Topic) -> String {
        let mut text = self.render_main_question(topic);
        if topic.sensitive {
            text.push_str("\n\n");
            text.push_str(&self.get("sensitive_note").render(&topic_values(topic)));
        }
        text
    }

    pub fn render_directive(&self, kind: DirectiveKind, topic: Option<&Topic>) -> Result<String, PromptError> {
        let name = match kind {
            DirectiveKind::Greeting => return Ok(self.fixed("directive_greeting")),
            DirectiveKind::Empathy => "directive_empathy",
            DirectiveKind::FollowUp => "directive_followup",
            DirectiveKind::Sensitive => "directive_sensitive",
        };
        let topic = match (kind, topic) {
            (DirectiveKind::Sensitive, Some(t)) if !t.sensitive => return Err(PromptError::DirectiveTopicMismatch),
            (DirectiveKind::Sensitive, None) => return Err(PromptError::DirectiveTopicMismatch),
            (_, Some(t)) => t,
            (_, None) => return Err(PromptError::TopicRequired(kind)),
        };
        Ok(self.get(name).render(&topic_values(topic)))
    }

    /// Self-introduction and name request; nothing else.
    pub fn render_opening(&self) -> String {
        self.fixed("opening")
    }

    pub fn render_greeting(&self, preferred_name: Option<&str>) -> String {
        match preferred_name.map(clean_field) {
            Some(name) if !name.is_empty() => self.get("greeting_named").render(&BTreeMap::from([("name", name)])),
            _ => self.fixed("greeting_generic"),
        }
    }

    fn menu_lines(&self, topics: &[&Topic]) -> String {
        topics
            .iter()
            .map(|t| self.get("menu_item").render(&topic_values(t)))
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn render_topic_menu(&self, topics: &[&Topic]) -> String {
        self.get("topic_menu")
            .render(&BTreeMap::from([("topics", self.menu_lines(topics))]))
    }

    pub fn render_menu_reoffer(&self, topics: &[&Topic]) -> String {
        self.get("menu_reoffer")
            .render(&BTreeMap::from([("topics", self.menu_lines(topics))]))
    }

    pub fn render_feedback_request(&self) -> String {
        self.fixed("feedback_request")
    }

    pub fn render_closing(&self) -> String {
        self.fixed("closing")
    }
}
