//! Survey templates and routing from a profile to its template.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::profile::{DegreeLevel, FacultyTrack, GraduationDecade, Role, RoleDetails, UserProfile};

const SHIPPED_REGISTRY: &str = include_str!("../../config/registry.json");

pub const MIN_TOPICS_PER_TEMPLATE: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topic {
    pub id: String,
    pub title: String,
    pub main_question: String,
    pub guidance_example: String,
    #[serde(default)]
    pub sensitive: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_resources: Option<String>,
}

/// Declarative applicability: a role plus optional detail constraints.
/// An absent constraint matches any value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Applicability {
    pub role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_levels: Option<Vec<DegreeLevel>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub international: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tracks: Option<Vec<FacultyTrack>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graduation_decades: Option<Vec<Option<GraduationDecade>>>,
}

impl Applicability {
    pub fn matches(&self, details: &RoleDetails) -> bool {
        if self.role != details.role() {
            return false;
        }
        match details {
            RoleDetails::Student {
                degree_level,
                international,
            } => {
                self.degree_levels
                    .as_ref()
                    .is_none_or(|levels| levels.contains(degree_level))
                    && self.international.is_none_or(|i| i == *international)
            }
            RoleDetails::Faculty { track_or_rank } => self
                .tracks
                .as_ref()
                .is_none_or(|tracks| tracks.contains(track_or_rank)),
            RoleDetails::Staff { .. } => true,
            RoleDetails::Alumni { graduation_decade } => self
                .graduation_decades
                .as_ref()
                .is_none_or(|decades| decades.contains(graduation_decade)),
        }
    }

    fn constraint_fields(&self) -> Vec<&'static str> {
        let mut fields = Vec::new();
        if self.degree_levels.is_some() {
            fields.push("degree_levels");
        }
        if self.international.is_some() {
            fields.push("international");
        }
        if self.tracks.is_some() {
            fields.push("tracks");
        }
        if self.graduation_decades.is_some() {
            fields.push("graduation_decades");
        }
        fields
    }

    fn allowed_fields(&self) -> &'static [&'static str] {
        match self.role {
            Role::Student => &["degree_levels", "international"],
            Role::Faculty => &["tracks"],
            Role::Staff => &[],
            Role::Alumni => &["graduation_decades"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyTemplate {
    pub id: String,
    pub applicability: Applicability,
    pub topics: Vec<Topic>,
}

impl SurveyTemplate {
    pub fn topic(&self, id: &str) -> Option<&Topic> {
        self.topics.iter().find(|t| t.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("no template applies to the profile (registry does not cover it)")]
    NoTemplate,
    #[error("templates {0:?} all apply to the profile")]
    AmbiguousTemplate(Vec<String>),
    #[error("registry is not valid: {0}")]
    Invalid(String),
    #[error("registry coverage violated: {}", .0.join("; "))]
    Coverage(Vec<String>),
    #[error("failed to read registry: {0}")]
    Io(String),
}

#[derive(Debug, Deserialize, Serialize)]
struct RegistryFile {
    templates: Vec<SurveyTemplate>,
}

/// Loaded, validated template set. Immutable after load.
#[derive(Debug, Clone)]
pub struct TemplateRegistry {
    templates: Vec<SurveyTemplate>,
}

impl TemplateRegistry {
    /// The default registry shipped with the crate.
    pub fn shipped() -> Self {
        Self::from_json(SHIPPED_REGISTRY).expect("bundled registry is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RegistryError> {
        let text = std::fs::read_to_string(path).map_err(|e| RegistryError::Io(e.to_string()))?;
        Self::from_json(&text)
    }

    /// Parses and validates, including the exactly-one-match coverage check.
    pub fn from_json(text: &str) -> Result<Self, RegistryError> {
        let file: RegistryFile =
            serde_json::from_str(text).map_err(|e| RegistryError::Invalid(e.to_string()))?;
        let registry = Self::from_templates_unchecked(file.templates);
        registry.validate()?;
        registry.check_coverage(&default_staff_samples())?;
        Ok(registry)
    }

    /// Wraps templates without validation; used to probe broken registries.
    pub fn from_templates_unchecked(templates: Vec<SurveyTemplate>) -> Self {
        Self { templates }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&RegistryFile {
            templates: self.templates.clone(),
        })
        .expect("registry serializes")
    }

    pub fn templates(&self) -> &[SurveyTemplate] {
        &self.templates
    }

    pub fn get(&self, id: &str) -> Option<&SurveyTemplate> {
        self.templates.iter().find(|t| t.id == id)
    }

    /// Structural checks on every template and topic.
    pub fn validate(&self) -> Result<(), RegistryError> {
        let mut problems = Vec::new();
        let mut ids = HashSet::new();
        for template in &self.templates {
            if template.id.trim().is_empty() {
                problems.push("template with empty id".to_string());
            }
            if !ids.insert(template.id.as_str()) {
                problems.push(format!("duplicate template id {:?}", template.id));
            }
            let allowed = template.applicability.allowed_fields();
            for field in template.applicability.constraint_fields() {
                if !allowed.contains(&field) {
                    problems.push(format!(
                        "template {:?}: constraint {field} does not apply to role {}",
                        template.id, template.applicability.role
                    ));
                }
            }
            if template.topics.len() < MIN_TOPICS_PER_TEMPLATE {
                problems.push(format!(
                    "template {:?} has {} topics; at least {MIN_TOPICS_PER_TEMPLATE} required",
                    template.id,
                    template.topics.len()
                ));
            }
            let mut topic_ids = HashSet::new();
            for topic in &template.topics {
                if let Some(problem) = topic_problem(topic) {
                    problems.push(format!("template {:?}, topic {:?}: {problem}", template.id, topic.id));
                }
                if !topic_ids.insert(topic.id.as_str()) {
                    problems.push(format!(
                        "template {:?}: duplicate topic id {:?}",
                        template.id, topic.id
                    ));
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(RegistryError::Invalid(problems.join("; ")))
        }
    }

    /// Enumerates every finite role/detail combination (staff working areas
    /// drawn from `staff_samples`) and requires exactly one match for each.
    pub fn check_coverage(&self, staff_samples: &[String]) -> Result<CoverageReport, RegistryError> {
        let mut violations = Vec::new();
        let mut checked = 0;
        for details in enumerate_details(staff_samples) {
            checked += 1;
            let profile = UserProfile {
                role: details.role(),
                details: details.clone(),
                preferred_name: None,
                context_notes: None,
            };
            if let Err(err) = resolve_template(&profile, self) {
                violations.push(format!("{details:?}: {err}"));
            }
        }
        if violations.is_empty() {
            Ok(CoverageReport {
                combinations: checked,
                templates: self.templates.len(),
            })
        } else {
            Err(RegistryError::Coverage(violations))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CoverageReport {
    pub combinations: usize,
    pub templates: usize,
}

fn topic_problem(topic: &Topic) -> Option<String> {
    if topic.id.trim().is_empty() {
        return Some("empty id".into());
    }
    if topic.main_question.trim().is_empty() {
        return Some("empty main_question".into());
    }
    if topic.guidance_example.trim().is_empty() {
        return Some("empty guidance_example".into());
    }
    if [&topic.title, &topic.main_question, &topic.guidance_example]
        .iter()
        .any(|s| s.contains('*'))
    {
        return Some("topic text may not contain '*' (reserved for bold markup)".into());
    }
    if topic.sensitive
        && topic
            .support_resources
            .as_deref()
            .is_none_or(|s| s.trim().is_empty())
    {
        return Some("sensitive topic needs support_resources".into());
    }
    None
}

/// Working-area strings used when enumerating staff profiles.
pub fn default_staff_samples() -> Vec<String> {
    [
        "Library",
        "Facilities",
        "IT services",
        "Dining",
        "Athletics",
        "Student Affairs",
        "a",
        "Résidence hall operations ✨",
        "Research lab (chemistry), 2nd floor",
        "x\"y'z, <>&",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

/// Every detail variant reachable from the quick-click UI.
pub fn enumerate_details(staff_samples: &[String]) -> Vec<RoleDetails> {
    let mut all = Vec::new();
    for degree_level in DegreeLevel::ALL {
        for international in [false, true] {
            all.push(RoleDetails::Student {
                degree_level,
                international,
            });
        }
    }
    for track_or_rank in FacultyTrack::ALL {
        all.push(RoleDetails::Faculty { track_or_rank });
    }
    for area in staff_samples {
        all.push(RoleDetails::Staff {
            working_area: area.clone(),
        });
    }
    all.push(RoleDetails::Alumni {
        graduation_decade: None,
    });
    for d in GraduationDecade::ALL {
        all.push(RoleDetails::Alumni {
            graduation_decade: Some(d),
        });
    }
    all
}

/// Returns the single template applicable to the profile.
pub fn resolve_template<'a>(
    profile: &UserProfile,
    registry: &'a TemplateRegistry,
) -> Result<&'a SurveyTemplate, RegistryError> {
    let mut matches = registry
        .templates
        .iter()
        .filter(|t| t.applicability.matches(&profile.details));
    let first = matches.next().ok_or(RegistryError::NoTemplate)?;
    let rest: Vec<&SurveyTemplate> = matches.collect();
    if rest.is_empty() {
        Ok(first)
    } else {
        let mut ids = vec![first.id.clone()];
        ids.extend(rest.iter().map(|t| t.id.clone()));
        Err(RegistryError::AmbiguousTemplate(ids))
    }
}
