//! Roles, role details and participant profiles.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_PREFERRED_NAME_CHARS: usize = 64;
pub const MAX_CONTEXT_NOTES_CHARS: usize = 500;
pub const MAX_WORKING_AREA_CHARS: usize = 120;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Student,
    Faculty,
    Staff,
    Alumni,
}

impl Role {
    pub const ALL: [Role; 4] = [Role::Student, Role::Faculty, Role::Staff, Role::Alumni];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Student => "student",
            Role::Faculty => "faculty",
            Role::Staff => "staff",
            Role::Alumni => "alumni",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown role {0:?}; expected student, faculty, staff or alumni")]
pub struct UnknownRole(pub String);

impl FromStr for Role {
    type Err = UnknownRole;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match normalize_choice(s).as_str() {
            "student" => Ok(Role::Student),
            "faculty" => Ok(Role::Faculty),
            "staff" => Ok(Role::Staff),
            "alumni" | "alumnus" | "alumna" => Ok(Role::Alumni),
            _ => Err(UnknownRole(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeLevel {
    Undergraduate,
    Masters,
    Doctoral,
}

impl DegreeLevel {
    pub const ALL: [DegreeLevel; 3] = [
        DegreeLevel::Undergraduate,
        DegreeLevel::Masters,
        DegreeLevel::Doctoral,
    ];

    fn parse(raw: &str) -> Option<Self> {
        match normalize_choice(raw).as_str() {
            "undergraduate" | "undergrad" => Some(Self::Undergraduate),
            "masters" | "master" => Some(Self::Masters),
            "doctoral" | "phd" | "doctorate" => Some(Self::Doctoral),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FacultyTrack {
    TenureTrack,
    NonTenureTrack,
    Adjunct,
}

impl FacultyTrack {
    pub const ALL: [FacultyTrack; 3] = [
        FacultyTrack::TenureTrack,
        FacultyTrack::NonTenureTrack,
        FacultyTrack::Adjunct,
    ];

    fn parse(raw: &str) -> Option<Self> {
        match normalize_choice(raw).as_str() {
            "tenuretrack" | "tenured" => Some(Self::TenureTrack),
            "nontenuretrack" => Some(Self::NonTenureTrack),
            "adjunct" => Some(Self::Adjunct),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GraduationDecade {
    #[serde(rename = "before_1980")]
    Before1980,
    #[serde(rename = "1980s")]
    Eighties,
    #[serde(rename = "1990s")]
    Nineties,
    #[serde(rename = "2000s")]
    TwoThousands,
    #[serde(rename = "2010s")]
    Twenty10s,
    #[serde(rename = "2020s")]
    Twenty20s,
}

impl GraduationDecade {
    pub const ALL: [GraduationDecade; 6] = [
        GraduationDecade::Before1980,
        GraduationDecade::Eighties,
        GraduationDecade::Nineties,
        GraduationDecade::TwoThousands,
        GraduationDecade::Twenty10s,
        GraduationDecade::Twenty20s,
    ];

    fn parse(raw: &str) -> Option<Self> {
        match normalize_choice(raw).as_str() {
            "before1980" => Some(Self::Before1980),
            "1980s" => Some(Self::Eighties),
            "1990s" => Some(Self::Nineties),
            "2000s" => Some(Self::TwoThousands),
            "2010s" => Some(Self::Twenty10s),
            "2020s" => Some(Self::Twenty20s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum RoleDetails {
    Student {
        degree_level: DegreeLevel,
        international: bool,
    },
    Faculty {
        track_or_rank: FacultyTrack,
    },
    Staff {
        working_area: String,
    },
    Alumni {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        graduation_decade: Option<GraduationDecade>,
    },
}

impl RoleDetails {
    pub fn role(&self) -> Role {
        match self {
            RoleDetails::Student { .. } => Role::Student,
            RoleDetails::Faculty { .. } => Role::Faculty,
            RoleDetails::Staff { .. } => Role::Staff,
            RoleDetails::Alumni { .. } => Role::Alumni,
        }
    }

    /// Short human-readable description used in prompts.
    pub fn describe(&self) -> String {
        match self {
            RoleDetails::Student {
                degree_level,
                international,
            } => {
                let level = match degree_level {
                    DegreeLevel::Undergraduate => "undergraduate",
                    DegreeLevel::Masters => "master's",
                    DegreeLevel::Doctoral => "doctoral",
                };
                let status = if *international { "international" } else { "domestic" };
                format!("{status} {level} student")
            }
            RoleDetails::Faculty { track_or_rank } => match track_or_rank {
                FacultyTrack::TenureTrack => "tenure-track faculty member".into(),
                FacultyTrack::NonTenureTrack => "non-tenure-track faculty member".into(),
                FacultyTrack::Adjunct => "adjunct faculty member".into(),
            },
            RoleDetails::Staff { working_area } => format!("staff member working in {working_area}"),
            RoleDetails::Alumni { graduation_decade } => match graduation_decade {
                Some(GraduationDecade::Before1980) => "alumnus who graduated before 1980".into(),
                Some(d) => {
                    let label = serde_json::to_value(d)
                        .ok()
                        .and_then(|v| v.as_str().map(str::to_owned))
                        .unwrap_or_default();
                    format!("alumnus who graduated in the {label}")
                }
                None => "alumnus".into(),
            },
        }
    }
}

/// Who the participant is. Fixed at session start except for the preferred
/// name, which is set at most once during name capture.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserProfile {
    pub role: Role,
    pub details: RoleDetails,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preferred_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context_notes: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProfileError {
    #[error("missing field {0:?}")]
    MissingField(&'static str),
    #[error("field {field:?} does not apply to role {role}")]
    VariantMismatch { role: Role, field: String },
    #[error("field {0:?} is empty")]
    EmptyValue(String),
    #[error("unknown field {0:?}")]
    UnknownField(String),
    #[error("invalid value {value:?} for field {field:?}")]
    InvalidValue { field: String, value: String },
    #[error("field {field:?} exceeds {max} characters")]
    TooLong { field: String, max: usize },
}

/// Every problem found in a details payload, in field order.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid role details: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
pub struct ProfileErrors(pub Vec<ProfileError>);

impl ProfileErrors {
    pub fn contains(&self, err: &ProfileError) -> bool {
        self.0.contains(err)
    }
}

const STUDENT_FIELDS: &[&str] = &["degree_level", "international"];
const FACULTY_FIELDS: &[&str] = &["track_or_rank"];
const STAFF_FIELDS: &[&str] = &["working_area"];
const ALUMNI_FIELDS: &[&str] = &["graduation_decade"];
const CONTEXT_NOTES: &str = "context_notes";

fn fields_for(role: Role) -> &'static [&'static str] {
    match role {
        Role::Student => STUDENT_FIELDS,
        Role::Faculty => FACULTY_FIELDS,
        Role::Staff => STAFF_FIELDS,
        Role::Alumni => ALUMNI_FIELDS,
    }
}

/// Builds a profile from the quick-click details payload.
///
/// Keys belonging to another role's variant are reported as a variant
/// mismatch; keys that belong to no role are unknown. The preferred name is
/// never accepted here.
pub fn validate_role_details(
    role: Role,
    raw_details: &BTreeMap<String, String>,
) -> Result<UserProfile, ProfileErrors> {
    let mut errors = Vec::new();
    let own = fields_for(role);
    for key in raw_details.keys() {
        if own.contains(&key.as_str()) || key == CONTEXT_NOTES {
            continue;
        }
        if Role::ALL
            .iter()
            .any(|r| fields_for(*r).contains(&key.as_str()))
        {
            errors.push(ProfileError::VariantMismatch {
                role,
                field: key.clone(),
            });
        } else {
            errors.push(ProfileError::UnknownField(key.clone()));
        }
    }

    let get = |field: &'static str, errors: &mut Vec<ProfileError>| -> Option<String> {
        match raw_details.get(field) {
            None => {
                errors.push(ProfileError::MissingField(field));
                None
            }
            Some(v) if v.trim().is_empty() => {
                errors.push(ProfileError::EmptyValue(field.into()));
                None
            }
            Some(v) => Some(v.trim().to_string()),
        }
    };
    let invalid = |field: &str, value: &str| ProfileError::InvalidValue {
        field: field.into(),
        value: value.into(),
    };

    let details = match role {
        Role::Student => {
            let level = get("degree_level", &mut errors).and_then(|v| {
                DegreeLevel::parse(&v).or_else(|| {
                    errors.push(invalid("degree_level", &v));
                    None
                })
            });
            let international = get("international", &mut errors).and_then(|v| {
                parse_bool(&v).or_else(|| {
                    errors.push(invalid("international", &v));
                    None
                })
            });
            level.zip(international).map(|(degree_level, international)| RoleDetails::Student {
                degree_level,
                international,
            })
        }
        Role::Faculty => get("track_or_rank", &mut errors).and_then(|v| {
            FacultyTrack::parse(&v)
                .map(|track_or_rank| RoleDetails::Faculty { track_or_rank })
                .or_else(|| {
                    errors.push(invalid("track_or_rank", &v));
                    None
                })
        }),
        Role::Staff => get("working_area", &mut errors).and_then(|v| {
            if v.chars().count() > MAX_WORKING_AREA_CHARS {
                errors.push(ProfileError::TooLong {
                    field: "working_area".into(),
                    max: MAX_WORKING_AREA_CHARS,
                });
                None
            } else {
                Some(RoleDetails::Staff { working_area: v })
            }
        }),
        Role::Alumni => match raw_details.get("graduation_decade").map(|v| v.trim()) {
            None | Some("") => Some(RoleDetails::Alumni {
                graduation_decade: None,
            }),
            Some(v) => GraduationDecade::parse(v)
                .map(|d| RoleDetails::Alumni {
                    graduation_decade: Some(d),
                })
                .or_else(|| {
                    errors.push(invalid("graduation_decade", v));
                    None
                }),
        },
    };

    let context_notes = match raw_details.get(CONTEXT_NOTES).map(|v| v.trim()) {
        None | Some("") => None,
        Some(v) if v.chars().count() > MAX_CONTEXT_NOTES_CHARS => {
            errors.push(ProfileError::TooLong {
                field: CONTEXT_NOTES.into(),
                max: MAX_CONTEXT_NOTES_CHARS,
            });
            None
        }
        Some(v) => Some(v.to_string()),
    };

    match details {
        Some(details) if errors.is_empty() => Ok(UserProfile {
            role,
            details,
            preferred_name: None,
            context_notes,
        }),
        _ => Err(ProfileErrors(errors)),
    }
}

/// Cleans a candidate preferred name: trimmed, markup and control characters
/// removed, nonempty and within the length limit.
pub fn clean_preferred_name(raw: &str) -> Option<String> {
    let cleaned: String = raw
        .chars()
        .filter(|c| !c.is_control() && *c != '*' && *c != '`')
        .collect();
    let cleaned = cleaned.trim();
    if cleaned.is_empty() || cleaned.chars().count() > MAX_PREFERRED_NAME_CHARS {
        return None;
    }
    Some(cleaned.to_string())
}

fn parse_bool(raw: &str) -> Option<bool> {
    match normalize_choice(raw).as_str() {
        "true" | "yes" | "y" | "1" | "international" => Some(true),
        "false" | "no" | "n" | "0" | "domestic" => Some(false),
        _ => None,
    }
}

fn normalize_choice(raw: &str) -> String {
    raw.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}
