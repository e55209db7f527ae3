//! Participant roles, profiles and survey templates.

mod profile;
mod registry;

pub use profile::{
    clean_preferred_name, validate_role_details, DegreeLevel, FacultyTrack, GraduationDecade,
    ProfileError, ProfileErrors, Role, RoleDetails, UnknownRole, UserProfile,
    MAX_CONTEXT_NOTES_CHARS, MAX_PREFERRED_NAME_CHARS, MAX_WORKING_AREA_CHARS,
};
pub use registry::{
    default_staff_samples, enumerate_details, resolve_template, Applicability, CoverageReport,
    RegistryError, SurveyTemplate, TemplateRegistry, Topic, MIN_TOPICS_PER_TEMPLATE,
};
