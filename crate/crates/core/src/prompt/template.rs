//! `{{slot}}` text templates.
//!
//! Slot names are checked against an allow-list when the template is parsed,
//! so a typo in a prompt file fails at load time rather than at render time.

use std::collections::BTreeMap;

use super::PromptError;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Literal(String),
    Slot(String),
}

/// A parsed template: literal text interleaved with named slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotTemplate {
    name: String,
    segments: Vec<Segment>,
}

fn valid_slot_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '.')
}

impl SlotTemplate {
    pub fn parse(name: &str, source: &str, allowed: &[&str]) -> Result<Self, PromptError> {
        let mut segments = Vec::new();
        let mut rest = source;
        while let Some(open) = rest.find("{{") {
            if open > 0 {
                segments.push(Segment::Literal(rest[..open].to_string()));
            }
            let after = &rest[open + 2..];
            let close = after.find("}}").ok_or_else(|| PromptError::Unterminated {
                template: name.to_string(),
            })?;
            let slot = after[..close].trim();
            if !valid_slot_name(slot) || !allowed.contains(&slot) {
                return Err(PromptError::UnknownSlot {
                    template: name.to_string(),
                    slot: slot.to_string(),
                });
            }
            segments.push(Segment::Slot(slot.to_string()));
            rest = &after[close + 2..];
        }
        if !rest.is_empty() {
            segments.push(Segment::Literal(rest.to_string()));
        }
        Ok(Self {
            name: name.to_string(),
            segments,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn slots(&self) -> impl Iterator<Item = &str> {
        self.segments.iter().filter_map(|s| match s {
            Segment::Slot(n) => Some(n.as_str()),
            Segment::Literal(_) => None,
        })
    }

    pub fn literal_text(&self) -> String {
        self.segments
            .iter()
            .filter_map(|s| match s {
                Segment::Literal(t) => Some(t.as_str()),
                Segment::Slot(_) => None,
            })
            .collect()
    }

    /// Fills every slot from `values`; a slot without a value renders empty.
    pub fn render(&self, values: &BTreeMap<&str, String>) -> String {
        let mut out = String::new();
        for segment in &self.segments {
            match segment {
                Segment::Literal(t) => out.push_str(t),
                Segment::Slot(n) => {
                    if let Some(v) = values.get(n.as_str()) {
                        out.push_str(v);
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_slots() {
        let t = SlotTemplate::parse("t", "Hi {{ name }}, you are {{role}}.", &["name", "role"]).unwrap();
        let values = BTreeMap::from([("name", "Sam".to_string()), ("role", "staff".to_string())]);
        assert_eq!(t.render(&values), "Hi Sam, you are staff.");
        assert_eq!(t.slots().collect::<Vec<_>>(), vec!["name", "role"]);
    }

    #[test]
    fn unknown_slot_rejected() {
        let err = SlotTemplate::parse("t", "Hi {{nmae}}", &["name"]).unwrap_err();
        assert_eq!(
            err,
            PromptError::UnknownSlot {
                template: "t".into(),
                slot: "nmae".into()
            }
        );
    }

    #[test]
    fn unterminated_slot_rejected() {
        assert!(matches!(
            SlotTemplate::parse("t", "Hi {{name", &["name"]),
            Err(PromptError::Unterminated { .. })
        ));
    }

    #[test]
    fn plain_text_round_trips() {
        let t = SlotTemplate::parse("t", "no slots } here {", &[]).unwrap();
        assert_eq!(t.render(&BTreeMap::new()), "no slots } here {");
    }
}
