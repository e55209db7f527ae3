//! Core engine for a conversational campus-climate survey: participant
//! routing, the dialogue state machine, prompt composition, provider access,
//! sentiment scoring, analytics and the event log.

pub mod analytics;
pub mod dialogue;
pub mod gateway;
pub mod prompt;
pub mod sentiment;
pub mod storage;
pub mod survey;
