//! Export, re-import and re-export of the three datasets.

mod common;

use common::{run_session, Env};
use pulsechat_core::dialogue::{StepClock, TopicChoice};
use pulsechat_core::gateway::{Author, ScriptedProvider};
use pulsechat_core::storage::{
    collect, export, EventStore, ExportFormat, ExportKind, ExportRecords, TRANSCRIPT_COLUMNS,
};
use pulsechat_core::survey::resolve_template;

const KINDS: [ExportKind; 3] = [ExportKind::Transcripts, ExportKind::Feedback, ExportKind::Sentiment];
const FORMATS: [ExportFormat; 2] = [ExportFormat::RecordLines, ExportFormat::Csv];

fn populated(env: &Env, sessions: u64) -> EventStore {
    let mut store = EventStore::in_memory();
    for n in 0..sessions {
        store.append_all(run_session(env, 900 + n, &format!("exp-{n}")).events).unwrap();
    }
    store
}

#[test]
fn export_import_export_is_byte_identical() {
    let env = Env::new();
    let store = populated(&env, 40);
    for kind in KINDS {
        let records = collect(&store, kind, &env.lexicon);
        assert!(!records.is_empty(), "{kind:?} should have rows");
        for format in FORMATS {
            let first = export(&store, kind, format, &env.lexicon);
            let parsed = ExportRecords::parse(kind, format, &first).unwrap();
            assert_eq!(parsed, records, "{kind:?} {format:?}");
            assert_eq!(parsed.render(format), first, "{kind:?} {format:?}");
        }
    }
}

#[test]
fn nine_messages_make_nine_rows() {
    let env = Env::new();
    let clock = StepClock::new(1_000, 10);
    let orch = pulsechat_core::dialogue::Orchestrator::new(&env.prompts, &env.lexicon, &env.policy, &clock);
    let mut store = EventStore::in_memory();
    let mut rng_profile = rand_chacha::rand_core::SeedableRng::seed_from_u64(3);
    let profile = common::random_profile(&mut rng_profile);
    let template = resolve_template(&profile, &env.registry).unwrap();

    // Session one: opening, name turn (2), one topic opening. Four messages.
    let gw = ScriptedProvider::new(vec!["[[name:Robin]]".into()]);
    let a = orch.start_session("a", profile.clone(), template, 1).unwrap();
    let b = orch.advance_turn(&a.session, template, "Robin", &gw).unwrap();
    let c = orch.select_topic(&b.session, template, TopicChoice::Random).unwrap();
    for out in [&a, &b, &c] {
        store.append_all(out.events.clone()).unwrap();
    }
    // Session two: opening, name turn (2), participant free text and menu (2). Five messages.
    let gw = ScriptedProvider::new(vec!["[[name:]]".into()]);
    let d = orch.start_session("b", profile, template, 2).unwrap();
    let e = orch.advance_turn(&d.session, template, "hi", &gw).unwrap();
    let f = orch.advance_turn(&e.session, template, "not sure yet, what are my options", &gw).unwrap();
    for out in [&d, &e, &f] {
        store.append_all(out.events.clone()).unwrap();
    }

    let records = collect(&store, ExportKind::Transcripts, &env.lexicon);
    assert_eq!(records.len(), 9);
    let ExportRecords::Transcripts(rows) = &records else { unreachable!() };
    let participants = rows.iter().filter(|r| r.author == Author::Participant).count();
    assert_eq!(participants, 3);
    let csv = String::from_utf8(export(&store, ExportKind::Transcripts, ExportFormat::Csv, &env.lexicon)).unwrap();
    assert_eq!(csv.lines().next().unwrap(), TRANSCRIPT_COLUMNS.join(","));
    let lines = export(&store, ExportKind::Transcripts, ExportFormat::RecordLines, &env.lexicon);
    assert_eq!(lines.iter().filter(|b| **b == b'\n').count(), 9);
}

#[test]
fn empty_store_exports_headers_only() {
    let env = Env::new();
    let store = EventStore::in_memory();
    for kind in KINDS {
        let csv = String::from_utf8(export(&store, kind, ExportFormat::Csv, &env.lexicon)).unwrap();
        assert_eq!(csv, format!("{}\n", kind.columns().join(",")));
        assert!(export(&store, kind, ExportFormat::RecordLines, &env.lexicon).is_empty());
        let parsed = ExportRecords::parse(kind, ExportFormat::Csv, csv.as_bytes()).unwrap();
        assert!(parsed.is_empty());
    }
}

#[test]
fn awkward_text_survives_csv() {
    let env = Env::new();
    let clock = StepClock::new(5_000, 10);
    let orch = pulsechat_core::dialogue::Orchestrator::new(&env.prompts, &env.lexicon, &env.policy, &clock);
    let mut rng = rand_chacha::rand_core::SeedableRng::seed_from_u64(4);
    let profile = common::random_profile(&mut rng);
    let template = resolve_template(&profile, &env.registry).unwrap();
    let gw = ScriptedProvider::new(vec!["[[name:]]".into()]);
    let a = orch.start_session("q", profile, template, 1).unwrap();
    let tricky = "She said \"fine, whatever\",\nthen left; ok? 🙂 naïve";
    let b = orch.advance_turn(&a.session, template, tricky, &gw).unwrap();
    let mut store = EventStore::in_memory();
    store.append_all(a.events).unwrap();
    store.append_all(b.events).unwrap();
    let bytes = export(&store, ExportKind::Transcripts, ExportFormat::Csv, &env.lexicon);
    let ExportRecords::Transcripts(rows) =
        ExportRecords::parse(ExportKind::Transcripts, ExportFormat::Csv, &bytes).unwrap()
    else {
        unreachable!()
    };
    assert!(rows.iter().any(|r| r.text == tricky));
    assert!(String::from_utf8(bytes).unwrap().contains("\"She said \"\"fine, whatever\"\",\nthen left; ok? 🙂 naïve\""));
}

#[test]
fn wrong_header_is_rejected() {
    let bad = b"session_id,who,topic_id,text,timestamp\n";
    assert!(ExportRecords::parse(ExportKind::Transcripts, ExportFormat::Csv, bad).is_err());
}
