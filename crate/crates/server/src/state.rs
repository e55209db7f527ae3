//! Shared service state: loaded resources, the event store and live sessions.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use pulsechat_core::analytics::Stopwords;
use pulsechat_core::dialogue::{Clock, DialogueError, Orchestrator, Outcome, PolicyConfig, Session, SystemClock};
use pulsechat_core::gateway::{ReplySource, Secret};
use pulsechat_core::prompt::PromptBook;
use pulsechat_core::sentiment::SentimentLexicon;
use pulsechat_core::storage::EventStore;
use pulsechat_core::survey::{SurveyTemplate, TemplateRegistry, UserProfile};
use tracing::{info, warn};

use crate::config::{ConfigError, SeedMode, ServiceConfig};
use crate::error::ApiError;

/// Read-only inputs shared by every request.
pub struct Resources {
    pub prompts: PromptBook,
    pub lexicon: SentimentLexicon,
    pub stopwords: Stopwords,
    pub registry: TemplateRegistry,
    pub policy: PolicyConfig,
    pub clock: Arc<dyn Clock>,
}

impl Resources {
    pub fn shipped() -> Self {
        Self {
            prompts: PromptBook::shipped(),
            lexicon: SentimentLexicon::shipped(),
            stopwords: Stopwords::shipped(),
            registry: TemplateRegistry::shipped(),
            policy: PolicyConfig::default(),
            clock: Arc::new(SystemClock),
        }
    }

    /// Loads the configured files, falling back to the built-in ones.
    pub fn load(config: &ServiceConfig) -> Result<Self, ConfigError> {
        let mut res = Self::shipped();
        if let Some(path) = &config.registry_path {
            res.registry = TemplateRegistry::load(path).map_err(|e| invalid("registry", e))?;
        }
        if let Some(path) = &config.lexicon_path {
            res.lexicon = SentimentLexicon::load(path).map_err(|e| invalid("lexicon", e))?;
        }
        if let Some(path) = &config.prompts_path {
            res.prompts = PromptBook::load(path).map_err(|e| invalid("prompts", e))?;
        }
        res.policy.elaboration_word_threshold = config.elaboration_word_threshold;
        Ok(res)
    }

    fn template(&self, session: &Session) -> Result<&SurveyTemplate, ApiError> {
        self.registry
            .get(&session.template_id)
            .ok_or_else(|| ApiError::internal(format!("template {:?} is not loaded", session.template_id)))
    }
}

fn invalid(what: &'static str, e: impl std::fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        what,
        reason: e.to_string(),
    }
}

/// A live session. `turn` serializes mutating calls; `current` is the last
/// committed state, readable while a turn is in flight.
struct SessionSlot {
    turn: Arc<tokio::sync::Mutex<()>>,
    current: RwLock<Session>,
}

struct Inner {
    resources: Arc<Resources>,
    gateway: Arc<dyn ReplySource>,
    store: Arc<Mutex<EventStore>>,
    sessions: RwLock<HashMap<String, Arc<SessionSlot>>>,
    seed_mode: SeedMode,
    created: AtomicU64,
    admin_token: Secret,
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

fn lock_store(store: &Mutex<EventStore>) -> MutexGuard<'_, EventStore> {
    // A panic while holding the lock cannot leave a half-applied batch behind
    // (appends are all-or-nothing), so a poisoned lock is still usable.
    store.lock().unwrap_or_else(|p| p.into_inner())
}

impl AppState {
    /// Builds the state and rebuilds every logged session. Sessions whose
    /// log cannot be replayed are left out and reported.
    pub fn new(
        resources: Resources,
        store: EventStore,
        gateway: Arc<dyn ReplySource>,
        seed_mode: SeedMode,
        admin_token: Secret,
    ) -> Self {
        let mut sessions = HashMap::new();
        for id in store.session_ids() {
            match store.replay_session(id) {
                Ok(session) => {
                    sessions.insert(
                        id.clone(),
                        Arc::new(SessionSlot {
                            turn: Arc::new(tokio::sync::Mutex::new(())),
                            current: RwLock::new(session),
                        }),
                    );
                }
                Err(e) => warn!(session = %id, error = %e, "session log cannot be replayed; skipping"),
            }
        }
        info!(sessions = sessions.len(), "restored sessions from the event log");
        let created = AtomicU64::new(store.len() as u64);
        Self {
            inner: Arc::new(Inner {
                resources: Arc::new(resources),
                gateway,
                store: Arc::new(Mutex::new(store)),
                sessions: RwLock::new(sessions),
                seed_mode,
                created,
                admin_token,
            }),
        }
    }

    pub fn resources(&self) -> &Resources {
        &self.inner.resources
    }

    pub fn admin_token(&self) -> &Secret {
        &self.inner.admin_token
    }

    /// Runs `f` against the event store under its lock.
    pub fn with_store<T>(&self, f: impl FnOnce(&EventStore) -> T) -> T {
        f(&lock_store(&self.inner.store))
    }

    fn slot(&self, id: &str) -> Result<Arc<SessionSlot>, ApiError> {
        self.inner
            .sessions
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }

    /// The last committed state of a session.
    pub fn snapshot(&self, id: &str) -> Result<Session, ApiError> {
        let slot = self.slot(id)?;
        let session = slot.current.read().unwrap_or_else(|p| p.into_inner()).clone();
        Ok(session)
    }

    fn next_seed(&self) -> u64 {
        let ordinal = self.inner.created.fetch_add(1, Ordering::Relaxed);
        match self.inner.seed_mode {
            SeedMode::Fixed(n) => n.wrapping_add(ordinal),
            SeedMode::Entropy => rand::random(),
        }
    }

    /// Creates and persists a new session.
    pub async fn create_session(&self, id: String, profile: UserProfile) -> Result<Outcome, ApiError> {
        let seed = self.next_seed();
        let resources = self.inner.resources.clone();
        let store = self.inner.store.clone();
        let session_id = id.clone();
        let outcome = tokio::task::spawn_blocking(move || -> Result<Outcome, ApiError> {
            let template = pulsechat_core::survey::resolve_template(&profile, &resources.registry)
                .map_err(|e| ApiError::bad_request("no_template", e.to_string()))?;
            let orch = Orchestrator::new(&resources.prompts, &resources.lexicon, &resources.policy, &*resources.clock);
            let outcome = orch.start_session(&session_id, profile, template, seed)?;
            lock_store(&store).append_all(outcome.events.clone())?;
            Ok(outcome)
        })
        .await
        .map_err(|e| ApiError::internal(e.to_string()))??;
        let slot = Arc::new(SessionSlot {
            turn: Arc::new(tokio::sync::Mutex::new(())),
            current: RwLock::new(outcome.session.clone()),
        });
        self.inner
            .sessions
            .write()
            .unwrap_or_else(|p| p.into_inner())
            .insert(id, slot);
        Ok(outcome)
    }

    /// Runs one mutating command. A second command for the same session
    /// while one is in flight is rejected as busy, not queued.
    pub async fn run_command<F>(&self, id: &str, command: F) -> Result<Outcome, ApiError>
    where
        F: FnOnce(&Orchestrator<'_>, &Session, &SurveyTemplate, &dyn ReplySource) -> Result<Outcome, DialogueError>
            + Send
            + 'static,
    {
        let slot = self.slot(id)?;
        let _turn = slot.turn.clone().try_lock_owned().map_err(|_| ApiError::busy())?;
        let session = slot.current.read().unwrap_or_else(|p| p.into_inner()).clone();
        let resources = self.inner.resources.clone();
        let gateway = self.inner.gateway.clone();
        let store = self.inner.store.clone();
        let outcome = tokio::task::spawn_blocking(move || -> Result<Outcome, ApiError> {
            let template = resources.template(&session)?;
            let orch = Orchestrator::new(&resources.prompts, &resources.lexicon, &resources.policy, &*resources.clock);
            let outcome = command(&orch, &session, template, &*gateway)?;
            lock_store(&store).append_all(outcome.events.clone())?;
            Ok(outcome)
        })
        .await
        .map_err(|e| ApiError::internal(e.to_string()))??;
        *slot.current.write().unwrap_or_else(|p| p.into_inner()) = outcome.session.clone();
        Ok(outcome)
    }
}
