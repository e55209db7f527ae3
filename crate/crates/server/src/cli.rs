//! Command-line entry points: `serve`, `analyze`, `export` and
//! `check-registry`.
//!
//! Exit codes: 0 on success, 1 for invalid input or configuration, 2 for I/O
//! failures.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use pulsechat_core::analytics::{build_report, AnalyticsError, FeedbackSurvey, ReportConfig};
use pulsechat_core::dialogue::{Clock, SystemClock};
use pulsechat_core::gateway::{ChatCompletionProvider, ProviderSelection, ReplySource, ScriptedProvider, Secret};
use pulsechat_core::sentiment::SentimentLexicon;
use pulsechat_core::storage::{self, write_export, EventStore, ExportFormat, ExportKind, EVENTS_FILE};
use pulsechat_core::survey::{default_staff_samples, RegistryError, TemplateRegistry};
use thiserror::Error;
use tracing::info;

use crate::config::{SeedMode, ServiceConfig, DEFAULT_PORT, ENV_ADMIN_TOKEN};
use crate::state::{AppState, Resources};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

fn io_error(context: impl std::fmt::Display, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{context}: {e}"))
}

#[derive(Debug, Parser)]
#[command(name = "pulsechat", version, about = "Adaptive conversational campus-climate survey service")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Start the HTTP service.
    Serve(ServeArgs),
    /// Build the analytics report from a data directory.
    Analyze {
        /// Data directory holding the event log.
        #[arg(long)]
        input: PathBuf,
        /// Where to write the JSON report.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a dataset export under `<data-dir>/exports/`.
    Export {
        /// transcripts, feedback or sentiment.
        #[arg(long)]
        what: String,
        /// csv or ndjson.
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long, env = "PULSECHAT_DATA_DIR", default_value = "data")]
        data_dir: PathBuf,
    },
    /// Check that every role/detail combination maps to exactly one template.
    CheckRegistry {
        /// Registry file; the built-in registry when omitted.
        #[arg(long)]
        registry: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "PULSECHAT_PORT", default_value_t = DEFAULT_PORT)]
    pub port: u16,
    #[arg(long, env = "PULSECHAT_DATA_DIR", default_value = "data")]
    pub data_dir: PathBuf,
    #[arg(long, env = "PULSECHAT_REGISTRY")]
    pub registry: Option<PathBuf>,
    #[arg(long, env = "PULSECHAT_LEXICON")]
    pub lexicon: Option<PathBuf>,
    #[arg(long, env = "PULSECHAT_PROMPTS")]
    pub prompts: Option<PathBuf>,
    #[arg(long, env = "PULSECHAT_ELABORATION_THRESHOLD", default_value_t = 15)]
    pub elaboration_threshold: usize,
    /// Fixed base seed for random topic picks; fresh entropy when omitted.
    #[arg(long, env = "PULSECHAT_SEED")]
    pub seed: Option<u64>,
}

impl ServeArgs {
    pub fn into_config(self, lookup: impl Fn(&str) -> Option<String>) -> Result<ServiceConfig, CliError> {
        let provider = ProviderSelection::from_lookup(&lookup).map_err(|e| CliError::Invalid(e.to_string()))?;
        let config = ServiceConfig {
            port: self.port,
            data_dir: self.data_dir,
            registry_path: self.registry,
            lexicon_path: self.lexicon,
            prompts_path: self.prompts,
            provider,
            elaboration_word_threshold: self.elaboration_threshold,
            seed_mode: self.seed.map_or(SeedMode::Entropy, SeedMode::Fixed),
            admin_token: Secret::new(lookup(ENV_ADMIN_TOKEN).unwrap_or_default()),
        };
        config.validate().map_err(|e| CliError::Invalid(e.to_string()))?;
        Ok(config)
    }
}

pub fn build_gateway(selection: &ProviderSelection) -> Result<Arc<dyn ReplySource>, CliError> {
    Ok(match selection {
        ProviderSelection::Scripted { script_file } => {
            Arc::new(ScriptedProvider::from_file(script_file).map_err(|e| CliError::Invalid(e.to_string()))?)
        }
        ProviderSelection::ChatCompletion(config) => Arc::new(ChatCompletionProvider::new(config.clone())),
    })
}

async fn serve(config: ServiceConfig) -> Result<(), CliError> {
    let resources = Resources::load(&config).map_err(|e| CliError::Invalid(e.to_string()))?;
    let store = EventStore::open(&config.data_dir).map_err(|e| io_error("opening the event log", e))?;
    let gateway = build_gateway(&config.provider)?;
    let state = AppState::new(resources, store, gateway, config.seed_mode, config.admin_token.clone());
    let app = crate::routes::router(state);
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", config.port))
        .await
        .map_err(|e| io_error(format!("binding port {}", config.port), e))?;
    info!(port = config.port, data_dir = %config.data_dir.display(), "listening");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| io_error("serving", e))
}

/// Opens a data directory read-only: a missing log means no sessions.
fn open_data_dir(dir: &Path) -> Result<EventStore, CliError> {
    if !dir.is_dir() {
        return Err(CliError::Io(format!("data directory {} does not exist", dir.display())));
    }
    if !dir.join(EVENTS_FILE).exists() {
        return Ok(EventStore::in_memory());
    }
    EventStore::open(dir).map_err(|e| io_error(format!("reading {}", dir.display()), e))
}

pub fn analyze(input: &Path, out: &Path) -> Result<(), CliError> {
    let store = open_data_dir(input)?;
    let surveys: Vec<FeedbackSurvey> = storage::feedback(&store).iter().map(|r| r.survey()).collect();
    let comments: Vec<String> = storage::comments(&store).into_iter().map(|c| c.text).collect();
    let lexicon = SentimentLexicon::shipped();
    let stopwords = pulsechat_core::analytics::Stopwords::shipped();
    let report = build_report(&surveys, &comments, &lexicon, &stopwords, ReportConfig::default()).map_err(|e| match e {
        AnalyticsError::EmptyInput => CliError::Invalid(format!("EmptyInput: no feedback or comments in {}", input.display())),
        other => CliError::Invalid(other.to_string()),
    })?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Invalid(e.to_string()))?;
    fs::write(out, json + "\n").map_err(|e| io_error(format!("writing {}", out.display()), e))?;
    if let Some(stats) = &report.stats {
        println!("{}", stats.render_table());
    }
    println!("report written to {}", out.display());
    Ok(())
}

pub fn export(what: &str, format: &str, data_dir: &Path) -> Result<PathBuf, CliError> {
    let kind = ExportKind::parse(what).ok_or_else(|| CliError::Invalid(format!("unknown export {what:?}")))?;
    let format = ExportFormat::parse(format).ok_or_else(|| CliError::Invalid(format!("unknown format {format:?}")))?;
    let store = open_data_dir(data_dir)?;
    let bytes = storage::export(&store, kind, format, &SentimentLexicon::shipped());
    let path = write_export(data_dir, kind, format, &bytes, SystemClock.now_ms())
        .map_err(|e| io_error("writing the export", e))?;
    println!("{}", path.display());
    Ok(path)
}

pub fn check_registry(path: Option<&Path>) -> Result<String, CliError> {
    let registry = match path {
        None => TemplateRegistry::shipped(),
        Some(p) => TemplateRegistry::load(p).map_err(|e| match e {
            RegistryError::Io(msg) => CliError::Io(msg),
            other => CliError::Invalid(other.to_string()),
        })?,
    };
    let report = registry
        .check_coverage(&default_staff_samples())
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    Ok(format!(
        "registry ok: {} role/detail combinations each map to exactly one of {} templates",
        report.combinations, report.templates
    ))
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Serve(args) => {
            let config = args.into_config(|k| std::env::var(k).ok())?;
            let runtime = tokio::runtime::Runtime::new().map_err(|e| io_error("starting the runtime", e))?;
            runtime.block_on(serve(config))
        }
        Command::Analyze { input, out } => analyze(&input, &out),
        Command::Export { what, format, data_dir } => export(&what, &format, &data_dir).map(|_| ()),
        Command::CheckRegistry { registry } => {
            println!("{}", check_registry(registry.as_deref())?);
            Ok(())
        }
    }
}

pub fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
