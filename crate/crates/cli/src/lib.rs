//! Experiment runner for `isac-core`: strict JSON configs in, CSV/JSON/SVG artifacts out.

pub mod config;
pub mod presets;
pub mod run;
pub mod svg;

use isac_core::IsacError;
use serde::Serialize;

pub use config::{load_config, RunConfig};
pub use run::{run_experiment, RunSummary};

/// Version string baked in at build time (`git describe` when available).
pub const VERSION: &str = env!("ISAC_LAB_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error{}: {message}", field.as_ref().map(|f| format!(" in `{f}`")).unwrap_or_default())]
    Config { field: Option<String>, message: String },
    #[error("runtime error: {0}")]
    Runtime(String),
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<&'a str>,
    message: String,
    exit_code: i32,
}

impl CliError {
    pub fn field(name: &str, message: impl Into<String>) -> Self {
        CliError::Config {
            field: Some(name.to_string()),
            message: message.into(),
        }
    }

    pub fn parse(e: serde_json::Error) -> Self {
        let text = e.to_string();
        CliError::Config {
            field: unknown_field(&text).or_else(|| missing_field(&text)),
            message: text,
        }
    }

    /// Core errors raised while interpreting a config.
    pub fn from_core_config(e: IsacError) -> Self {
        let field = match &e {
            IsacError::InvalidParameter { name, .. } => Some(name.to_string()),
            _ => None,
        };
        CliError::Config {
            field,
            message: e.to_string(),
        }
    }

    pub fn runtime(context: &str, e: impl std::fmt::Display) -> Self {
        CliError::Runtime(format!("{context}: {e}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 1,
            CliError::Runtime(_) => 2,
        }
    }

    /// Single-line JSON for stderr.
    pub fn to_json(&self) -> String {
        let (kind, field, message) = match self {
            CliError::Config { field, message } => ("config", field.as_deref(), message.clone()),
            CliError::Runtime(m) => ("runtime", None, m.clone()),
        };
        serde_json::to_string(&ErrorReport {
            error: kind,
            field,
            message,
            exit_code: self.exit_code(),
        })
        .expect("error report serializes")
    }
}

fn quoted_after(text: &str, prefix: &str) -> Option<String> {
    let rest = &text[text.find(prefix)? + prefix.len()..];
    Some(rest[..rest.find('`')?].to_string())
}

fn unknown_field(text: &str) -> Option<String> {
    quoted_after(text, "unknown field `")
}

fn missing_field(text: &str) -> Option<String> {
    quoted_after(text, "missing field `")
}
