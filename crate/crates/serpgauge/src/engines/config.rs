use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_MIN_INTERVAL_MS: u64 = 2000;
pub const DEFAULT_MAX_RETRIES: u32 = 3;
pub const DEFAULT_TIMEOUT_MS: u64 = 15_000;
pub const QUERY_PLACEHOLDER: &str = "{query}";
pub const COUNT_PLACEHOLDER: &str = "{count}";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineMode {
    Live,
    Fixture,
}

/// CSS selectors locating results on an engine's result page. `link`,
/// `title` and `snippet` are evaluated inside each `result` element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionRules {
    pub result: String,
    pub link: String,
    pub title: String,
    pub snippet: String,
}

fn default_interval() -> u64 {
    DEFAULT_MIN_INTERVAL_MS
}

fn default_retries() -> u32 {
    DEFAULT_MAX_RETRIES
}

fn default_timeout() -> u64 {
    DEFAULT_TIMEOUT_MS
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub engine_id: String,
    pub mode: EngineMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url_template: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rules: Option<ExtractionRules>,
    #[serde(default = "default_interval")]
    pub min_request_interval_ms: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_timeout")]
    pub timeout_ms: u64,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

impl EngineConfig {
    /// A replay-only engine.
    pub fn fixture(engine_id: &str) -> EngineConfig {
        EngineConfig {
            engine_id: engine_id.to_string(),
            mode: EngineMode::Fixture,
            url_template: None,
            rules: None,
            min_request_interval_ms: DEFAULT_MIN_INTERVAL_MS,
            max_retries: DEFAULT_MAX_RETRIES,
            timeout_ms: DEFAULT_TIMEOUT_MS,
        }
    }

    pub fn check(&self) -> Result<(), String> {
        let id_ok = !self.engine_id.is_empty()
            && !self.engine_id.starts_with('.')
            && self
                .engine_id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c));
        if !id_ok {
            return Err(format!(
                "engine_id {:?} is not a safe file name",
                self.engine_id
            ));
        }
        if self.mode == EngineMode::Live {
            match &self.url_template {
                Some(t) if t.contains(QUERY_PLACEHOLDER) => {}
                Some(_) => return Err(format!("url_template lacks {QUERY_PLACEHOLDER}")),
                None => return Err("live mode requires url_template".to_string()),
            }
            let Some(rules) = &self.rules else {
                return Err("live mode requires rules".to_string());
            };
            for (name, css) in [
                ("result", &rules.result),
                ("link", &rules.link),
                ("title", &rules.title),
                ("snippet", &rules.snippet),
            ] {
                scraper::Selector::parse(css)
                    .map_err(|e| format!("rules.{name}: invalid selector {css:?}: {e}"))?;
            }
        }
        Ok(())
    }

    /// The request URL for a query, with the query percent-encoded.
    pub fn request_url(&self, query_text: &str, count: usize) -> Option<String> {
        let template = self.url_template.as_deref()?;
        let encoded =
            percent_encoding::utf8_percent_encode(query_text, percent_encoding::NON_ALPHANUMERIC)
                .to_string();
        Some(
            template
                .replace(QUERY_PLACEHOLDER, &encoded)
                .replace(COUNT_PLACEHOLDER, &count.to_string()),
        )
    }

    pub fn load(path: &Path) -> Result<EngineConfig, ConfigError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: shown.clone(),
            source,
        })?;
        let config: EngineConfig =
            serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
                path: shown.clone(),
                source,
            })?;
        config.check().map_err(|message| ConfigError::Invalid {
            path: shown,
            message,
        })?;
        Ok(config)
    }
}

/// Loads every `*.json` in `dir`, sorted by engine id. Engine ids must be
/// unique.
pub fn load_engine_dir(dir: &Path) -> Result<Vec<EngineConfig>, ConfigError> {
    let io = |source| ConfigError::Io {
        path: dir.display().to_string(),
        source,
    };
    let mut configs = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.extension().is_some_and(|e| e == "json") {
            configs.push(EngineConfig::load(&path)?);
        }
    }
    configs.sort_by(|a, b| a.engine_id.cmp(&b.engine_id));
    if let Some(w) = configs
        .windows(2)
        .find(|w| w[0].engine_id == w[1].engine_id)
    {
        return Err(ConfigError::Invalid {
            path: dir.display().to_string(),
            message: format!("engine_id {:?} defined twice", w[0].engine_id),
        });
    }
    if configs.is_empty() {
        return Err(ConfigError::Invalid {
            path: dir.display().to_string(),
            message: "no engine configs found".to_string(),
        });
    }
    Ok(configs)
}
