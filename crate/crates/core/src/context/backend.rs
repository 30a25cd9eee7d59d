use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::PromptBundle;
use crate::ast::{render_latex, RenderOptions};
use crate::spoken::{parse_spoken, Lexicon};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("transcription backend unavailable: {0}")]
    Unavailable(String),
    #[error("transcription backend rejected the request: {0}")]
    Rejected(String),
}

/// Turns a prompt into raw text. Implementations must not touch the workspace.
pub trait TranscriptionBackend: Send + Sync {
    /// Whether edit commands are recognized before the prompt is built.
    fn supports_commands(&self) -> bool;

    /// The deterministic grammar parses utterances directly instead of
    /// going through `complete`.
    fn is_grammar(&self) -> bool {
        false
    }

    fn complete(&self, bundle: &PromptBundle) -> Result<String, BackendError>;
}

/// The offline spoken-grammar backend.
#[derive(Debug, Clone, Default)]
pub struct GrammarBackend {
    pub lexicon: Lexicon,
}

impl TranscriptionBackend for GrammarBackend {
    fn supports_commands(&self) -> bool {
        true
    }

    fn is_grammar(&self) -> bool {
        true
    }

    fn complete(&self, bundle: &PromptBundle) -> Result<String, BackendError> {
        let t = parse_spoken(&bundle.user_utterance, &self.lexicon, None)
            .map_err(|e| BackendError::Rejected(e.to_string()))?;
        Ok(render_latex(&t.expr, &RenderOptions::default()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RemoteConfig {
    /// `http://` URL that accepts the prompt text by POST.
    pub endpoint: String,
    pub api_key: Option<String>,
    pub supports_commands: bool,
    pub timeout_secs: u64,
    pub retries: u32,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig { endpoint: String::new(), api_key: None, supports_commands: false, timeout_secs: 30, retries: 1 }
    }
}

/// Sends [`PromptBundle::to_text`] as a `text/plain` POST and returns the body.
pub struct RemoteBackend {
    config: RemoteConfig,
    agent: ureq::Agent,
}

impl RemoteBackend {
    pub fn new(config: RemoteConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        RemoteBackend { config, agent }
    }

    fn attempt(&self, body: &str) -> Result<String, (bool, BackendError)> {
        let mut req = self.agent.post(&self.config.endpoint).content_type("text/plain; charset=utf-8");
        if let Some(key) = &self.config.api_key {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        let resp = req.send(body).map_err(|e| (true, BackendError::Unavailable(e.to_string())))?;
        let status = resp.status().as_u16();
        let text = resp.into_body().read_to_string().map_err(|e| (true, BackendError::Unavailable(e.to_string())))?;
        match status {
            200..=299 => Ok(text),
            500..=599 => Err((true, BackendError::Unavailable(format!("status {status}")))),
            _ => Err((false, BackendError::Rejected(format!("status {status}: {}", text.trim())))),
        }
    }
}

impl TranscriptionBackend for RemoteBackend {
    fn supports_commands(&self) -> bool {
        self.config.supports_commands
    }

    fn complete(&self, bundle: &PromptBundle) -> Result<String, BackendError> {
        let body = bundle.to_text();
        let mut tries = 0;
        loop {
            match self.attempt(&body) {
                Ok(text) => return Ok(text),
                Err((true, e)) if tries >= self.config.retries => return Err(e),
                Err((true, _)) => tries += 1,
                Err((false, e)) => return Err(e),
            }
        }
    }
}
