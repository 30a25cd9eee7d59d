//! Service configuration: a TOML file plus environment overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::auth::IssuerKey;
use super::rate::RateConfig;
use crate::context::RemoteConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendMode {
    Grammar,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContextConfig {
    /// Defaults for workspaces created by the service.
    pub decay: f64,
    pub cap: usize,
}

impl Default for ContextConfig {
    fn default() -> Self {
        ContextConfig { decay: 0.5, cap: 12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub listen_addr: String,
    pub issuers: Vec<IssuerKey>,
    pub backend_mode: BackendMode,
    pub remote: RemoteConfig,
    pub rate: RateConfig,
    pub context: ContextConfig,
    /// Extra lexicon files merged over the built-in STEM lexicon.
    pub lexicons: Vec<PathBuf>,
    /// Directory for the file store; in-memory when absent.
    pub data_dir: Option<PathBuf>,
    pub max_in_flight: usize,
    pub drain_secs: u64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            listen_addr: "127.0.0.1:8080".into(),
            issuers: Vec::new(),
            backend_mode: BackendMode::Grammar,
            remote: RemoteConfig::default(),
            rate: RateConfig::default(),
            context: ContextConfig::default(),
            lexicons: Vec::new(),
            data_dir: None,
            max_in_flight: 8,
            drain_secs: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("config error at `{path}`: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

fn err(path: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError { path: path.into(), message: message.into() }
}

fn parse_env<T: std::str::FromStr>(name: &str, raw: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    raw.trim().parse().map_err(|e: T::Err| err(name, e.to_string()))
}

impl ServiceConfig {
    pub fn from_toml(text: &str) -> Result<ServiceConfig, ConfigError> {
        let value: toml::Value = toml::from_str(text).map_err(|e| err("$", e.message().to_string()))?;
        serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            err(path, e.into_inner().to_string())
        })
    }

    /// Reads `path` (if any), then applies environment overrides from `env`.
    pub fn load(path: Option<&Path>, env: impl Fn(&str) -> Option<String>) -> Result<ServiceConfig, ConfigError> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| err("$", format!("{}: {e}", p.display())))?;
                let mut c = Self::from_toml(&text)?;
                let base = p.parent().unwrap_or(Path::new("."));
                for l in &mut c.lexicons {
                    if l.is_relative() {
                        *l = base.join(&*l);
                    }
                }
                if let Some(d) = c.data_dir.as_mut().filter(|d| d.is_relative()) {
                    *d = base.join(&*d);
                }
                c
            }
            None => ServiceConfig::default(),
        };
        config.apply_env(env)?;
        config.check()?;
        Ok(config)
    }

    pub fn apply_env(&mut self, env: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        if let Some(v) = env("LISTEN_ADDR") {
            self.listen_addr = v;
        }
        if let Some(v) = env("TOKEN_ISSUER_KEYS") {
            // issuer=secret pairs separated by commas.
            self.issuers = v
                .split(',')
                .filter(|p| !p.trim().is_empty())
                .map(|pair| {
                    let (issuer, secret) =
                        pair.split_once('=').ok_or_else(|| err("TOKEN_ISSUER_KEYS", "expected issuer=secret"))?;
                    Ok(IssuerKey { issuer: issuer.trim().into(), secret: secret.trim().into() })
                })
                .collect::<Result<_, ConfigError>>()?;
        }
        if let Some(v) = env("BACKEND_MODE") {
            self.backend_mode = match v.trim() {
                "grammar" => BackendMode::Grammar,
                "remote" => BackendMode::Remote,
                other => return Err(err("BACKEND_MODE", format!("expected grammar or remote, got {other:?}"))),
            };
        }
        if let Some(v) = env("REMOTE_ENDPOINT") {
            self.remote.endpoint = v;
        }
        if let Some(v) = env("REMOTE_KEY") {
            self.remote.api_key = Some(v);
        }
        if let Some(v) = env("RATE_CAPACITY") {
            self.rate.capacity = parse_env("RATE_CAPACITY", &v)?;
        }
        if let Some(v) = env("RATE_REFILL") {
            self.rate.refill_per_minute = parse_env("RATE_REFILL", &v)?;
        }
        if let Some(v) = env("CONTEXT_DECAY") {
            self.context.decay = parse_env("CONTEXT_DECAY", &v)?;
        }
        if let Some(v) = env("CONTEXT_CAP") {
            self.context.cap = parse_env("CONTEXT_CAP", &v)?;
        }
        Ok(())
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        self.listen_addr
            .parse::<std::net::SocketAddr>()
            .map_err(|e| err("listen_addr", e.to_string()))?;
        if !(self.context.decay > 0.0 && self.context.decay < 1.0) {
            return Err(err("context.decay", "must lie strictly between 0 and 1"));
        }
        if self.context.cap == 0 {
            return Err(err("context.cap", "must be positive"));
        }
        if self.rate.capacity == 0 {
            return Err(err("rate.capacity", "must be positive"));
        }
        if self.max_in_flight == 0 {
            return Err(err("max_in_flight", "must be positive"));
        }
        if self.backend_mode == BackendMode::Remote && !self.remote.endpoint.starts_with("http://") {
            return Err(err("remote.endpoint", "remote mode needs an http:// endpoint"));
        }
        for (i, k) in self.issuers.iter().enumerate() {
            if k.secret.is_empty() {
                return Err(err(format!("issuers[{i}].secret"), "must not be empty"));
            }
        }
        Ok(())
    }
}
