//! HTTP API: transcription, editing, workspace CRUD and exports behind
//! bearer-token auth and per-user rate limiting.

pub mod auth;
pub mod config;
pub mod rate;
pub mod store;

use std::collections::HashMap;
use std::future::Future;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};
use thiserror::Error;
use tokio::sync::Semaphore;

use crate::ast::{render_latex, Expr};
use crate::context::{
    transcribe, BackendError, ContextError, EquationRef, FewShotSet, GrammarBackend, RemoteBackend, TranscribeError,
    TranscribeOutcome, TranscriptionBackend,
};
use crate::edit::{apply_command, parse_command, EditCommand, EditError};
use crate::export::{export, ExportError, ExportFormat};
use crate::spoken::{Lexicon, SpokenError};
use crate::workspace::{self, EquationId, NodeId, Workspace, WorkspaceError};

use auth::{AuthError, UserAccount};
use config::{BackendMode, ServiceConfig};
use rate::{Clock, RateLimiter};
use store::{FileStore, MemoryStore, StoredDoc, WorkspaceStore};

pub const MAX_UTTERANCE_CHARS: usize = 2000;
pub const MAX_DOCUMENT_BYTES: usize = 20 * 1024 * 1024;

/// Every route, as (method, path).
pub const ROUTES: &[(&str, &str)] = &[
    ("get", "/healthz"),
    ("post", "/v1/transcribe"),
    ("post", "/v1/edit"),
    ("get", "/v1/workspaces"),
    ("post", "/v1/workspaces"),
    ("get", "/v1/workspaces/{id}"),
    ("put", "/v1/workspaces/{id}"),
    ("post", "/v1/export"),
];

/// The closed set of error codes in `{code, message}` bodies.
pub const ERROR_CODES: &[&str] = &[
    "missing",
    "expired",
    "invalid_signature",
    "invalid_token",
    "rate_limited",
    "invalid_request",
    "payload_too_large",
    "utterance_too_long",
    "workspace_not_found",
    "node_not_found",
    "equation_not_found",
    "etag_mismatch",
    "invalid_document",
    "workspace_exists",
    "no_math_found",
    "parse_error",
    "needs_remote_backend",
    "no_focus",
    "not_a_command",
    "ambiguous_target",
    "target_not_found",
    "invalid_command",
    "invalid_expression",
    "empty_node",
    "unsupported_in_profile",
    "unknown_format",
    "backend_unavailable",
    "backend_rejected",
    "internal",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub retry_after: Option<u64>,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        debug_assert!(ERROR_CODES.contains(&code), "{code}");
        ApiError { status, code, message: message.into(), retry_after: None }
    }

    fn unprocessable(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, code, message)
    }

    fn not_found(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, message)
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "code": self.code, "message": self.message });
        let mut resp = match self.retry_after {
            Some(secs) => {
                body["retry_after"] = json!(secs);
                let mut r = (self.status, Json(body)).into_response();
                r.headers_mut().insert(header::RETRY_AFTER, HeaderValue::from(secs));
                r
            }
            None => (self.status, Json(body)).into_response(),
        };
        if self.status == StatusCode::UNAUTHORIZED {
            resp.headers_mut().insert(header::WWW_AUTHENTICATE, HeaderValue::from_static("Bearer"));
        }
        resp
    }
}

impl From<AuthError> for ApiError {
    fn from(e: AuthError) -> Self {
        ApiError::new(StatusCode::UNAUTHORIZED, e.code(), e.to_string())
    }
}

impl From<EditError> for ApiError {
    fn from(e: EditError) -> Self {
        let code = match e {
            EditError::NotACommand => "not_a_command",
            EditError::TargetNotFound => "target_not_found",
            EditError::AmbiguousTarget { .. } => "ambiguous_target",
            EditError::InvalidCommand(_) => "invalid_command",
            EditError::Invalid(_) => "invalid_expression",
        };
        ApiError::unprocessable(code, e.to_string())
    }
}

impl From<TranscribeError> for ApiError {
    fn from(e: TranscribeError) -> Self {
        let message = e.to_string();
        match e {
            TranscribeError::Context(ContextError::FocusNotFound(_)) => ApiError::not_found("equation_not_found", message),
            TranscribeError::Context(ContextError::NoMathInOutput) => ApiError::unprocessable("no_math_found", message),
            TranscribeError::Context(ContextError::InvalidDecay(_)) => ApiError::unprocessable("invalid_document", message),
            TranscribeError::Edit(e) => e.into(),
            TranscribeError::NoFocus => ApiError::unprocessable("no_focus", message),
            TranscribeError::NeedsRemoteBackend => ApiError::unprocessable("needs_remote_backend", message),
            TranscribeError::Spoken(SpokenError::NoMathFound) => ApiError::unprocessable("no_math_found", message),
            TranscribeError::Spoken(SpokenError::Syntax { .. }) | TranscribeError::Latex(_) => {
                ApiError::unprocessable("parse_error", message)
            }
            TranscribeError::Spoken(SpokenError::Invalid(_)) | TranscribeError::Invalid(_) => {
                ApiError::unprocessable("invalid_expression", message)
            }
            TranscribeError::Backend(BackendError::Unavailable(_)) => {
                ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "backend_unavailable", message)
            }
            TranscribeError::Backend(BackendError::Rejected(_)) => {
                ApiError::new(StatusCode::BAD_GATEWAY, "backend_rejected", message)
            }
        }
    }
}

impl From<WorkspaceError> for ApiError {
    fn from(e: WorkspaceError) -> Self {
        let message = e.to_string();
        match e {
            WorkspaceError::NodeNotFound(_) => ApiError::not_found("node_not_found", message),
            WorkspaceError::EquationNotFound(_) => ApiError::not_found("equation_not_found", message),
            WorkspaceError::Invalid(_) => ApiError::unprocessable("invalid_expression", message),
            _ => ApiError::unprocessable("invalid_document", message),
        }
    }
}

impl From<store::StoreError> for ApiError {
    fn from(e: store::StoreError) -> Self {
        ApiError::internal(e.to_string())
    }
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error(transparent)]
    Lexicon(#[from] crate::spoken::LexiconError),
    #[error(transparent)]
    Store(#[from] store::StoreError),
    #[error("server I/O: {0}")]
    Io(#[from] std::io::Error),
}

/// Shared by every request.
pub struct AppState {
    pub config: ServiceConfig,
    clock: Arc<dyn Clock>,
    store: Arc<dyn WorkspaceStore>,
    backend: Arc<dyn TranscriptionBackend>,
    lexicon: Arc<Lexicon>,
    limiter: Mutex<RateLimiter>,
    accounts: Mutex<HashMap<String, UserAccount>>,
    locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
    in_flight: Arc<Semaphore>,
}

impl AppState {
    pub fn new(config: ServiceConfig, clock: Arc<dyn Clock>) -> Result<Arc<AppState>, ServiceError> {
        let store: Arc<dyn WorkspaceStore> = match &config.data_dir {
            Some(dir) => Arc::new(FileStore::open(dir)?),
            None => Arc::new(MemoryStore::default()),
        };
        Self::with_store(config, clock, store)
    }

    pub fn with_store(
        config: ServiceConfig,
        clock: Arc<dyn Clock>,
        store: Arc<dyn WorkspaceStore>,
    ) -> Result<Arc<AppState>, ServiceError> {
        config.check()?;
        let lexicon = Lexicon::stem_with_files(&config.lexicons)?;
        let backend: Arc<dyn TranscriptionBackend> = match config.backend_mode {
            BackendMode::Grammar => Arc::new(GrammarBackend { lexicon: lexicon.clone() }),
            BackendMode::Remote => Arc::new(RemoteBackend::new(config.remote.clone())),
        };
        Ok(Arc::new(AppState {
            limiter: Mutex::new(RateLimiter::new(config.rate)),
            in_flight: Arc::new(Semaphore::new(config.max_in_flight)),
            config,
            clock,
            store,
            backend,
            lexicon: Arc::new(lexicon),
            accounts: Mutex::new(HashMap::new()),
            locks: Mutex::new(HashMap::new()),
        }))
    }

    pub fn account(&self, user: &str) -> Option<UserAccount> {
        self.accounts.lock().expect("accounts lock").get(user).cloned()
    }

    fn authenticate(&self, headers: &HeaderMap) -> Result<UserAccount, ApiError> {
        let value = headers.get(header::AUTHORIZATION).map(|v| v.to_str().unwrap_or(""));
        let token = auth::bearer(value)?;
        let claims = auth::verify(token, &self.config.issuers, self.clock.now())?;
        let mut accounts = self.accounts.lock().expect("accounts lock");
        let account = accounts.entry(claims.sub.clone()).or_insert_with(|| UserAccount {
            user_id: claims.sub.clone(),
            display_name: claims.name.clone().unwrap_or_else(|| claims.sub.clone()),
            token_fingerprints: Default::default(),
            created: chrono::Utc::now(),
        });
        account.token_fingerprints.insert(auth::fingerprint(token));
        Ok(account.clone())
    }

    fn admit(&self, user: &UserAccount) -> Result<(), ApiError> {
        let now = self.clock.now();
        self.limiter.lock().expect("limiter lock").check(&user.user_id, now).map_err(|secs| ApiError {
            retry_after: Some(secs),
            ..ApiError::new(StatusCode::TOO_MANY_REQUESTS, "rate_limited", format!("rate limited; retry in {secs} s"))
        })
    }

    fn lock_for(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        self.locks.lock().expect("locks lock").entry(id.to_string()).or_default().clone()
    }

    /// The document, if it exists and belongs to `user`.
    fn fetch(&self, user: &UserAccount, id: &str) -> Result<StoredDoc, ApiError> {
        match self.store.get(id)? {
            Some(doc) if doc.owner == user.user_id => Ok(doc),
            _ => Err(ApiError::not_found("workspace_not_found", format!("workspace {id} not found"))),
        }
    }

    fn fetch_workspace(&self, user: &UserAccount, id: &str) -> Result<Workspace, ApiError> {
        let doc = self.fetch(user, id)?;
        workspace::load(&doc.bytes).map_err(|e| ApiError::internal(format!("stored document is unreadable: {e}")))
    }

    fn store_workspace(&self, user: &UserAccount, ws: &Workspace) -> Result<String, ApiError> {
        let bytes = workspace::save(ws);
        let tag = etag(&bytes);
        self.store.put(&ws.id, StoredDoc { owner: user.user_id.clone(), bytes })?;
        Ok(tag)
    }
}

pub fn etag(bytes: &[u8]) -> String {
    format!("\"{}\"", &hex::encode(Sha256::digest(bytes))[..32])
}

fn parse_body<T: serde::de::DeserializeOwned>(body: Result<Bytes, BytesRejection>) -> Result<T, ApiError> {
    let bytes = read_body(body)?;
    serde_path_to_error::deserialize(&mut serde_json::Deserializer::from_slice(&bytes)).map_err(|e| {
        let path = e.path().to_string();
        ApiError::unprocessable("invalid_request", format!("at `{path}`: {}", e.into_inner()))
    })
}

fn read_body(body: Result<Bytes, BytesRejection>) -> Result<Bytes, ApiError> {
    body.map_err(|e| match e.status() {
        StatusCode::PAYLOAD_TOO_LARGE => ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            "payload_too_large",
            format!("request bodies are limited to {MAX_DOCUMENT_BYTES} bytes"),
        ),
        status => ApiError::new(status, "invalid_request", e.body_text()),
    })
}

fn with_etag(mut resp: Response, tag: &str) -> Response {
    if let Ok(v) = HeaderValue::from_str(tag) {
        resp.headers_mut().insert(header::ETAG, v);
    }
    resp
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .route("/v1/transcribe", post(transcribe_handler))
        .route("/v1/edit", post(edit_handler))
        .route("/v1/workspaces", get(list_workspaces).post(create_workspace))
        .route("/v1/workspaces/{id}", get(get_workspace).put(put_workspace))
        .route("/v1/export", post(export_handler))
        .layer(DefaultBodyLimit::max(MAX_DOCUMENT_BYTES))
        .with_state(state)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranscribeRequest {
    pub workspace_id: String,
    /// Equation the utterance refers to; ranks the context.
    #[serde(default)]
    pub focus: Option<EquationId>,
    pub utterance: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EditInfo {
    pub command: EditCommand,
    pub equation_id: EquationId,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TranscribeResponse {
    pub latex: String,
    pub expr: Expr,
    pub residual_text: String,
    pub source_span: (usize, usize),
    /// Present when the utterance was an edit of the focus equation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edit: Option<EditInfo>,
}

fn check_utterance(u: &str) -> Result<(), ApiError> {
    let n = u.chars().count();
    if n > MAX_UTTERANCE_CHARS {
        return Err(ApiError::unprocessable(
            "utterance_too_long",
            format!("utterance has {n} characters; the limit is {MAX_UTTERANCE_CHARS}"),
        ));
    }
    Ok(())
}

async fn transcribe_handler(
    State(state): State<Arc<AppState>>,
    headers: HeaderMap,
    body: Result<Bytes, BytesRejection>,
) -> Result<Json<TranscribeResponse>, ApiError> {
    let user = state.authenticate(&headers)?;
    state.admit(&user)?;
    let req: TranscribeRequest = parse_body(body)?;
    check_utterance(&req.utterance)?;
    let lock = state.lock_for(&req.workspace_id);
    let _guard = lock.lock().await;
    let ws = state.fetch_workspace(&user, &req.workspace_id)?;
    let focus = match req.focus {
        Some(id) => {
            let (node, _) = ws.equation(id)?;
            Some(EquationRef { node: node.id, equation: id })
        }
        None => None,
    };
    let _permit = state.in_flight.clone().acquire_owned().await.map_err(|e| ApiError::internal(e.to_string()))?;
    let worker = state.clone();
    let render = ws.preferences.render.clone();
    let outcome = tokio::task::spawn_blocking(move || {
        transcribe(&ws, focus, &req.utterance, worker.backend.as_ref(), &worker.lexicon, FewShotSet::builtin())
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))??;
    Ok(Json(match outcome {
        TranscribeOutcome::Transcription(t) => TranscribeResponse {
            latex: render_latex(&t.expr, &render),
            expr: t.expr,
            residual_text: t.residual_text,
            source_span: t.source_span,
            edit: None,
        },
        TranscribeOutcome::Edit { command, target, expr } => TranscribeResponse {
            latex: render_latex(&expr, &render),
            expr,
            residual_text: String::new(),
            source_span: (0, 0),
            edit: Some(EditInfo { command, equation_id: target.equation }),
        },
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EditRequest {
    pub workspace_id: String,
    pub equation_id: EquationId,
    pub utterance: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EditResponse {
    pub latex: String,
    pub expr: Expr,
    pub command: EditCommand,
    pub node_id: NodeId,
    /// The new child entry.
    pub equation_id: EquationId,
    pub parent_equation_id: EquationId,
}

async fn edit_handler(
    State(state): State<Arc<AppState>>,
    headers: HeaderMap,
    body: Result<Bytes, BytesRejection>,
) -> Result<Response, ApiError> {
    let user = state.authenticate(&headers)?;
    state.admit(&user)?;
    let req: EditRequest = parse_body(body)?;
    check_utterance(&req.utterance)?;
    let lock = state.lock_for(&req.workspace_id);
    let _guard = lock.lock().await;
    let mut ws = state.fetch_workspace(&user, &req.workspace_id)?;
    let (node, entry) = ws.equation(req.equation_id)?;
    let node_id = node.id;
    let command = parse_command(&req.utterance, &state.lexicon)?;
    let expr = apply_command(&entry.expr, &command)?;
    let new_id = ws.add_equation(node_id, expr, Some(req.equation_id))?;
    let (_, created) = ws.equation(new_id)?;
    let resp = EditResponse {
        latex: created.latex_cache.clone(),
        expr: created.expr.clone(),
        command,
        node_id,
        equation_id: new_id,
        parent_equation_id: req.equation_id,
    };
    let tag = state.store_workspace(&user, &ws)?;
    Ok(with_etag(Json(resp).into_response(), &tag))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorkspaceSummary {
    pub id: String,
    pub title: String,
    pub modified: chrono::DateTime<chrono::Utc>,
}

async fn list_workspaces(State(state): State<Arc<AppState>>, headers: HeaderMap) -> Result<Json<Vec<WorkspaceSummary>>, ApiError> {
    let user = state.authenticate(&headers)?;
    let mut out = Vec::new();
    for id in state.store.list(&user.user_id)? {
        let ws = state.fetch_workspace(&user, &id)?;
        out.push(WorkspaceSummary { id: ws.id, title: ws.title, modified: ws.modified });
    }
    Ok(Json(out))
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    #[serde(default)]
    title: String,
}

fn document_response(status: StatusCode, bytes: Vec<u8>) -> Response {
    let tag = etag(&bytes);
    let resp = (status, [(header::CONTENT_TYPE, "application/json")], bytes).into_response();
    with_etag(resp, &tag)
}

/// `{"title": ..}` creates an empty workspace; a full document is imported.
async fn create_workspace(
    State(state): State<Arc<AppState>>,
    headers: HeaderMap,
    body: Result<Bytes, BytesRejection>,
) -> Result<Response, ApiError> {
    let user = state.authenticate(&headers)?;
    let bytes = read_body(body)?;
    let value: serde_json::Value = if bytes.iter().all(u8::is_ascii_whitespace) {
        json!({})
    } else {
        serde_json::from_slice(&bytes).map_err(|e| ApiError::unprocessable("invalid_request", e.to_string()))?
    };
    let ws = if value.get("schema_version").is_some() {
        let ws = workspace::load(&bytes).map_err(ApiError::from)?;
        uuid::Uuid::parse_str(&ws.id)
            .map_err(|_| ApiError::unprocessable("invalid_document", "workspace id must be a UUID"))?;
        ws
    } else {
        let req: CreateRequest =
            serde_json::from_value(value).map_err(|e| ApiError::unprocessable("invalid_request", e.to_string()))?;
        let mut ws = Workspace::new(req.title);
        let mut prefs = ws.preferences.clone();
        prefs.decay = state.config.context.decay;
        prefs.context_cap = state.config.context.cap;
        ws.set_preferences(prefs)?;
        ws
    };
    let lock = state.lock_for(&ws.id);
    let _guard = lock.lock().await;
    if state.store.get(&ws.id)?.is_some() {
        return Err(ApiError::new(StatusCode::CONFLICT, "workspace_exists", format!("workspace {} already exists", ws.id)));
    }
    state.store_workspace(&user, &ws)?;
    let mut resp = document_response(StatusCode::CREATED, workspace::save(&ws));
    if let Ok(v) = HeaderValue::from_str(&format!("/v1/workspaces/{}", ws.id)) {
        resp.headers_mut().insert(header::LOCATION, v);
    }
    Ok(resp)
}

async fn get_workspace(
    State(state): State<Arc<AppState>>,
    headers: HeaderMap,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let user = state.authenticate(&headers)?;
    let doc = state.fetch(&user, &id)?;
    Ok(document_response(StatusCode::OK, doc.bytes))
}

fn if_match_ok(headers: &HeaderMap, current: &str) -> Result<bool, ApiError> {
    let Some(v) = headers.get(header::IF_MATCH) else { return Ok(true) };
    let v = v.to_str().map_err(|_| ApiError::unprocessable("invalid_request", "If-Match is not text"))?;
    Ok(v.split(',').map(str::trim).any(|t| t == "*" || t == current || t.strip_prefix("W/") == Some(current)))
}

async fn put_workspace(
    State(state): State<Arc<AppState>>,
    headers: HeaderMap,
    Path(id): Path<String>,
    body: Result<Bytes, BytesRejection>,
) -> Result<Response, ApiError> {
    let user = state.authenticate(&headers)?;
    let bytes = read_body(body)?;
    let lock = state.lock_for(&id);
    let _guard = lock.lock().await;
    let current = state.fetch(&user, &id)?;
    if !if_match_ok(&headers, &etag(&current.bytes))? {
        return Err(ApiError::new(StatusCode::CONFLICT, "etag_mismatch", "the workspace changed since it was read"));
    }
    let ws = workspace::load(&bytes).map_err(ApiError::from)?;
    if ws.id != id {
        return Err(ApiError::unprocessable("invalid_document", format!("document id {} does not match {id}", ws.id)));
    }
    state.store_workspace(&user, &ws)?;
    Ok(document_response(StatusCode::OK, workspace::save(&ws)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportRequest {
    pub workspace_id: String,
    pub node_id: NodeId,
    /// `latex`, `word` or `print`.
    pub format: String,
    #[serde(default = "yes")]
    pub include_annotations: bool,
}

fn yes() -> bool {
    true
}

pub fn parse_format(s: &str) -> Option<ExportFormat> {
    match s {
        "latex" => Some(ExportFormat::Latex),
        "word" => Some(ExportFormat::WordMathml),
        "print" => Some(ExportFormat::PrintHtml),
        _ => None,
    }
}

async fn export_handler(
    State(state): State<Arc<AppState>>,
    headers: HeaderMap,
    body: Result<Bytes, BytesRejection>,
) -> Result<Response, ApiError> {
    let user = state.authenticate(&headers)?;
    let req: ExportRequest = parse_body(body)?;
    let format = parse_format(&req.format).ok_or_else(|| {
        ApiError::unprocessable("unknown_format", format!("unknown format {:?}; expected latex, word or print", req.format))
    })?;
    let ws = state.fetch_workspace(&user, &req.workspace_id)?;
    let node = ws.node(req.node_id)?;
    let bundle = export(node, format, req.include_annotations, &ws.preferences.render).map_err(|e| match e {
        ExportError::EmptyNode => ApiError::unprocessable("empty_node", e.to_string()),
        ExportError::Mathml(_) => ApiError::unprocessable("unsupported_in_profile", e.to_string()),
    })?;
    let mut resp = (StatusCode::OK, bundle.payload).into_response();
    let h = resp.headers_mut();
    h.insert(header::CONTENT_TYPE, HeaderValue::from_str(&bundle.media_type).expect("media types are ASCII"));
    if let Ok(v) = HeaderValue::from_str(&bundle.human_label) {
        h.insert("x-export-label", v);
    }
    Ok(resp)
}

/// Serves until `shutdown` resolves, then drains in-flight requests for at
/// most `drain_secs`.
pub async fn run(
    state: Arc<AppState>,
    listener: tokio::net::TcpListener,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), ServiceError> {
    let drain = Duration::from_secs(state.config.drain_secs);
    let stopping = Arc::new(tokio::sync::Notify::new());
    let notify = stopping.clone();
    let server = axum::serve(listener, router(state)).with_graceful_shutdown(async move {
        shutdown.await;
        notify.notify_one();
    });
    let deadline = async move {
        stopping.notified().await;
        tokio::time::sleep(drain).await;
    };
    tokio::select! {
        r = server => r.map_err(ServiceError::Io),
        _ = deadline => {
            tracing::warn!("drain deadline passed; dropping remaining connections");
            Ok(())
        }
    }
}

/// Resolves on SIGTERM or Ctrl-C.
pub async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
}
