//! In-process calls against the service router.

use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{HeaderMap, Method, Request, StatusCode};
use http_body_util::BodyExt;
use phoenix_core::service::auth::{issue_token, IssuerKey};
use phoenix_core::service::config::ServiceConfig;
use phoenix_core::service::rate::ManualClock;
use phoenix_core::service::{router, AppState, ERROR_CODES};
use serde_json::Value;
use tower::ServiceExt;

pub const T0: Duration = Duration::from_secs(1_760_000_000);

pub struct Harness {
    pub state: Arc<AppState>,
    pub clock: ManualClock,
}

pub struct Reply {
    pub status: StatusCode,
    pub headers: HeaderMap,
    pub body: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&self.body)))
    }

    /// The error code, after checking the body is a well-formed error.
    pub fn code(&self) -> String {
        let v = self.json();
        let code = v["code"].as_str().expect("error body has a code").to_string();
        assert!(v["message"].is_string(), "{v}");
        assert!(ERROR_CODES.contains(&code.as_str()), "undocumented code {code}");
        code
    }

    pub fn text(&self) -> &str {
        std::str::from_utf8(&self.body).unwrap()
    }
}

pub fn test_config() -> ServiceConfig {
    ServiceConfig { issuers: vec![IssuerKey::test()], ..Default::default() }
}

impl Harness {
    pub fn new() -> Self {
        Self::with_config(test_config())
    }

    pub fn with_config(config: ServiceConfig) -> Self {
        let clock = ManualClock::at(T0);
        let state = AppState::new(config, Arc::new(clock.clone())).unwrap();
        Harness { state, clock }
    }

    pub fn token(&self, user: &str) -> String {
        use phoenix_core::service::rate::Clock;
        issue_token(&IssuerKey::test(), user, None, self.clock.now(), Duration::from_secs(3600))
    }

    pub async fn call(&self, method: Method, uri: &str, token: Option<&str>, body: Option<Vec<u8>>) -> Reply {
        self.call_with(method, uri, token, body, &[]).await
    }

    pub async fn call_with(
        &self,
        method: Method,
        uri: &str,
        token: Option<&str>,
        body: Option<Vec<u8>>,
        extra: &[(&str, &str)],
    ) -> Reply {
        let mut req = Request::builder().method(method).uri(uri);
        if let Some(t) = token {
            req = req.header("authorization", format!("Bearer {t}"));
        }
        if body.is_some() {
            req = req.header("content-type", "application/json");
        }
        for (k, v) in extra {
            req = req.header(*k, *v);
        }
        let req = req.body(body.map(Body::from).unwrap_or_else(Body::empty)).unwrap();
        let resp = router(self.state.clone()).oneshot(req).await.unwrap();
        let status = resp.status();
        let headers = resp.headers().clone();
        let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
        Reply { status, headers, body }
    }

    pub async fn post_json(&self, uri: &str, token: &str, body: Value) -> Reply {
        self.call(Method::POST, uri, Some(token), Some(serde_json::to_vec(&body).unwrap())).await
    }

    /// Creates a workspace for `token` with one node holding `latex`.
    pub async fn seeded(&self, token: &str, latex: &[&str]) -> (String, u64, Vec<u64>) {
        use phoenix_core::ast::parse_latex;
        use phoenix_core::workspace::{save, Point, Workspace};
        let mut ws = Workspace::new("seeded");
        let node = ws.add_node(Point::default(), None).unwrap();
        let ids = latex.iter().map(|l| ws.add_equation(node, parse_latex(l).unwrap(), None).unwrap()).collect();
        let r = self.call(Method::POST, "/v1/workspaces", Some(token), Some(save(&ws))).await;
        assert_eq!(r.status, StatusCode::CREATED, "{}", r.text());
        (ws.id, node, ids)
    }
}
