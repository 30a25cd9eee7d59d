//! Bearer-token verification against configured HMAC issuers.

use std::collections::BTreeSet;
use std::time::Duration;

use chrono::{DateTime, Utc};
use jsonwebtoken::errors::ErrorKind;
use jsonwebtoken::{decode, encode, Algorithm, DecodingKey, EncodingKey, Header, Validation};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// The issuer used by the test suite and local development. Never deploy it.
pub const TEST_ISSUER: &str = "phoenix-test-issuer";
pub const TEST_ISSUER_SECRET: &str = "phoenix-test-secret-do-not-deploy";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IssuerKey {
    pub issuer: String,
    pub secret: String,
}

impl IssuerKey {
    pub fn test() -> Self {
        IssuerKey { issuer: TEST_ISSUER.into(), secret: TEST_ISSUER_SECRET.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claims {
    pub sub: String,
    pub iss: String,
    pub exp: u64,
    #[serde(default)]
    pub iat: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UserAccount {
    pub user_id: String,
    pub display_name: String,
    /// SHA-256 of each token seen for this user.
    pub token_fingerprints: BTreeSet<String>,
    pub created: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuthError {
    #[error("missing bearer token")]
    Missing,
    #[error("token has expired")]
    Expired,
    #[error("token signature does not verify")]
    InvalidSignature,
    #[error("token is malformed: {0}")]
    Invalid(String),
}

impl AuthError {
    pub fn code(&self) -> &'static str {
        match self {
            AuthError::Missing => "missing",
            AuthError::Expired => "expired",
            AuthError::InvalidSignature => "invalid_signature",
            AuthError::Invalid(_) => "invalid_token",
        }
    }
}

pub fn fingerprint(token: &str) -> String {
    hex::encode(Sha256::digest(token.as_bytes()))
}

/// Signs a token for `user` that expires `ttl` after `now`.
pub fn issue_token(key: &IssuerKey, user: &str, name: Option<&str>, now: Duration, ttl: Duration) -> String {
    let claims = Claims {
        sub: user.into(),
        iss: key.issuer.clone(),
        exp: (now + ttl).as_secs(),
        iat: now.as_secs(),
        name: name.map(str::to_string),
    };
    encode(&Header::new(Algorithm::HS256), &claims, &EncodingKey::from_secret(key.secret.as_bytes()))
        .expect("HS256 signing does not fail")
}

/// Extracts the token from an `Authorization` header value.
pub fn bearer(header: Option<&str>) -> Result<&str, AuthError> {
    let h = header.ok_or(AuthError::Missing)?.trim();
    let (scheme, token) = h.split_once(' ').ok_or(AuthError::Missing)?;
    if !scheme.eq_ignore_ascii_case("bearer") || token.trim().is_empty() {
        return Err(AuthError::Missing);
    }
    Ok(token.trim())
}

/// Verifies `token` against every configured issuer. Expiry is checked
/// against `now`, with no leeway.
pub fn verify(token: &str, keys: &[IssuerKey], now: Duration) -> Result<Claims, AuthError> {
    let mut last = AuthError::InvalidSignature;
    for key in keys {
        let mut v = Validation::new(Algorithm::HS256);
        v.validate_exp = false;
        v.leeway = 0;
        v.set_required_spec_claims(&["exp", "sub", "iss"]);
        v.set_issuer(&[&key.issuer]);
        match decode::<Claims>(token, &DecodingKey::from_secret(key.secret.as_bytes()), &v) {
            Ok(data) if data.claims.exp <= now.as_secs() => return Err(AuthError::Expired),
            Ok(data) => return Ok(data.claims),
            Err(e) => match e.kind() {
                ErrorKind::InvalidSignature => {}
                ErrorKind::InvalidIssuer => last = AuthError::Invalid("unknown issuer".into()),
                _ => return Err(AuthError::Invalid(e.to_string())),
            },
        }
    }
    Err(last)
}
