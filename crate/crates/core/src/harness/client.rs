//! OpenAI-compatible chat-completion client with retries.

use std::time::{Duration, Instant};

use serde_json::{json, Value};
use tracing::{debug, warn};

use super::run::ModelBackend;
use super::{HarnessError, ModelConfig};
use crate::scpgen::{BenchmarkHeader, TestCase};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryErrorKind {
    /// Bad credentials; the whole model run stops.
    Auth,
    /// Rate limit, server error, dropped connection; retried.
    Transient,
    /// The request exceeded its timeout; retried.
    Timeout,
    /// Anything else (malformed reply, other 4xx); not retried.
    Permanent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryError {
    pub kind: QueryErrorKind,
    pub message: String,
}

impl QueryError {
    fn new(kind: QueryErrorKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }

    pub fn is_retryable(&self) -> bool {
        matches!(
            self.kind,
            QueryErrorKind::Transient | QueryErrorKind::Timeout
        )
    }
}

impl std::fmt::Display for QueryError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.message)
    }
}

pub struct HttpBackend {
    agent: ureq::Agent,
    config: ModelConfig,
    token: Option<String>,
}

impl HttpBackend {
    /// Reads the credential from the configured environment variable; an
    /// empty variable name means the endpoint needs no token.
    pub fn new(config: &ModelConfig) -> Result<Self, HarnessError> {
        config.validate()?;
        let token =
            if config.auth_token_env_var.is_empty() {
                None
            } else {
                Some(std::env::var(&config.auth_token_env_var).map_err(|_| {
                    HarnessError::MissingCredential(config.auth_token_env_var.clone())
                })?)
            };
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.request_timeout)))
            .http_status_as_error(false)
            .user_agent(concat!("arxivroll/", env!("CARGO_PKG_VERSION")))
            .build()
            .into();
        Ok(Self {
            agent,
            config: config.clone(),
            token,
        })
    }

    fn attempt(&self, prompt: &str) -> Result<String, QueryError> {
        let body = json!({
            "model": self.config.api_model.as_deref().unwrap_or(&self.config.model_id),
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_new_tokens,
        });
        let mut req = self
            .agent
            .post(&self.config.endpoint_url)
            .header("Content-Type", "application/json");
        if let Some(token) = &self.token {
            req = req.header("Authorization", &format!("Bearer {token}"));
        }
        let mut resp = req.send(body.to_string()).map_err(classify_transport)?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(classify_transport)?;
        match status {
            200..=299 => parse_reply(&text),
            401 | 403 => Err(QueryError::new(
                QueryErrorKind::Auth,
                format!("HTTP {status}"),
            )),
            408 | 429 | 500..=599 => Err(QueryError::new(
                QueryErrorKind::Transient,
                format!("HTTP {status}"),
            )),
            _ => Err(QueryError::new(
                QueryErrorKind::Permanent,
                format!("HTTP {status}: {}", snippet(&text)),
            )),
        }
    }

    /// One prompt with retries and exponential backoff per the retry policy.
    pub fn query(&self, prompt: &str) -> Result<String, QueryError> {
        let policy = &self.config.retry_policy;
        let mut attempt = 1;
        loop {
            match self.attempt(prompt) {
                Ok(text) => return Ok(text),
                Err(e) if e.is_retryable() && attempt < policy.max_attempts => {
                    let wait = policy.backoff(attempt);
                    debug!(attempt, ?wait, error = %e, "retrying");
                    std::thread::sleep(wait);
                    attempt += 1;
                }
                Err(e) => {
                    if e.is_retryable() {
                        warn!(attempts = attempt, error = %e, "giving up");
                    }
                    return Err(e);
                }
            }
        }
    }
}

impl ModelBackend for HttpBackend {
    fn complete(
        &self,
        _bench: &BenchmarkHeader,
        _case: &TestCase,
        prompt: &str,
    ) -> Result<String, QueryError> {
        self.query(prompt)
    }
}

/// Sends `prompt` to the configured endpoint and returns the assistant text.
pub fn query_model(prompt: &str, config: &ModelConfig) -> Result<String, HarnessError> {
    let backend = HttpBackend::new(config)?;
    backend.query(prompt).map_err(|e| match e.kind {
        QueryErrorKind::Auth => HarnessError::Auth {
            model_id: config.model_id.clone(),
            message: e.message,
        },
        _ => HarnessError::InvalidConfig(format!("query failed: {e}")),
    })
}

fn classify_transport(e: ureq::Error) -> QueryError {
    match e {
        ureq::Error::Timeout(_) => QueryError::new(QueryErrorKind::Timeout, e.to_string()),
        ureq::Error::Io(ref io) if io.kind() == std::io::ErrorKind::TimedOut => {
            QueryError::new(QueryErrorKind::Timeout, e.to_string())
        }
        _ => QueryError::new(QueryErrorKind::Transient, e.to_string()),
    }
}

fn parse_reply(text: &str) -> Result<String, QueryError> {
    let v: Value = serde_json::from_str(text).map_err(|e| {
        QueryError::new(QueryErrorKind::Permanent, format!("reply is not JSON: {e}"))
    })?;
    let message = &v["choices"][0]["message"];
    if message.is_null() {
        return Err(QueryError::new(
            QueryErrorKind::Permanent,
            format!("reply has no choices: {}", snippet(text)),
        ));
    }
    Ok(message["content"].as_str().unwrap_or_default().to_string())
}

fn snippet(s: &str) -> String {
    s.chars().take(200).collect()
}

/// Wall-clock milliseconds since `start`.
pub(crate) fn elapsed_ms(start: Instant) -> u64 {
    start.elapsed().as_millis().min(u64::MAX as u128) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reply_parsing() {
        let ok = r#"{"choices":[{"message":{"role":"assistant","content":"B"}}]}"#;
        assert_eq!(parse_reply(ok).unwrap(), "B");
        let null_content = r#"{"choices":[{"message":{"role":"assistant","content":null}}]}"#;
        assert_eq!(parse_reply(null_content).unwrap(), "");
        assert_eq!(
            parse_reply(r#"{"error":"x"}"#).unwrap_err().kind,
            QueryErrorKind::Permanent
        );
        assert_eq!(
            parse_reply("<html>").unwrap_err().kind,
            QueryErrorKind::Permanent
        );
    }

    #[test]
    fn missing_credential_is_reported() {
        let cfg = ModelConfig {
            model_id: "m".into(),
            endpoint_url: "http://127.0.0.1:9/v1/chat/completions".into(),
            auth_token_env_var: "ARXIVROLL_TEST_SURELY_UNSET".into(),
            ..ModelConfig::default()
        };
        assert!(matches!(
            HttpBackend::new(&cfg),
            Err(HarnessError::MissingCredential(_))
        ));
    }
}
