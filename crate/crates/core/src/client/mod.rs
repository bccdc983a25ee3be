//! Uniform access to chat-completion and embedding endpoints.
//!
//! Every model the platform talks to is bound to an [`EndpointRole`]. The
//! [`ModelClient`] resolves a role to its endpoint, serves repeated requests
//! from a content-addressed [`cache`], retries transient transport failures
//! and caps the number of in-flight requests.

pub mod cache;
pub mod http;
pub mod mock;
pub mod stub;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use tokio::sync::Semaphore;

use self::cache::{CompletionRecord, EmbeddingRecord, ResponseCache};

/// Default number of concurrent requests a client lets through.
pub const DEFAULT_MAX_IN_FLIGHT: usize = 8;

/// The job a model endpoint performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Generator,
    QaEvaluator,
    LeakageJudge,
    Assessor,
    Embedder,
}

impl Role {
    pub const ALL: [Role; 5] = [
        Role::Generator,
        Role::QaEvaluator,
        Role::LeakageJudge,
        Role::Assessor,
        Role::Embedder,
    ];

    /// Judging roles must decode greedily so verdicts replay identically.
    pub fn is_judge(self) -> bool {
        matches!(self, Role::QaEvaluator | Role::LeakageJudge | Role::Assessor)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Generator => "generator",
            Role::QaEvaluator => "qa_evaluator",
            Role::LeakageJudge => "leakage_judge",
            Role::Assessor => "assessor",
            Role::Embedder => "embedder",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which transport serves an endpoint.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportKind {
    #[default]
    Http,
    /// Built-in deterministic offline models, see [`mock::MockTransport`].
    Mock,
}

fn default_timeout_secs() -> f64 {
    60.0
}

fn default_max_tokens() -> u32 {
    512
}

/// A named model endpoint binding with its decoding parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointRole {
    /// Filled from the endpoint table key when loaded from a config file.
    #[serde(default = "placeholder_role", skip_serializing)]
    pub role: Role,
    #[serde(default)]
    pub transport: TransportKind,
    #[serde(default)]
    pub base_url: String,
    pub model_id: String,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: f64,
    /// Environment variable holding a bearer token, if the endpoint needs one.
    #[serde(default)]
    pub api_key_env: Option<String>,
    /// Whether the endpoint accepts a separate system message. When false,
    /// system and user segments are sent as one string.
    #[serde(default)]
    pub system_role: bool,
}

fn placeholder_role() -> Role {
    Role::Generator
}

impl EndpointRole {
    pub fn new(role: Role, model_id: impl Into<String>) -> Self {
        Self {
            role,
            transport: TransportKind::Http,
            base_url: String::new(),
            model_id: model_id.into(),
            temperature: if role.is_judge() { 0.0 } else { 0.7 },
            max_tokens: default_max_tokens(),
            timeout_secs: default_timeout_secs(),
            api_key_env: None,
            system_role: false,
        }
    }

    pub fn mock(role: Role) -> Self {
        Self {
            transport: TransportKind::Mock,
            ..Self::new(role, format!("mock-{}", role.as_str()))
        }
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_secs.max(0.001))
    }

    pub fn validate(&self) -> Result<(), ClientError> {
        let bad = |reason: &str| ClientError::InvalidEndpoint {
            role: self.role,
            reason: reason.to_string(),
        };
        if self.model_id.trim().is_empty() {
            return Err(bad("model_id is empty"));
        }
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(bad("temperature must be >= 0"));
        }
        if self.role.is_judge() && self.temperature != 0.0 {
            return Err(bad("judging roles require temperature 0"));
        }
        if self.max_tokens == 0 {
            return Err(bad("max_tokens must be positive"));
        }
        if self.timeout_secs.is_nan() || self.timeout_secs <= 0.0 {
            return Err(bad("timeout must be positive"));
        }
        if self.transport == TransportKind::Http && self.base_url.trim().is_empty() {
            return Err(bad("http endpoints need a base_url"));
        }
        Ok(())
    }
}

/// Role → endpoint bindings. Each role maps to at most one endpoint.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EndpointTable {
    endpoints: BTreeMap<Role, EndpointRole>,
}

impl EndpointTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every role bound to the built-in offline models.
    pub fn all_mock() -> Self {
        Role::ALL.into_iter().map(EndpointRole::mock).collect()
    }

    pub fn insert(&mut self, endpoint: EndpointRole) -> Option<EndpointRole> {
        self.endpoints.insert(endpoint.role, endpoint)
    }

    pub fn with(mut self, endpoint: EndpointRole) -> Self {
        self.insert(endpoint);
        self
    }

    pub fn resolve(&self, role: Role) -> Result<&EndpointRole, ClientError> {
        self.endpoints.get(&role).ok_or(ClientError::UnknownRole(role))
    }

    pub fn iter(&self) -> impl Iterator<Item = &EndpointRole> {
        self.endpoints.values()
    }

    /// Checks every endpoint and that each of `required` is bound.
    pub fn validate(&self, required: &[Role]) -> Result<(), ClientError> {
        for endpoint in self.endpoints.values() {
            endpoint.validate()?;
        }
        for role in required {
            self.resolve(*role)?;
        }
        Ok(())
    }

    /// Builds a table from `role name → endpoint` entries as they appear in a
    /// config file.
    pub fn from_named(entries: BTreeMap<Role, EndpointRole>) -> Self {
        entries
            .into_iter()
            .map(|(role, mut endpoint)| {
                endpoint.role = role;
                endpoint
            })
            .collect()
    }
}

impl FromIterator<EndpointRole> for EndpointTable {
    fn from_iter<I: IntoIterator<Item = EndpointRole>>(iter: I) -> Self {
        let mut table = Self::new();
        for endpoint in iter {
            table.insert(endpoint);
        }
        table
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        Self { role: "user".into(), content: content.into() }
    }

    pub fn system(content: impl Into<String>) -> Self {
        Self { role: "system".into(), content: content.into() }
    }
}

/// Chat-completion request body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl ChatRequest {
    /// The whole prompt as one string, messages joined by a blank line.
    pub fn prompt_text(&self) -> String {
        self.messages
            .iter()
            .map(|m| m.content.as_str())
            .collect::<Vec<_>>()
            .join("\n\n")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatChoice {
    pub message: ChoiceMessage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiceMessage {
    #[serde(default)]
    pub role: Option<String>,
    #[serde(default)]
    pub content: Option<String>,
}

/// Chat-completion response body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub choices: Vec<ChatChoice>,
}

impl ChatResponse {
    pub fn from_text(text: impl Into<String>) -> Self {
        Self {
            choices: vec![ChatChoice {
                message: ChoiceMessage {
                    role: Some("assistant".into()),
                    content: Some(text.into()),
                },
            }],
        }
    }

    pub fn first_text(&self) -> Result<&str, TransportError> {
        self.choices
            .first()
            .and_then(|c| c.message.content.as_deref())
            .ok_or_else(|| TransportError::Protocol("response has no message text".into()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRequest {
    pub model: String,
    pub input: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingDatum {
    pub index: usize,
    pub embedding: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingResponse {
    pub data: Vec<EmbeddingDatum>,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum TransportError {
    /// Transient: connection refused, timeout, 429/5xx. Retried.
    #[error("endpoint unavailable: {0}")]
    Unavailable(String),
    /// The endpoint answered with something that is not a valid response.
    #[error("protocol error: {0}")]
    Protocol(String),
}

#[async_trait]
pub trait Transport: Send + Sync {
    async fn chat(
        &self,
        endpoint: &EndpointRole,
        request: &ChatRequest,
    ) -> Result<ChatResponse, TransportError>;

    async fn embed(
        &self,
        endpoint: &EndpointRole,
        request: &EmbeddingRequest,
    ) -> Result<EmbeddingResponse, TransportError>;
}

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("no endpoint bound for role {0}")]
    UnknownRole(Role),
    #[error("invalid endpoint for role {role}: {reason}")]
    InvalidEndpoint { role: Role, reason: String },
    #[error("prompt is empty")]
    EmptyPrompt,
    #[error("empty text in embedding batch at position {0}")]
    EmptyText(usize),
    #[error("{role} endpoint unavailable after {attempts} attempts: {last_error}")]
    EndpointUnavailable {
        role: Role,
        attempts: u32,
        last_error: String,
    },
    #[error("protocol error from {role} endpoint: {message}")]
    Protocol { role: Role, message: String },
    #[error("cache i/o: {0}")]
    Cache(#[from] std::io::Error),
}

/// Retry schedule for transient transport failures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 3,
            base_delay: Duration::from_millis(250),
            max_delay: Duration::from_secs(8),
        }
    }
}

impl RetryPolicy {
    pub fn none() -> Self {
        Self { max_retries: 0, ..Self::default() }
    }

    pub fn immediate(max_retries: u32) -> Self {
        Self {
            max_retries,
            base_delay: Duration::ZERO,
            max_delay: Duration::ZERO,
        }
    }

    fn delay(&self, retry: u32) -> Duration {
        let factor = 2u32.saturating_pow(retry.min(16));
        self.base_delay.saturating_mul(factor).min(self.max_delay)
    }
}

/// Content hash identifying a completion request.
///
/// Covers the model id, the full prompt text and both decoding parameters.
/// `attempt` > 0 salts the key so a deliberate re-ask is not served from the
/// cache.
pub fn completion_cache_key(
    model_id: &str,
    prompt: &str,
    temperature: f64,
    max_tokens: u32,
    attempt: u32,
) -> String {
    let mut canonical = serde_json::json!({
        "max_tokens": max_tokens,
        "model": model_id,
        "prompt": prompt,
        "temperature": temperature,
    });
    if attempt > 0 {
        canonical["attempt"] = attempt.into();
    }
    sha256_hex(canonical.to_string().as_bytes())
}

pub fn embedding_cache_key(model_id: &str, text: &str) -> String {
    let canonical = serde_json::json!({ "input": text, "model": model_id });
    sha256_hex(canonical.to_string().as_bytes())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Counters for network calls and cache hits.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClientStats {
    pub network_calls: u64,
    pub cache_hits: u64,
}

/// Shared, concurrency-safe client over an endpoint table.
pub struct ModelClient {
    endpoints: EndpointTable,
    transport: Arc<dyn Transport>,
    cache: Arc<ResponseCache>,
    limiter: Semaphore,
    retry: RetryPolicy,
    network_calls: AtomicU64,
    cache_hits: AtomicU64,
}

impl fmt::Debug for ModelClient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelClient")
            .field("endpoints", &self.endpoints)
            .field("retry", &self.retry)
            .finish_non_exhaustive()
    }
}

impl ModelClient {
    /// Client routing each endpoint to its configured transport kind.
    pub fn from_table(endpoints: EndpointTable) -> Self {
        Self::with_transport(endpoints, Arc::new(RoutingTransport::new()))
    }

    pub fn with_transport(endpoints: EndpointTable, transport: Arc<dyn Transport>) -> Self {
        Self {
            endpoints,
            transport,
            cache: Arc::new(ResponseCache::in_memory()),
            limiter: Semaphore::new(DEFAULT_MAX_IN_FLIGHT),
            retry: RetryPolicy::default(),
            network_calls: AtomicU64::new(0),
            cache_hits: AtomicU64::new(0),
        }
    }

    pub fn cache(mut self, cache: Arc<ResponseCache>) -> Self {
        self.cache = cache;
        self
    }

    pub fn retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn max_in_flight(mut self, cap: usize) -> Self {
        self.limiter = Semaphore::new(cap.max(1));
        self
    }

    pub fn endpoints(&self) -> &EndpointTable {
        &self.endpoints
    }

    pub fn endpoint(&self, role: Role) -> Result<&EndpointRole, ClientError> {
        self.endpoints.resolve(role)
    }

    pub fn stats(&self) -> ClientStats {
        ClientStats {
            network_calls: self.network_calls.load(Ordering::Relaxed),
            cache_hits: self.cache_hits.load(Ordering::Relaxed),
        }
    }

    /// Sends `prompt` as a single user message and returns the reply text.
    pub async fn complete(&self, role: Role, prompt: &str) -> Result<String, ClientError> {
        self.complete_attempt(role, prompt, 0).await
    }

    /// Like [`complete`](Self::complete); `attempt` > 0 bypasses responses
    /// cached for earlier attempts of the same prompt.
    pub async fn complete_attempt(
        &self,
        role: Role,
        prompt: &str,
        attempt: u32,
    ) -> Result<String, ClientError> {
        self.complete_parts(role, None, prompt, attempt).await
    }

    /// Sends a system + user prompt. Endpoints without system-role support
    /// receive both segments as one string.
    pub async fn complete_parts(
        &self,
        role: Role,
        system: Option<&str>,
        user: &str,
        attempt: u32,
    ) -> Result<String, ClientError> {
        let endpoint = self.endpoints.resolve(role)?;
        let system = system.filter(|s| !s.trim().is_empty());
        if user.trim().is_empty() && system.is_none() {
            return Err(ClientError::EmptyPrompt);
        }
        let messages = match (system, endpoint.system_role) {
            (Some(sys), true) => vec![ChatMessage::system(sys), ChatMessage::user(user)],
            (Some(sys), false) => vec![ChatMessage::user(format!("{sys}\n\n{user}"))],
            (None, _) => vec![ChatMessage::user(user)],
        };
        let request = ChatRequest {
            model: endpoint.model_id.clone(),
            messages,
            temperature: endpoint.temperature,
            max_tokens: endpoint.max_tokens,
        };
        let prompt_text = request.prompt_text();
        let key = completion_cache_key(
            &endpoint.model_id,
            &prompt_text,
            endpoint.temperature,
            endpoint.max_tokens,
            attempt,
        );
        if let Some(hit) = self.cache.completion(&key) {
            self.cache_hits.fetch_add(1, Ordering::Relaxed);
            return Ok(hit.response_text);
        }

        let response = self
            .with_retries(endpoint, || self.transport.chat(endpoint, &request))
            .await?;
        let text = response
            .first_text()
            .map_err(|e| protocol(role, e))?
            .to_string();
        self.cache.put_completion(CompletionRecord::new(key, &endpoint.model_id, &text))?;
        Ok(text)
    }

    /// Embeds every text with the embedder endpoint. Identical strings get
    /// identical vectors; cached vectors are reused.
    pub async fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ClientError> {
        let role = Role::Embedder;
        let endpoint = self.endpoints.resolve(role)?;
        if let Some(pos) = texts.iter().position(|t| t.trim().is_empty()) {
            return Err(ClientError::EmptyText(pos));
        }
        let keys: Vec<String> = texts
            .iter()
            .map(|t| embedding_cache_key(&endpoint.model_id, t))
            .collect();
        let mut vectors: Vec<Option<Vec<f64>>> = keys
            .iter()
            .map(|k| self.cache.embedding(k).map(|r| r.vector))
            .collect();

        // Unique misses, in first-seen order.
        let mut missing: Vec<usize> = Vec::new();
        for (i, slot) in vectors.iter().enumerate() {
            if slot.is_none() && !missing.iter().any(|&j| texts[j] == texts[i]) {
                missing.push(i);
            }
        }
        let hits = texts.len() - vectors.iter().filter(|v| v.is_none()).count();
        self.cache_hits.fetch_add(hits as u64, Ordering::Relaxed);

        if !missing.is_empty() {
            let request = EmbeddingRequest {
                model: endpoint.model_id.clone(),
                input: missing.iter().map(|&i| texts[i].clone()).collect(),
            };
            let mut response = self
                .with_retries(endpoint, || self.transport.embed(endpoint, &request))
                .await?;
            if response.data.len() != missing.len() {
                return Err(protocol(
                    role,
                    format!(
                        "expected {} embeddings, got {}",
                        missing.len(),
                        response.data.len()
                    ),
                ));
            }
            response.data.sort_by_key(|d| d.index);
            for (datum, &i) in response.data.into_iter().zip(&missing) {
                self.cache.put_embedding(EmbeddingRecord::new(
                    keys[i].clone(),
                    &endpoint.model_id,
                    datum.embedding.clone(),
                ))?;
                for (j, text) in texts.iter().enumerate() {
                    if vectors[j].is_none() && *text == texts[i] {
                        vectors[j] = Some(datum.embedding.clone());
                    }
                }
            }
        }

        let vectors: Vec<Vec<f64>> = vectors.into_iter().map(Option::unwrap_or_default).collect();
        if let Some(first) = vectors.first() {
            let dim = first.len();
            if dim == 0 || vectors.iter().any(|v| v.len() != dim) {
                return Err(protocol(role, "embedding dimensions differ within batch"));
            }
        }
        Ok(vectors)
    }

    async fn with_retries<T, F, Fut>(&self, endpoint: &EndpointRole, call: F) -> Result<T, ClientError>
    where
        F: Fn() -> Fut,
        Fut: std::future::Future<Output = Result<T, TransportError>>,
    {
        let _permit = self.limiter.acquire().await.expect("semaphore closed");
        let mut last_error = String::new();
        let attempts = self.retry.max_retries + 1;
        for attempt in 0..attempts {
            if attempt > 0 {
                tokio::time::sleep(self.retry.delay(attempt - 1)).await;
            }
            self.network_calls.fetch_add(1, Ordering::Relaxed);
            match tokio::time::timeout(endpoint.timeout(), call()).await {
                Ok(Ok(value)) => return Ok(value),
                Ok(Err(TransportError::Protocol(message))) => {
                    return Err(ClientError::Protocol { role: endpoint.role, message })
                }
                Ok(Err(TransportError::Unavailable(message))) => last_error = message,
                Err(_) => last_error = format!("timed out after {:?}", endpoint.timeout()),
            }
            tracing::warn!(role = %endpoint.role, attempt, error = %last_error, "endpoint call failed");
        }
        Err(ClientError::EndpointUnavailable {
            role: endpoint.role,
            attempts,
            last_error,
        })
    }
}

fn protocol(role: Role, message: impl fmt::Display) -> ClientError {
    ClientError::Protocol { role, message: message.to_string() }
}

/// Dispatches to the HTTP or mock transport per endpoint.
pub struct RoutingTransport {
    http: http::HttpTransport,
    mock: mock::MockTransport,
}

impl RoutingTransport {
    pub fn new() -> Self {
        Self {
            http: http::HttpTransport::new(),
            mock: mock::MockTransport::new(),
        }
    }
}

impl Default for RoutingTransport {
    fn default() -> Self {
        Self::new()
    }
}

#[async_trait]
impl Transport for RoutingTransport {
    async fn chat(
        &self,
        endpoint: &EndpointRole,
        request: &ChatRequest,
    ) -> Result<ChatResponse, TransportError> {
        match endpoint.transport {
            TransportKind::Http => self.http.chat(endpoint, request).await,
            TransportKind::Mock => self.mock.chat(endpoint, request).await,
        }
    }

    async fn embed(
        &self,
        endpoint: &EndpointRole,
        request: &EmbeddingRequest,
    ) -> Result<EmbeddingResponse, TransportError> {
        match endpoint.transport {
            TransportKind::Http => self.http.embed(endpoint, request).await,
            TransportKind::Mock => self.mock.embed(endpoint, request).await,
        }
    }
}
