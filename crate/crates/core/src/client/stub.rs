//! Scripted in-process transport for tests and dry runs.

use std::sync::Mutex;
use std::time::Duration;

use async_trait::async_trait;

use super::{
    ChatRequest, ChatResponse, EmbeddingDatum, EmbeddingRequest, EmbeddingResponse, EndpointRole,
    Role, Transport, TransportError,
};

type ChatScript = Box<dyn Fn(&EndpointRole, &str) -> Result<String, TransportError> + Send + Sync>;
type EmbedScript = Box<dyn Fn(&str) -> Vec<f64> + Send + Sync>;

/// A transport whose replies come from closures. Every request is recorded.
pub struct StubTransport {
    chat: ChatScript,
    embed: EmbedScript,
    delay: Duration,
    chat_log: Mutex<Vec<(Role, ChatRequest)>>,
    embed_log: Mutex<Vec<EmbeddingRequest>>,
}

impl Default for StubTransport {
    fn default() -> Self {
        Self::new()
    }
}

impl StubTransport {
    /// Replies with an error until scripted otherwise; embeds to `[1.0]`.
    pub fn new() -> Self {
        Self {
            chat: Box::new(|_, _| Err(TransportError::Protocol("no chat script".into()))),
            embed: Box::new(|_| vec![1.0]),
            delay: Duration::ZERO,
            chat_log: Mutex::new(Vec::new()),
            embed_log: Mutex::new(Vec::new()),
        }
    }

    pub fn echo(text: &str) -> Self {
        let text = text.to_string();
        Self::new().with_chat(move |_, _| Ok(text.clone()))
    }

    /// Every chat call fails with a transient error.
    pub fn failing() -> Self {
        Self::new().with_chat(|_, _| Err(TransportError::Unavailable("scripted outage".into())))
    }

    /// One-hot on character count, `dim` wide (counts ≥ dim share the last slot).
    pub fn char_count_embedder(dim: usize) -> Self {
        Self::new().with_embed(move |t| {
            let mut v = vec![0.0; dim.max(1)];
            let slot = t.chars().count().min(v.len() - 1);
            v[slot] = 1.0;
            v
        })
    }

    /// `f(endpoint, full prompt text)`.
    pub fn with_chat<F>(mut self, f: F) -> Self
    where
        F: Fn(&EndpointRole, &str) -> Result<String, TransportError> + Send + Sync + 'static,
    {
        self.chat = Box::new(f);
        self
    }

    pub fn with_embed<F>(mut self, f: F) -> Self
    where
        F: Fn(&str) -> Vec<f64> + Send + Sync + 'static,
    {
        self.embed = Box::new(f);
        self
    }

    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = delay;
        self
    }

    /// `(role, prompt text)` of every chat call so far.
    pub fn chat_calls(&self) -> Vec<(Role, String)> {
        self.chat_log
            .lock()
            .unwrap()
            .iter()
            .map(|(role, req)| (*role, req.prompt_text()))
            .collect()
    }

    pub fn chat_requests(&self) -> Vec<ChatRequest> {
        self.chat_log.lock().unwrap().iter().map(|(_, r)| r.clone()).collect()
    }

    pub fn calls_for(&self, role: Role) -> Vec<String> {
        self.chat_calls()
            .into_iter()
            .filter(|(r, _)| *r == role)
            .map(|(_, p)| p)
            .collect()
    }

    pub fn embed_requests(&self) -> Vec<EmbeddingRequest> {
        self.embed_log.lock().unwrap().clone()
    }
}

#[async_trait]
impl Transport for StubTransport {
    async fn chat(
        &self,
        endpoint: &EndpointRole,
        request: &ChatRequest,
    ) -> Result<ChatResponse, TransportError> {
        self.chat_log.lock().unwrap().push((endpoint.role, request.clone()));
        if !self.delay.is_zero() {
            tokio::time::sleep(self.delay).await;
        }
        (self.chat)(endpoint, &request.prompt_text()).map(ChatResponse::from_text)
    }

    async fn embed(
        &self,
        _endpoint: &EndpointRole,
        request: &EmbeddingRequest,
    ) -> Result<EmbeddingResponse, TransportError> {
        self.embed_log.lock().unwrap().push(request.clone());
        if !self.delay.is_zero() {
            tokio::time::sleep(self.delay).await;
        }
        Ok(EmbeddingResponse {
            data: request
                .input
                .iter()
                .enumerate()
                .map(|(index, t)| EmbeddingDatum { index, embedding: (self.embed)(t) })
                .collect(),
        })
    }
}
