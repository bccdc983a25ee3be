//! OpenAI-compatible HTTP transport (`/chat/completions`, `/embeddings`).

use async_trait::async_trait;
use reqwest::StatusCode;

use super::{
    ChatRequest, ChatResponse, EmbeddingRequest, EmbeddingResponse, EndpointRole, Transport,
    TransportError,
};

#[derive(Debug, Clone, Default)]
pub struct HttpTransport {
    http: reqwest::Client,
}

impl HttpTransport {
    pub fn new() -> Self {
        Self { http: reqwest::Client::new() }
    }

    async fn post<Req, Resp>(
        &self,
        endpoint: &EndpointRole,
        path: &str,
        body: &Req,
    ) -> Result<Resp, TransportError>
    where
        Req: serde::Serialize + Sync,
        Resp: serde::de::DeserializeOwned,
    {
        let url = format!("{}/{}", endpoint.base_url.trim_end_matches('/'), path);
        let mut request = self.http.post(&url).timeout(endpoint.timeout()).json(body);
        if let Some(var) = &endpoint.api_key_env {
            let key = std::env::var(var).map_err(|_| {
                TransportError::Protocol(format!("environment variable {var} is not set"))
            })?;
            request = request.bearer_auth(key);
        }
        let response = request
            .send()
            .await
            .map_err(|e| TransportError::Unavailable(e.to_string()))?;
        let status = response.status();
        if status == StatusCode::TOO_MANY_REQUESTS || status.is_server_error() {
            return Err(TransportError::Unavailable(format!("{url} returned {status}")));
        }
        if !status.is_success() {
            let text = response.text().await.unwrap_or_default();
            return Err(TransportError::Protocol(format!("{url} returned {status}: {text}")));
        }
        let bytes = response
            .bytes()
            .await
            .map_err(|e| TransportError::Unavailable(e.to_string()))?;
        serde_json::from_slice(&bytes)
            .map_err(|e| TransportError::Protocol(format!("malformed response from {url}: {e}")))
    }
}

#[async_trait]
impl Transport for HttpTransport {
    async fn chat(
        &self,
        endpoint: &EndpointRole,
        request: &ChatRequest,
    ) -> Result<ChatResponse, TransportError> {
        self.post(endpoint, "chat/completions", request).await
    }

    async fn embed(
        &self,
        endpoint: &EndpointRole,
        request: &EmbeddingRequest,
    ) -> Result<EmbeddingResponse, TransportError> {
        self.post(endpoint, "embeddings", request).await
    }
}
