//! Async client for the planminer HTTP service. Responses are returned as JSON values exactly
//! as the service sent them.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("request failed: {0}")]
    Http(#[from] reqwest::Error),
    #[error("service answered {status}: {message}")]
    Api { status: u16, message: String, body: Value },
}

impl ClientError {
    pub fn status(&self) -> Option<u16> {
        match self {
            ClientError::Api { status, .. } => Some(*status),
            ClientError::Http(e) => e.status().map(|s| s.as_u16()),
        }
    }
}

pub type Result<T> = std::result::Result<T, ClientError>;

/// Body of a choice request: one branch index per exclusive choice, redo counts per loop.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ChoiceRequest {
    pub xor: BTreeMap<String, usize>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub loops: BTreeMap<String, u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub durations: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<Vec<String>>,
}

#[derive(Clone, Debug)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    pub fn new(base_url: impl Into<String>) -> Self {
        let base = base_url.into().trim_end_matches('/').to_string();
        Client { base, http: reqwest::Client::new() }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    /// Uploads a CSV log; the response carries the session id under `session`.
    pub async fn create_session(&self, csv: impl Into<String>) -> Result<Value> {
        let response = self
            .http
            .post(format!("{}/sessions", self.base))
            .header("content-type", "text/csv")
            .body(csv.into())
            .send()
            .await?;
        json(response).await
    }

    /// Uploads a CSV log together with a tree to use instead of mining one.
    pub async fn create_session_with_tree(&self, csv: impl Into<String>, tree: &Value) -> Result<Value> {
        let body = serde_json::json!({ "csv": csv.into(), "tree": tree });
        let response = self.http.post(format!("{}/sessions", self.base)).json(&body).send().await?;
        json(response).await
    }

    pub async fn session(&self, id: &str) -> Result<Value> {
        self.get_json(&format!("/sessions/{id}")).await
    }

    pub async fn tree(&self, id: &str) -> Result<Value> {
        self.get_json(&format!("/sessions/{id}/tree")).await
    }

    pub async fn model(&self, id: &str, gamma: &str, rules: bool) -> Result<Value> {
        self.get_json(&format!("/sessions/{id}/model?gamma={}&rules={rules}", encode(gamma))).await
    }

    pub async fn rules(&self, id: &str, gamma: &str) -> Result<Value> {
        self.get_json(&format!("/sessions/{id}/rules?gamma={}", encode(gamma))).await
    }

    pub async fn variants(&self, id: &str, gamma: &str, limit: usize) -> Result<Value> {
        self.get_json(&format!("/sessions/{id}/variants?gamma={}&limit={limit}", encode(gamma))).await
    }

    pub async fn export_dot(&self, id: &str, gamma: &str, rules: bool) -> Result<String> {
        let url = format!("{}/sessions/{id}/export/dot?gamma={}&rules={rules}", self.base, encode(gamma));
        let response = check(self.http.get(url).send().await?).await?;
        Ok(response.text().await?)
    }

    pub async fn choose(&self, id: &str, request: &ChoiceRequest) -> Result<Value> {
        let response = self.http.post(format!("{}/sessions/{id}/choice", self.base)).json(request).send().await?;
        json(response).await
    }

    pub async fn current_choice(&self, id: &str) -> Result<Value> {
        self.get_json(&format!("/sessions/{id}/choice")).await
    }

    async fn get_json(&self, path: &str) -> Result<Value> {
        json(self.http.get(format!("{}{path}", self.base)).send().await?).await
    }
}

fn encode(text: &str) -> String {
    let mut out = String::new();
    for byte in text.bytes() {
        match byte {
            b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'.' | b'_' | b'~' | b'/' => out.push(byte as char),
            other => out.push_str(&format!("%{other:02X}")),
        }
    }
    out
}

async fn check(response: reqwest::Response) -> Result<reqwest::Response> {
    let status = response.status();
    if status.is_success() {
        return Ok(response);
    }
    let text = response.text().await?;
    let body: Value = serde_json::from_str(&text).unwrap_or(Value::String(text.clone()));
    let message = body.get("error").and_then(Value::as_str).map(str::to_string).unwrap_or(text);
    Err(ClientError::Api { status: status.as_u16(), message, body })
}

async fn json(response: reqwest::Response) -> Result<Value> {
    Ok(check(response).await?.json().await?)
}
