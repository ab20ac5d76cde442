//! Chat backends: a chat-completions HTTP client, a fixture replayer keyed
//! by message-list hash, a scripted queue, and a recorder.

use std::collections::{BTreeMap, VecDeque};
use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: Role::Assistant, content: content.into() }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BackendError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("backend timed out after {0:?}")]
    Timeout(Duration),
    #[error("backend returned HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("malformed backend reply: {0}")]
    Protocol(String),
    #[error("no replay fixture for message hash {0}")]
    MissingFixture(String),
    #[error("scripted backend has no responses left")]
    ScriptExhausted,
    #[error("backend not configured: {0}")]
    NotConfigured(String),
}

pub trait AgentBackend: Send + Sync {
    fn complete(&self, messages: &[Message], temperature: f64, timeout: Duration) -> Result<String, BackendError>;
}

impl<B: AgentBackend + ?Sized> AgentBackend for std::sync::Arc<B> {
    fn complete(&self, messages: &[Message], temperature: f64, timeout: Duration) -> Result<String, BackendError> {
        (**self).complete(messages, temperature, timeout)
    }
}

/// Hex SHA-256 of the compact JSON encoding of `messages`.
pub fn messages_hash(messages: &[Message]) -> String {
    let bytes = serde_json::to_vec(messages).expect("messages serialize");
    hex::encode(Sha256::digest(&bytes))
}

/// OpenAI-style `POST {model, messages, temperature}`.
#[derive(Debug, Clone)]
pub struct HttpBackend {
    pub url: String,
    pub api_key: Option<String>,
    pub model: String,
}

impl HttpBackend {
    pub const DEFAULT_MODEL: &'static str = "gpt-4";

    /// Reads `MEO_LLM_URL`, `MEO_LLM_KEY` and optionally `MEO_LLM_MODEL`.
    pub fn from_env() -> Result<Self, BackendError> {
        let url = std::env::var("MEO_LLM_URL").map_err(|_| BackendError::NotConfigured("MEO_LLM_URL is not set".into()))?;
        Ok(Self {
            url,
            api_key: std::env::var("MEO_LLM_KEY").ok().filter(|k| !k.is_empty()),
            model: std::env::var("MEO_LLM_MODEL").unwrap_or_else(|_| Self::DEFAULT_MODEL.into()),
        })
    }
}

#[derive(Deserialize)]
struct ChatReply {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: String,
}

impl AgentBackend for HttpBackend {
    fn complete(&self, messages: &[Message], temperature: f64, timeout: Duration) -> Result<String, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let body = serde_json::json!({ "model": self.model, "messages": messages, "temperature": temperature });
        let mut req = client.post(&self.url).json(&body);
        if let Some(k) = &self.api_key {
            req = req.bearer_auth(k);
        }
        let resp = req.send().map_err(|e| {
            if e.is_timeout() {
                BackendError::Timeout(timeout)
            } else {
                BackendError::Transport(e.to_string())
            }
        })?;
        let status = resp.status();
        let text = resp.text().map_err(|e| BackendError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(BackendError::Http { status: status.as_u16(), body: text });
        }
        let reply: ChatReply = serde_json::from_str(&text).map_err(|e| BackendError::Protocol(e.to_string()))?;
        reply
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| BackendError::Protocol("no choices".into()))
    }
}

/// Hash-to-response map.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FixtureMap(pub BTreeMap<String, String>);

impl FixtureMap {
    /// A JSON file, or a directory whose `*.json` files are merged.
    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let io = |e: std::io::Error| BackendError::NotConfigured(format!("{}: {e}", path.display()));
        let mut out = FixtureMap::default();
        if path.is_dir() {
            let mut files: Vec<_> = std::fs::read_dir(path)
                .map_err(io)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            files.sort();
            for f in files {
                out.0.extend(Self::load(&f)?.0);
            }
        } else {
            let text = std::fs::read_to_string(path).map_err(io)?;
            out = serde_json::from_str(&text)
                .map_err(|e| BackendError::NotConfigured(format!("{}: {e}", path.display())))?;
        }
        Ok(out)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("map serializes") + "\n"
    }
}

/// Answers from a fixture map; unknown message lists are an error.
#[derive(Debug, Clone, Default)]
pub struct ReplayBackend {
    pub fixtures: FixtureMap,
}

impl ReplayBackend {
    pub fn new(fixtures: FixtureMap) -> Self {
        Self { fixtures }
    }

    pub fn load(path: &Path) -> Result<Self, BackendError> {
        Ok(Self::new(FixtureMap::load(path)?))
    }
}

impl AgentBackend for ReplayBackend {
    fn complete(&self, messages: &[Message], _: f64, _: Duration) -> Result<String, BackendError> {
        let h = messages_hash(messages);
        self.fixtures.0.get(&h).cloned().ok_or(BackendError::MissingFixture(h))
    }
}

/// Pops queued responses in order and logs every request.
#[derive(Debug, Default)]
pub struct ScriptedBackend {
    queue: Mutex<VecDeque<String>>,
    calls: Mutex<Vec<Vec<Message>>>,
}

impl ScriptedBackend {
    pub fn new<S: Into<String>>(responses: impl IntoIterator<Item = S>) -> Self {
        Self { queue: Mutex::new(responses.into_iter().map(Into::into).collect()), calls: Mutex::default() }
    }

    pub fn calls(&self) -> Vec<Vec<Message>> {
        self.calls.lock().unwrap().clone()
    }

    pub fn remaining(&self) -> usize {
        self.queue.lock().unwrap().len()
    }
}

impl AgentBackend for ScriptedBackend {
    fn complete(&self, messages: &[Message], _: f64, _: Duration) -> Result<String, BackendError> {
        self.calls.lock().unwrap().push(messages.to_vec());
        self.queue.lock().unwrap().pop_front().ok_or(BackendError::ScriptExhausted)
    }
}

/// Forwards to `inner` and keeps every successful exchange as a fixture.
#[derive(Debug)]
pub struct RecordingBackend<B> {
    pub inner: B,
    recorded: Mutex<FixtureMap>,
}

impl<B> RecordingBackend<B> {
    pub fn new(inner: B) -> Self {
        Self { inner, recorded: Mutex::default() }
    }

    pub fn recorded(&self) -> FixtureMap {
        self.recorded.lock().unwrap().clone()
    }
}

impl<B: AgentBackend> AgentBackend for RecordingBackend<B> {
    fn complete(&self, messages: &[Message], temperature: f64, timeout: Duration) -> Result<String, BackendError> {
        let reply = self.inner.complete(messages, temperature, timeout)?;
        self.recorded.lock().unwrap().0.insert(messages_hash(messages), reply.clone());
        Ok(reply)
    }
}
