//! Chat-model agent over an OpenAI-compatible `/chat/completions` endpoint.
//!
//! The whole conversation is resent every month (optionally truncated to the
//! briefing plus the last few months). An unreadable reply gets one re-ask
//! with a format reminder; transport failures are retried with exponential
//! backoff, and a rejected token stops the session.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use super::parse::{parse_decision_block, render_decision_block};
use super::prompt::{render_followup_prompt, render_initial_prompt, FORMAT_REMINDER};
use super::{Agent, AgentError, AgentReply, DecisionContext, EndpointConfig, ParseDiagnostic, TokenUsage};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage { role: "user".into(), content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage { role: "assistant".into(), content: content.into() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChatCompletion {
    pub content: String,
    pub usage: Option<TokenUsage>,
}

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("endpoint rejected the credentials (HTTP {0})")]
    Auth(u16),
    #[error("request timed out")]
    Timeout,
    #[error("HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("connection failed: {0}")]
    Connection(String),
    #[error("unexpected response: {0}")]
    Malformed(String),
}

pub trait ChatTransport: Send {
    fn complete(&mut self, messages: &[ChatMessage]) -> Result<ChatCompletion, TransportError>;
}

/// Blocking HTTP transport with a hard per-call deadline.
pub struct HttpTransport {
    agent: ureq::Agent,
    url: String,
    model: String,
    token: Option<String>,
    temperature: f64,
    seed: u64,
}

impl HttpTransport {
    pub fn from_config(cfg: &EndpointConfig, seed: u64) -> Result<Self, AgentError> {
        let token = match &cfg.token_env {
            Some(var) => Some(
                std::env::var(var).map_err(|_| AgentError::Config(format!("environment variable {var} is not set")))?,
            ),
            None => None,
        };
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(cfg.timeout_secs.max(1))))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(HttpTransport {
            agent,
            url: format!("{}/chat/completions", cfg.base_url.trim_end_matches('/')),
            model: cfg.model.clone(),
            token,
            temperature: cfg.temperature,
            seed,
        })
    }
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Option<WireUsage>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
}

#[derive(Deserialize)]
struct WireMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize)]
struct WireUsage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

/// Extracts the first choice of a chat-completion response body.
pub fn decode_completion(body: &str) -> Result<ChatCompletion, TransportError> {
    let wire: WireResponse = serde_json::from_str(body).map_err(|e| TransportError::Malformed(e.to_string()))?;
    let content = wire
        .choices
        .into_iter()
        .next()
        .and_then(|c| c.message.content)
        .ok_or_else(|| TransportError::Malformed("no message content in choices".into()))?;
    let usage =
        wire.usage.map(|u| TokenUsage { prompt_tokens: u.prompt_tokens, completion_tokens: u.completion_tokens });
    Ok(ChatCompletion { content, usage })
}

impl ChatTransport for HttpTransport {
    fn complete(&mut self, messages: &[ChatMessage]) -> Result<ChatCompletion, TransportError> {
        let body = json!({
            "model": self.model,
            "messages": messages,
            "temperature": self.temperature,
            "seed": self.seed,
        });
        let mut req = self.agent.post(&self.url).header("Content-Type", "application/json");
        if let Some(token) = &self.token {
            req = req.header("Authorization", &format!("Bearer {token}"));
        }
        let response = req.send(body.to_string()).map_err(|e| match e {
            ureq::Error::Timeout(_) => TransportError::Timeout,
            other => TransportError::Connection(other.to_string()),
        })?;
        let status = response.status().as_u16();
        let text = response.into_body().read_to_string().map_err(|e| match e {
            ureq::Error::Timeout(_) => TransportError::Timeout,
            other => TransportError::Connection(other.to_string()),
        })?;
        match status {
            200..=299 => decode_completion(&text),
            401 | 403 => Err(TransportError::Auth(status)),
            _ => Err(TransportError::Status { status, body: text.chars().take(500).collect() }),
        }
    }
}

pub struct LlmAgent {
    name: String,
    cfg: EndpointConfig,
    transport: Box<dyn ChatTransport>,
    conversation: Vec<ChatMessage>,
    /// Index in `conversation` where each month's prompt starts.
    month_starts: Vec<usize>,
    backoff: Duration,
}

struct Exchange {
    content: Option<String>,
    failure: Option<String>,
    calls: u32,
    latency: Duration,
    usage: Option<TokenUsage>,
}

fn add_usage(a: Option<TokenUsage>, b: Option<TokenUsage>) -> Option<TokenUsage> {
    match (a, b) {
        (Some(x), Some(y)) => Some(TokenUsage {
            prompt_tokens: x.prompt_tokens + y.prompt_tokens,
            completion_tokens: x.completion_tokens + y.completion_tokens,
        }),
        (x, None) => x,
        (None, y) => y,
    }
}

impl LlmAgent {
    pub fn new(name: &str, cfg: EndpointConfig, transport: Box<dyn ChatTransport>) -> Self {
        LlmAgent {
            name: name.to_string(),
            cfg,
            transport,
            conversation: Vec::new(),
            month_starts: Vec::new(),
            backoff: Duration::from_millis(500),
        }
    }

    /// First retry delay; doubles after each failed call.
    pub fn with_backoff(mut self, base: Duration) -> Self {
        self.backoff = base;
        self
    }

    pub fn conversation(&self) -> &[ChatMessage] {
        &self.conversation
    }

    /// Messages actually sent: the briefing month plus the last `context_months`.
    fn outgoing(&self) -> Vec<ChatMessage> {
        let Some(keep) = self.cfg.context_months else { return self.conversation.clone() };
        if self.month_starts.len() <= keep + 1 {
            return self.conversation.clone();
        }
        let briefing_end = self.month_starts[1];
        let tail_start = self.month_starts[self.month_starts.len() - keep.max(1)];
        let mut out = self.conversation[..briefing_end].to_vec();
        out.extend_from_slice(&self.conversation[tail_start..]);
        out
    }

    fn exchange(&mut self) -> Result<Exchange, AgentError> {
        let messages = self.outgoing();
        let tries = self.cfg.max_retries.max(1);
        let mut ex = Exchange { content: None, failure: None, calls: 0, latency: Duration::ZERO, usage: None };
        let mut delay = self.backoff;
        for attempt in 0..tries {
            if attempt > 0 {
                std::thread::sleep(delay);
                delay *= 2;
            }
            ex.calls += 1;
            let started = Instant::now();
            let result = self.transport.complete(&messages);
            ex.latency += started.elapsed();
            match result {
                Ok(c) => {
                    ex.usage = add_usage(ex.usage, c.usage);
                    ex.content = Some(c.content);
                    ex.failure = None;
                    return Ok(ex);
                }
                Err(TransportError::Auth(status)) => {
                    return Err(AgentError::Config(format!("endpoint rejected the credentials (HTTP {status})")))
                }
                Err(e) => {
                    tracing::warn!(agent = %self.name, attempt = attempt + 1, error = %e, "chat request failed");
                    ex.failure = Some(e.to_string());
                }
            }
        }
        Ok(ex)
    }
}

impl LlmAgent {
    /// Recreates the exchanges of months played before a resume, with the
    /// decisions actually submitted standing in for the original replies.
    fn rebuild(&mut self, ctx: &DecisionContext<'_>) {
        for (i, report) in ctx.history.iter().enumerate() {
            let prompt = match i {
                0 => render_initial_prompt(ctx.scenario, ctx.year0),
                _ => render_followup_prompt(&ctx.history[i - 1]),
            };
            self.month_starts.push(self.conversation.len());
            self.conversation.push(ChatMessage::user(prompt));
            self.conversation.push(ChatMessage::assistant(render_decision_block(&report.submitted)));
        }
    }
}

impl Agent for LlmAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn decide(&mut self, ctx: &DecisionContext<'_>) -> Result<AgentReply, AgentError> {
        if self.conversation.is_empty() && !ctx.history.is_empty() {
            self.rebuild(ctx);
        }
        let prompt = match ctx.history.last() {
            None => render_initial_prompt(ctx.scenario, ctx.year0),
            Some(report) => render_followup_prompt(report),
        };
        self.month_starts.push(self.conversation.len());
        self.conversation.push(ChatMessage::user(prompt));

        let mut reply = AgentReply::default();
        let mut texts: Vec<String> = Vec::new();
        let mut latency = Duration::ZERO;
        for ask in 0..2 {
            if ask == 1 {
                self.conversation.push(ChatMessage::user(FORMAT_REMINDER));
            }
            let ex = self.exchange()?;
            reply.attempts += ex.calls;
            latency += ex.latency;
            reply.usage = add_usage(reply.usage, ex.usage);
            let Some(content) = ex.content else {
                reply.diagnostics = vec![ParseDiagnostic {
                    field: None,
                    problem: format!("transport: {}", ex.failure.unwrap_or_default()),
                }];
                break;
            };
            self.conversation.push(ChatMessage::assistant(content.clone()));
            let parsed = parse_decision_block(&content);
            texts.push(content);
            reply.diagnostics = parsed.diagnostics;
            if parsed.decision.is_some() {
                reply.decision = parsed.decision;
                break;
            }
        }
        reply.raw_text = if texts.is_empty() { None } else { Some(texts.join("\n\n--- re-ask ---\n\n")) };
        reply.latency_ms = Some(latency.as_millis() as u64);
        Ok(reply)
    }
}
