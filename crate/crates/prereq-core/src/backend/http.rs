//! Chat-completions HTTP provider with tool calling.
//!
//! Speaks the de-facto `POST /v1/chat/completions` wire format: one user
//! message, an optional `tools` array, and a forced `tool_choice` when a
//! single tool is supplied. Answers are extracted from the `answer_mcq`
//! tool call with a plain-text fallback. A bearer token is read from the
//! `PREREQ_API_KEY` environment variable when set and never persisted.
//!
//! Transport failures (connect errors, timeouts, HTTP 429/5xx) are retried
//! with exponential backoff up to the model's `max_retries`, then surfaced
//! as [`BackendError::Transport`] so the caller can abort the run. Other
//! HTTP errors fail immediately: re-sending a rejected request will not
//! change the outcome.

use std::time::{Duration, Instant};

use serde::Deserialize;
use serde_json::{json, Value};

use crate::backend::{
    parse_answer, render_mcq_prompt, AssistantReply, BackendError, ModelSpec, QueryBackend,
    QueryContext, QueryRecord, ToolCall,
};
use crate::graph::McqTask;

/// Environment variable holding the optional bearer token.
pub const API_KEY_ENV: &str = "PREREQ_API_KEY";

const CHAT_COMPLETIONS_PATH: &str = "/v1/chat/completions";
const DEFAULT_BACKOFF_MS: u64 = 250;

/// A function tool the model may call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToolSpec {
    pub name: String,
    pub description: String,
    pub parameters: Value,
}

/// The single tool used for answering MCQs: one integer argument
/// `correct_idx` in `0..=3`.
pub fn answer_mcq_tool() -> ToolSpec {
    ToolSpec {
        name: "answer_mcq".to_string(),
        description: "Submit the answer to the multiple-choice question.".to_string(),
        parameters: json!({
            "type": "object",
            "properties": {
                "correct_idx": {
                    "type": "integer",
                    "minimum": 0,
                    "maximum": 3,
                    "description": "Zero-based index of the correct option."
                }
            },
            "required": ["correct_idx"]
        }),
    }
}

/// One chat exchange request.
#[derive(Debug, Clone)]
pub struct ChatRequest {
    pub model: String,
    pub user: String,
    pub tools: Vec<ToolSpec>,
    /// Name of the tool the model must call, when forcing is wanted.
    pub force_tool: Option<String>,
    pub temperature: f64,
}

impl ChatRequest {
    pub fn user(model: impl Into<String>, user: impl Into<String>) -> Self {
        ChatRequest {
            model: model.into(),
            user: user.into(),
            tools: Vec::new(),
            force_tool: None,
            temperature: 0.0,
        }
    }

    pub fn with_tool(mut self, tool: ToolSpec, force: bool) -> Self {
        if force {
            self.force_tool = Some(tool.name.clone());
        }
        self.tools.push(tool);
        self
    }
}

/// Text-or-tool-call chat interface, implemented by the HTTP provider and
/// by [`ScriptedChat`](crate::backend::ScriptedChat) for offline runs.
pub trait ChatProvider: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<AssistantReply, BackendError>;
}

/// Serializes a chat request to the wire format.
pub fn build_request_body(request: &ChatRequest) -> Value {
    let mut body = json!({
        "model": request.model,
        "messages": [{"role": "user", "content": request.user}],
        "temperature": request.temperature,
    });
    if !request.tools.is_empty() {
        let tools: Vec<Value> = request
            .tools
            .iter()
            .map(|t| {
                json!({
                    "type": "function",
                    "function": {
                        "name": t.name,
                        "description": t.description,
                        "parameters": t.parameters,
                    }
                })
            })
            .collect();
        body["tools"] = Value::Array(tools);
        if let Some(name) = &request.force_tool {
            body["tool_choice"] = json!({"type": "function", "function": {"name": name}});
        }
    }
    body
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
}

#[derive(Deserialize)]
struct WireMessage {
    #[serde(default)]
    content: Option<String>,
    #[serde(default)]
    tool_calls: Vec<WireToolCall>,
}

#[derive(Deserialize)]
struct WireToolCall {
    function: WireFunction,
}

#[derive(Deserialize)]
struct WireFunction {
    name: String,
    /// Usually a JSON-encoded string; some servers inline the object.
    arguments: Value,
}

/// Decodes a chat-completions response body into an [`AssistantReply`].
pub fn parse_chat_response(body: &str) -> Result<AssistantReply, String> {
    let wire: WireResponse =
        serde_json::from_str(body).map_err(|e| format!("unparseable response body: {e}"))?;
    let choice = wire
        .choices
        .into_iter()
        .next()
        .ok_or("response has no choices")?;
    let tool_calls = choice
        .message
        .tool_calls
        .into_iter()
        .map(|call| {
            let arguments = match call.function.arguments {
                Value::String(s) => serde_json::from_str(&s).unwrap_or(Value::String(s)),
                other => other,
            };
            ToolCall {
                name: call.function.name,
                arguments,
            }
        })
        .collect();
    Ok(AssistantReply {
        content: choice.message.content,
        tool_calls,
        raw: body.to_string(),
    })
}

/// Full chat-completions URL for a model spec. A bare base URL gets the
/// standard path appended.
pub fn resolve_endpoint(spec: &ModelSpec) -> Result<String, BackendError> {
    let endpoint = spec
        .endpoint
        .as_ref()
        .ok_or_else(|| BackendError::InvalidSpec {
            message: format!("http_chat model \"{}\" has no endpoint", spec.name),
        })?;
    let trimmed = endpoint.trim_end_matches('/');
    if trimmed.ends_with("/chat/completions") {
        Ok(trimmed.to_string())
    } else {
        Ok(format!("{trimmed}{CHAT_COMPLETIONS_PATH}"))
    }
}

/// Live chat-completions provider.
#[derive(Debug, Default)]
pub struct HttpChatModel {
    /// Overrides the model's endpoint when set; used by the generation
    /// pipeline where the "spec" is a bare generator model name.
    pub default_endpoint: Option<String>,
}

impl HttpChatModel {
    pub fn new() -> Self {
        HttpChatModel::default()
    }

    fn send(
        &self,
        url: &str,
        body: &str,
        timeout: Duration,
        max_retries: u32,
        backoff_ms: u64,
        model: &str,
    ) -> Result<String, BackendError> {
        let agent = ureq::AgentBuilder::new().timeout(timeout).build();
        let token = std::env::var(API_KEY_ENV).ok();
        let mut attempts = 0u32;
        loop {
            attempts += 1;
            let mut request = agent.post(url).set("Content-Type", "application/json");
            if let Some(token) = &token {
                request = request.set("Authorization", &format!("Bearer {token}"));
            }
            let outcome = match request.send_string(body) {
                Ok(response) => Ok(response
                    .into_string()
                    .map_err(|e| format!("reading response body: {e}"))),
                Err(ureq::Error::Status(code, response)) => {
                    let detail = response.into_string().unwrap_or_default();
                    let message = format!("HTTP {code}: {}", detail.trim());
                    if code == 429 || code >= 500 {
                        Err((true, message))
                    } else {
                        Err((false, message))
                    }
                }
                Err(ureq::Error::Transport(t)) => Err((true, t.to_string())),
            };
            match outcome {
                Ok(Ok(text)) => return Ok(text),
                Ok(Err(message)) | Err((false, message)) => {
                    return Err(BackendError::Transport {
                        model: model.to_string(),
                        attempts,
                        message,
                    });
                }
                Err((true, message)) => {
                    if attempts > max_retries {
                        return Err(BackendError::Transport {
                            model: model.to_string(),
                            attempts,
                            message,
                        });
                    }
                    let delay = backoff_ms.saturating_mul(1 << (attempts - 1).min(8));
                    std::thread::sleep(Duration::from_millis(delay));
                }
            }
        }
    }

    fn complete_spec(
        &self,
        spec: &ModelSpec,
        request: &ChatRequest,
    ) -> Result<AssistantReply, BackendError> {
        let url = match &self.default_endpoint {
            Some(url) if spec.endpoint.is_none() => {
                let trimmed = url.trim_end_matches('/');
                if trimmed.ends_with("/chat/completions") {
                    trimmed.to_string()
                } else {
                    format!("{trimmed}{CHAT_COMPLETIONS_PATH}")
                }
            }
            _ => resolve_endpoint(spec)?,
        };
        let body = build_request_body(request).to_string();
        let backoff = spec.param_or_backoff();
        let text = self.send(
            &url,
            &body,
            Duration::from_secs(spec.timeout_secs()),
            spec.max_retries(),
            backoff,
            &spec.name,
        )?;
        parse_chat_response(&text).map_err(|message| BackendError::Transport {
            model: spec.name.clone(),
            attempts: 1,
            message,
        })
    }
}

impl ModelSpec {
    fn param_or_backoff(&self) -> u64 {
        self.params
            .get("retry_backoff_ms")
            .and_then(|v| v.parse().ok())
            .unwrap_or(DEFAULT_BACKOFF_MS)
    }
}

impl QueryBackend for HttpChatModel {
    fn query_mcq(
        &self,
        spec: &ModelSpec,
        task: &McqTask,
        ctx: &QueryContext,
    ) -> Result<QueryRecord, BackendError> {
        let prompt_text = render_mcq_prompt(task);
        let request = ChatRequest {
            model: spec.name.clone(),
            user: prompt_text.clone(),
            tools: vec![answer_mcq_tool()],
            force_tool: Some("answer_mcq".to_string()),
            temperature: spec.temperature(),
        };
        let started = Instant::now();
        let reply = self.complete_spec(spec, &request)?;
        let latency_ms = started.elapsed().as_millis() as u64;
        let (parsed_idx, parse_failure_reason) = match parse_answer(&reply) {
            Ok(idx) => (Some(idx), None),
            Err(reason) => (None, Some(reason)),
        };
        Ok(QueryRecord {
            model_name: spec.name.clone(),
            node_id: task.node_id.to_string(),
            prompt_text,
            raw_response: reply.raw,
            parsed_idx,
            parse_failure_reason,
            latency_ms,
            attempt_no: ctx.attempt_no,
        })
    }
}

impl ChatProvider for HttpChatModel {
    fn complete(&self, request: &ChatRequest) -> Result<AssistantReply, BackendError> {
        let spec = ModelSpec {
            name: request.model.clone(),
            kind: super::ModelKind::HttpChat,
            endpoint: self.default_endpoint.clone(),
            params: Default::default(),
        };
        self.complete_spec(&spec, request)
    }
}
