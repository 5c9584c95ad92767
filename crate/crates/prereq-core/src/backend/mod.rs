//! Answer providers behind a uniform query interface.
//!
//! Three kinds of provider answer MCQ tasks: live chat-completion endpoints
//! with tool calling ([`http::HttpChatModel`]), a deterministic scripted
//! table for tests and replays ([`scripted::ScriptedOracle`]), and a seeded
//! synthetic capability model for policy simulation
//! ([`synthetic::SyntheticOracle`]). All of them return a [`QueryRecord`]
//! carrying the full audit trail of one query.
//!
//! A parse failure (the model answered, but no usable index could be
//! extracted) is recorded on the [`QueryRecord`] and scored as an incorrect
//! answer downstream; it is never an error. Transport failures, by
//! contrast, abort the surrounding run so that infrastructure flakiness is
//! not mistaken for a capability boundary.

pub mod http;
pub mod parse;
pub mod scripted;
pub mod synthetic;

pub use http::{ChatProvider, ChatRequest, HttpChatModel, ToolSpec};
pub use parse::{parse_answer, AssistantReply, ToolCall};
pub use scripted::{ScriptedChat, ScriptedOracle};
pub use synthetic::{synthetic_answer, CapabilityProfile, SyntheticOracle};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::graph::McqTask;

/// Which provider answers for a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    HttpChat,
    Scripted,
    Synthetic,
}

/// One model slot in a cascade: a served model tag plus provider options.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    /// Free-form options: `temperature`, `timeout_secs`, `max_retries`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, String>,
}

impl ModelSpec {
    pub fn new(name: impl Into<String>, kind: ModelKind) -> Self {
        ModelSpec {
            name: name.into(),
            kind,
            endpoint: None,
            params: BTreeMap::new(),
        }
    }

    pub fn scripted(name: impl Into<String>) -> Self {
        ModelSpec::new(name, ModelKind::Scripted)
    }

    pub fn synthetic(name: impl Into<String>) -> Self {
        ModelSpec::new(name, ModelKind::Synthetic)
    }

    pub fn check(&self) -> Result<(), BackendError> {
        if self.name.trim().is_empty() {
            return Err(BackendError::InvalidSpec {
                message: "model name is empty".to_string(),
            });
        }
        if self.kind == ModelKind::HttpChat && self.endpoint.is_none() {
            return Err(BackendError::InvalidSpec {
                message: format!("http_chat model \"{}\" has no endpoint", self.name),
            });
        }
        Ok(())
    }

    fn param_or<T: std::str::FromStr>(&self, key: &str, default: T) -> T {
        self.params
            .get(key)
            .and_then(|v| v.parse().ok())
            .unwrap_or(default)
    }

    pub fn temperature(&self) -> f64 {
        self.param_or("temperature", 0.0)
    }

    pub fn timeout_secs(&self) -> u64 {
        self.param_or("timeout_secs", 30)
    }

    pub fn max_retries(&self) -> u32 {
        self.param_or("max_retries", 3)
    }
}

/// Audit trail of one model query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub model_name: String,
    pub node_id: String,
    pub prompt_text: String,
    pub raw_response: String,
    /// Extracted answer index; absent exactly when parsing failed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parsed_idx: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parse_failure_reason: Option<String>,
    /// Wall-clock latency. Excluded from serialized artifacts so that
    /// replayed runs stay byte-identical.
    #[serde(skip)]
    pub latency_ms: u64,
    /// 1-based attempt number at this node.
    pub attempt_no: u32,
}

impl QueryRecord {
    /// True when an index was extracted and it equals `correct_idx`.
    pub fn is_correct(&self, correct_idx: u8) -> bool {
        self.parsed_idx == Some(correct_idx)
    }
}

/// Per-query metadata passed by the caller.
#[derive(Debug, Clone, Copy, Default)]
pub struct QueryContext {
    /// 1-based attempt number at the node being queried.
    pub attempt_no: u32,
    /// Tags on the node beyond its tree root's tag count; drives the
    /// synthetic capability decay.
    pub extra_tag_count: usize,
}

/// Backend failures. Only transport-class failures abort a run.
#[derive(Debug, thiserror::Error)]
pub enum BackendError {
    #[error("transport failure for model \"{model}\" after {attempts} attempt(s): {message}")]
    Transport {
        model: String,
        attempts: u32,
        message: String,
    },
    #[error("invalid model spec: {message}")]
    InvalidSpec { message: String },
    #[error("no provider configured for model \"{model}\" ({kind:?})")]
    NoProvider { model: String, kind: ModelKind },
    #[error("no capability profile for model \"{model}\"")]
    UnknownModel { model: String },
    #[error("scripted chat transcript exhausted after {served} response(s)")]
    TranscriptExhausted { served: usize },
}

/// Uniform MCQ query interface over every provider kind.
pub trait QueryBackend: Send + Sync {
    fn query_mcq(
        &self,
        spec: &ModelSpec,
        task: &McqTask,
        ctx: &QueryContext,
    ) -> Result<QueryRecord, BackendError>;
}

/// Routes each query to the provider matching the model's kind.
#[derive(Default)]
pub struct Dispatcher {
    scripted: Option<ScriptedOracle>,
    synthetic: Option<SyntheticOracle>,
    http: Option<HttpChatModel>,
}

impl Dispatcher {
    pub fn new() -> Self {
        Dispatcher::default()
    }

    pub fn with_scripted(mut self, oracle: ScriptedOracle) -> Self {
        self.scripted = Some(oracle);
        self
    }

    pub fn with_synthetic(mut self, oracle: SyntheticOracle) -> Self {
        self.synthetic = Some(oracle);
        self
    }

    pub fn with_http(mut self, http: HttpChatModel) -> Self {
        self.http = Some(http);
        self
    }
}

impl QueryBackend for Dispatcher {
    fn query_mcq(
        &self,
        spec: &ModelSpec,
        task: &McqTask,
        ctx: &QueryContext,
    ) -> Result<QueryRecord, BackendError> {
        let missing = || BackendError::NoProvider {
            model: spec.name.clone(),
            kind: spec.kind,
        };
        match spec.kind {
            ModelKind::Scripted => self
                .scripted
                .as_ref()
                .ok_or_else(missing)?
                .query_mcq(spec, task, ctx),
            ModelKind::Synthetic => self
                .synthetic
                .as_ref()
                .ok_or_else(missing)?
                .query_mcq(spec, task, ctx),
            ModelKind::HttpChat => self
                .http
                .as_ref()
                .ok_or_else(missing)?
                .query_mcq(spec, task, ctx),
        }
    }
}

/// Renders the fixed answer prompt for a task. Shared by every provider so
/// audit records look the same regardless of where the answer came from.
pub fn render_mcq_prompt(task: &McqTask) -> String {
    let mut prompt = String::from(
        "You are answering a multiple-choice question. Read the question and the \
         four options, then call the answer_mcq tool with the zero-based index of \
         the single correct option. Do not answer in prose.\n\nQuestion: ",
    );
    prompt.push_str(&task.question);
    prompt.push_str("\n\nOptions:\n");
    for (i, option) in task.options.iter().enumerate() {
        prompt.push_str(&format!("{i}. {option}\n"));
    }
    prompt
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_param_defaults() {
        let spec = ModelSpec::scripted("m");
        assert_eq!(spec.temperature(), 0.0);
        assert_eq!(spec.timeout_secs(), 30);
        assert_eq!(spec.max_retries(), 3);

        let mut custom = spec.clone();
        custom.params.insert("temperature".into(), "0.5".into());
        custom.params.insert("max_retries".into(), "1".into());
        assert_eq!(custom.temperature(), 0.5);
        assert_eq!(custom.max_retries(), 1);
    }

    #[test]
    fn http_spec_requires_endpoint() {
        let spec = ModelSpec::new("served", ModelKind::HttpChat);
        assert!(spec.check().is_err());
    }

    #[test]
    fn prompt_lists_all_options_with_indices() {
        let task = McqTask::new("n0", "Pick one.", ["w", "x", "y", "z"], 2);
        let prompt = render_mcq_prompt(&task);
        assert!(prompt.contains("Pick one."));
        for line in ["0. w", "1. x", "2. y", "3. z"] {
            assert!(prompt.contains(line), "missing {line}");
        }
    }

    #[test]
    fn dispatcher_routes_by_kind_and_reports_missing_providers() {
        let task = McqTask::new("n0", "q?", ["a", "b", "c", "d"], 1);
        let ctx = QueryContext {
            attempt_no: 1,
            extra_tag_count: 0,
        };

        let mut scripted = ScriptedOracle::new();
        scripted.set("s", "n0", 1);
        let synthetic = SyntheticOracle::single("y", CapabilityProfile::new(1.0, 1.0, 0)).unwrap();
        let dispatcher = Dispatcher::new()
            .with_scripted(scripted)
            .with_synthetic(synthetic);

        let record = dispatcher
            .query_mcq(&ModelSpec::scripted("s"), &task, &ctx)
            .unwrap();
        assert_eq!(record.parsed_idx, Some(1));
        let record = dispatcher
            .query_mcq(&ModelSpec::synthetic("y"), &task, &ctx)
            .unwrap();
        assert_eq!(record.parsed_idx, Some(1));

        let mut http_spec = ModelSpec::new("h", ModelKind::HttpChat);
        http_spec.endpoint = Some("http://127.0.0.1:1".into());
        let err = dispatcher.query_mcq(&http_spec, &task, &ctx).unwrap_err();
        assert!(matches!(err, BackendError::NoProvider { .. }));
    }

    #[test]
    fn latency_is_not_serialized() {
        let record = QueryRecord {
            model_name: "m".into(),
            node_id: "n0".into(),
            prompt_text: "p".into(),
            raw_response: "r".into(),
            parsed_idx: Some(1),
            parse_failure_reason: None,
            latency_ms: 1234,
            attempt_no: 1,
        };
        let json = serde_json::to_string(&record).unwrap();
        assert!(!json.contains("latency"));
        let back: QueryRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back.latency_ms, 0);
        assert_eq!(back.parsed_idx, Some(1));
    }
}
