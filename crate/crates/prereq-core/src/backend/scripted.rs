//! Deterministic scripted providers for tests and replays.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::backend::{
    render_mcq_prompt, AssistantReply, BackendError, ChatProvider, ChatRequest, ModelSpec,
    QueryBackend, QueryContext, QueryRecord,
};
use crate::graph::McqTask;

/// Answer table keyed by `"<model>|<node_id>"`.
///
/// A missing entry is recorded as a parse failure (scored as incorrect),
/// never invented, so fixture gaps surface in the audit trail instead of
/// silently passing.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ScriptedOracle {
    pub answers: BTreeMap<String, u8>,
}

impl ScriptedOracle {
    pub fn new() -> Self {
        ScriptedOracle::default()
    }

    pub fn set(&mut self, model: &str, node_id: &str, answer: u8) {
        self.answers.insert(Self::key(model, node_id), answer);
    }

    pub fn answer(&self, model: &str, node_id: &str) -> Option<u8> {
        self.answers.get(&Self::key(model, node_id)).copied()
    }

    fn key(model: &str, node_id: &str) -> String {
        format!("{model}|{node_id}")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("oracle serialization");
        out.push('\n');
        out
    }
}

impl QueryBackend for ScriptedOracle {
    fn query_mcq(
        &self,
        spec: &ModelSpec,
        task: &McqTask,
        ctx: &QueryContext,
    ) -> Result<QueryRecord, BackendError> {
        let prompt_text = render_mcq_prompt(task);
        let record = match self.answer(&spec.name, task.node_id.as_str()) {
            Some(idx) => QueryRecord {
                model_name: spec.name.clone(),
                node_id: task.node_id.to_string(),
                prompt_text,
                raw_response: format!("{{\"correct_idx\": {idx}}}"),
                parsed_idx: Some(idx),
                parse_failure_reason: None,
                latency_ms: 0,
                attempt_no: ctx.attempt_no,
            },
            None => QueryRecord {
                model_name: spec.name.clone(),
                node_id: task.node_id.to_string(),
                prompt_text,
                raw_response: String::new(),
                parsed_idx: None,
                parse_failure_reason: Some(format!(
                    "no scripted answer for \"{}|{}\"",
                    spec.name, task.node_id
                )),
                latency_ms: 0,
                attempt_no: ctx.attempt_no,
            },
        };
        Ok(record)
    }
}

/// Scripted chat provider: serves a fixed queue of replies in order.
///
/// Used to drive the generation pipeline in tests and offline runs; the
/// queue models a full multi-turn transcript.
#[derive(Debug, Default)]
pub struct ScriptedChat {
    replies: Mutex<VecDeque<AssistantReply>>,
    served: Mutex<usize>,
}

impl ScriptedChat {
    pub fn new(replies: Vec<AssistantReply>) -> Self {
        ScriptedChat {
            replies: Mutex::new(replies.into()),
            served: Mutex::new(0),
        }
    }

    /// Number of replies handed out so far.
    pub fn served(&self) -> usize {
        *self.served.lock().expect("served counter")
    }
}

impl ChatProvider for ScriptedChat {
    fn complete(&self, _request: &ChatRequest) -> Result<AssistantReply, BackendError> {
        let mut queue = self.replies.lock().expect("reply queue");
        match queue.pop_front() {
            Some(reply) => {
                *self.served.lock().expect("served counter") += 1;
                Ok(reply)
            }
            None => Err(BackendError::TranscriptExhausted {
                served: self.served(),
            }),
        }
    }
}
