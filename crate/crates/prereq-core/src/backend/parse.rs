//! Answer extraction from assistant replies.

use serde_json::Value;

/// One tool invocation returned by a model, arguments already decoded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToolCall {
    pub name: String,
    pub arguments: Value,
}

/// Normalized assistant reply: optional text plus any tool calls, with the
/// raw body kept for the audit trail.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AssistantReply {
    pub content: Option<String>,
    pub tool_calls: Vec<ToolCall>,
    pub raw: String,
}

impl AssistantReply {
    pub fn text(content: impl Into<String>) -> Self {
        let content = content.into();
        AssistantReply {
            raw: content.clone(),
            content: Some(content),
            tool_calls: Vec::new(),
        }
    }

    pub fn tool(name: impl Into<String>, arguments: Value) -> Self {
        let call = ToolCall {
            name: name.into(),
            arguments,
        };
        AssistantReply {
            raw: call.arguments.to_string(),
            content: None,
            tool_calls: vec![call],
        }
    }

    /// The first call with the given tool name, if any.
    pub fn tool_call(&self, name: &str) -> Option<&ToolCall> {
        self.tool_calls.iter().find(|c| c.name == name)
    }
}

/// Extracts the answered option index from a reply.
///
/// Prefers the `answer_mcq` tool call's `correct_idx` argument (any tool
/// call carrying a `correct_idx` is accepted as a fallback for models that
/// mangle the tool name). When no tool call is usable, falls back to the
/// first standalone integer in `0..=3` in the assistant text. Out-of-range
/// or absent values produce a failure reason, never a clamped answer.
pub fn parse_answer(reply: &AssistantReply) -> Result<u8, String> {
    let call = reply.tool_call("answer_mcq").or_else(|| {
        reply
            .tool_calls
            .iter()
            .find(|c| c.arguments.get("correct_idx").is_some())
    });

    if let Some(call) = call {
        return match extract_idx(&call.arguments) {
            Some(idx) if (0..=3).contains(&idx) => Ok(idx as u8),
            Some(idx) => Err(format!("tool call correct_idx {idx} outside 0..=3")),
            None => Err(format!(
                "tool call \"{}\" has no integer correct_idx argument",
                call.name
            )),
        };
    }

    if let Some(text) = &reply.content {
        if let Some(idx) = first_standalone_index(text) {
            return Ok(idx);
        }
    }

    Err("no tool call and no standalone answer index 0..=3 in text".to_string())
}

fn extract_idx(arguments: &Value) -> Option<i64> {
    match arguments.get("correct_idx") {
        Some(Value::Number(n)) => n.as_i64(),
        Some(Value::String(s)) => s.trim().parse().ok(),
        _ => None,
    }
}

/// First maximal digit run whose value is in `0..=3`, bounded by
/// non-digits and not preceded by a minus sign.
fn first_standalone_index(text: &str) -> Option<u8> {
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let negated = start > 0 && bytes[start - 1] == b'-';
            let run = &text[start..i];
            if !negated && run.len() == 1 {
                let value = run.parse::<u8>().ok()?;
                if value <= 3 {
                    return Some(value);
                }
            }
        } else {
            i += 1;
        }
    }
    None
}
