//! Two-phase agentic dataset generation.
//!
//! Phase 1 asks a generator model to blueprint a whole concept tree in one
//! structured response; nodes that break the schema or the tag inheritance
//! rule are fed back for repair up to a bounded number of attempts and
//! dropped (together with their descendants) when repair fails. Accepted
//! nodes are re-identified as `n000`, `n001`, ... in breadth-first order so
//! that downstream analysis never depends on model-chosen id strings.
//!
//! Phase 2 translates each surviving node into a four-option MCQ whose
//! ground truth arrives as a `submit_mcq` tool call, with the same bounded
//! repair loop. A node whose translation cannot be repaired is excluded
//! from the emitted dataset along with its descendants, so the graph/task
//! pair always stays evaluable.
//!
//! Prompt templates ship with the crate and are referenced by content hash
//! in the transcript, which records every exchange in order.

mod prompts;

pub use prompts::{PromptTemplate, BLUEPRINT, BLUEPRINT_REPAIR, TRANSLATE, TRANSLATE_REPAIR};

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::backend::{BackendError, ChatProvider, ChatRequest, ModelSpec, ToolSpec};
use crate::graph::{
    validate_graph, validate_task_fields, ConceptGraph, ConceptNode, McqTask, NodeId, TagSet,
    TaskSet,
};

/// Parameters of one generation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub domain_topic: String,
    pub target_node_count: u32,
    pub max_depth: u32,
    pub max_children_per_node: u32,
    /// Bounded repair attempts per offending node or document.
    #[serde(default = "default_repair_attempts")]
    pub repair_attempts: u32,
    pub generator_model: ModelSpec,
}

fn default_repair_attempts() -> u32 {
    3
}

impl GenerationConfig {
    pub fn check(&self) -> Result<(), GenerationError> {
        if self.target_node_count == 0 {
            return Err(GenerationError::InvalidConfig {
                message: "target_node_count must be at least 1".to_string(),
            });
        }
        Ok(())
    }
}

/// One prompt/response exchange, as logged to the transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationExchange {
    /// `blueprint`, `blueprint_repair`, `translate`, or `translate_repair`.
    pub phase: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_ref: Option<String>,
    pub attempt: u32,
    pub prompt_hash: String,
    pub prompt: String,
    pub response: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<String>,
}

/// JSON Lines rendering of a transcript, one exchange per line.
pub fn transcript_to_jsonl(transcript: &[GenerationExchange]) -> String {
    let mut out = String::new();
    for exchange in transcript {
        out.push_str(&serde_json::to_string(exchange).expect("exchange serialization"));
        out.push('\n');
    }
    out
}

/// Completed generation: an evaluable graph/task pair plus the transcript.
#[derive(Debug, Clone)]
pub struct GenerationOutcome {
    pub graph: ConceptGraph,
    pub tasks: TaskSet,
    pub transcript: Vec<GenerationExchange>,
    /// Generator-proposed ids that were dropped during blueprinting, and
    /// final ids dropped during translation.
    pub dropped: Vec<String>,
}

/// Generation failures.
#[derive(Debug, thiserror::Error)]
pub enum GenerationError {
    #[error("invalid generation config: {message}")]
    InvalidConfig { message: String },
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("blueprint response unusable after {attempts} attempt(s): {message}")]
    BlueprintUnusable { attempts: u32, message: String },
    #[error("no usable nodes remain after repairs")]
    EmptyGraph,
    #[error("translation failed for node \"{node_id}\" after {attempts} attempt(s)")]
    NodeTranslationFailed { node_id: String, attempts: u32 },
    #[error("every node was dropped during translation")]
    EmptyDataset,
    #[error("generation produced an invalid graph: {message}")]
    Internal { message: String },
}

// ---------------------------------------------------------------------------
// Phase 1: blueprinting
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawNode {
    #[serde(default)]
    id: String,
    #[serde(default)]
    parent_id: Option<String>,
    #[serde(default)]
    description: String,
    #[serde(default)]
    tags: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct RawDoc {
    nodes: Vec<RawNode>,
}

/// Pulls the first JSON value out of assistant text, tolerating markdown
/// fences and surrounding prose.
fn extract_json(content: &str) -> Option<Value> {
    let trimmed = content.trim();
    if let Ok(value) = serde_json::from_str(trimmed) {
        return Some(value);
    }
    let unfenced: String = trimmed
        .lines()
        .filter(|line| !line.trim_start().starts_with("```"))
        .collect::<Vec<_>>()
        .join("\n");
    if let Ok(value) = serde_json::from_str(unfenced.trim()) {
        return Some(value);
    }
    let start = trimmed.find(['{', '['])?;
    let slice = &trimmed[start..];
    let mut deserializer = serde_json::Deserializer::from_str(slice).into_iter::<Value>();
    deserializer.next()?.ok()
}

fn parse_blueprint_doc(content: &str) -> Result<Vec<RawNode>, String> {
    let value = extract_json(content).ok_or("response contains no JSON document")?;
    if let Value::Array(_) = value {
        return serde_json::from_value::<Vec<RawNode>>(value)
            .map_err(|e| format!("node array does not match the schema: {e}"));
    }
    serde_json::from_value::<RawDoc>(value)
        .map(|doc| doc.nodes)
        .map_err(|e| format!("document does not match the schema: {e}"))
}

/// Violations of one raw node against its settled parent.
fn raw_node_violations(node: &RawNode, parent_tags: Option<&TagSet>) -> Vec<String> {
    let mut violations = Vec::new();
    if node.id.trim().is_empty() {
        violations.push("id is empty".to_string());
    }
    if node.description.trim().is_empty() {
        violations.push("description is empty".to_string());
    }
    let tags: TagSet = node.tags.iter().cloned().collect();
    match parent_tags {
        Some(parent_tags) => {
            let missing = parent_tags.difference(&tags);
            if !missing.is_empty() {
                violations.push(format!("missing inherited tag(s): {missing}"));
            }
            let unique = tags.difference(parent_tags);
            if !(1..=2).contains(&unique.len()) {
                violations.push(format!(
                    "adds {} unique tag(s), expected 1 or 2",
                    unique.len()
                ));
            }
        }
        None => {
            if tags.is_empty() {
                violations.push("root node has no tags".to_string());
            }
        }
    }
    violations
}

struct BlueprintSession<'a> {
    config: &'a GenerationConfig,
    provider: &'a dyn ChatProvider,
    transcript: Vec<GenerationExchange>,
}

impl BlueprintSession<'_> {
    fn exchange(
        &mut self,
        phase: &str,
        node_ref: Option<String>,
        attempt: u32,
        template: &PromptTemplate,
        prompt: String,
        violations: Vec<String>,
    ) -> Result<String, BackendError> {
        let request = ChatRequest {
            model: self.config.generator_model.name.clone(),
            user: prompt.clone(),
            tools: Vec::new(),
            force_tool: None,
            temperature: self.config.generator_model.temperature(),
        };
        let reply = self.provider.complete(&request)?;
        let response = reply.content.clone().unwrap_or_else(|| reply.raw.clone());
        self.transcript.push(GenerationExchange {
            phase: phase.to_string(),
            node_ref,
            attempt,
            prompt_hash: template.hash.clone(),
            prompt,
            response: response.clone(),
            violations,
        });
        Ok(response)
    }

    /// Repair loop for one node. Returns the settled node or None.
    ///
    /// Repairs may fix the description and tags only: id and parent
    /// reference are pinned to the original so a confused generator cannot
    /// re-home the node mid-validation.
    fn repair_node(
        &mut self,
        mut node: RawNode,
        parent_tags: Option<&TagSet>,
        mut violations: Vec<String>,
    ) -> Result<Option<RawNode>, BackendError> {
        let original_id = node.id.clone();
        let original_parent = node.parent_id.clone();
        for attempt in 1..=self.config.repair_attempts {
            let prompt = BLUEPRINT_REPAIR.fill(&[
                (
                    "node_json",
                    &serde_json::to_string(&node).expect("raw node serialization"),
                ),
                (
                    "parent_tags",
                    &parent_tags
                        .map(|t| t.to_string())
                        .unwrap_or_else(|| "(root node)".into()),
                ),
                ("violations", &violations.join("\n")),
                ("node_id", &original_id),
            ]);
            let response = self.exchange(
                "blueprint_repair",
                Some(original_id.clone()),
                attempt,
                &BLUEPRINT_REPAIR,
                prompt,
                violations.clone(),
            )?;
            let candidate =
                extract_json(&response).and_then(|v| serde_json::from_value::<RawNode>(v).ok());
            match candidate {
                Some(mut fixed) => {
                    fixed.id = original_id.clone();
                    fixed.parent_id = original_parent.clone();
                    violations = raw_node_violations(&fixed, parent_tags);
                    node = fixed;
                    if violations.is_empty() {
                        return Ok(Some(node));
                    }
                }
                None => {
                    violations = vec!["repair response contains no node JSON".to_string()];
                }
            }
        }
        Ok(None)
    }
}

/// Phase 1: blueprints a concept tree, repairing or dropping bad nodes,
/// and re-identifying survivors as `n000`, `n001`, ... in BFS order.
pub fn blueprint_graph(
    config: &GenerationConfig,
    provider: &dyn ChatProvider,
) -> Result<(ConceptGraph, Vec<GenerationExchange>, Vec<String>), GenerationError> {
    config.check()?;
    let mut session = BlueprintSession {
        config,
        provider,
        transcript: Vec::new(),
    };

    let prompt = BLUEPRINT.fill(&[
        ("domain_topic", &config.domain_topic),
        ("target_node_count", &config.target_node_count.to_string()),
        ("max_depth", &config.max_depth.to_string()),
        (
            "max_children_per_node",
            &config.max_children_per_node.to_string(),
        ),
    ]);

    // Document-level loop: the first response that parses as a node list
    // wins; unparsable documents are re-requested with the error attached.
    let mut raw_nodes = None;
    let mut last_error = String::new();
    for attempt in 0..=config.repair_attempts {
        let (phase, text) = if attempt == 0 {
            ("blueprint", prompt.clone())
        } else {
            (
                "blueprint_repair",
                format!("{prompt}\n\nYour previous response was unusable: {last_error}\nRespond with the JSON document only."),
            )
        };
        let response = session
            .exchange(phase, None, attempt, &BLUEPRINT, text, Vec::new())
            .map_err(GenerationError::Backend)?;
        match parse_blueprint_doc(&response) {
            Ok(nodes) => {
                raw_nodes = Some(nodes);
                break;
            }
            Err(message) => last_error = message,
        }
    }
    let raw_nodes = raw_nodes.ok_or_else(|| GenerationError::BlueprintUnusable {
        attempts: config.repair_attempts + 1,
        message: last_error,
    })?;

    // Deduplicate ids (first occurrence wins) and index children.
    let mut by_id: BTreeMap<String, RawNode> = BTreeMap::new();
    let mut dropped: Vec<String> = Vec::new();
    for (index, node) in raw_nodes.into_iter().enumerate() {
        let key = if node.id.trim().is_empty() {
            format!("(unnamed node #{index})")
        } else {
            node.id.clone()
        };
        if node.id.trim().is_empty() || by_id.contains_key(&node.id) {
            dropped.push(key);
            continue;
        }
        by_id.insert(node.id.clone(), node);
    }

    // Settle nodes in waves: a node is processable once its parent is
    // settled (or it is a root). Whatever never becomes processable —
    // cycles, dangling parents, descendants of drops — is dropped.
    let mut settled: BTreeMap<String, RawNode> = BTreeMap::new();
    let mut settled_tags: BTreeMap<String, TagSet> = BTreeMap::new();
    let mut pending: BTreeSet<String> = by_id.keys().cloned().collect();
    let mut removed: BTreeSet<String> = BTreeSet::new();

    for _wave in 0..=by_id.len() {
        let processable: Vec<String> = pending
            .iter()
            .filter(|id| match &by_id[*id].parent_id {
                None => true,
                Some(p) => settled.contains_key(p) || removed.contains(p),
            })
            .cloned()
            .collect();
        if processable.is_empty() {
            break;
        }
        for id in processable {
            pending.remove(&id);
            let node = by_id[&id].clone();
            if let Some(parent) = &node.parent_id {
                if removed.contains(parent) {
                    removed.insert(id.clone());
                    dropped.push(id.clone());
                    continue;
                }
            }
            let parent_tags = node.parent_id.as_ref().map(|p| settled_tags[p].clone());
            let violations = raw_node_violations(&node, parent_tags.as_ref());
            let outcome = if violations.is_empty() {
                Some(node)
            } else {
                session
                    .repair_node(node, parent_tags.as_ref(), violations)
                    .map_err(GenerationError::Backend)?
            };
            match outcome {
                Some(node) => {
                    settled_tags.insert(id.clone(), node.tags.iter().cloned().collect());
                    settled.insert(id.clone(), node);
                }
                None => {
                    removed.insert(id.clone());
                    dropped.push(id.clone());
                }
            }
        }
    }
    // Anything still pending sits under a cycle or an unknown parent.
    dropped.extend(pending.iter().cloned());

    if settled.is_empty() {
        return Err(GenerationError::EmptyGraph);
    }

    // Re-identify in BFS order: roots lexicographic by proposed id, then
    // children likewise.
    let mut children: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut roots: Vec<String> = Vec::new();
    for (id, node) in &settled {
        match &node.parent_id {
            None => roots.push(id.clone()),
            Some(p) => children.entry(p.clone()).or_default().push(id.clone()),
        }
    }
    let pad = settled.len().saturating_sub(1).to_string().len().max(3);
    let mut final_ids: BTreeMap<String, String> = BTreeMap::new();
    let mut queue: VecDeque<String> = roots.into_iter().collect();
    let mut counter = 0usize;
    while let Some(raw_id) = queue.pop_front() {
        final_ids.insert(raw_id.clone(), format!("n{counter:0pad$}"));
        counter += 1;
        if let Some(kids) = children.get(&raw_id) {
            queue.extend(kids.iter().cloned());
        }
    }

    let nodes: Vec<ConceptNode> = settled
        .iter()
        .map(|(raw_id, node)| {
            ConceptNode::new(
                final_ids[raw_id].as_str(),
                node.parent_id
                    .as_ref()
                    .map(|p| NodeId::from(final_ids[p].as_str())),
                node.description.clone(),
                node.tags.iter().cloned().collect(),
            )
        })
        .collect();
    let graph = ConceptGraph::new(nodes).map_err(|e| GenerationError::Internal {
        message: e.to_string(),
    })?;
    let report = validate_graph(&graph);
    if report.has_errors() {
        return Err(GenerationError::Internal {
            message: report
                .errors()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; "),
        });
    }

    Ok((graph, session.transcript, dropped))
}

// ---------------------------------------------------------------------------
// Phase 2: MCQ translation
// ---------------------------------------------------------------------------

fn submit_mcq_tool() -> ToolSpec {
    ToolSpec {
        name: "submit_mcq".to_string(),
        description: "Submit the generated multiple-choice question.".to_string(),
        parameters: serde_json::json!({
            "type": "object",
            "properties": {
                "question": {"type": "string"},
                "options": {
                    "type": "array",
                    "items": {"type": "string"},
                    "minItems": 4,
                    "maxItems": 4
                },
                "correct_idx": {"type": "integer", "minimum": 0, "maximum": 3}
            },
            "required": ["question", "options", "correct_idx"]
        }),
    }
}

fn candidate_from_args(node_id: &NodeId, args: &Value) -> McqTask {
    McqTask {
        node_id: node_id.clone(),
        question: args
            .get("question")
            .and_then(Value::as_str)
            .unwrap_or_default()
            .to_string(),
        options: args
            .get("options")
            .and_then(Value::as_array)
            .map(|opts| {
                opts.iter()
                    .map(|o| o.as_str().unwrap_or_default().to_string())
                    .collect()
            })
            .unwrap_or_default(),
        correct_idx: args
            .get("correct_idx")
            .and_then(Value::as_u64)
            .map(|v| v.min(u64::from(u8::MAX)) as u8)
            .unwrap_or(u8::MAX),
    }
}

/// Phase 2: translates one node into an MCQ via the `submit_mcq` tool,
/// repairing schema violations up to the configured attempt budget.
pub fn translate_node(
    node: &ConceptNode,
    config: &GenerationConfig,
    provider: &dyn ChatProvider,
) -> Result<(McqTask, Vec<GenerationExchange>), GenerationError> {
    let mut transcript = Vec::new();
    let tags = node.tags.to_string();
    let base_prompt = TRANSLATE.fill(&[
        ("node_id", node.id.as_str()),
        ("description", &node.description),
        ("tags", &tags),
    ]);

    let mut prompt = base_prompt;
    let mut template = &TRANSLATE;
    let mut phase = "translate";
    let mut last_violations: Vec<String> = Vec::new();
    for attempt in 0..=config.repair_attempts {
        let request = ChatRequest {
            model: config.generator_model.name.clone(),
            user: prompt.clone(),
            tools: vec![submit_mcq_tool()],
            force_tool: Some("submit_mcq".to_string()),
            temperature: config.generator_model.temperature(),
        };
        let reply = provider.complete(&request)?;
        transcript.push(GenerationExchange {
            phase: phase.to_string(),
            node_ref: Some(node.id.to_string()),
            attempt,
            prompt_hash: template.hash.clone(),
            prompt: prompt.clone(),
            response: reply.raw.clone(),
            violations: last_violations.clone(),
        });

        let (candidate, submission_json) = match reply.tool_call("submit_mcq") {
            Some(call) => (
                candidate_from_args(&node.id, &call.arguments),
                call.arguments.to_string(),
            ),
            None => (
                candidate_from_args(&node.id, &Value::Null),
                "(no submit_mcq tool call)".to_string(),
            ),
        };
        let mut violations: Vec<String> = validate_task_fields(&candidate)
            .into_iter()
            .map(|v| v.message)
            .collect();
        if reply.tool_call("submit_mcq").is_none() {
            violations.insert(0, "response did not call the submit_mcq tool".to_string());
        }
        if violations.is_empty() {
            return Ok((candidate, transcript));
        }

        last_violations = violations.clone();
        template = &TRANSLATE_REPAIR;
        phase = "translate_repair";
        prompt = TRANSLATE_REPAIR.fill(&[
            ("node_id", node.id.as_str()),
            ("submission_json", &submission_json),
            ("violations", &violations.join("\n")),
        ]);
    }

    Err(GenerationError::NodeTranslationFailed {
        node_id: node.id.to_string(),
        attempts: config.repair_attempts + 1,
    })
}

/// Phase 2 over a whole graph. Nodes whose translation fails are excluded
/// from the emitted pair together with their descendants, keeping the
/// graph/task files consistent.
pub fn translate_graph(
    graph: &ConceptGraph,
    config: &GenerationConfig,
    provider: &dyn ChatProvider,
) -> Result<(ConceptGraph, TaskSet, Vec<GenerationExchange>, Vec<String>), GenerationError> {
    let mut transcript = Vec::new();
    let mut tasks = TaskSet::new();
    let mut dropped: BTreeSet<NodeId> = BTreeSet::new();

    // BFS so ancestors settle before descendants.
    let mut queue: VecDeque<NodeId> = graph.roots().to_vec().into();
    while let Some(id) = queue.pop_front() {
        queue.extend(graph.children(id.as_str()).iter().cloned());
        if dropped.contains(&id) {
            continue;
        }
        let node = graph.node(id.as_str()).expect("node exists");
        match translate_node(node, config, provider) {
            Ok((task, exchanges)) => {
                transcript.extend(exchanges);
                tasks.insert(task);
            }
            Err(GenerationError::Backend(e)) => return Err(GenerationError::Backend(e)),
            Err(GenerationError::NodeTranslationFailed { .. }) => {
                dropped.insert(id.clone());
                dropped.extend(graph.descendants(id.as_str()).expect("node exists"));
            }
            Err(other) => return Err(other),
        }
    }

    let kept: Vec<ConceptNode> = graph
        .nodes()
        .filter(|n| !dropped.contains(&n.id))
        .cloned()
        .collect();
    if kept.is_empty() {
        return Err(GenerationError::EmptyDataset);
    }
    let pruned = ConceptGraph::new(kept).map_err(|e| GenerationError::Internal {
        message: e.to_string(),
    })?;
    Ok((
        pruned,
        tasks,
        transcript,
        dropped.into_iter().map(|n| n.to_string()).collect(),
    ))
}

/// Runs both phases end to end.
pub fn generate_dataset(
    config: &GenerationConfig,
    provider: &dyn ChatProvider,
) -> Result<GenerationOutcome, GenerationError> {
    let (graph, mut transcript, mut dropped) = blueprint_graph(config, provider)?;
    let (graph, tasks, phase2, dropped2) = translate_graph(&graph, config, provider)?;
    transcript.extend(phase2);
    dropped.extend(dropped2);
    Ok(GenerationOutcome {
        graph,
        tasks,
        transcript,
        dropped,
    })
}
