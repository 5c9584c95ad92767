//! App configuration: one JSON file declaring backends, the cascade, and
//! optionally a generation section. Cascade and generator entries name
//! backends declared in the same file; flags override individual fields.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use prereq_core::{
    CapabilityProfile, CascadeConfig, GenerationConfig, ModelSpec, TriggerComparator, UpgradePolicy,
};

use crate::CliError;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AppConfigFile {
    schema_version: u32,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    backends: Vec<ModelSpec>,
    cascade: CascadeSection,
    #[serde(default)]
    generation: Option<GenerationSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CascadeSection {
    /// Backend names, most compressed first.
    models: Vec<String>,
    threshold: u32,
    #[serde(default)]
    comparator: TriggerComparator,
    #[serde(default)]
    policy: UpgradePolicy,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenerationSection {
    domain_topic: String,
    target_node_count: u32,
    max_depth: u32,
    max_children_per_node: u32,
    #[serde(default = "default_repair_attempts")]
    repair_attempts: u32,
    /// Backend name of the generator model.
    generator_model: String,
}

fn default_repair_attempts() -> u32 {
    3
}

/// Resolved configuration.
#[derive(Debug, Clone)]
pub struct AppConfig {
    pub cascade: CascadeConfig,
    pub generation: Option<GenerationConfig>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl AppConfig {
    pub fn load(path: &Path) -> Result<AppConfig, CliError> {
        let text = crate::read_file(path)?;
        let file: AppConfigFile = serde_json::from_str(&text)
            .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        if file.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(CliError::data(format!(
                "{}: unsupported schema_version {}, expected {CONFIG_SCHEMA_VERSION}",
                path.display(),
                file.schema_version
            )));
        }

        let by_name: BTreeMap<&str, &ModelSpec> =
            file.backends.iter().map(|m| (m.name.as_str(), m)).collect();
        let resolve = |name: &str| -> Result<ModelSpec, CliError> {
            by_name.get(name).map(|m| (*m).clone()).ok_or_else(|| {
                CliError::data(format!("cascade references undeclared backend \"{name}\""))
            })
        };

        let models = file
            .cascade
            .models
            .iter()
            .map(|name| resolve(name))
            .collect::<Result<Vec<_>, _>>()?;
        let cascade = CascadeConfig {
            models,
            threshold: file.cascade.threshold,
            comparator: file.cascade.comparator,
            policy: file.cascade.policy,
        };

        let generation = file
            .generation
            .map(|section| -> Result<GenerationConfig, CliError> {
                Ok(GenerationConfig {
                    domain_topic: section.domain_topic,
                    target_node_count: section.target_node_count,
                    max_depth: section.max_depth,
                    max_children_per_node: section.max_children_per_node,
                    repair_attempts: section.repair_attempts,
                    generator_model: resolve(&section.generator_model)?,
                })
            })
            .transpose()?;

        Ok(AppConfig {
            cascade,
            generation,
            output_dir: file.output_dir.unwrap_or_else(|| PathBuf::from("out")),
            seed: file.seed.unwrap_or(0),
        })
    }
}

/// Synthetic profile file for `simulate`.
#[derive(Debug, Deserialize)]
pub struct ProfilesFile {
    pub profiles: Vec<CapabilityProfile>,
}

impl ProfilesFile {
    pub fn load(path: &Path) -> Result<Vec<CapabilityProfile>, CliError> {
        let text = crate::read_file(path)?;
        let file: ProfilesFile = serde_json::from_str(&text)
            .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        if file.profiles.is_empty() {
            return Err(CliError::data(format!(
                "{}: profiles list is empty",
                path.display()
            )));
        }
        Ok(file.profiles)
    }
}

/// Scripted reply file for offline generation: an ordered list of canned
/// assistant replies (plain content or a tool call).
#[derive(Debug, Deserialize)]
struct ScriptedReplyDoc {
    #[serde(default)]
    content: Option<String>,
    #[serde(default)]
    tool_calls: Vec<ScriptedToolCall>,
}

#[derive(Debug, Deserialize)]
struct ScriptedToolCall {
    name: String,
    arguments: serde_json::Value,
}

pub fn load_scripted_replies(
    path: &Path,
) -> Result<Vec<prereq_core::backend::AssistantReply>, CliError> {
    let text = crate::read_file(path)?;
    let docs: Vec<ScriptedReplyDoc> = serde_json::from_str(&text)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    Ok(docs
        .into_iter()
        .map(|doc| {
            let tool_calls: Vec<prereq_core::backend::ToolCall> = doc
                .tool_calls
                .into_iter()
                .map(|c| prereq_core::backend::ToolCall {
                    name: c.name,
                    arguments: c.arguments,
                })
                .collect();
            let raw = match (&doc.content, tool_calls.is_empty()) {
                (Some(content), true) => content.clone(),
                _ => serde_json::json!({
                    "tool_calls": tool_calls
                        .iter()
                        .map(|c| serde_json::json!({"name": c.name, "arguments": c.arguments}))
                        .collect::<Vec<_>>()
                })
                .to_string(),
            };
            prereq_core::backend::AssistantReply {
                content: doc.content,
                tool_calls,
                raw,
            }
        })
        .collect())
}
