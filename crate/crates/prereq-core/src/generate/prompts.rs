//! Versioned prompt templates, shipped with the crate and referenced by
//! content hash in generation transcripts.

use crate::hash::short_id;

/// A template with `{placeholder}` slots and a stable content hash.
pub struct PromptTemplate {
    pub name: &'static str,
    pub text: &'static str,
    pub hash: String,
}

impl PromptTemplate {
    fn new(name: &'static str, text: &'static str) -> Self {
        PromptTemplate {
            name,
            text,
            hash: short_id(text.as_bytes()),
        }
    }

    /// Substitutes `{key}` placeholders. Unknown placeholders are left
    /// intact so template drift is visible in transcripts.
    pub fn fill(&self, pairs: &[(&str, &str)]) -> String {
        let mut out = self.text.to_string();
        for (key, value) in pairs {
            out = out.replace(&format!("{{{key}}}"), value);
        }
        out
    }
}

// std::sync::LazyLock keeps template hashing one-time.
use std::sync::LazyLock;

pub static BLUEPRINT: LazyLock<PromptTemplate> =
    LazyLock::new(|| PromptTemplate::new("blueprint", include_str!("../../prompts/blueprint.txt")));

pub static BLUEPRINT_REPAIR: LazyLock<PromptTemplate> = LazyLock::new(|| {
    PromptTemplate::new(
        "blueprint_repair",
        include_str!("../../prompts/blueprint_repair.txt"),
    )
});

pub static TRANSLATE: LazyLock<PromptTemplate> =
    LazyLock::new(|| PromptTemplate::new("translate", include_str!("../../prompts/translate.txt")));

pub static TRANSLATE_REPAIR: LazyLock<PromptTemplate> = LazyLock::new(|| {
    PromptTemplate::new(
        "translate_repair",
        include_str!("../../prompts/translate_repair.txt"),
    )
});
