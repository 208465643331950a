//! Prompt templates.
//!
//! Templates are plain text assets with double-brace placeholders:
//! `{{context}}` (rendered house state), `{{candidates}}` (numbered action
//! list), `{{preferences}}` (formatted preference lines), `{{problems}}`
//! (numbered problem list) and `{{answers}}` (prior raw answers). The
//! defaults are compiled in from `assets/prompts/`; a directory with the
//! same file names can replace any of them.

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplates {
    pub system: String,
    pub system_with_preferences: String,
    pub direct_user: String,
    pub problems_user: String,
    pub answer_user: String,
    pub final_user: String,
}

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("cannot read template `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl Default for PromptTemplates {
    fn default() -> Self {
        PromptTemplates {
            system: include_str!("../../assets/prompts/system.txt").to_string(),
            system_with_preferences: include_str!(
                "../../assets/prompts/system_with_preferences.txt"
            )
            .to_string(),
            direct_user: include_str!("../../assets/prompts/direct_user.txt").to_string(),
            problems_user: include_str!("../../assets/prompts/problems_user.txt").to_string(),
            answer_user: include_str!("../../assets/prompts/answer_user.txt").to_string(),
            final_user: include_str!("../../assets/prompts/final_user.txt").to_string(),
        }
    }
}

impl PromptTemplates {
    /// Load all six templates from a directory using the asset file names.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self, TemplateError> {
        let dir = dir.as_ref();
        let read = |name: &str| -> Result<String, TemplateError> {
            let path = dir.join(name);
            std::fs::read_to_string(&path).map_err(|source| TemplateError::Io {
                path: path.display().to_string(),
                source,
            })
        };
        Ok(PromptTemplates {
            system: read("system.txt")?,
            system_with_preferences: read("system_with_preferences.txt")?,
            direct_user: read("direct_user.txt")?,
            problems_user: read("problems_user.txt")?,
            answer_user: read("answer_user.txt")?,
            final_user: read("final_user.txt")?,
        })
    }
}

/// Substitute `{{key}}` placeholders. Unknown placeholders are left alone.
pub fn fill(template: &str, substitutions: &[(&str, &str)]) -> String {
    let mut text = template.to_string();
    for (key, value) in substitutions {
        text = text.replace(&format!("{{{{{key}}}}}"), value);
    }
    text
}
