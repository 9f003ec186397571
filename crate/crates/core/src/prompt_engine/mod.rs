//! Prompt templates for the two model classes and placeholder rendering.
//!
//! Template bodies live as asset files next to a `manifest.json` that
//! records each body's SHA-256 and maps model ids to a model class. The
//! bundled copies are compiled in; [`TemplateStore::load_dir`] reads an
//! edited set from disk instead. Substitution only touches the four
//! declared placeholders, so literal braces in the JSON examples inside the
//! templates are left alone.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::case_model::{DisorderType, GradeLevel};
use crate::util::sha256_hex;

pub const PLACEHOLDERS: [&str; 4] = ["disorders", "grade", "population_spec", "context"];

const BUNDLED_MANIFEST: &str = include_str!("../../assets/templates/manifest.json");
const BUNDLED_BODIES: [(&str, &str); 2] = [
    ("premium.txt", include_str!("../../assets/templates/premium.txt")),
    ("focused.txt", include_str!("../../assets/templates/focused.txt")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelClass {
    Premium,
    Focused,
}

impl ModelClass {
    pub fn parse(s: &str) -> Result<ModelClass, PromptError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "premium" => Ok(ModelClass::Premium),
            "focused" => Ok(ModelClass::Focused),
            other => Err(PromptError::UnknownModelClass(other.to_string())),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelClass::Premium => "premium",
            ModelClass::Focused => "focused",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PromptError {
    #[error("unknown model class: {0}")]
    UnknownModelClass(String),
    #[error("unresolved placeholder {{{0}}}")]
    UnresolvedPlaceholder(String),
    #[error("invalid template {template_id}: {message}")]
    InvalidTemplate { template_id: String, message: String },
    #[error("template i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl PromptError {
    pub fn code(&self) -> &'static str {
        match self {
            PromptError::UnknownModelClass(_) => "unknown_model_class",
            PromptError::UnresolvedPlaceholder(_) => "unresolved_placeholder",
            PromptError::InvalidTemplate { .. } | PromptError::Io(_) => "invalid_template",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub template_id: String,
    pub model_class: ModelClass,
    pub body: String,
}

impl PromptTemplate {
    /// Checks that each placeholder occurs exactly once.
    pub fn new(template_id: &str, model_class: ModelClass, body: String) -> Result<Self, PromptError> {
        for name in PLACEHOLDERS {
            let n = body.matches(&format!("{{{name}}}")).count();
            if n != 1 {
                return Err(PromptError::InvalidTemplate {
                    template_id: template_id.to_string(),
                    message: format!("placeholder {{{name}}} occurs {n} times"),
                });
            }
        }
        Ok(PromptTemplate { template_id: template_id.to_string(), model_class, body })
    }

    pub fn checksum(&self) -> String {
        sha256_hex(self.body.as_bytes())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub text: String,
    pub template_id: String,
    pub placeholder_bindings: BTreeMap<String, String>,
}

/// Values for the four placeholders.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBindings {
    pub disorders: String,
    pub grade: String,
    pub population_spec: String,
    pub context: String,
}

impl PromptBindings {
    pub fn new(disorders: &[DisorderType], grade: GradeLevel, population_spec: &str, context: &str) -> Self {
        PromptBindings {
            disorders: disorder_list(disorders),
            grade: grade.display_name(),
            population_spec: population_spec.to_string(),
            context: context.to_string(),
        }
    }

    pub fn to_map(&self) -> BTreeMap<String, String> {
        BTreeMap::from([
            ("disorders".to_string(), self.disorders.clone()),
            ("grade".to_string(), self.grade.clone()),
            ("population_spec".to_string(), self.population_spec.clone()),
            ("context".to_string(), self.context.clone()),
        ])
    }
}

/// Disorder display names joined with ", ".
pub fn disorder_list(disorders: &[DisorderType]) -> String {
    disorders.iter().map(|d| d.display_name()).collect::<Vec<_>>().join(", ")
}

/// Substitutes the declared placeholders. Every one of them needs a binding;
/// extra bindings are ignored.
pub fn render(template: &PromptTemplate, bindings: &BTreeMap<String, String>) -> Result<RenderedPrompt, PromptError> {
    let mut spots: Vec<(usize, &str)> = Vec::with_capacity(PLACEHOLDERS.len());
    for name in PLACEHOLDERS {
        if !bindings.contains_key(name) {
            return Err(PromptError::UnresolvedPlaceholder(name.to_string()));
        }
        let token = format!("{{{name}}}");
        let at = template
            .body
            .find(&token)
            .ok_or_else(|| PromptError::UnresolvedPlaceholder(name.to_string()))?;
        spots.push((at, name));
    }
    spots.sort();

    let mut text = String::with_capacity(
        template.body.len() + bindings.values().map(String::len).sum::<usize>(),
    );
    let mut cursor = 0;
    for (at, name) in spots {
        text.push_str(&template.body[cursor..at]);
        text.push_str(&bindings[name]);
        cursor = at + name.len() + 2;
    }
    text.push_str(&template.body[cursor..]);

    let placeholder_bindings = PLACEHOLDERS
        .iter()
        .map(|n| (n.to_string(), bindings[*n].clone()))
        .collect();
    Ok(RenderedPrompt { text, template_id: template.template_id.clone(), placeholder_bindings })
}

#[derive(Debug, Deserialize)]
struct ManifestEntry {
    template_id: String,
    model_class: ModelClass,
    file: String,
    sha256: String,
}

#[derive(Debug, Deserialize)]
struct Manifest {
    templates: Vec<ManifestEntry>,
    #[serde(default)]
    models: BTreeMap<String, ModelClass>,
}

/// Loaded templates plus the model-id to model-class map.
#[derive(Debug, Clone)]
pub struct TemplateStore {
    templates: Vec<PromptTemplate>,
    models: BTreeMap<String, ModelClass>,
    warnings: Vec<String>,
}

impl TemplateStore {
    /// Templates compiled into the crate.
    pub fn bundled() -> Self {
        Self::from_parts(BUNDLED_MANIFEST, |file| {
            BUNDLED_BODIES
                .iter()
                .find(|(name, _)| *name == file)
                .map(|(_, body)| body.to_string())
                .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::NotFound, file.to_string()).into())
        })
        .expect("bundled templates are valid")
    }

    /// Reads `manifest.json` and the template files it lists from `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self, PromptError> {
        let manifest = fs::read_to_string(dir.join("manifest.json"))?;
        Self::from_parts(&manifest, |file| Ok(fs::read_to_string(dir.join(file))?))
    }

    fn from_parts(
        manifest: &str,
        read: impl Fn(&str) -> Result<String, PromptError>,
    ) -> Result<Self, PromptError> {
        let manifest: Manifest = serde_json::from_str(manifest).map_err(|e| PromptError::InvalidTemplate {
            template_id: "manifest.json".into(),
            message: e.to_string(),
        })?;
        let mut templates = Vec::new();
        let mut warnings = Vec::new();
        for entry in manifest.templates {
            let template = PromptTemplate::new(&entry.template_id, entry.model_class, read(&entry.file)?)?;
            let actual = template.checksum();
            if !actual.eq_ignore_ascii_case(&entry.sha256) {
                let msg = format!(
                    "template {} checksum {} differs from manifest {}",
                    entry.template_id, actual, entry.sha256
                );
                tracing::warn!("{msg}");
                warnings.push(msg);
            }
            templates.push(template);
        }
        Ok(TemplateStore { templates, models: manifest.models, warnings })
    }

    /// Checksum mismatches found at load time.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn templates(&self) -> &[PromptTemplate] {
        &self.templates
    }

    pub fn select_template(&self, class: ModelClass) -> Result<&PromptTemplate, PromptError> {
        self.templates
            .iter()
            .find(|t| t.model_class == class)
            .ok_or_else(|| PromptError::UnknownModelClass(class.as_str().to_string()))
    }

    pub fn get(&self, template_id: &str) -> Option<&PromptTemplate> {
        self.templates.iter().find(|t| t.template_id == template_id)
    }

    /// Model class for a model id; a tag suffix such as ":latest" is ignored
    /// when the full id is not listed.
    pub fn class_for_model(&self, model_id: &str) -> Result<ModelClass, PromptError> {
        if let Some(c) = self.models.get(model_id) {
            return Ok(*c);
        }
        let base = model_id.split(':').next().unwrap_or(model_id);
        self.models
            .get(base)
            .copied()
            .ok_or_else(|| PromptError::UnknownModelClass(format!("no model class for {model_id}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bindings() -> BTreeMap<String, String> {
        PromptBindings::new(
            &[DisorderType::Articulation, DisorderType::ExpressiveLanguage],
            GradeLevel::grade(2).unwrap(),
            "Name: Test",
            "[iep_exemplars | x | 0]\nsome {context} text",
        )
        .to_map()
    }

    #[test]
    fn bundled_checksums_match() {
        let store = TemplateStore::bundled();
        assert!(store.warnings().is_empty(), "{:?}", store.warnings());
    }

    #[test]
    fn select_by_class() {
        let store = TemplateStore::bundled();
        let p = store.select_template(ModelClass::Premium).unwrap();
        let f = store.select_template(ModelClass::Focused).unwrap();
        assert!(p.body.contains("CLINICAL EXCELLENCE STANDARDS"));
        assert!(f.body.contains("CRITICAL REQUIREMENTS"));
        assert!(f.body.chars().count() < p.body.chars().count());
        assert!(matches!(ModelClass::parse("budget"), Err(PromptError::UnknownModelClass(_))));
    }

    #[test]
    fn render_substitutes_everything() {
        let store = TemplateStore::bundled();
        for class in [ModelClass::Premium, ModelClass::Focused] {
            let t = store.select_template(class).unwrap();
            let b = bindings();
            let r = render(t, &b).unwrap();
            assert!(r.text.contains("2nd Grade"));
            assert!(r.text.contains("Articulation Disorders"));
            assert!(r.text.contains("Expressive Language Disorders"));
            assert!(r.text.contains(&b["context"]));
            let expected = t.body.len() + b.values().map(String::len).sum::<usize>()
                - PLACEHOLDERS.iter().map(|p| p.len() + 2).sum::<usize>();
            assert_eq!(r.text.len(), expected);
            assert_eq!(render(t, &b).unwrap(), r);
        }
    }

    #[test]
    fn missing_binding() {
        let store = TemplateStore::bundled();
        let mut b = bindings();
        b.remove("context");
        let err = render(store.select_template(ModelClass::Premium).unwrap(), &b).unwrap_err();
        assert!(matches!(err, PromptError::UnresolvedPlaceholder(ref n) if n == "context"));
    }

    #[test]
    fn model_lookup() {
        let store = TemplateStore::bundled();
        assert_eq!(store.class_for_model("gpt-4o").unwrap(), ModelClass::Premium);
        assert_eq!(store.class_for_model("llama3.2:latest").unwrap(), ModelClass::Focused);
        assert!(store.class_for_model("mystery").is_err());
    }

    #[test]
    fn edited_template_warns() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("manifest.json"), BUNDLED_MANIFEST).unwrap();
        for (name, body) in BUNDLED_BODIES {
            fs::write(dir.path().join(name), body).unwrap();
        }
        assert!(TemplateStore::load_dir(dir.path()).unwrap().warnings().is_empty());
        fs::write(dir.path().join("focused.txt"), format!("{}\nExtra line.", BUNDLED_BODIES[1].1)).unwrap();
        let store = TemplateStore::load_dir(dir.path()).unwrap();
        assert_eq!(store.warnings().len(), 1);
    }

    #[test]
    fn duplicate_placeholder_rejected() {
        let body = "{disorders} {grade} {population_spec} {context} {grade}".to_string();
        assert!(PromptTemplate::new("x", ModelClass::Focused, body).is_err());
    }
}
