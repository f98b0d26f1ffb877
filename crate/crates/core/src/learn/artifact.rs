//! Versioned, self-describing model artifacts.
//!
//! An artifact is a JSON document holding the learner kind and
//! hyperparameters, the fitted parameters (float arrays base64-encoded so
//! they survive bit-exactly), the feature-selection mask, and a fingerprint
//! of the feature schema it was trained on.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::features::FeatureVector;

use super::{apply_mask, LearnError, LearnerSpec, Model, Prediction, Selection};

pub const ARTIFACT_FORMAT: &str = "webcred-model/1";

/// SHA-256 over the newline-joined feature names.
pub fn schema_fingerprint(schema: &[String]) -> String {
    hex::encode(Sha256::digest(schema.join("\n").as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum TaskKind {
    Classification { scheme: String, class_order: Vec<String> },
    Regression { scheme: String },
}

/// Tag-window classifier carried by stacked models so scoring can rebuild
/// the `html2seq_prob_*` columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagStack {
    pub pad: usize,
    /// Tag names in id order starting at id 2.
    pub vocab: Vec<String>,
    pub model: Model,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub format: String,
    pub learner: LearnerSpec,
    pub task: TaskKind,
    pub selection: Selection,
    pub mask: Vec<bool>,
    /// Univariate selection score per schema column, when recorded.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub feature_scores: Vec<f64>,
    pub schema: Vec<String>,
    pub schema_fingerprint: String,
    pub model: Model,
    /// Public-suffix vocabulary used for the domain feature.
    #[serde(default)]
    pub domain_vocab: BTreeMap<String, u32>,
    #[serde(default)]
    pub tag_stack: Option<TagStack>,
    /// Free-form provenance: protocol, seed, data files.
    #[serde(default)]
    pub notes: BTreeMap<String, String>,
}

impl ModelArtifact {
    pub fn new(learner: LearnerSpec, task: TaskKind, selection: Selection, mask: Vec<bool>, schema: Vec<String>, model: Model) -> Self {
        ModelArtifact {
            format: ARTIFACT_FORMAT.to_string(),
            learner,
            task,
            selection,
            mask,
            feature_scores: Vec::new(),
            schema_fingerprint: schema_fingerprint(&schema),
            schema,
            model,
            domain_vocab: BTreeMap::new(),
            tag_stack: None,
            notes: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("artifact serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, LearnError> {
        let a: ModelArtifact = serde_json::from_str(text).map_err(|e| LearnError::Format(e.to_string()))?;
        if a.format != ARTIFACT_FORMAT {
            return Err(LearnError::Format(format!("unsupported format {:?}", a.format)));
        }
        if a.schema_fingerprint != schema_fingerprint(&a.schema) {
            return Err(LearnError::Format("stored fingerprint does not match stored schema".into()));
        }
        if a.mask.len() != a.schema.len() {
            return Err(LearnError::Format("mask length differs from schema length".into()));
        }
        if !a.feature_scores.is_empty() && a.feature_scores.len() != a.schema.len() {
            return Err(LearnError::Format("feature score count differs from schema length".into()));
        }
        Ok(a)
    }

    pub fn class_order(&self) -> Option<&[String]> {
        match &self.task {
            TaskKind::Classification { class_order, .. } => Some(class_order),
            TaskKind::Regression { .. } => None,
        }
    }

    /// Selected features ranked by selection score (column order when no
    /// scores were recorded), as `(column, name)` pairs.
    pub fn ranked_features(&self) -> Vec<(usize, &str)> {
        let mut cols: Vec<usize> = (0..self.schema.len()).filter(|&i| self.mask[i]).collect();
        if self.feature_scores.len() == self.schema.len() {
            cols.sort_by(|&a, &b| self.feature_scores[b].total_cmp(&self.feature_scores[a]).then(a.cmp(&b)));
        }
        cols.into_iter().map(|i| (i, self.schema[i].as_str())).collect()
    }

    /// Selected feature names in column order.
    pub fn selected_features(&self) -> Vec<&str> {
        self.schema
            .iter()
            .zip(&self.mask)
            .filter(|(_, &m)| m)
            .map(|(s, _)| s.as_str())
            .collect()
    }
}

/// Predicts one feature vector; the vector's schema must match the one the
/// model was trained on.
pub fn predict(artifact: &ModelArtifact, x: &FeatureVector) -> Result<Prediction, LearnError> {
    let found = schema_fingerprint(&x.schema);
    if found != artifact.schema_fingerprint {
        return Err(LearnError::Schema {
            expected: artifact.schema_fingerprint.clone(),
            found,
        });
    }
    Ok(artifact.model.predict_row(&apply_mask(&x.values, &artifact.mask)))
}
