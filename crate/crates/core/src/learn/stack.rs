use std::collections::BTreeSet;

use crate::features::FeatureVector;

use super::LearnError;

/// Class probabilities from the tag-window classifier for one page,
/// together with the folds that classifier was trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct TagProbabilities {
    pub probs: Vec<f64>,
    pub class_names: Vec<String>,
    pub training_folds: BTreeSet<usize>,
}

/// Appends tag-classifier probabilities to a lexical feature vector as
/// `html2seq_prob_<class>` columns.
///
/// When `eval_fold` is given, probabilities from a classifier that saw that
/// fold during training are rejected.
pub fn stack_features(
    lexical: &FeatureVector,
    tag: &TagProbabilities,
    eval_fold: Option<usize>,
) -> Result<FeatureVector, LearnError> {
    if let Some(fold) = eval_fold {
        if tag.training_folds.contains(&fold) {
            return Err(LearnError::Leakage { fold });
        }
    }
    if tag.probs.len() != tag.class_names.len() {
        return Err(LearnError::InvalidParameter(format!(
            "{} probabilities for {} classes",
            tag.probs.len(),
            tag.class_names.len()
        )));
    }
    let mut schema = lexical.schema.clone();
    schema.extend(tag.class_names.iter().map(|c| format!("html2seq_prob_{c}")));
    let mut values = lexical.values.clone();
    values.extend_from_slice(&tag.probs);
    Ok(FeatureVector::new(schema, values))
}
