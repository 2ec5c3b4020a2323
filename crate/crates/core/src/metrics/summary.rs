use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::segment::{segment_fmm, SegmentDict};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub text: String,
    pub labels: Vec<String>,
}

/// Size and shape of a labeled dataset: split sizes, number of classes,
/// mean labels per sample and mean words per sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    /// Distinct classes across all splits.
    pub classes: usize,
    /// Mean number of labels per sample.
    pub avg_categories: f64,
    /// Mean number of segmented words per sample.
    pub avg_words: f64,
}

pub fn dataset_summary(
    train: &[LabeledSample],
    val: &[LabeledSample],
    test: &[LabeledSample],
    dict: &SegmentDict,
) -> DatasetSummary {
    let all = || train.iter().chain(val).chain(test);
    let n = train.len() + val.len() + test.len();
    let classes: BTreeSet<&str> = all().flat_map(|s| s.labels.iter().map(String::as_str)).collect();
    let mean = |total: usize| if n == 0 { 0.0 } else { total as f64 / n as f64 };
    let labels: usize = all().map(|s| s.labels.iter().collect::<BTreeSet<_>>().len()).sum();
    let words: usize = all().map(|s| segment_fmm(&s.text, dict).word_count()).sum();
    DatasetSummary {
        n_train: train.len(),
        n_val: val.len(),
        n_test: test.len(),
        classes: classes.len(),
        avg_categories: mean(labels),
        avg_words: mean(words),
    }
}
