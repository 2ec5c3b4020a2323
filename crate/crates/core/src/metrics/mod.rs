//! Classification metrics: per-class confusion counts and precision / recall
//! / F1 under binary, macro and micro averaging, plus k-fold splitting and
//! dataset summaries.
//!
//! A ratio with a zero denominator is defined as 0.

mod kfold;
mod summary;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use kfold::kfold_split;
pub use summary::{dataset_summary, DatasetSummary, LabeledSample};

/// Ordered class identifiers. For binary averaging the last class is the
/// positive one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSet {
    classes: Vec<String>,
    index: HashMap<String, usize>,
    pub multi_label: bool,
}

impl LabelSet {
    pub fn new<I, S>(classes: I, multi_label: bool) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let classes: Vec<String> = classes.into_iter().map(Into::into).collect();
        if classes.is_empty() {
            return Err(Error::Validation("label set is empty".into()));
        }
        let mut index = HashMap::new();
        for (i, c) in classes.iter().enumerate() {
            if index.insert(c.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate class {c:?}")));
            }
        }
        Ok(Self {
            classes,
            index,
            multi_label,
        })
    }

    /// Sorted union of every label seen in `golds` and `preds`.
    pub fn infer<S: AsRef<str>>(golds: &[Vec<S>], preds: &[Vec<S>], multi_label: bool) -> Result<Self> {
        let mut seen: Vec<&str> = golds
            .iter()
            .chain(preds)
            .flatten()
            .map(AsRef::as_ref)
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        seen.dedup();
        Self::new(seen, multi_label)
    }

    /// Moves `class` to the end so binary averaging treats it as positive.
    pub fn with_positive(mut self, class: &str) -> Result<Self> {
        let i = self.position(class)?;
        let c = self.classes.remove(i);
        self.classes.push(c);
        self.index = self.classes.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
        Ok(self)
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn position(&self, class: &str) -> Result<usize> {
        self.index
            .get(class)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(class.to_owned()))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

/// Per-class counts, aligned with `labels.classes()`. Multi-label samples
/// are counted per `(sample, class)` pair.
pub fn confusion_counts<S: AsRef<str>>(
    golds: &[Vec<S>],
    preds: &[Vec<S>],
    labels: &LabelSet,
) -> Result<Vec<ClassCounts>> {
    if golds.len() != preds.len() {
        return Err(Error::Validation(format!(
            "{} gold samples but {} predictions",
            golds.len(),
            preds.len()
        )));
    }
    let mut counts = vec![ClassCounts::default(); labels.len()];
    for (i, (gold, pred)) in golds.iter().zip(preds).enumerate() {
        let g = label_indices(gold, labels)?;
        let p = label_indices(pred, labels)?;
        if !labels.multi_label && (g.len() != 1 || p.len() != 1) {
            return Err(Error::Validation(format!(
                "sample {i}: single-label data needs exactly one gold and one predicted label"
            )));
        }
        for &c in &p {
            if g.contains(&c) {
                counts[c].tp += 1;
            } else {
                counts[c].fp += 1;
            }
        }
        for &c in g.difference(&p) {
            counts[c].fn_ += 1;
        }
    }
    Ok(counts)
}

fn label_indices<S: AsRef<str>>(sample: &[S], labels: &LabelSet) -> Result<HashSet<usize>> {
    sample.iter().map(|l| labels.position(l.as_ref())).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    Binary,
    Macro,
    Micro,
}

impl FromStr for Averaging {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(Self::Binary),
            "macro" => Ok(Self::Macro),
            "micro" => Ok(Self::Micro),
            _ => Err(Error::Validation(format!("unknown averaging {s:?}"))),
        }
    }
}

impl fmt::Display for Averaging {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Binary => "binary",
            Self::Macro => "macro",
            Self::Micro => "micro",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Scores {
    pub fn from_counts(c: &ClassCounts) -> Self {
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self { precision, recall, f1 }
    }
}

/// Averages per-class counts into a single score triple.
///
/// Macro F1 is the mean of per-class F1 values, not the harmonic mean of
/// macro precision and macro recall.
pub fn prf(counts: &[ClassCounts], averaging: Averaging) -> Result<Scores> {
    match averaging {
        Averaging::Binary => {
            if counts.len() != 2 {
                return Err(Error::Validation(format!(
                    "binary averaging needs exactly 2 classes, got {}",
                    counts.len()
                )));
            }
            Ok(Scores::from_counts(&counts[1]))
        }
        Averaging::Micro => {
            let total = counts.iter().fold(ClassCounts::default(), |acc, c| ClassCounts {
                tp: acc.tp + c.tp,
                fp: acc.fp + c.fp,
                fn_: acc.fn_ + c.fn_,
            });
            Ok(Scores::from_counts(&total))
        }
        Averaging::Macro => {
            if counts.is_empty() {
                return Ok(Scores::default());
            }
            let n = counts.len() as f64;
            let per: Vec<Scores> = counts.iter().map(Scores::from_counts).collect();
            Ok(Scores {
                precision: per.iter().map(|s| s.precision).sum::<f64>() / n,
                recall: per.iter().map(|s| s.recall).sum::<f64>() / n,
                f1: per.iter().map(|s| s.f1).sum::<f64>() / n,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub averaging: Averaging,
    pub samples: usize,
    pub per_class: BTreeMap<String, ClassCounts>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn evaluate<S: AsRef<str>>(
    golds: &[Vec<S>],
    preds: &[Vec<S>],
    labels: &LabelSet,
    averaging: Averaging,
) -> Result<EvalReport> {
    let counts = confusion_counts(golds, preds, labels)?;
    let scores = prf(&counts, averaging)?;
    Ok(EvalReport {
        averaging,
        samples: golds.len(),
        per_class: labels.classes().iter().cloned().zip(counts).collect(),
        precision: scores.precision,
        recall: scores.recall,
        f1: scores.f1,
    })
}
