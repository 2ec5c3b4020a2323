use std::collections::BTreeMap;
use std::path::Path;

use lexmask_core::metrics::{evaluate, Averaging, EvalReport, LabelSet, Scores};
use lexmask_core::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{display, Ctx};
use crate::args::EvalArgs;
use crate::config::required;
use crate::error::require_files;
use crate::io::{self, parse_json, Line, LineReader};
use crate::manifest::write_manifest;

type Labels = Vec<String>;

#[derive(Deserialize)]
struct Prediction {
    #[serde(default)]
    #[allow(dead_code)]
    id: Value,
    gold: Value,
    pred: Value,
    #[serde(default)]
    fold: Option<Value>,
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

/// A label or list of labels as strings.
pub fn labels_of(v: &Value, path: &Path, line: &Line, key: &str) -> Result<Vec<String>> {
    let bad = || Error::malformed(path, line.no, format!("{key:?} must be a label or a list of labels"));
    match v {
        Value::Array(xs) => xs.iter().map(|x| scalar(x).ok_or_else(bad)).collect(),
        other => scalar(other).map(|s| vec![s]).ok_or_else(bad),
    }
}

#[derive(Serialize)]
struct EvalOutput {
    pooled: EvalReport,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    folds: BTreeMap<String, EvalReport>,
    /// Unweighted mean over folds.
    #[serde(skip_serializing_if = "Option::is_none")]
    fold_mean: Option<Scores>,
}

#[derive(Serialize)]
struct EvalConfig {
    input: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<String>,
    averaging: Averaging,
    classes: Vec<String>,
    multi_label: bool,
}

pub fn run(ctx: &Ctx, a: EvalArgs) -> Result<()> {
    let f = &ctx.file;
    let input = required(a.io.input.or_else(|| f.input.clone()), "input")?;
    let output = a.io.output.or_else(|| f.output.clone());
    require_files([input.as_path()])?;
    let averaging: Averaging = a
        .averaging
        .or_else(|| f.averaging.clone())
        .map_or(Ok(Averaging::Macro), |s| s.parse())?;

    let mut golds = Vec::new();
    let mut preds = Vec::new();
    let mut folds: Vec<Option<String>> = Vec::new();
    let mut reader = LineReader::open(&input)?;
    while let Some(line) = reader.next_line()? {
        let p: Prediction = parse_json(&input, &line)?;
        golds.push(labels_of(&p.gold, &input, &line, "gold")?);
        preds.push(labels_of(&p.pred, &input, &line, "pred")?);
        folds.push(match &p.fold {
            None | Some(Value::Null) => None,
            Some(v) => Some(scalar(v).ok_or_else(|| Error::malformed(&input, line.no, "bad fold"))?),
        });
    }

    let multi = a.multi_label || golds.iter().chain(&preds).any(|l| l.len() != 1);
    let mut labels = if a.labels.is_empty() {
        LabelSet::infer(&golds, &preds, multi)?
    } else {
        LabelSet::new(a.labels.iter().cloned(), multi)?
    };
    if let Some(pos) = a.positive.or_else(|| f.positive.clone()) {
        labels = labels.with_positive(&pos)?;
    }

    let pooled = evaluate(&golds, &preds, &labels, averaging)?;
    let mut per_fold: BTreeMap<String, (Vec<Labels>, Vec<Labels>)> = BTreeMap::new();
    for ((g, p), k) in golds.iter().zip(&preds).zip(&folds) {
        if let Some(k) = k {
            let e = per_fold.entry(k.clone()).or_default();
            e.0.push(g.clone());
            e.1.push(p.clone());
        }
    }
    let fold_reports: BTreeMap<String, EvalReport> = per_fold
        .into_iter()
        .map(|(k, (g, p))| evaluate(&g, &p, &labels, averaging).map(|r| (k, r)))
        .collect::<Result<_>>()?;
    let fold_mean = (!fold_reports.is_empty()).then(|| {
        let n = fold_reports.len() as f64;
        let sum = |get: fn(&EvalReport) -> f64| fold_reports.values().map(get).sum::<f64>() / n;
        Scores {
            precision: sum(|r| r.precision),
            recall: sum(|r| r.recall),
            f1: sum(|r| r.f1),
        }
    });
    let report = EvalOutput {
        pooled,
        folds: fold_reports,
        fold_mean,
    };
    io::emit_json(output.as_deref(), &report)?;

    if let Some(output) = output {
        let config = EvalConfig {
            input: display(&input),
            output: Some(display(&output)),
            averaging,
            classes: labels.classes().to_vec(),
            multi_label: multi,
        };
        let counts = BTreeMap::from([
            ("samples", golds.len() as u64),
            ("classes", labels.len() as u64),
            ("folds", report.folds.len() as u64),
        ]);
        write_manifest("eval", &config, &[input.as_path()], &output, counts, None)?;
    }
    Ok(())
}
