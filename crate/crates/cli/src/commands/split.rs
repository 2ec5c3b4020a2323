use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use lexmask_core::metrics::{dataset_summary, kfold_split, LabeledSample};
use lexmask_core::segment::{build_dict, read_word_lists};
use lexmask_core::lexicon::Lexicon;
use lexmask_core::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::eval::labels_of;
use super::{display, displays, Ctx};
use crate::args::{SplitArgs, SummaryArgs};
use crate::error::require_files;
use crate::io::{self, parse_json, LineReader};
use crate::manifest::write_manifest;

#[derive(Serialize)]
struct Folds {
    n: usize,
    k: usize,
    seed: u64,
    folds: Vec<Vec<usize>>,
}

#[derive(Serialize)]
struct SplitConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<String>,
    n: usize,
    folds: usize,
    seed: u64,
    output: String,
}

pub fn run(ctx: &Ctx, a: SplitArgs) -> Result<()> {
    let f = &ctx.file;
    let k = a.folds.or(f.folds).unwrap_or(5);
    let seed = a.seed.or(f.seed).unwrap_or(0);
    let input = a.input.or_else(|| if a.n.is_none() { f.input.clone() } else { None });
    let n = match (a.n, &input) {
        (Some(n), _) => n,
        (None, Some(p)) => {
            require_files([p.as_path()])?;
            let mut r = LineReader::open(p)?;
            let mut n = 0;
            while r.next_line()?.is_some() {
                n += 1;
            }
            n
        }
        (None, None) => return Err(Error::Validation("--n or --input is required".into())),
    };
    let folds = Folds {
        n,
        k,
        seed,
        folds: kfold_split(n, k, seed)?,
    };
    let output = a.output.or_else(|| f.output.clone());
    io::emit_json(output.as_deref(), &folds)?;
    if let Some(output) = output {
        let config = SplitConfig {
            input: input.as_deref().map(display),
            n,
            folds: k,
            seed,
            output: display(&output),
        };
        let inputs: Vec<&Path> = input.as_deref().into_iter().collect();
        let counts = BTreeMap::from([("samples", n as u64), ("folds", k as u64)]);
        write_manifest("split", &config, &inputs, &output, counts, Some(seed))?;
    }
    Ok(())
}

#[derive(Deserialize)]
struct SampleRecord {
    text: String,
    labels: Value,
}

fn read_samples(path: Option<&Path>) -> Result<Vec<LabeledSample>> {
    let Some(path) = path else {
        return Ok(Vec::new());
    };
    let mut r = LineReader::open(path)?;
    let mut out = Vec::new();
    while let Some(line) = r.next_line()? {
        let rec: SampleRecord = parse_json(path, &line)?;
        out.push(LabeledSample {
            labels: labels_of(&rec.labels, path, &line, "labels")?,
            text: rec.text,
        });
    }
    Ok(out)
}

#[derive(Serialize)]
struct SummaryConfig {
    train: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    val: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    test: Option<String>,
    dict: Vec<String>,
    output: String,
}

pub fn run_summary(ctx: &Ctx, a: SummaryArgs) -> Result<()> {
    let f = &ctx.file;
    let dict_paths: Vec<PathBuf> = if a.dict.is_empty() { f.dict.clone() } else { a.dict };
    let splits = [Some(a.train.as_path()), a.val.as_deref(), a.test.as_deref()];
    require_files(splits.iter().flatten().copied().chain(dict_paths.iter().map(PathBuf::as_path)))?;
    let dict = build_dict(&read_word_lists(&dict_paths)?, &Lexicon::default())?;
    let [train, val, test] = splits.map(read_samples);
    let summary = dataset_summary(&train?, &val?, &test?, &dict);
    let output = a.output.or_else(|| f.output.clone());
    io::emit_json(output.as_deref(), &summary)?;
    if let Some(output) = output {
        let config = SummaryConfig {
            train: display(&a.train),
            val: a.val.as_deref().map(display),
            test: a.test.as_deref().map(display),
            dict: displays(&dict_paths),
            output: display(&output),
        };
        let mut inputs: Vec<&Path> = splits.iter().flatten().copied().collect();
        inputs.extend(dict_paths.iter().map(PathBuf::as_path));
        let counts = BTreeMap::from([
            ("train", summary.n_train as u64),
            ("val", summary.n_val as u64),
            ("test", summary.n_test as u64),
        ]);
        write_manifest("summary", &config, &inputs, &output, counts, None)?;
    }
    Ok(())
}
