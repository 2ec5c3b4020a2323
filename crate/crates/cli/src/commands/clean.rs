use std::collections::BTreeMap;
use std::io::Write;

use lexmask_core::clean::{Cleaner, CleaningConfig};
use lexmask_core::Result;
use serde::Serialize;

use super::corpus::{CorpusRecord, CorpusSpec};
use super::{display, for_each_batch, Ctx};
use crate::args::CleanArgs;
use crate::config::{required, FileConfig};
use crate::error::require_files;
use crate::io::{self, LineReader};
use crate::manifest::write_manifest;

#[derive(Serialize)]
struct CleanConfig<'a> {
    corpus: &'a CorpusSpec,
    output: String,
    cleaning: &'a CleaningConfig,
}

/// Cleaning rules from the config file with `--min-chars` applied.
pub fn cleaning_config(min_chars: Option<usize>, file: &FileConfig) -> CleaningConfig {
    let mut cfg = file.cleaning.clone().unwrap_or_default();
    if let Some(m) = min_chars.or(file.min_chars) {
        cfg.min_chars = m;
    }
    cfg
}

pub fn run(ctx: &Ctx, a: CleanArgs) -> Result<()> {
    let f = &ctx.file;
    let input = required(a.io.input.or_else(|| f.input.clone()), "input")?;
    let output = required(a.io.output.or_else(|| f.output.clone()), "output")?;
    require_files([input.as_path()])?;
    let spec = CorpusSpec::resolve(&input, a.corpus, f)?;
    let cleaning = cleaning_config(a.min_chars, f);
    let cleaner = Cleaner::new(cleaning.clone())?;

    let mut out = io::create(&output)?;
    let mut reader = LineReader::open(&input)?;
    let (mut posts, mut kept) = (0u64, 0u64);
    for_each_batch(
        ctx,
        &mut reader,
        |line| {
            let post = spec.parse_post(line)?;
            Ok(cleaner.process(&post).map(|doc| {
                let rec = CorpusRecord {
                    source: Some(doc.source_id),
                    user: Some(doc.user_id),
                    text: doc.text,
                    original_length: Some(doc.original_length),
                    spans: None,
                };
                serde_json::to_string(&rec).expect("record serializes")
            }))
        },
        |batch| {
            for json in batch {
                posts += 1;
                if let Some(json) = json {
                    kept += 1;
                    writeln!(out, "{json}").map_err(io::write_err(&output))?;
                }
            }
            Ok(())
        },
    )?;
    io::finish(&output, out)?;

    let config = CleanConfig {
        corpus: &spec,
        output: display(&output),
        cleaning: &cleaning,
    };
    let counts = BTreeMap::from([("posts", posts), ("kept", kept), ("dropped", posts - kept)]);
    write_manifest("clean", &config, &[input.as_path()], &output, counts, None)
}
