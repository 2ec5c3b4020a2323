use std::collections::BTreeMap;

use lexmask_core::clean::{Cleaner, CleaningConfig, StatsAccumulator};
use lexmask_core::Result;
use serde::Serialize;

use super::clean::cleaning_config;
use super::corpus::CorpusSpec;
use super::{display, for_each_batch, Ctx};
use crate::args::StatsArgs;
use crate::config::required;
use crate::error::require_files;
use crate::io::{self, LineReader};
use crate::manifest::write_manifest;

#[derive(Serialize)]
struct StatsConfig<'a> {
    corpus: &'a CorpusSpec,
    output: String,
    cleaning: &'a CleaningConfig,
}

pub fn run(ctx: &Ctx, a: StatsArgs) -> Result<()> {
    let f = &ctx.file;
    let input = required(a.io.input.or_else(|| f.input.clone()), "input")?;
    let output = a.io.output.or_else(|| f.output.clone());
    require_files([input.as_path()])?;
    let spec = CorpusSpec::resolve(&input, a.corpus, f)?;
    let cleaning = cleaning_config(a.min_chars, f);
    let cleaner = Cleaner::new(cleaning.clone())?;

    let mut acc = StatsAccumulator::new();
    let mut reader = LineReader::open(&input)?;
    for_each_batch(
        ctx,
        &mut reader,
        |line| {
            let post = spec.parse_post(line)?;
            let kept = cleaner.process(&post).is_some();
            Ok((post.source_id, post.user_id, kept))
        },
        |batch| {
            for (source, user, kept) in batch {
                acc.add_post(&source, &user);
                acc.add_kept(u64::from(kept));
            }
            Ok(())
        },
    )?;
    let stats = acc.finish();
    io::emit_json(output.as_deref(), &stats)?;

    if let Some(output) = output {
        let config = StatsConfig {
            corpus: &spec,
            output: display(&output),
            cleaning: &cleaning,
        };
        let counts = BTreeMap::from([
            ("posts", stats.total_posts),
            ("users", stats.total_users),
            ("kept", stats.kept_after_cleaning),
            ("sources", stats.per_source.len() as u64),
        ]);
        write_manifest("stats", &config, &[input.as_path()], &output, counts, None)?;
    }
    Ok(())
}
