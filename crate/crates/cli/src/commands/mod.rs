mod chunk;
mod clean;
mod corpus;
mod eval;
mod lexicon;
mod mask;
mod probe;
mod split;
mod stats;

use std::path::{Path, PathBuf};

use lexmask_core::{Error, Result};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::args::{Cli, Command};
use crate::config::FileConfig;
use crate::io::{Line, LineReader, BATCH};

pub struct Ctx {
    pub file: FileConfig,
    pub pool: ThreadPool,
}

pub fn run(cli: Cli) -> Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let workers = cli
        .workers
        .or(file.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(Error::Validation("--workers must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Validation(format!("cannot start {workers} workers: {e}")))?;
    let ctx = Ctx { file, pool };
    match cli.command {
        Command::Clean(a) => clean::run(&ctx, a),
        Command::Segment(a) => corpus::run_segment(&ctx, a),
        Command::ExpandLexicon(a) => lexicon::run(&ctx, a),
        Command::Chunk(a) => chunk::run(&ctx, a),
        Command::Mask(a) => mask::run(&ctx, a),
        Command::Stats(a) => stats::run(&ctx, a),
        Command::Probe(a) => probe::run(&ctx, a),
        Command::Eval(a) => eval::run(&ctx, a),
        Command::Split(a) => split::run(&ctx, a),
        Command::Summary(a) => split::run_summary(&ctx, a),
    }
}

/// Maps every line of `reader` through `f` on the pool, handing results to
/// `sink` batch by batch in input order. The first failing line (in input
/// order) aborts the run.
pub fn for_each_batch<T, F, S>(ctx: &Ctx, reader: &mut LineReader, f: F, mut sink: S) -> Result<()>
where
    T: Send,
    F: Fn(&Line) -> Result<T> + Sync,
    S: FnMut(Vec<T>) -> Result<()>,
{
    loop {
        let lines = reader.next_batch(BATCH)?;
        if lines.is_empty() {
            return Ok(());
        }
        let results: Vec<Result<T>> = ctx.pool.install(|| lines.par_iter().map(&f).collect());
        sink(results.into_iter().collect::<Result<Vec<T>>>()?)?;
    }
}

pub fn display(p: &Path) -> String {
    p.display().to_string()
}

pub fn displays(ps: &[PathBuf]) -> Vec<String> {
    ps.iter().map(|p| display(p)).collect()
}
