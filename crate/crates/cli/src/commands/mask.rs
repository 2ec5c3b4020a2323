use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use lexmask_core::chunker::{read_binary_chunks, TokenChunk, Vocab, BINARY_MAGIC, DEFAULT_CHUNK_LEN};
use lexmask_core::masker::{mask_chunk, MaskPolicy, MaskedRecord, Replacement};
use lexmask_core::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

use super::chunk::{load_vocab, CorpusChunker};
use super::corpus::{CorpusSpec, Segmenter, SegmenterConfig};
use super::{display, Ctx};
use crate::args::MaskArgs;
use crate::config::required;
use crate::error::require_files;
use crate::io::{self, parse_json, LineReader, BATCH};
use crate::manifest::write_manifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum InputKind {
    BinaryChunks,
    JsonlChunks,
    Corpus,
}

fn sniff(path: &Path) -> Result<InputKind> {
    let mut head = [0u8; 8];
    let mut f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut n = 0;
    while n < head.len() {
        match f.read(&mut head[n..]).map_err(|e| Error::io(path, e))? {
            0 => break,
            k => n += k,
        }
    }
    if n == head.len() && &head == BINARY_MAGIC {
        return Ok(InputKind::BinaryChunks);
    }
    let mut r = LineReader::open(path)?;
    Ok(match r.next_line()? {
        Some(l) => match serde_json::from_str::<serde_json::Value>(&l.text) {
            Ok(v) if v.get("ids").is_some() => InputKind::JsonlChunks,
            _ => InputKind::Corpus,
        },
        None => InputKind::JsonlChunks,
    })
}

enum Source<'a> {
    Chunks(std::vec::IntoIter<TokenChunk>),
    Jsonl(LineReader),
    Corpus(CorpusChunker<'a>),
}

impl Source<'_> {
    fn next_batch(&mut self, ctx: &Ctx) -> Result<Option<Vec<TokenChunk>>> {
        match self {
            Source::Chunks(it) => {
                let batch: Vec<TokenChunk> = it.by_ref().take(BATCH).collect();
                Ok((!batch.is_empty()).then_some(batch))
            }
            Source::Jsonl(reader) => {
                let lines = reader.next_batch(BATCH)?;
                if lines.is_empty() {
                    return Ok(None);
                }
                let path = reader.path().to_path_buf();
                let parsed: Vec<Result<TokenChunk>> = ctx.pool.install(|| {
                    lines
                        .par_iter()
                        .map(|line| {
                            let chunk: TokenChunk = parse_json(&path, line)?;
                            chunk.validate().map_err(|e| Error::malformed(&path, line.no, e.to_string()))?;
                            Ok(chunk)
                        })
                        .collect()
                });
                parsed.into_iter().collect::<Result<Vec<_>>>().map(Some)
            }
            Source::Corpus(c) => c.next_batch(ctx),
        }
    }
}

#[derive(Serialize)]
struct MaskConfig {
    input: String,
    input_kind: InputKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    corpus: Option<CorpusSpec>,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    segmenter: Option<SegmenterConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    chunk_len: Option<usize>,
    output: String,
    vocab: String,
    policy: MaskPolicy,
}

#[derive(Default)]
struct Tally {
    chunks: u64,
    tokens: u64,
    masked: u64,
    lexicon: u64,
    replaced: [u64; 3],
}

pub fn run(ctx: &Ctx, a: MaskArgs) -> Result<()> {
    let f = &ctx.file;
    let input = required(a.io.input.or_else(|| f.input.clone()), "input")?;
    let output = required(a.io.output.or_else(|| f.output.clone()), "output")?;
    require_files([input.as_path()])?;
    let (vocab_path, vocab) = load_vocab(a.vocab, ctx)?;
    let mut policy = MaskPolicy {
        budget: a.budget.or(f.budget).unwrap_or(MaskPolicy::default().budget),
        rng_seed: a.seed.or(f.seed).unwrap_or(0),
        ..MaskPolicy::default()
    };
    if let Some(p) = a.policy.as_ref().or(f.policy.as_ref()) {
        policy = policy.with_ratios(p)?;
    }
    policy.validate()?;

    let kind = sniff(&input)?;
    let (spec, seg, chunk_len) = if kind == InputKind::Corpus {
        let spec = CorpusSpec::resolve(&input, a.corpus, f)?;
        let seg = Segmenter::load(a.seg, f)?;
        (Some(spec), Some(seg), Some(a.chunk_len.or(f.chunk_len).unwrap_or(DEFAULT_CHUNK_LEN)))
    } else {
        (None, None, None)
    };
    let mut source = match kind {
        InputKind::BinaryChunks => {
            let file = File::open(&input).map_err(|e| Error::io(&input, e))?;
            let chunks = read_binary_chunks(std::io::BufReader::new(file), &input)?;
            for (i, c) in chunks.iter().enumerate() {
                c.validate().map_err(|e| Error::malformed(&input, i + 1, e.to_string()))?;
            }
            Source::Chunks(chunks.into_iter())
        }
        InputKind::JsonlChunks => Source::Jsonl(LineReader::open(&input)?),
        InputKind::Corpus => Source::Corpus(CorpusChunker::new(
            spec.as_ref().expect("corpus spec"),
            seg.as_ref().expect("segmenter"),
            &vocab,
            chunk_len.expect("chunk length"),
        )?),
    };

    let mut out = io::create(&output)?;
    let mut tally = Tally::default();
    while let Some(batch) = source.next_batch(ctx)? {
        mask_batch(ctx, &batch, &vocab, &policy, &output, &mut out, &mut tally)?;
    }
    io::finish(&output, out)?;

    let mut counts = BTreeMap::from([
        ("chunks", tally.chunks),
        ("tokens", tally.tokens),
        ("masked_tokens", tally.masked),
        ("lexicon_tokens", tally.lexicon),
        ("replaced_mask", tally.replaced[0]),
        ("replaced_random", tally.replaced[1]),
        ("replaced_keep", tally.replaced[2]),
    ]);
    if let Source::Corpus(c) = &source {
        counts.insert("documents", c.documents);
        counts.insert("dropped_tokens", c.dropped_tokens());
    }
    let mut inputs: Vec<&Path> = vec![input.as_path()];
    if let Some(seg) = &seg {
        inputs.extend(seg.input_paths());
    }
    inputs.push(&vocab_path);
    let config = MaskConfig {
        input: display(&input),
        input_kind: kind,
        segmenter: seg.as_ref().map(Segmenter::config),
        corpus: spec.clone(),
        chunk_len,
        output: display(&output),
        vocab: display(&vocab_path),
        policy,
    };
    write_manifest("mask", &config, &inputs, &output, counts, Some(policy.rng_seed))
}

fn mask_batch<W: Write>(
    ctx: &Ctx,
    batch: &[TokenChunk],
    vocab: &Vocab,
    policy: &MaskPolicy,
    output: &Path,
    out: &mut W,
    tally: &mut Tally,
) -> Result<()> {
    let results: Vec<Result<(String, [u64; 5])>> = ctx.pool.install(|| {
        batch
            .par_iter()
            .map(|chunk| {
                if let Some(&bad) = chunk.ids.iter().find(|&&id| id as usize >= vocab.len()) {
                    return Err(Error::Validation(format!(
                        "chunk {}: token id {bad} outside a vocabulary of {}",
                        chunk.chunk_id(),
                        vocab.len()
                    )));
                }
                let ex = mask_chunk(chunk, vocab, policy);
                let lexicon: usize = ex.plan.lexicon_groups.iter().map(|&g| chunk.groups[g].len).sum();
                let mut kinds = [0u64; 3];
                for r in &ex.replacements {
                    kinds[match r {
                        Replacement::Mask => 0,
                        Replacement::Random => 1,
                        Replacement::Keep => 2,
                    }] += 1;
                }
                let json = serde_json::to_string(&MaskedRecord::new(chunk, &ex)).expect("record serializes");
                Ok((json, [ex.plan.masked_positions.len() as u64, lexicon as u64, kinds[0], kinds[1], kinds[2]]))
            })
            .collect()
    });
    for (chunk, r) in batch.iter().zip(results) {
        let (json, n) = r?;
        tally.chunks += 1;
        tally.tokens += chunk.len() as u64;
        tally.masked += n[0];
        tally.lexicon += n[1];
        for k in 0..3 {
            tally.replaced[k] += n[2 + k];
        }
        writeln!(out, "{json}").map_err(io::write_err(output))?;
    }
    Ok(())
}
