use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use lexmask_core::chunker::{tokenize, write_binary_chunk, write_binary_header, Chunker, TokenChunk, Vocab, DEFAULT_CHUNK_LEN};
use lexmask_core::lexicon::LexiconMatch;
use lexmask_core::Result;
use rayon::prelude::*;
use serde::Serialize;

use super::corpus::{CorpusSpec, Segmenter, SegmenterConfig};
use super::{display, Ctx};
use crate::args::{ChunkArgs, ChunkFormat};
use crate::config::required;
use crate::error::require_files;
use crate::io::{self, LineReader, BATCH};
use crate::manifest::write_manifest;

/// Segments, tokenizes and chunks a corpus batch by batch. Per-document
/// work runs on the pool; the chunker consumes documents in input order.
pub struct CorpusChunker<'a> {
    spec: &'a CorpusSpec,
    seg: &'a Segmenter,
    vocab: &'a Vocab,
    reader: LineReader,
    chunker: Chunker,
    pub documents: u64,
}

impl<'a> CorpusChunker<'a> {
    pub fn new(spec: &'a CorpusSpec, seg: &'a Segmenter, vocab: &'a Vocab, chunk_len: usize) -> Result<Self> {
        Ok(Self {
            spec,
            seg,
            vocab,
            reader: LineReader::open(&spec.input)?,
            chunker: Chunker::new(chunk_len)?,
            documents: 0,
        })
    }

    /// Chunks completed by the next batch of documents; `None` at the end.
    pub fn next_batch(&mut self, ctx: &Ctx) -> Result<Option<Vec<TokenChunk>>> {
        let lines = self.reader.next_batch(BATCH)?;
        if lines.is_empty() {
            return Ok(None);
        }
        let (spec, seg, vocab) = (self.spec, self.seg, self.vocab);
        let docs: Vec<Result<_>> = ctx.pool.install(|| {
            lines
                .par_iter()
                .map(|line| {
                    let rec = spec.parse(line)?;
                    let doc = seg.doc(&rec, &spec.input, line.no)?;
                    let tokens = tokenize(&doc, vocab);
                    let lex = tokens.lexicon_groups(&LexiconMatch::find(0, &doc, &seg.lexicon));
                    Ok((tokens, lex))
                })
                .collect()
        });
        let mut chunks = Vec::new();
        for doc in docs {
            let (tokens, lex) = doc?;
            chunks.extend(self.chunker.push(self.documents, &tokens, &lex));
            self.documents += 1;
        }
        Ok(Some(chunks))
    }

    pub fn total_tokens(&self) -> u64 {
        self.chunker.total_tokens()
    }

    pub fn dropped_tokens(&self) -> u64 {
        self.chunker.pending() as u64
    }
}

pub fn load_vocab(flag: Option<PathBuf>, ctx: &Ctx) -> Result<(PathBuf, Vocab)> {
    let path = required(flag.or_else(|| ctx.file.vocab.clone()), "vocab")?;
    require_files([path.as_path()])?;
    let vocab = Vocab::load(&path)?;
    Ok((path, vocab))
}

#[derive(Serialize)]
struct ChunkConfig<'a> {
    corpus: &'a CorpusSpec,
    output: String,
    #[serde(flatten)]
    segmenter: SegmenterConfig,
    vocab: String,
    chunk_len: usize,
    format: ChunkFormat,
}

pub fn run(ctx: &Ctx, a: ChunkArgs) -> Result<()> {
    let f = &ctx.file;
    let input = required(a.io.input.or_else(|| f.input.clone()), "input")?;
    let output = required(a.io.output.or_else(|| f.output.clone()), "output")?;
    require_files([input.as_path()])?;
    let spec = CorpusSpec::resolve(&input, a.corpus, f)?;
    let seg = Segmenter::load(a.seg, f)?;
    let (vocab_path, vocab) = load_vocab(a.vocab, ctx)?;
    let chunk_len = a.chunk_len.or(f.chunk_len).unwrap_or(DEFAULT_CHUNK_LEN);
    let format = a.format.or(f.format).unwrap_or(ChunkFormat::Jsonl);

    let mut source = CorpusChunker::new(&spec, &seg, &vocab, chunk_len)?;
    let mut out = io::create(&output)?;
    let err = io::write_err(&output);
    if format == ChunkFormat::Binary {
        write_binary_header(&mut out).map_err(&err)?;
    }
    let mut chunks = 0u64;
    while let Some(batch) = source.next_batch(ctx)? {
        chunks += batch.len() as u64;
        write_chunks(ctx, &mut out, &batch, format).map_err(&err)?;
    }
    io::finish(&output, out)?;

    let config = ChunkConfig {
        corpus: &spec,
        output: display(&output),
        segmenter: seg.config(),
        vocab: display(&vocab_path),
        chunk_len,
        format,
    };
    let mut inputs: Vec<&Path> = vec![input.as_path()];
    inputs.extend(seg.input_paths());
    inputs.push(&vocab_path);
    let counts = BTreeMap::from([
        ("documents", source.documents),
        ("tokens", source.total_tokens()),
        ("chunks", chunks),
        ("dropped_tokens", source.dropped_tokens()),
    ]);
    write_manifest("chunk", &config, &inputs, &output, counts, None)
}

fn write_chunks<W: Write>(ctx: &Ctx, out: &mut W, chunks: &[TokenChunk], format: ChunkFormat) -> std::io::Result<()> {
    match format {
        ChunkFormat::Jsonl => {
            let lines: Vec<String> = ctx.pool.install(|| {
                chunks
                    .par_iter()
                    .map(|c| serde_json::to_string(c).expect("chunk serializes"))
                    .collect()
            });
            for l in lines {
                writeln!(out, "{l}")?;
            }
        }
        ChunkFormat::Binary => {
            for c in chunks {
                write_binary_chunk(out, c)?;
            }
        }
    }
    Ok(())
}
