//! Character-level tokenization and fixed-length chunking.
//!
//! Documents are tokenized one id per character (ASCII letter/digit runs
//! become a single token), concatenated in input order and cut into windows
//! of exactly `L` content tokens. Word groups that straddle a window
//! boundary are split; each fragment becomes a group of its own chunk. The
//! trailing partial window is dropped.

mod binary;
mod vocab;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::LexiconMatch;
use crate::segment::{is_blank, SegmentedDoc, Span};

pub use binary::{read_binary_chunks, write_binary_header, write_binary_chunk, BINARY_MAGIC};
pub use vocab::{Vocab, CLS, MASK, PAD, SEP, UNK};

pub const DEFAULT_CHUNK_LEN: usize = 128;
pub const MIN_CHUNK_LEN: usize = 8;

/// Token ids of one document and their word groups.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenizedDoc {
    pub ids: Vec<u32>,
    pub groups: Vec<Span>,
    /// Index of the segmented span each group came from.
    pub source_spans: Vec<usize>,
}

impl TokenizedDoc {
    /// Translates span-level lexicon hits into group indices.
    pub fn lexicon_groups(&self, m: &LexiconMatch) -> Vec<usize> {
        m.word_span_indices
            .iter()
            .filter_map(|s| self.source_spans.binary_search(s).ok())
            .collect()
    }
}

/// Tokenizes a segmented document. Whitespace spans produce no tokens;
/// out-of-vocabulary characters map to `[UNK]` but keep their group.
pub fn tokenize(doc: &SegmentedDoc, vocab: &Vocab) -> TokenizedDoc {
    let mut out = TokenizedDoc::default();
    for (i, word) in doc.words().enumerate() {
        if is_blank(word) {
            continue;
        }
        let start = out.ids.len();
        if word.bytes().all(|b| b.is_ascii_alphanumeric()) {
            out.ids.push(vocab.word_id(word));
        } else {
            out.ids.extend(word.chars().filter(|c| !c.is_whitespace()).map(|c| vocab.char_id(c)));
        }
        out.groups.push(Span::new(start, out.ids.len() - start));
        out.source_spans.push(i);
    }
    out
}

/// Where a chunk's tokens came from: for each contributing document, the
/// token offset inside that document at which the chunk's share begins.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkOrigin {
    pub chunk_id: u64,
    pub doc_ids: Vec<u64>,
    pub offsets: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenChunk {
    pub ids: Vec<u32>,
    pub groups: Vec<Span>,
    /// Indices into `groups` of lexicon words (or fragments of them).
    #[serde(default)]
    pub lexicon_groups: Vec<usize>,
    pub origin: ChunkOrigin,
}

impl TokenChunk {
    pub fn chunk_id(&self) -> u64 {
        self.origin.chunk_id
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Checks that groups partition `[0, len)` and lexicon indices are
    /// strictly increasing and in range.
    pub fn validate(&self) -> Result<()> {
        let mut pos = 0;
        for g in &self.groups {
            if g.start != pos || g.len == 0 {
                return Err(Error::Validation(format!(
                    "chunk {}: groups do not partition the chunk at position {pos}",
                    self.chunk_id()
                )));
            }
            pos = g.end();
        }
        if pos != self.ids.len() {
            return Err(Error::Validation(format!(
                "chunk {}: groups cover {pos} of {} tokens",
                self.chunk_id(),
                self.ids.len()
            )));
        }
        if self.lexicon_groups.windows(2).any(|w| w[0] >= w[1])
            || self.lexicon_groups.last().is_some_and(|&g| g >= self.groups.len())
        {
            return Err(Error::Validation(format!(
                "chunk {}: bad lexicon group indices",
                self.chunk_id()
            )));
        }
        Ok(())
    }
}

/// Ordered reducer that concatenates tokenized documents and emits
/// fixed-length chunks.
#[derive(Debug)]
pub struct Chunker {
    chunk_len: usize,
    next_id: u64,
    ids: Vec<u32>,
    groups: Vec<Span>,
    lexicon: Vec<usize>,
    origin: ChunkOrigin,
    total_tokens: u64,
}

impl Chunker {
    pub fn new(chunk_len: usize) -> Result<Self> {
        if chunk_len < MIN_CHUNK_LEN {
            return Err(Error::Validation(format!(
                "chunk length {chunk_len} below minimum {MIN_CHUNK_LEN}"
            )));
        }
        Ok(Self {
            chunk_len,
            next_id: 0,
            ids: Vec::with_capacity(chunk_len),
            groups: Vec::new(),
            lexicon: Vec::new(),
            origin: ChunkOrigin::default(),
            total_tokens: 0,
        })
    }

    /// Appends one document; `lexicon_groups` are sorted indices into
    /// `doc.groups`. Returns the chunks completed by this document.
    pub fn push(&mut self, doc_id: u64, doc: &TokenizedDoc, lexicon_groups: &[usize]) -> Vec<TokenChunk> {
        let mut done = Vec::new();
        self.total_tokens += doc.ids.len() as u64;
        let mut lex = lexicon_groups.iter().peekable();
        for (gi, g) in doc.groups.iter().enumerate() {
            let is_lex = lex.next_if(|&&l| l == gi).is_some();
            let mut start = g.start;
            let mut remaining = g.len;
            while remaining > 0 {
                if self.origin.doc_ids.last() != Some(&doc_id) {
                    self.origin.doc_ids.push(doc_id);
                    self.origin.offsets.push(start);
                }
                let take = remaining.min(self.chunk_len - self.ids.len());
                if is_lex {
                    self.lexicon.push(self.groups.len());
                }
                self.groups.push(Span::new(self.ids.len(), take));
                self.ids.extend_from_slice(&doc.ids[start..start + take]);
                start += take;
                remaining -= take;
                if self.ids.len() == self.chunk_len {
                    done.push(self.emit());
                }
            }
        }
        done
    }

    fn emit(&mut self) -> TokenChunk {
        let origin = ChunkOrigin {
            chunk_id: self.next_id,
            ..std::mem::take(&mut self.origin)
        };
        self.next_id += 1;
        TokenChunk {
            ids: std::mem::replace(&mut self.ids, Vec::with_capacity(self.chunk_len)),
            groups: std::mem::take(&mut self.groups),
            lexicon_groups: std::mem::take(&mut self.lexicon),
            origin,
        }
    }

    pub fn chunks_emitted(&self) -> u64 {
        self.next_id
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    /// Number of buffered tokens that will be dropped at the end.
    pub fn pending(&self) -> usize {
        self.ids.len()
    }
}

/// Chunks a whole stream of tokenized documents. Returns the chunks and the
/// number of dropped tail tokens.
pub fn chunk_stream<'a, I>(docs: I, chunk_len: usize) -> Result<(Vec<TokenChunk>, usize)>
where
    I: IntoIterator<Item = &'a TokenizedDoc>,
{
    let mut chunker = Chunker::new(chunk_len)?;
    let mut out = Vec::new();
    for (i, doc) in docs.into_iter().enumerate() {
        out.extend(chunker.push(i as u64, doc, &[]));
    }
    Ok((out, chunker.pending()))
}
