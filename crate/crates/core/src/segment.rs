//! Dictionary-based forward-maximum-matching word segmentation.
//!
//! Segmentation produces the word groups that whole-word masking operates
//! on. At each position the longest dictionary word starting there is taken;
//! failing that, a run of ASCII letters/digits is kept together, and anything
//! else falls back to a single character.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::Lexicon;

/// A half-open range `[start, start + len)` over character or token positions.
///
/// Serialized as a two-element array `[start, len]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct Span {
    pub start: usize,
    pub len: usize,
}

impl Span {
    pub fn new(start: usize, len: usize) -> Self {
        Self { start, len }
    }

    pub fn end(&self) -> usize {
        self.start + self.len
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.end()
    }
}

impl From<(usize, usize)> for Span {
    fn from((start, len): (usize, usize)) -> Self {
        Self { start, len }
    }
}

impl From<Span> for (usize, usize) {
    fn from(s: Span) -> Self {
        (s.start, s.len)
    }
}

#[derive(Debug, Clone, Default)]
pub struct SegmentDict {
    words: HashSet<Box<str>>,
    max_word_len: usize,
}

impl SegmentDict {
    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Length in characters of the longest entry.
    pub fn max_word_len(&self) -> usize {
        self.max_word_len
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(|w| &**w)
    }

    fn insert(&mut self, word: &str) {
        let n = word.chars().count();
        self.max_word_len = self.max_word_len.max(n);
        if !self.words.contains(word) {
            self.words.insert(word.into());
        }
    }
}

/// Builds a segmentation dictionary from a word list, force-adding every
/// lexicon entry so lexicon words always come out as single spans.
pub fn build_dict<I, S>(word_list: I, lexicon: &Lexicon) -> Result<SegmentDict>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut dict = SegmentDict::default();
    for (i, word) in word_list.into_iter().enumerate() {
        let word = word.as_ref();
        if word.is_empty() {
            return Err(Error::Validation(format!("empty dictionary entry at index {i}")));
        }
        dict.insert(word);
    }
    for word in lexicon.words() {
        dict.insert(word);
    }
    Ok(dict)
}

/// Reads dictionary words from one or more files (one word per line; any
/// trailing whitespace-separated columns such as frequencies are ignored).
/// Blank lines are skipped. Multiple files are unioned.
pub fn read_word_lists<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<String>> {
    let mut words = Vec::new();
    for path in paths {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if let Some(word) = line.split_whitespace().next() {
                words.push(word.to_owned());
            }
        }
    }
    Ok(words)
}

/// Text plus a partition of its characters into word spans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentedDoc {
    text: String,
    /// Byte offset of every character, plus `text.len()` at the end.
    offsets: Vec<usize>,
    spans: Vec<Span>,
}

impl SegmentedDoc {
    /// Builds a document whose spans are exactly the given words.
    pub fn from_words<S: AsRef<str>>(words: &[S]) -> Self {
        let mut text = String::new();
        let mut spans = Vec::with_capacity(words.len());
        let mut pos = 0;
        for w in words {
            let w = w.as_ref();
            let n = w.chars().count();
            if n == 0 {
                continue;
            }
            text.push_str(w);
            spans.push(Span::new(pos, n));
            pos += n;
        }
        let offsets = char_offsets(&text);
        Self { text, offsets, spans }
    }

    /// Rebuilds a document from its text and a stored span list.
    pub fn from_spans(text: &str, spans: Vec<Span>) -> Result<Self> {
        let offsets = char_offsets(text);
        let mut pos = 0;
        for s in &spans {
            if s.start != pos || s.len == 0 {
                return Err(Error::Validation(format!("spans do not partition the text at character {pos}")));
            }
            pos = s.end();
        }
        if pos != offsets.len() - 1 {
            return Err(Error::Validation(format!(
                "spans cover {pos} of {} characters",
                offsets.len() - 1
            )));
        }
        Ok(Self {
            text: text.to_owned(),
            offsets,
            spans,
        })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn char_len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn chars(&self) -> impl Iterator<Item = char> + '_ {
        self.text.chars()
    }

    pub fn spans(&self) -> &[Span] {
        &self.spans
    }

    /// Surface string of span `i`.
    pub fn word(&self, i: usize) -> &str {
        let s = self.spans[i];
        &self.text[self.offsets[s.start]..self.offsets[s.end()]]
    }

    pub fn words(&self) -> impl Iterator<Item = &str> + '_ {
        (0..self.spans.len()).map(move |i| self.word(i))
    }

    /// Number of spans that are not pure whitespace.
    pub fn word_count(&self) -> usize {
        self.words().filter(|w| !is_blank(w)).count()
    }
}

pub(crate) fn is_blank(word: &str) -> bool {
    word.chars().all(char::is_whitespace)
}

fn char_offsets(text: &str) -> Vec<usize> {
    let mut offsets: Vec<usize> = text.char_indices().map(|(i, _)| i).collect();
    offsets.push(text.len());
    offsets
}

fn is_ascii_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric()
}

/// Forward maximum matching segmentation.
pub fn segment_fmm(text: &str, dict: &SegmentDict) -> SegmentedDoc {
    let offsets = char_offsets(text);
    let n = offsets.len() - 1;
    let chars: Vec<char> = text.chars().collect();
    let mut spans = Vec::new();
    let mut i = 0;
    while i < n {
        let mut len = 0;
        for l in (1..=dict.max_word_len.min(n - i)).rev() {
            if dict.contains(&text[offsets[i]..offsets[i + l]]) {
                len = l;
                break;
            }
        }
        if len == 0 {
            len = if is_ascii_word_char(chars[i]) {
                chars[i..].iter().take_while(|&&c| is_ascii_word_char(c)).count()
            } else {
                1
            };
        }
        spans.push(Span::new(i, len));
        i += len;
    }
    SegmentedDoc {
        text: text.to_owned(),
        offsets,
        spans,
    }
}
