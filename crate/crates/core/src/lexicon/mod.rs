//! Domain lexicon: loading, matching against segmented text, and expansion
//! through an association graph with label propagation.

mod graph;
mod propagate;

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::segment::SegmentedDoc;

pub use graph::{build_association_graph, AssociationGraph, CooccurrenceCounts};
pub use propagate::{propagate_labels, Propagation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LexEntry {
    pub score: f64,
    pub is_seed: bool,
}

/// Scored domain words. Scores lie in `[0, 1]` and seeds always score 1.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    entries: BTreeMap<String, LexEntry>,
}

impl Lexicon {
    /// A lexicon where every word is a seed.
    pub fn from_seeds<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut lex = Lexicon::default();
        for w in words {
            lex.insert(w.into(), 1.0, true)?;
        }
        Ok(lex)
    }

    /// Adds an entry; on duplicates the higher score wins and the seed flag
    /// is sticky.
    pub fn insert(&mut self, word: String, score: f64, is_seed: bool) -> Result<()> {
        if word.is_empty() {
            return Err(Error::Validation("empty lexicon word".into()));
        }
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::Validation(format!(
                "score {score} for {word:?} outside [0, 1]"
            )));
        }
        if is_seed && score != 1.0 {
            return Err(Error::Validation(format!(
                "seed {word:?} must have score 1, got {score}"
            )));
        }
        self.entries
            .entry(word)
            .and_modify(|e| {
                e.score = e.score.max(score);
                e.is_seed |= is_seed;
            })
            .or_insert(LexEntry { score, is_seed });
        Ok(())
    }

    pub fn get(&self, word: &str) -> Option<&LexEntry> {
        self.entries.get(word)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn seed_count(&self) -> usize {
        self.entries.values().filter(|e| e.is_seed).count()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn seeds(&self) -> impl Iterator<Item = &str> {
        self.entries
            .iter()
            .filter(|(_, e)| e.is_seed)
            .map(|(w, _)| w.as_str())
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &LexEntry)> {
        self.entries.iter().map(|(w, e)| (w.as_str(), e))
    }

    /// Serializes as `word\tscore\tseed_flag` rows sorted by word.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (word, e) in &self.entries {
            writeln!(out, "{word}\t{}\t{}", e.score, u8::from(e.is_seed))?;
        }
        Ok(())
    }

    /// Parses TSV rows of `word\tscore\tseed_flag`. Blank lines and lines
    /// starting with `#` are ignored. `path` is only used in error messages.
    pub fn parse_tsv<R: BufRead>(reader: R, path: &Path) -> Result<Self> {
        let mut lex = Lexicon::default();
        for (i, line) in reader.lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim_end_matches(['\r', '\n']);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(Error::malformed(
                    path,
                    lineno,
                    format!("expected 3 tab-separated columns, found {}", cols.len()),
                ));
            }
            let word = cols[0].trim();
            if word.is_empty() {
                return Err(Error::malformed(path, lineno, "empty word"));
            }
            let score: f64 = cols[1]
                .trim()
                .parse()
                .map_err(|_| Error::malformed(path, lineno, format!("bad score {:?}", cols[1])))?;
            let is_seed = match cols[2].trim() {
                "1" | "true" => true,
                "0" | "false" => false,
                other => {
                    return Err(Error::malformed(path, lineno, format!("bad seed flag {other:?}")))
                }
            };
            lex.insert(word.to_owned(), score, is_seed)
                .map_err(|e| match e {
                    Error::Validation(msg) => Error::Validation(format!("{}:{lineno}: {msg}", path.display())),
                    other => other,
                })?;
        }
        Ok(lex)
    }
}

pub fn load_lexicon(path: impl AsRef<Path>) -> Result<Lexicon> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Lexicon::parse_tsv(BufReader::new(file), path)
}

/// Reads a plain seed list (one word per line) as an all-seed lexicon.
pub fn load_seed_list(path: impl AsRef<Path>) -> Result<Lexicon> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut words = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let w = line.trim();
        if !w.is_empty() && !w.starts_with('#') {
            words.push(w.to_owned());
        }
    }
    Lexicon::from_seeds(words)
}

/// Lexicon hits in one document, as indices into its word spans.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LexiconMatch {
    pub doc_id: u64,
    pub word_span_indices: Vec<usize>,
}

impl LexiconMatch {
    pub fn find(doc_id: u64, doc: &SegmentedDoc, lex: &Lexicon) -> Self {
        Self {
            doc_id,
            word_span_indices: find_lexicon_words(doc, lex),
        }
    }
}

/// Indices of every span whose surface form is a lexicon entry.
pub fn find_lexicon_words(doc: &SegmentedDoc, lex: &Lexicon) -> Vec<usize> {
    doc.words()
        .enumerate()
        .filter(|(_, w)| lex.contains(w))
        .map(|(i, _)| i)
        .collect()
}

/// Adds every scored word at or above `cutoff` that is not already present.
pub fn expand_lexicon(lex: &Lexicon, scores: &HashMap<String, f64>, cutoff: f64) -> Result<Lexicon> {
    if !(cutoff > 0.0 && cutoff <= 1.0) {
        return Err(Error::Validation(format!("cutoff {cutoff} outside (0, 1]")));
    }
    let mut out = lex.clone();
    let mut candidates: Vec<(&String, f64)> = scores
        .iter()
        .filter(|(w, &s)| s >= cutoff && !lex.contains(w))
        .map(|(w, &s)| (w, s))
        .collect();
    candidates.sort_by(|a, b| a.0.cmp(b.0));
    for (word, score) in candidates {
        out.insert(word.clone(), score, false)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Cursor;

    fn parse(s: &str) -> Result<Lexicon> {
        Lexicon::parse_tsv(Cursor::new(s), Path::new("lex.tsv"))
    }

    #[test]
    fn parses_rows() {
        let lex = parse("崩溃\t0.9\t0\n绝望\t1.0\t1\n").unwrap();
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.seed_count(), 1);
        assert_eq!(lex.get("崩溃").unwrap().score, 0.9);
    }

    #[test]
    fn empty_file() {
        let lex = parse("").unwrap();
        assert!(lex.is_empty());
        assert_eq!(lex.seed_count(), 0);
    }

    #[test]
    fn score_out_of_range_is_validation_error() {
        assert!(matches!(parse("崩溃\t1.5\t0\n"), Err(Error::Validation(_))));
        assert!(matches!(parse("崩溃\t-0.1\t0\n"), Err(Error::Validation(_))));
        assert!(matches!(parse("崩溃\tNaN\t0\n"), Err(Error::Validation(_))));
    }

    #[test]
    fn seed_must_score_one() {
        assert!(matches!(parse("绝望\t0.5\t1\n"), Err(Error::Validation(_))));
    }

    #[test]
    fn malformed_row_reports_line() {
        match parse("绝望\t1\t1\n\n崩溃 0.9 0\n") {
            Err(Error::Malformed { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        match parse("绝望\tabc\t1\n") {
            Err(Error::Malformed { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicates_keep_max_score() {
        let lex = parse("难过\t0.3\t0\n难过\t0.7\t0\n难过\t0.5\t0\n").unwrap();
        assert_eq!(lex.len(), 1);
        assert_eq!(lex.get("难过").unwrap().score, 0.7);
    }

    #[test]
    fn tsv_round_trip() {
        let lex = parse("崩溃\t0.9\t0\n绝望\t1\t1\n痛苦\t0.123456789\t0\n").unwrap();
        let mut buf = Vec::new();
        lex.write_tsv(&mut buf).unwrap();
        assert_eq!(parse(std::str::from_utf8(&buf).unwrap()).unwrap(), lex);
    }

    #[test]
    fn seed_list_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("seeds.txt");
        std::fs::write(&p, "绝望\n\n想死\n").unwrap();
        let lex = load_seed_list(&p).unwrap();
        assert_eq!(lex.seed_count(), 2);
        assert!(matches!(load_lexicon(dir.path().join("nope.tsv")), Err(Error::NotFound(_))));
    }

    #[test]
    fn finds_lexicon_spans() {
        let lex = Lexicon::from_seeds(["绝望"]).unwrap();
        let doc = SegmentedDoc::from_words(&["我", "很", "绝望"]);
        assert_eq!(find_lexicon_words(&doc, &lex), [2]);
        let doc = SegmentedDoc::from_words(&["绝望", "绝望"]);
        assert_eq!(find_lexicon_words(&doc, &lex), [0, 1]);
        let doc = SegmentedDoc::from_words(&["开心", "快乐"]);
        assert!(find_lexicon_words(&doc, &lex).is_empty());
    }

    #[test]
    fn matching_is_word_level() {
        // "绝望" inside the longer span "不绝望的" is not a hit.
        let lex = Lexicon::from_seeds(["绝望"]).unwrap();
        let doc = SegmentedDoc::from_words(&["不绝望的"]);
        assert!(find_lexicon_words(&doc, &lex).is_empty());
    }

    #[test]
    fn expand_examples() {
        let lex = Lexicon::from_seeds(["绝望"]).unwrap();
        let scores = HashMap::from([("崩溃".to_string(), 0.8)]);
        let out = expand_lexicon(&lex, &scores, 0.5).unwrap();
        assert_eq!(out.words().collect::<Vec<_>>(), ["崩溃", "绝望"]);
        assert!(!out.get("崩溃").unwrap().is_seed);

        assert_eq!(expand_lexicon(&lex, &scores, 1.0).unwrap(), lex);
        assert_eq!(expand_lexicon(&lex, &HashMap::new(), 0.5).unwrap(), lex);
        assert!(expand_lexicon(&lex, &scores, 0.0).is_err());
    }

    #[test]
    fn expand_leaves_existing_entries() {
        let mut lex = Lexicon::default();
        lex.insert("难过".into(), 0.2, false).unwrap();
        let scores = HashMap::from([("难过".to_string(), 0.9), ("伤心".to_string(), 0.6)]);
        let out = expand_lexicon(&lex, &scores, 0.5).unwrap();
        assert_eq!(out.get("难过").unwrap().score, 0.2);
        assert_eq!(out.get("伤心").unwrap().score, 0.6);
    }

    proptest! {
        #[test]
        fn find_matches_exhaustive_scan(
            words in prop::collection::vec(prop::sample::select(vec!["我", "难过", "绝望", "好", "想死", "了"]), 0..30),
            lex_words in prop::collection::btree_set(prop::sample::select(vec!["难过", "绝望", "想死", "好"]), 0..4),
        ) {
            let doc = SegmentedDoc::from_words(&words);
            let lex = Lexicon::from_seeds(lex_words.iter().copied()).unwrap();
            let mut expected = Vec::new();
            for (i, w) in words.iter().enumerate() {
                if lex_words.contains(w) {
                    expected.push(i);
                }
            }
            prop_assert_eq!(find_lexicon_words(&doc, &lex), expected);
        }
    }
}
