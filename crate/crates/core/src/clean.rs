//! Social-media text normalization, degenerate-post filtering and corpus
//! statistics.
//!
//! Cleaning strips URLs (scheme-prefixed and `t.cn` short links), Weibo
//! `@mentions`, paired `#topic#` hashtags, emoji, kaomoji / bracketed
//! emoticons and control characters, then collapses whitespace. Removal is
//! repeated until the text stops changing, so [`clean_text`] is idempotent
//! even when a removal splices two fragments into a new match.

use std::collections::{BTreeMap, HashSet};

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One record of the raw input corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawPost {
    #[serde(rename = "source")]
    pub source_id: String,
    #[serde(rename = "user", default)]
    pub user_id: String,
    pub text: String,
}

/// A post that survived cleaning and filtering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleanDoc {
    pub source_id: String,
    pub user_id: String,
    pub text: String,
    /// Character count of the text before cleaning.
    pub original_length: usize,
}

/// Default kaomoji / emoticon patterns.
///
/// The first matches Weibo's bracketed emoticon codes (`[哈哈]`, `[doge]`),
/// the second parenthesized faces built from typical kaomoji glyphs, the
/// third table-flip style line art.
pub const DEFAULT_KAOMOJI: &[&str] = &[
    r"\[[\p{Han}A-Za-z]{1,8}\]",
    r"[(（][^()（）\s]{0,8}?[;；＾^ω▽∀゜°ﾟ´｀◕‿╥﹏_][^()（）\s]{0,8}?[)）]",
    r"[┻┳━╯╰︵]+",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CleaningConfig {
    pub strip_urls: bool,
    pub strip_mentions: bool,
    pub strip_hashtags: bool,
    pub strip_emoji: bool,
    /// Regexes for emoticons outside the Unicode emoji blocks.
    pub kaomoji: Vec<String>,
    /// Minimum number of non-whitespace characters a kept post must have.
    pub min_chars: usize,
    /// Drop posts made of a single repeated character ("哈哈哈哈").
    pub drop_single_char_spam: bool,
}

impl Default for CleaningConfig {
    fn default() -> Self {
        Self {
            strip_urls: true,
            strip_mentions: true,
            strip_hashtags: true,
            strip_emoji: true,
            kaomoji: DEFAULT_KAOMOJI.iter().map(|s| s.to_string()).collect(),
            min_chars: 4,
            drop_single_char_spam: true,
        }
    }
}

/// Compiled form of a [`CleaningConfig`].
#[derive(Debug, Clone)]
pub struct Cleaner {
    config: CleaningConfig,
    patterns: Vec<Regex>,
}

const URL_PATTERN: &str = r"(?i)https?://[A-Za-z0-9\-._~:/?@!$&'*+,;=%]+";
const SHORT_LINK_PATTERN: &str = r"(?i)(?:www\.)?t\.cn/[A-Za-z0-9]+";
const MENTION_PATTERN: &str = r"@[^\s@#:：,，。.!！?？;；、]+";
const HASHTAG_PATTERN: &str = r"#[^#\s]{1,40}#";

impl Cleaner {
    pub fn new(config: CleaningConfig) -> Result<Self> {
        let mut sources: Vec<&str> = Vec::new();
        // URLs go first: they may legitimately contain '@'.
        if config.strip_urls {
            sources.push(URL_PATTERN);
            sources.push(SHORT_LINK_PATTERN);
        }
        if config.strip_mentions {
            sources.push(MENTION_PATTERN);
        }
        if config.strip_hashtags {
            sources.push(HASHTAG_PATTERN);
        }
        let mut patterns = sources
            .into_iter()
            .map(|s| Regex::new(s).expect("built-in pattern"))
            .collect::<Vec<_>>();
        for src in &config.kaomoji {
            let re = Regex::new(src)
                .map_err(|e| Error::Validation(format!("bad kaomoji pattern {src:?}: {e}")))?;
            patterns.push(re);
        }
        Ok(Self { config, patterns })
    }

    pub fn config(&self) -> &CleaningConfig {
        &self.config
    }

    /// Cleans `raw` to a fixed point of the removal rules.
    pub fn clean(&self, raw: &str) -> String {
        let mut current = self.pass(raw);
        loop {
            // After the first pass whitespace is normalized, so any further
            // change strictly shortens the text and the loop terminates.
            let next = self.pass(&current);
            if next == current {
                return current;
            }
            current = next;
        }
    }

    fn pass(&self, input: &str) -> String {
        let mut text = std::borrow::Cow::Borrowed(input);
        for re in &self.patterns {
            if let std::borrow::Cow::Owned(s) = re.replace_all(&text, "") {
                text = std::borrow::Cow::Owned(s);
            }
        }
        let mut out = String::with_capacity(text.len());
        let mut pending_space = false;
        for c in text.chars() {
            if c.is_whitespace() {
                pending_space = true;
                continue;
            }
            if is_control_or_invisible(c) || (self.config.strip_emoji && is_emoji(c)) {
                continue;
            }
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        }
        out
    }

    /// Cleans a raw byte buffer, reporting the offset of the first invalid
    /// UTF-8 byte.
    pub fn clean_bytes(&self, raw: &[u8]) -> Result<String> {
        let text = std::str::from_utf8(raw).map_err(|e| Error::Utf8 {
            offset: e.valid_up_to(),
        })?;
        Ok(self.clean(text))
    }

    pub fn verdict(&self, text: &str) -> Verdict {
        let verdict = filter_short(text, self.config.min_chars);
        if verdict == Verdict::Keep && self.config.drop_single_char_spam && is_single_char_spam(text) {
            return Verdict::Drop;
        }
        verdict
    }

    /// Cleans and filters a post; `None` means the post was dropped.
    pub fn process(&self, post: &RawPost) -> Option<CleanDoc> {
        let text = self.clean(&post.text);
        match self.verdict(&text) {
            Verdict::Drop => None,
            Verdict::Keep => Some(CleanDoc {
                source_id: post.source_id.clone(),
                user_id: post.user_id.clone(),
                original_length: post.text.chars().count(),
                text,
            }),
        }
    }
}

/// One-shot cleaning with a freshly compiled rule set.
pub fn clean_text(raw: &str, rules: &CleaningConfig) -> Result<String> {
    Ok(Cleaner::new(rules.clone())?.clean(raw))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Keep,
    Drop,
}

/// Drops text with fewer than `min_chars` non-whitespace characters.
pub fn filter_short(text: &str, min_chars: usize) -> Verdict {
    let content = text.chars().filter(|c| !c.is_whitespace()).count();
    if content < min_chars {
        Verdict::Drop
    } else {
        Verdict::Keep
    }
}

fn is_single_char_spam(text: &str) -> bool {
    let mut chars = text.chars().filter(|c| !c.is_whitespace());
    match chars.next() {
        Some(first) => chars.all(|c| c == first),
        None => false,
    }
}

fn is_control_or_invisible(c: char) -> bool {
    c.is_control() || matches!(c, '\u{200B}' | '\u{200C}' | '\u{2060}' | '\u{FEFF}')
}

/// Unicode emoji blocks plus the joiners and selectors used to compose them.
pub fn is_emoji(c: char) -> bool {
    matches!(c as u32,
        0x1F000..=0x1FAFF
        | 0x2600..=0x27BF
        | 0x231A..=0x23FF
        | 0x2B00..=0x2BFF
        | 0xFE00..=0xFE0F
        | 0x200D
        | 0x20E3
        | 0x3030
        | 0x303D
        | 0x3297
        | 0x3299
        | 0xE0020..=0xE007F
    )
}

/// Per-source counts in a [`CorpusStats`] document.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceCounts {
    pub users: u64,
    pub posts: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub per_source: BTreeMap<String, SourceCounts>,
    pub total_users: u64,
    pub total_posts: u64,
    pub kept_after_cleaning: u64,
}

/// Partial statistics over one partition of the corpus.
///
/// Merging is associative and commutative; users are tracked per source as
/// sets so that merged partitions still count distinct users.
#[derive(Debug, Clone, Default)]
pub struct StatsAccumulator {
    users: BTreeMap<String, HashSet<String>>,
    posts: BTreeMap<String, u64>,
    kept: u64,
}

impl StatsAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_post(&mut self, source_id: &str, user_id: &str) {
        match self.users.get_mut(source_id) {
            Some(set) => {
                if !set.contains(user_id) {
                    set.insert(user_id.to_owned());
                }
            }
            None => {
                self.users
                    .insert(source_id.to_owned(), HashSet::from([user_id.to_owned()]));
            }
        }
        *self.posts.entry(source_id.to_owned()).or_default() += 1;
    }

    pub fn add_kept(&mut self, n: u64) {
        self.kept += n;
    }

    pub fn merge(mut self, other: StatsAccumulator) -> Self {
        for (source, users) in other.users {
            self.users.entry(source).or_default().extend(users);
        }
        for (source, n) in other.posts {
            *self.posts.entry(source).or_default() += n;
        }
        self.kept += other.kept;
        self
    }

    pub fn finish(self) -> CorpusStats {
        let mut stats = CorpusStats {
            kept_after_cleaning: self.kept,
            ..Default::default()
        };
        for (source, posts) in self.posts {
            let users = self.users.get(&source).map_or(0, |s| s.len() as u64);
            stats.total_users += users;
            stats.total_posts += posts;
            stats.per_source.insert(source, SourceCounts { users, posts });
        }
        stats
    }
}

pub fn aggregate_stats<'a, P, K>(posts: P, kept: K) -> CorpusStats
where
    P: IntoIterator<Item = &'a RawPost>,
    K: IntoIterator<Item = &'a CleanDoc>,
{
    let mut acc = StatsAccumulator::new();
    for post in posts {
        acc.add_post(&post.source_id, &post.user_id);
    }
    acc.add_kept(kept.into_iter().count() as u64);
    acc.finish()
}
