use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

pub const CLS: &str = "[CLS]";
pub const SEP: &str = "[SEP]";
pub const MASK: &str = "[MASK]";
pub const UNK: &str = "[UNK]";
pub const PAD: &str = "[PAD]";

/// BERT-style vocabulary where a token's id is its line number.
#[derive(Debug, Clone)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
    /// Fast path for single-character tokens.
    chars: HashMap<char, u32>,
    /// Ids eligible as random replacements: everything that is not a
    /// bracketed control token such as `[CLS]` or `[unused1]`.
    regular: Vec<u32>,
    pub cls: u32,
    pub sep: u32,
    pub mask: u32,
    pub unk: u32,
    pub pad: u32,
}

fn is_control_token(t: &str) -> bool {
    t.len() > 2 && t.starts_with('[') && t.ends_with(']')
}

impl Vocab {
    pub fn from_tokens<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(tokens.len());
        let mut chars = HashMap::new();
        let mut regular = Vec::new();
        for (id, t) in tokens.iter().enumerate() {
            let id = u32::try_from(id).map_err(|_| Error::Validation("vocabulary too large".into()))?;
            if t.is_empty() {
                return Err(Error::Validation(format!("empty token at id {id}")));
            }
            if index.insert(t.clone(), id).is_some() {
                return Err(Error::Validation(format!("duplicate token {t:?} at id {id}")));
            }
            let mut cs = t.chars();
            if let (Some(c), None) = (cs.next(), cs.next()) {
                chars.insert(c, id);
            }
            if !is_control_token(t) {
                regular.push(id);
            }
        }
        let special = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::Validation(format!("vocabulary lacks {name}")))
        };
        let (cls, sep, mask, unk, pad) = (special(CLS)?, special(SEP)?, special(MASK)?, special(UNK)?, special(PAD)?);
        if regular.is_empty() {
            return Err(Error::Validation("vocabulary has no regular tokens".into()));
        }
        Ok(Self {
            tokens,
            index,
            chars,
            regular,
            cls,
            sep,
            mask,
            unk,
            pad,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut tokens = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let token = line.trim_end_matches('\r');
            if token.is_empty() {
                return Err(Error::malformed(path, i + 1, "empty vocabulary line"));
            }
            tokens.push(token.to_owned());
        }
        Self::from_tokens(tokens)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn char_id(&self, c: char) -> u32 {
        if let Some(&id) = self.chars.get(&c) {
            return id;
        }
        if c.is_ascii_uppercase() {
            if let Some(&id) = self.chars.get(&c.to_ascii_lowercase()) {
                return id;
            }
        }
        self.unk
    }

    /// Whole-token lookup, retrying lowercase for ASCII.
    pub fn word_id(&self, word: &str) -> u32 {
        self.id(word)
            .or_else(|| self.id(&word.to_ascii_lowercase()))
            .unwrap_or(self.unk)
    }

    pub fn regular_ids(&self) -> &[u32] {
        &self.regular
    }

    pub fn is_special(&self, id: u32) -> bool {
        self.token(id).is_some_and(is_control_token)
    }
}
