//! Lexicon-guided whole-word masking.
//!
//! Every lexicon word group in a chunk is masked. If that covers fewer than
//! `ceil(budget * L)` tokens, whole non-lexicon groups are drawn uniformly
//! without replacement until the threshold is reached. Masked positions are
//! then replaced BERT-style: `[MASK]`, a random regular token, or the
//! original token, with configurable probabilities.
//!
//! All randomness is drawn from generators seeded by `(rng_seed, chunk_id)`,
//! so a chunk's masking never depends on which worker handled it or in what
//! order.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chunker::{TokenChunk, Vocab};
use crate::error::{Error, Result};
use crate::segment::Span;

/// Label value for positions excluded from the loss.
pub const IGNORE_INDEX: i64 = -100;

pub const MASK_MARKER: &str = "[MASK]";

const PLAN_STREAM: u64 = 0x706c_616e;
const APPLY_STREAM: u64 = 0x6170_706c;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one `(chunk, stream)` pair, independent of processing order.
pub fn derive_seed(base: u64, chunk_id: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ chunk_id) ^ stream)
}

fn chunk_rng(base: u64, chunk_id: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, chunk_id, stream))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskPolicy {
    /// Minimum fraction of chunk tokens to mask.
    pub budget: f64,
    pub p_mask: f64,
    pub p_random: f64,
    pub p_keep: f64,
    pub rng_seed: u64,
}

impl Default for MaskPolicy {
    fn default() -> Self {
        Self {
            budget: 0.20,
            p_mask: 0.8,
            p_random: 0.1,
            p_keep: 0.1,
            rng_seed: 0,
        }
    }
}

impl MaskPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.budget > 0.0 && self.budget < 1.0) {
            return Err(Error::Validation(format!("budget {} outside (0, 1)", self.budget)));
        }
        let ps = [self.p_mask, self.p_random, self.p_keep];
        if ps.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Validation(format!("replacement probabilities {ps:?} outside [0, 1]")));
        }
        if (ps.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!("replacement probabilities {ps:?} do not sum to 1")));
        }
        Ok(())
    }

    /// Parses the `mask:random:keep` form, e.g. `0.8:0.1:0.1`.
    pub fn with_ratios(mut self, spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        let parsed: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Validation(format!("bad policy {spec:?}")))?;
        let [m, r, k] = parsed[..] else {
            return Err(Error::Validation(format!("policy {spec:?} needs three ratios")));
        };
        self.p_mask = m;
        self.p_random = r;
        self.p_keep = k;
        self.validate()?;
        Ok(self)
    }
}

/// Number of tokens that must be masked in a chunk of `len` tokens.
pub fn budget_threshold(budget: f64, len: usize) -> usize {
    // The epsilon absorbs representation error, e.g. 0.2 * 15 = 3.0000000000000004.
    (budget * len as f64 - 1e-9).ceil().max(0.0) as usize
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskPlan {
    pub chunk_id: u64,
    /// Sorted group indices.
    pub masked_groups: Vec<usize>,
    /// Sorted token positions; exactly the union of the masked groups.
    pub masked_positions: Vec<usize>,
    /// Sorted lexicon-driven group indices, a subset of `masked_groups`.
    pub lexicon_groups: Vec<usize>,
}

/// Chooses which word groups of `chunk` to mask.
///
/// `lexicon_groups` are indices into `chunk.groups`; out-of-range indices
/// are ignored.
pub fn plan_masks(chunk: &TokenChunk, lexicon_groups: &[usize], policy: &MaskPolicy) -> MaskPlan {
    let n_groups = chunk.groups.len();
    let mut is_lex = vec![false; n_groups];
    for &g in lexicon_groups {
        if g < n_groups {
            is_lex[g] = true;
        }
    }
    let lexicon: Vec<usize> = (0..n_groups).filter(|&g| is_lex[g]).collect();
    let mut selected = is_lex.clone();
    let mut covered: usize = lexicon.iter().map(|&g| chunk.groups[g].len).sum();
    let threshold = budget_threshold(policy.budget, chunk.ids.len());

    if covered < threshold {
        let mut candidates: Vec<usize> = (0..n_groups).filter(|&g| !is_lex[g]).collect();
        candidates.shuffle(&mut chunk_rng(policy.rng_seed, chunk.chunk_id(), PLAN_STREAM));
        for g in candidates {
            if covered >= threshold {
                break;
            }
            selected[g] = true;
            covered += chunk.groups[g].len;
        }
    }

    let masked_groups: Vec<usize> = (0..n_groups).filter(|&g| selected[g]).collect();
    let masked_positions = masked_groups
        .iter()
        .flat_map(|&g| chunk.groups[g].range())
        .collect();
    MaskPlan {
        chunk_id: chunk.chunk_id(),
        masked_groups,
        masked_positions,
        lexicon_groups: lexicon,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Replacement {
    Mask,
    Random,
    Keep,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskedExample {
    pub input_ids: Vec<u32>,
    /// Original id at masked positions, [`IGNORE_INDEX`] elsewhere.
    pub labels: Vec<i64>,
    pub plan: MaskPlan,
    /// What happened at each entry of `plan.masked_positions`.
    pub replacements: Vec<Replacement>,
}

/// Applies the replacement policy at every planned position.
pub fn apply_masks(chunk: &TokenChunk, plan: &MaskPlan, vocab: &Vocab, policy: &MaskPolicy) -> MaskedExample {
    let mut rng = chunk_rng(policy.rng_seed, chunk.chunk_id(), APPLY_STREAM);
    let mut input_ids = chunk.ids.clone();
    let mut labels = vec![IGNORE_INDEX; chunk.ids.len()];
    let regular = vocab.regular_ids();
    let mut replacements = Vec::with_capacity(plan.masked_positions.len());
    for &p in &plan.masked_positions {
        labels[p] = i64::from(chunk.ids[p]);
        let r: f64 = rng.random();
        let kind = if r < policy.p_mask {
            input_ids[p] = vocab.mask;
            Replacement::Mask
        } else if r < policy.p_mask + policy.p_random {
            input_ids[p] = regular[rng.random_range(0..regular.len())];
            Replacement::Random
        } else {
            Replacement::Keep
        };
        replacements.push(kind);
    }
    MaskedExample {
        input_ids,
        labels,
        plan: plan.clone(),
        replacements,
    }
}

/// Plans and applies masking for one chunk using the chunk's own lexicon
/// groups.
pub fn mask_chunk(chunk: &TokenChunk, vocab: &Vocab, policy: &MaskPolicy) -> MaskedExample {
    let plan = plan_masks(chunk, &chunk.lexicon_groups, policy);
    apply_masks(chunk, &plan, vocab, policy)
}

/// Serialized form of a masked example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskedRecord {
    pub input_ids: Vec<u32>,
    pub labels: Vec<i64>,
    pub masked_groups: Vec<Span>,
    pub lexicon_groups: Vec<Span>,
}

impl MaskedRecord {
    pub fn new(chunk: &TokenChunk, example: &MaskedExample) -> Self {
        let spans = |gs: &[usize]| gs.iter().map(|&g| chunk.groups[g]).collect();
        Self {
            input_ids: example.input_ids.clone(),
            labels: example.labels.clone(),
            masked_groups: spans(&example.plan.masked_groups),
            lexicon_groups: spans(&example.plan.lexicon_groups),
        }
    }
}

/// A cloze-style probe sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Probe {
    pub original: String,
    pub masked: String,
    pub target: String,
}

/// Replaces each character of `sentence[start..start + len]` (character
/// indices) with one `[MASK]` marker.
pub fn make_probe(sentence: &str, start: usize, len: usize) -> Result<Probe> {
    let chars: Vec<char> = sentence.chars().collect();
    let end = start
        .checked_add(len)
        .filter(|&e| e <= chars.len() && len > 0)
        .ok_or_else(|| {
            Error::Validation(format!(
                "probe span ({start}, {len}) out of bounds for a {}-character sentence",
                chars.len()
            ))
        })?;
    let mut masked = String::with_capacity(sentence.len() + len * MASK_MARKER.len());
    masked.extend(&chars[..start]);
    for _ in start..end {
        masked.push_str(MASK_MARKER);
    }
    masked.extend(&chars[end..]);
    Ok(Probe {
        original: sentence.to_owned(),
        masked,
        target: chars[start..end].iter().collect(),
    })
}

/// Masks the first occurrence of `target` in `sentence`.
pub fn probe_for(sentence: &str, target: &str) -> Result<Probe> {
    let byte = sentence
        .find(target)
        .filter(|_| !target.is_empty())
        .ok_or_else(|| Error::Validation(format!("target {target:?} not found in {sentence:?}")))?;
    let start = sentence[..byte].chars().count();
    make_probe(sentence, start, target.chars().count())
}
