//! Test-only generators and independent reference implementations.
//!
//! Nothing here calls into the code paths it is used to check: the oracles
//! recompute results from first principles with dense or exhaustive loops.
#![allow(dead_code)]

use std::collections::BTreeSet;

use lexmask_core::chunker::{ChunkOrigin, TokenChunk, Vocab};
use lexmask_core::segment::Span;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Vocabulary of the five specials plus `n` regular tokens.
pub fn synthetic_vocab(n: usize) -> Vocab {
    let mut tokens: Vec<String> = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    tokens.extend((0..n).map(|i| format!("tok{i}")));
    Vocab::from_tokens(tokens).unwrap()
}

/// A random chunk of `len` tokens with word groups of 1..=`max_word` tokens
/// and a per-chunk lexicon density drawn from a spread of regimes (none,
/// sparse, dense, everything).
pub fn random_chunk(rng: &mut ChaCha8Rng, chunk_id: u64, len: usize, max_word: usize) -> TokenChunk {
    let density = [0.0, 0.02, 0.08, 0.25, 0.6, 1.0][rng.random_range(0..6)];
    let mut groups = Vec::new();
    let mut lexicon_groups = Vec::new();
    let mut pos = 0;
    while pos < len {
        let l = rng.random_range(1..=max_word).min(len - pos);
        if rng.random_bool(density) {
            lexicon_groups.push(groups.len());
        }
        groups.push(Span::new(pos, l));
        pos += l;
    }
    let ids = (0..len).map(|_| rng.random_range(5..1000u32)).collect();
    TokenChunk {
        ids,
        groups,
        lexicon_groups,
        origin: ChunkOrigin {
            chunk_id,
            ..Default::default()
        },
    }
}

/// Dense-matrix label propagation iterated until the update stops changing
/// by more than 1e-15 (or `max_iter` sweeps).
pub fn dense_lpa(n: usize, edges: &[(usize, usize, f64)], seeds: &[usize], max_iter: usize) -> Vec<f64> {
    let mut w = vec![vec![0.0f64; n]; n];
    for &(u, v, x) in edges {
        w[u][v] = x;
        w[v][u] = x;
    }
    let seed: Vec<bool> = (0..n).map(|i| seeds.contains(&i)).collect();
    let mut f: Vec<f64> = seed.iter().map(|&s| if s { 1.0 } else { 0.0 }).collect();
    for _ in 0..max_iter {
        let mut g = vec![0.0; n];
        for v in 0..n {
            let d: f64 = (0..n).map(|u| w[v][u]).sum();
            g[v] = if seed[v] {
                1.0
            } else if d > 0.0 {
                (0..n).map(|u| w[v][u] * f[u]).sum::<f64>() / d
            } else {
                0.0
            };
        }
        let delta = (0..n).map(|i| (g[i] - f[i]).abs()).fold(0.0, f64::max);
        f = g;
        if delta < 1e-15 {
            break;
        }
    }
    f
}

/// Random undirected graph on `n` nodes: edge probability `p`, weights in (0, 2].
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<(usize, usize, f64)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random_bool(p) {
                edges.push((u, v, rng.random_range(0.01..2.0)));
            }
        }
    }
    edges
}

#[derive(Debug, Clone, Copy)]
pub struct OracleScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn frac(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

/// Scores for a single class from scanning every sample; F1 from the
/// count form `2tp / (2tp + fp + fn)`.
fn class_scores(golds: &[BTreeSet<usize>], preds: &[BTreeSet<usize>], class: usize) -> (f64, f64, f64, f64) {
    let (mut tp, mut fp, mut fn_) = (0.0, 0.0, 0.0);
    for (g, p) in golds.iter().zip(preds) {
        match (g.contains(&class), p.contains(&class)) {
            (true, true) => tp += 1.0,
            (false, true) => fp += 1.0,
            (true, false) => fn_ += 1.0,
            (false, false) => {}
        }
    }
    (tp, fp, fn_, frac(2.0 * tp, 2.0 * tp + fp + fn_))
}

pub fn oracle_binary(golds: &[BTreeSet<usize>], preds: &[BTreeSet<usize>], positive: usize) -> OracleScores {
    let (tp, fp, fn_, f1) = class_scores(golds, preds, positive);
    OracleScores {
        precision: frac(tp, tp + fp),
        recall: frac(tp, tp + fn_),
        f1,
    }
}

pub fn oracle_macro(golds: &[BTreeSet<usize>], preds: &[BTreeSet<usize>], n_classes: usize) -> OracleScores {
    let mut s = OracleScores { precision: 0.0, recall: 0.0, f1: 0.0 };
    for c in 0..n_classes {
        let (tp, fp, fn_, f1) = class_scores(golds, preds, c);
        s.precision += frac(tp, tp + fp);
        s.recall += frac(tp, tp + fn_);
        s.f1 += f1;
    }
    let n = n_classes as f64;
    OracleScores {
        precision: s.precision / n,
        recall: s.recall / n,
        f1: s.f1 / n,
    }
}

/// Micro averaging by enumerating every `(sample, class)` pair.
pub fn oracle_micro(golds: &[BTreeSet<usize>], preds: &[BTreeSet<usize>], n_classes: usize) -> OracleScores {
    let (mut tp, mut fp, mut fn_) = (0.0, 0.0, 0.0);
    for (g, p) in golds.iter().zip(preds) {
        for c in 0..n_classes {
            match (g.contains(&c), p.contains(&c)) {
                (true, true) => tp += 1.0,
                (false, true) => fp += 1.0,
                (true, false) => fn_ += 1.0,
                (false, false) => {}
            }
        }
    }
    OracleScores {
        precision: frac(tp, tp + fp),
        recall: frac(tp, tp + fn_),
        f1: frac(2.0 * tp, 2.0 * tp + fp + fn_),
    }
}

/// Greedy longest-match segmentation by scanning every dictionary entry at
/// every position; ASCII letter/digit runs stay together when no entry
/// matches.
pub fn brute_force_fmm(text: &str, words: &[String]) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let mut best = 0;
        for w in words {
            let wc: Vec<char> = w.chars().collect();
            if wc.len() > best && chars[i..].starts_with(&wc) {
                best = wc.len();
            }
        }
        if best == 0 {
            best = 1;
            if chars[i].is_ascii_alphanumeric() {
                while i + best < chars.len() && chars[i + best].is_ascii_alphanumeric() {
                    best += 1;
                }
            }
        }
        out.push(chars[i..i + best].iter().collect());
        i += best;
    }
    out
}

/// Characters the synthetic corpora are drawn from.
pub const HAN: &str = "我你他很好不想要今天明天真的太累难过开心伤心绝望崩溃痛苦失眠焦虑抑郁活着死去哭了笑生活工作学习朋友家人医生吃药睡觉夜晚世界希望";

/// Synthetic dictionary: every adjacent character pair of [`HAN`] plus a
/// few longer words.
pub fn synthetic_dictionary() -> Vec<String> {
    let chars: Vec<char> = HAN.chars().collect();
    let mut words: Vec<String> = chars.chunks(2).filter(|c| c.len() == 2).map(|c| c.iter().collect()).collect();
    words.extend(["失眠焦虑", "不想活了", "好难过"].map(String::from));
    words
}

pub fn synthetic_lexicon_words() -> Vec<String> {
    ["绝望", "崩溃", "痛苦", "失眠", "焦虑", "抑郁", "伤心", "难过", "不想活了"]
        .map(String::from)
        .to_vec()
}

/// Vocabulary covering [`HAN`] plus ASCII letters and digits.
pub fn han_vocab_tokens() -> Vec<String> {
    let mut tokens: Vec<String> = ["[PAD]", "[unused1]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
        .map(String::from)
        .to_vec();
    let mut seen = BTreeSet::new();
    for c in HAN.chars().chain('a'..='z').chain('0'..='9') {
        if seen.insert(c) {
            tokens.push(c.to_string());
        }
    }
    tokens
}

/// Short synthetic social-media posts, some carrying artifacts that the
/// cleaner removes.
pub fn synthetic_posts(rng: &mut ChaCha8Rng, n: usize) -> Vec<(String, String, String)> {
    let chars: Vec<char> = HAN.chars().collect();
    let sources = ["Zoufan", "Chaohua", "SWDD", "WU3D"];
    let decorations = ["", "", "", " http://t.cn/A6x9", "@小明 ", "#抑郁症#", "😭", "[泪]", " ok"];
    (0..n)
        .map(|_| {
            let len = rng.random_range(2..40);
            let mut text: String = (0..len).map(|_| chars[rng.random_range(0..chars.len())]).collect();
            let d = decorations[rng.random_range(0..decorations.len())];
            if rng.random_bool(0.5) {
                text.insert_str(0, d);
            } else {
                text.push_str(d);
            }
            (
                sources[rng.random_range(0..4)].to_string(),
                format!("u{}", rng.random_range(0..5000)),
                text,
            )
        })
        .collect()
}
