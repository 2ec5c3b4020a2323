use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::segment::SegmentedDoc;

/// Windowed co-occurrence counts over a segmented corpus.
///
/// Partitions of a corpus can be counted independently and merged; the
/// merge is associative and commutative.
#[derive(Debug, Clone, Default)]
pub struct CooccurrenceCounts {
    nodes: BTreeSet<String>,
    /// Unordered pair counts keyed by `(a, b)` with `a < b`.
    pairs: HashMap<(String, String), u64>,
}

/// Spans that take part in the association graph: not whitespace and not
/// pure punctuation.
fn is_content_word(w: &str) -> bool {
    w.chars().any(char::is_alphanumeric)
}

impl CooccurrenceCounts {
    pub fn new() -> Self {
        Self::default()
    }

    /// Counts every pair of distinct content words at most `window`
    /// positions apart.
    pub fn add_doc(&mut self, doc: &SegmentedDoc, window: usize) {
        let words: Vec<&str> = doc.words().filter(|w| is_content_word(w)).collect();
        for w in &words {
            if !self.nodes.contains(*w) {
                self.nodes.insert((*w).to_owned());
            }
        }
        for (i, a) in words.iter().enumerate() {
            for b in words.iter().skip(i + 1).take(window) {
                if a == b {
                    continue;
                }
                let key = if a < b { (a, b) } else { (b, a) };
                *self
                    .pairs
                    .entry(((*key.0).to_owned(), (*key.1).to_owned()))
                    .or_default() += 1;
            }
        }
    }

    pub fn merge(mut self, other: CooccurrenceCounts) -> Self {
        self.nodes.extend(other.nodes);
        for (k, n) in other.pairs {
            *self.pairs.entry(k).or_default() += n;
        }
        self
    }

    /// Converts counts into a PPMI-weighted graph.
    ///
    /// With the symmetric co-occurrence matrix `M`, its total `S` and row
    /// sums `r`, `ppmi(u, v) = max(0, ln(M[u][v] * S / (r[u] * r[v])))`.
    /// Edges with zero weight or weight below `min_weight` are dropped; all
    /// observed words stay as nodes.
    pub fn into_graph(self, min_weight: f64) -> AssociationGraph {
        let nodes: Vec<String> = self.nodes.into_iter().collect();
        let index: HashMap<&str, usize> = nodes.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
        let mut row = vec![0u64; nodes.len()];
        let mut total = 0u64;
        let mut pairs: Vec<(usize, usize, u64)> = self
            .pairs
            .iter()
            .map(|((a, b), &n)| (index[a.as_str()], index[b.as_str()], n))
            .collect();
        pairs.sort_unstable();
        for &(u, v, n) in &pairs {
            row[u] += n;
            row[v] += n;
            total += 2 * n;
        }
        let mut edges = Vec::new();
        for (u, v, n) in pairs {
            let pmi = ((n as f64) * (total as f64) / ((row[u] as f64) * (row[v] as f64))).ln();
            if pmi > 0.0 && pmi >= min_weight {
                edges.push((u, v, pmi));
            }
        }
        drop(index);
        AssociationGraph::from_indexed(nodes, edges)
    }
}

/// Undirected weighted word graph.
#[derive(Debug, Clone, Default)]
pub struct AssociationGraph {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    /// Neighbors of each node, sorted by neighbor index.
    adj: Vec<Vec<(usize, f64)>>,
    degree: Vec<f64>,
}

impl AssociationGraph {
    /// Builds a graph from named edges. Each undirected edge is listed once.
    pub fn from_edges<S: AsRef<str>>(nodes: &[S], edges: &[(S, S, f64)]) -> Result<Self> {
        let names: Vec<String> = nodes.iter().map(|n| n.as_ref().to_owned()).collect();
        let mut index = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate node {n:?}")));
            }
        }
        let mut seen = BTreeSet::new();
        let mut indexed = Vec::with_capacity(edges.len());
        for (a, b, w) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            let lookup = |n: &str| {
                index
                    .get(n)
                    .copied()
                    .ok_or_else(|| Error::Validation(format!("edge endpoint {n:?} is not a node")))
            };
            let (u, v) = (lookup(a)?, lookup(b)?);
            if u == v {
                return Err(Error::Validation(format!("self-loop on {a:?}")));
            }
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::Validation(format!("edge ({a:?}, {b:?}) has weight {w}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::Validation(format!("duplicate edge ({a:?}, {b:?})")));
            }
            indexed.push((u, v, *w));
        }
        Ok(Self::from_indexed(names, indexed))
    }

    fn from_indexed(nodes: Vec<String>, edges: Vec<(usize, usize, f64)>) -> Self {
        let mut adj = vec![Vec::new(); nodes.len()];
        for (u, v, w) in edges {
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        for list in &mut adj {
            list.sort_by_key(|&(n, _)| n);
        }
        let degree = adj.iter().map(|l| l.iter().map(|&(_, w)| w).sum()).collect();
        let index = nodes.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        Self {
            nodes,
            index,
            adj,
            degree,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_index(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn neighbors(&self, node: usize) -> &[(usize, f64)] {
        &self.adj[node]
    }

    /// Sum of incident edge weights.
    pub fn degree(&self, node: usize) -> f64 {
        self.degree[node]
    }

    pub fn weight(&self, a: &str, b: &str) -> Option<f64> {
        let (u, v) = (self.node_index(a)?, self.node_index(b)?);
        self.adj[u]
            .binary_search_by_key(&v, |&(n, _)| n)
            .ok()
            .map(|i| self.adj[u][i].1)
    }

    /// Every undirected edge once, as `(u, v, w)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .filter(move |&&(v, _)| u < v)
                .map(move |&(v, w)| (u, v, w))
        })
    }
}

pub fn build_association_graph<'a, I>(corpus: I, window: usize, min_weight: f64) -> Result<AssociationGraph>
where
    I: IntoIterator<Item = &'a SegmentedDoc>,
{
    if window == 0 {
        return Err(Error::Validation("co-occurrence window must be at least 1".into()));
    }
    let mut counts = CooccurrenceCounts::new();
    for doc in corpus {
        counts.add_doc(doc, window);
    }
    Ok(counts.into_graph(min_weight))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(words: &[&str]) -> SegmentedDoc {
        SegmentedDoc::from_words(words)
    }

    #[test]
    fn single_pair_weight() {
        // M = [[0,1],[1,0]], S = 2, r = (1,1): ln(1 * 2 / 1) = ln 2.
        let g = build_association_graph(&[doc(&["A", "B"])], 1, 0.0).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert!((g.weight("A", "B").unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(g.weight("A", "B"), g.weight("B", "A"));
    }

    #[test]
    fn disjoint_docs_give_two_components() {
        let g = build_association_graph(&[doc(&["A", "B", "C"]), doc(&["X", "Y"])], 2, 0.0).unwrap();
        let mut comp = vec![usize::MAX; g.node_count()];
        let mut n_comp = 0;
        for start in 0..g.node_count() {
            if comp[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            comp[start] = n_comp;
            while let Some(u) = stack.pop() {
                for &(v, _) in g.neighbors(u) {
                    if comp[v] == usize::MAX {
                        comp[v] = n_comp;
                        stack.push(v);
                    }
                }
            }
            n_comp += 1;
        }
        assert_eq!(n_comp, 2);
    }

    #[test]
    fn infinite_threshold_keeps_nodes_only() {
        let g = build_association_graph(&[doc(&["A", "B", "C"])], 2, f64::INFINITY).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn empty_corpus_and_bad_window() {
        let g = build_association_graph(std::iter::empty(), 3, 0.0).unwrap();
        assert_eq!(g.node_count(), 0);
        assert!(build_association_graph(&[doc(&["A"])], 0, 0.0).is_err());
    }

    #[test]
    fn whitespace_and_punctuation_are_not_nodes() {
        let g = build_association_graph(&[doc(&["难过", "，", " ", "哭"])], 1, 0.0).unwrap();
        assert_eq!(g.nodes(), ["哭", "难过"]);
        assert!(g.weight("难过", "哭").is_some());
    }

    #[test]
    fn from_edges_validates() {
        assert!(AssociationGraph::from_edges(&["a"], &[("a", "a", 1.0)]).is_err());
        assert!(AssociationGraph::from_edges(&["a", "b"], &[("a", "b", -1.0)]).is_err());
        assert!(AssociationGraph::from_edges(&["a", "b"], &[("a", "c", 1.0)]).is_err());
        assert!(AssociationGraph::from_edges(&["a", "b"], &[("a", "b", 1.0), ("b", "a", 2.0)]).is_err());
        let g = AssociationGraph::from_edges(&["a", "b", "c"], &[("a", "b", 1.5), ("b", "c", 0.5)]).unwrap();
        assert_eq!(g.degree(1), 2.0);
    }

    /// Dense PPMI straight from the definition, counting window pairs by
    /// enumerating all position pairs of each document.
    fn dense_ppmi(docs: &[Vec<&str>], window: usize) -> HashMap<(String, String), f64> {
        let vocab: Vec<&str> = {
            let s: BTreeSet<&str> = docs.iter().flatten().copied().collect();
            s.into_iter().collect()
        };
        let n = vocab.len();
        let id = |w: &str| vocab.iter().position(|v| *v == w).unwrap();
        let mut m = vec![vec![0.0f64; n]; n];
        for d in docs {
            for i in 0..d.len() {
                for j in 0..d.len() {
                    if i != j && i.abs_diff(j) <= window && d[i] != d[j] {
                        m[id(d[i])][id(d[j])] += 1.0;
                    }
                }
            }
        }
        let total: f64 = m.iter().flatten().sum();
        let rows: Vec<f64> = m.iter().map(|r| r.iter().sum()).collect();
        let mut out = HashMap::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if m[u][v] > 0.0 {
                    let pmi = (m[u][v] * total / (rows[u] * rows[v])).ln();
                    out.insert((vocab[u].to_owned(), vocab[v].to_owned()), pmi.max(0.0));
                }
            }
        }
        out
    }

    proptest! {
        #[test]
        fn ppmi_matches_dense_definition(
            docs in prop::collection::vec(
                prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d", "e"]), 0..10),
                1..5,
            ),
            window in 1usize..4,
            split in 0usize..5,
        ) {
            let segmented: Vec<SegmentedDoc> = docs.iter().map(|d| doc(d)).collect();
            let split = split.min(segmented.len());
            let mut left = CooccurrenceCounts::new();
            for d in &segmented[..split] { left.add_doc(d, window); }
            let mut right = CooccurrenceCounts::new();
            for d in &segmented[split..] { right.add_doc(d, window); }
            let g = right.merge(left).into_graph(0.0);
            let expected = dense_ppmi(&docs, window);
            for ((a, b), w) in &expected {
                match g.weight(a, b) {
                    Some(got) => prop_assert!((got - w).abs() < 1e-12),
                    None => prop_assert_eq!(*w, 0.0),
                }
            }
            prop_assert_eq!(g.edge_count(), expected.values().filter(|w| **w > 0.0).count());
            for u in 0..g.node_count() {
                let sum: f64 = g.neighbors(u).iter().map(|&(_, w)| w).sum();
                prop_assert!((sum - g.degree(u)).abs() < 1e-12);
                prop_assert!(g.neighbors(u).iter().all(|&(v, w)| v != u && w >= 0.0));
            }
        }
    }
}
