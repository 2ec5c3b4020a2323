use std::collections::BTreeMap;

use super::graph::AssociationGraph;
use crate::error::{Error, Result};

/// Outcome of a label propagation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    /// Relevance score of every graph node.
    pub scores: BTreeMap<String, f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `max_v |F_{t+1}(v) - F_t(v)|` after each iteration.
    pub residuals: Vec<f64>,
}

/// Clamped-average label propagation.
///
/// Seeds start (and stay) at 1, every other node at 0. Each iteration
/// replaces a non-seed score by the weight-averaged score of its neighbors;
/// nodes with no incident weight stay at 0. Iteration stops once the largest
/// per-node change drops below `tol`, or after `max_iter` iterations.
pub fn propagate_labels<S: AsRef<str>>(
    graph: &AssociationGraph,
    seeds: &[S],
    tol: f64,
    max_iter: usize,
) -> Result<Propagation> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Validation(format!("tolerance must be positive, got {tol}")));
    }
    let n = graph.node_count();
    let mut is_seed = vec![false; n];
    for s in seeds {
        let s = s.as_ref();
        let i = graph.node_index(s).ok_or_else(|| Error::UnknownSeed(s.to_owned()))?;
        is_seed[i] = true;
    }
    let mut current: Vec<f64> = is_seed.iter().map(|&s| if s { 1.0 } else { 0.0 }).collect();
    let mut next = vec![0.0; n];
    let mut residuals = Vec::new();
    let mut converged = false;
    for _ in 0..max_iter {
        let mut residual = 0.0f64;
        for v in 0..n {
            let value = if is_seed[v] {
                1.0
            } else {
                let deg = graph.degree(v);
                if deg > 0.0 {
                    let mass: f64 = graph.neighbors(v).iter().map(|&(u, w)| w * current[u]).sum();
                    // Rounding can push the average a hair past 1.
                    (mass / deg).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            };
            residual = residual.max((value - current[v]).abs());
            next[v] = value;
        }
        std::mem::swap(&mut current, &mut next);
        residuals.push(residual);
        if residual < tol {
            converged = true;
            break;
        }
    }
    let scores = graph
        .nodes()
        .iter()
        .cloned()
        .zip(current)
        .collect();
    Ok(Propagation {
        scores,
        iterations: residuals.len(),
        converged,
        residuals,
    })
}
