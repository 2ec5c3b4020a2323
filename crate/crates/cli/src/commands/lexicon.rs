use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use lexmask_core::lexicon::{expand_lexicon, load_lexicon, load_seed_list, propagate_labels, CooccurrenceCounts, Lexicon};
use lexmask_core::{Error, Result};
use serde::Serialize;

use super::corpus::{CorpusSpec, Segmenter, SegmenterConfig};
use super::{display, for_each_batch, Ctx};
use crate::args::ExpandArgs;
use crate::config::required;
use crate::error::require_files;
use crate::io::{self, LineReader};
use crate::manifest::write_manifest;

#[derive(Serialize)]
struct ExpandConfig<'a> {
    corpus: &'a CorpusSpec,
    output: String,
    #[serde(flatten)]
    segmenter: SegmenterConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    seeds: Option<String>,
    window: usize,
    min_weight: f64,
    tol: f64,
    max_iter: usize,
    cutoff: f64,
    skip_missing_seeds: bool,
}

pub fn run(ctx: &Ctx, a: ExpandArgs) -> Result<()> {
    let f = &ctx.file;
    let input = required(a.io.input.or_else(|| f.input.clone()), "input")?;
    let output = required(a.io.output.or_else(|| f.output.clone()), "output")?;
    let lexicon_path = a.seg.lexicon.or_else(|| f.lexicon.clone());
    let seeds_path = a.seeds.or_else(|| f.seeds.clone());
    if lexicon_path.is_none() && seeds_path.is_none() {
        return Err(Error::Validation("--lexicon or --seeds is required".into()));
    }
    require_files([input.as_path()].into_iter().chain(lexicon_path.as_deref()).chain(seeds_path.as_deref()))?;
    let window = a.window.or(f.lpa.window).unwrap_or(2);
    let min_weight = a.min_weight.or(f.lpa.min_weight).unwrap_or(0.0);
    let tol = a.tol.or(f.lpa.tol).unwrap_or(1e-6);
    let max_iter = a.max_iter.or(f.lpa.max_iter).unwrap_or(1000);
    let cutoff = a.cutoff.or(f.lpa.cutoff).unwrap_or(0.5);
    if window == 0 {
        return Err(Error::Validation("--window must be at least 1".into()));
    }
    if !(cutoff > 0.0 && cutoff <= 1.0) {
        return Err(Error::Validation(format!("--cutoff {cutoff} outside (0, 1]")));
    }

    let mut lexicon = match &lexicon_path {
        Some(p) => load_lexicon(p)?,
        None => Lexicon::default(),
    };
    if let Some(p) = &seeds_path {
        for w in load_seed_list(p)?.words() {
            lexicon.insert(w.to_owned(), 1.0, true)?;
        }
    }
    let dict_paths = if a.seg.dict.is_empty() { f.dict.clone() } else { a.seg.dict };
    require_files(dict_paths.iter().map(|p| p.as_path()))?;
    let seg = Segmenter::with_lexicon(dict_paths, lexicon_path.clone(), lexicon)?;
    let spec = CorpusSpec::resolve(&input, a.corpus, f)?;

    let mut counts = CooccurrenceCounts::new();
    let mut reader = LineReader::open(&input)?;
    let mut documents = 0u64;
    for_each_batch(
        ctx,
        &mut reader,
        |line| {
            let rec = spec.parse(line)?;
            let doc = seg.doc(&rec, &input, line.no)?;
            let mut c = CooccurrenceCounts::new();
            c.add_doc(&doc, window);
            Ok(c)
        },
        |batch| {
            documents += batch.len() as u64;
            let partial = batch.into_iter().fold(CooccurrenceCounts::new(), CooccurrenceCounts::merge);
            counts = std::mem::take(&mut counts).merge(partial);
            Ok(())
        },
    )?;
    let graph = counts.into_graph(min_weight);

    let mut seeds = Vec::new();
    let mut missing = 0u64;
    for s in seg.lexicon.seeds() {
        if graph.node_index(s).is_some() {
            seeds.push(s);
        } else if a.skip_missing_seeds {
            missing += 1;
        } else {
            return Err(Error::UnknownSeed(s.to_owned()));
        }
    }
    let prop = propagate_labels(&graph, &seeds, tol, max_iter)?;
    if !prop.converged {
        eprintln!("lexmask: label propagation stopped after {max_iter} iterations without converging");
    }
    let scores: HashMap<String, f64> = prop.scores.into_iter().collect();
    let expanded = expand_lexicon(&seg.lexicon, &scores, cutoff)?;

    let mut out = io::create(&output)?;
    expanded.write_tsv(&mut out).map_err(io::write_err(&output))?;
    io::finish(&output, out)?;

    let config = ExpandConfig {
        corpus: &spec,
        output: display(&output),
        segmenter: seg.config(),
        seeds: seeds_path.as_deref().map(display),
        window,
        min_weight,
        tol,
        max_iter,
        cutoff,
        skip_missing_seeds: a.skip_missing_seeds,
    };
    let mut inputs: Vec<&Path> = vec![input.as_path()];
    inputs.extend(seg.input_paths());
    inputs.extend(seeds_path.as_deref());
    let counts = BTreeMap::from([
        ("documents", documents),
        ("nodes", graph.node_count() as u64),
        ("edges", graph.edge_count() as u64),
        ("seeds", seeds.len() as u64),
        ("missing_seeds", missing),
        ("iterations", prop.iterations as u64),
        ("converged", u64::from(prop.converged)),
        ("lexicon_before", seg.lexicon.len() as u64),
        ("lexicon_after", expanded.len() as u64),
    ]);
    write_manifest("expand-lexicon", &config, &inputs, &output, counts, None)
}
