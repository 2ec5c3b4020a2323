//! Corpus records, segmentation and the `segment` command.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use lexmask_core::clean::RawPost;
use lexmask_core::lexicon::{load_lexicon, Lexicon};
use lexmask_core::segment::{build_dict, read_word_lists, segment_fmm, SegmentDict, SegmentedDoc, Span};
use lexmask_core::{Error, Result};
use serde::{Deserialize, Serialize};

use super::{display, displays, for_each_batch, Ctx};
use crate::args::{CorpusArgs, InputFormat, SegArgs, SegmentArgs};
use crate::config::{required, FileConfig};
use crate::error::require_files;
use crate::io::{self, detect_format, parse_json, Line, LineReader};
use crate::manifest::write_manifest;

/// One corpus line in any of the pipeline's text formats: raw posts,
/// cleaned posts and segmented posts all share these keys.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user: Option<String>,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub original_length: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spans: Option<Vec<Span>>,
}

/// Where a corpus comes from and how its lines are read.
#[derive(Debug, Clone, Serialize)]
pub struct CorpusSpec {
    pub input: PathBuf,
    pub input_format: InputFormat,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl CorpusSpec {
    pub fn resolve(input: &Path, args: CorpusArgs, file: &FileConfig) -> Result<Self> {
        let requested = args.input_format.or(file.input_format).unwrap_or(InputFormat::Auto);
        Ok(Self {
            input: input.to_path_buf(),
            input_format: detect_format(input, requested)?,
            source: args.source.or_else(|| file.source.clone()),
        })
    }

    pub fn parse(&self, line: &Line) -> Result<CorpusRecord> {
        match self.input_format {
            InputFormat::Text => Ok(CorpusRecord {
                source: self.source.clone(),
                user: None,
                text: line.text.clone(),
                original_length: None,
                spans: None,
            }),
            _ => {
                let mut rec: CorpusRecord = parse_json(&self.input, line)?;
                if rec.source.is_none() {
                    rec.source = self.source.clone();
                }
                Ok(rec)
            }
        }
    }

    /// A raw post; the source must come from the record or `--source`.
    pub fn parse_post(&self, line: &Line) -> Result<RawPost> {
        let rec = self.parse(line)?;
        let source_id = rec
            .source
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Error::malformed(&self.input, line.no, "record has no source (pass --source)"))?;
        Ok(RawPost {
            source_id,
            user_id: rec.user.unwrap_or_default(),
            text: rec.text,
        })
    }
}

/// Dictionary plus optional lexicon, loaded once per run.
pub struct Segmenter {
    pub dict: SegmentDict,
    pub lexicon: Lexicon,
    pub dict_paths: Vec<PathBuf>,
    pub lexicon_path: Option<PathBuf>,
}

impl Segmenter {
    pub fn load(args: SegArgs, file: &FileConfig) -> Result<Self> {
        let dict_paths = if args.dict.is_empty() { file.dict.clone() } else { args.dict };
        let lexicon_path = args.lexicon.or_else(|| file.lexicon.clone());
        require_files(dict_paths.iter().map(PathBuf::as_path).chain(lexicon_path.as_deref()))?;
        let lexicon = match &lexicon_path {
            Some(p) => load_lexicon(p)?,
            None => Lexicon::default(),
        };
        Self::with_lexicon(dict_paths, lexicon_path, lexicon)
    }

    pub fn with_lexicon(dict_paths: Vec<PathBuf>, lexicon_path: Option<PathBuf>, lexicon: Lexicon) -> Result<Self> {
        let words = read_word_lists(&dict_paths)?;
        let dict = build_dict(&words, &lexicon)?;
        Ok(Self {
            dict,
            lexicon,
            dict_paths,
            lexicon_path,
        })
    }

    /// Uses stored spans when the record has them, else segments the text.
    pub fn doc(&self, rec: &CorpusRecord, path: &Path, line: usize) -> Result<SegmentedDoc> {
        match &rec.spans {
            Some(spans) => SegmentedDoc::from_spans(&rec.text, spans.clone()).map_err(|e| match e {
                Error::Validation(m) => Error::malformed(path, line, m),
                other => other,
            }),
            None => Ok(segment_fmm(&rec.text, &self.dict)),
        }
    }

    pub fn input_paths(&self) -> Vec<&Path> {
        self.dict_paths
            .iter()
            .map(PathBuf::as_path)
            .chain(self.lexicon_path.as_deref())
            .collect()
    }

    pub fn config(&self) -> SegmenterConfig {
        SegmenterConfig {
            dict: displays(&self.dict_paths),
            lexicon: self.lexicon_path.as_deref().map(display),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SegmenterConfig {
    pub dict: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lexicon: Option<String>,
}

#[derive(Serialize)]
struct SegmentConfig<'a> {
    corpus: &'a CorpusSpec,
    output: String,
    #[serde(flatten)]
    segmenter: SegmenterConfig,
}

pub fn run_segment(ctx: &Ctx, a: SegmentArgs) -> Result<()> {
    let f = &ctx.file;
    let input = required(a.io.input.or_else(|| f.input.clone()), "input")?;
    let output = required(a.io.output.or_else(|| f.output.clone()), "output")?;
    require_files([input.as_path()])?;
    let spec = CorpusSpec::resolve(&input, a.corpus, f)?;
    let seg = Segmenter::load(a.seg, f)?;

    let mut out = io::create(&output)?;
    let mut reader = LineReader::open(&input)?;
    let (mut docs, mut words) = (0u64, 0u64);
    for_each_batch(
        ctx,
        &mut reader,
        |line| {
            let mut rec = spec.parse(line)?;
            let doc = seg.doc(&rec, &input, line.no)?;
            let n = doc.word_count() as u64;
            rec.spans = Some(doc.spans().to_vec());
            Ok((serde_json::to_string(&rec).expect("record serializes"), n))
        },
        |batch| {
            for (json, n) in batch {
                docs += 1;
                words += n;
                writeln!(out, "{json}").map_err(io::write_err(&output))?;
            }
            Ok(())
        },
    )?;
    io::finish(&output, out)?;

    let config = SegmentConfig {
        corpus: &spec,
        output: display(&output),
        segmenter: seg.config(),
    };
    let mut inputs = vec![input.as_path()];
    inputs.extend(seg.input_paths());
    let counts = BTreeMap::from([("documents", docs), ("words", words)]);
    write_manifest("segment", &config, &inputs, &output, counts, None)
}
