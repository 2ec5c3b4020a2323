//! Declarative TOML run configuration.
//!
//! Every key is optional and is overridden by the matching flag or
//! `LEXMASK_*` variable. Relative paths resolve against the file's directory.

use std::path::{Path, PathBuf};

use lexmask_core::clean::CleaningConfig;
use lexmask_core::{Error, Result};
use serde::Deserialize;

use crate::args::{ChunkFormat, InputFormat};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub input_format: Option<InputFormat>,
    pub source: Option<String>,
    #[serde(default)]
    pub dict: Vec<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub seeds: Option<PathBuf>,
    pub vocab: Option<PathBuf>,
    pub chunk_len: Option<usize>,
    pub format: Option<ChunkFormat>,
    pub budget: Option<f64>,
    pub policy: Option<String>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub min_chars: Option<usize>,
    pub averaging: Option<String>,
    pub positive: Option<String>,
    pub folds: Option<usize>,
    pub cleaning: Option<CleaningConfig>,
    #[serde(default)]
    pub lpa: LpaFile,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LpaFile {
    pub window: Option<usize>,
    pub min_weight: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub cutoff: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: FileConfig = toml::from_str(&text).map_err(|e| {
            let line = e.span().map_or(0, |s| text[..s.start].matches('\n').count() + 1);
            Error::malformed(path, line, e.message().to_owned())
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [&mut cfg.input, &mut cfg.output, &mut cfg.lexicon, &mut cfg.seeds, &mut cfg.vocab]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        cfg.dict.iter_mut().for_each(fix);
        Ok(cfg)
    }
}

/// A required setting that neither flag, environment nor config supplied.
pub fn required<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::Validation(format!("--{flag} is required")))
}
