//! Line-oriented input, JSONL output and file digests.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use lexmask_core::{Error, Result};
use serde::de::DeserializeOwned;
use sha2::{Digest, Sha256};

use crate::args::InputFormat;

/// Records handed to the worker pool at a time.
pub const BATCH: usize = 8192;

pub struct Line {
    /// 1-based line number in the input file.
    pub no: usize,
    pub text: String,
}

/// Reads non-blank lines in batches, rejecting invalid UTF-8 with the
/// offending line number.
pub struct LineReader {
    path: PathBuf,
    inner: BufReader<File>,
    no: usize,
    buf: Vec<u8>,
}

impl LineReader {
    pub fn open(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            inner: BufReader::with_capacity(1 << 20, file),
            no: 0,
            buf: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn next_line(&mut self) -> Result<Option<Line>> {
        loop {
            self.buf.clear();
            let n = self
                .inner
                .read_until(b'\n', &mut self.buf)
                .map_err(|e| Error::io(&self.path, e))?;
            if n == 0 {
                return Ok(None);
            }
            self.no += 1;
            while matches!(self.buf.last(), Some(b'\n' | b'\r')) {
                self.buf.pop();
            }
            if self.buf.iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            let text = String::from_utf8(std::mem::take(&mut self.buf)).map_err(|e| {
                Error::malformed(
                    &self.path,
                    self.no,
                    format!("invalid UTF-8 at byte offset {}", e.utf8_error().valid_up_to()),
                )
            })?;
            return Ok(Some(Line { no: self.no, text }));
        }
    }

    /// Up to `max` lines; empty at end of input.
    pub fn next_batch(&mut self, max: usize) -> Result<Vec<Line>> {
        let mut out = Vec::with_capacity(max.min(BATCH));
        while out.len() < max {
            match self.next_line()? {
                Some(l) => out.push(l),
                None => break,
            }
        }
        Ok(out)
    }
}

pub fn parse_json<T: DeserializeOwned>(path: &Path, line: &Line) -> Result<T> {
    serde_json::from_str(&line.text).map_err(|e| Error::malformed(path, line.no, e.to_string()))
}

/// Resolves `auto` by peeking at the first non-blank line.
pub fn detect_format(path: &Path, requested: InputFormat) -> Result<InputFormat> {
    if requested != InputFormat::Auto {
        return Ok(requested);
    }
    let mut r = LineReader::open(path)?;
    Ok(match r.next_line()? {
        Some(l) if l.text.trim_start().starts_with('{') => InputFormat::Jsonl,
        Some(_) => InputFormat::Text,
        None => InputFormat::Jsonl,
    })
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(|f| BufWriter::with_capacity(1 << 20, f))
        .map_err(|e| Error::io(path, e))
}

pub fn finish(path: &Path, mut w: BufWriter<File>) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 20];
    loop {
        let n = f.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `value` as pretty JSON to `output`, or stdout when absent.
pub fn emit_json<T: serde::Serialize>(output: Option<&Path>, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    match output {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| Error::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{text}").and_then(|()| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::io("<stdout>", e)),
                _ => Ok(()),
            }
        }
    }
}
