//! Length-prefixed binary chunk records.
//!
//! Layout: the 8-byte magic [`BINARY_MAGIC`], then per chunk a little-endian
//! `u32` payload length followed by the payload:
//!
//! ```text
//! chunk_id u64
//! n_ids u32, ids u32 * n_ids
//! n_groups u32, (start u32, len u32) * n_groups
//! n_lexicon u32, group index u32 * n_lexicon
//! n_origin u32, (doc_id u64, offset u32) * n_origin
//! ```

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::{ChunkOrigin, TokenChunk};
use crate::error::{Error, Result};
use crate::segment::Span;

pub const BINARY_MAGIC: &[u8; 8] = b"LXMCHK01";

pub fn write_binary_header<W: Write>(out: &mut W) -> std::io::Result<()> {
    out.write_all(BINARY_MAGIC)
}

pub fn write_binary_chunk<W: Write>(out: &mut W, chunk: &TokenChunk) -> std::io::Result<()> {
    let mut buf = Vec::with_capacity(32 + 4 * chunk.ids.len() + 8 * chunk.groups.len());
    buf.extend_from_slice(&chunk.origin.chunk_id.to_le_bytes());
    put_u32(&mut buf, chunk.ids.len());
    for &id in &chunk.ids {
        buf.extend_from_slice(&id.to_le_bytes());
    }
    put_u32(&mut buf, chunk.groups.len());
    for g in &chunk.groups {
        put_u32(&mut buf, g.start);
        put_u32(&mut buf, g.len);
    }
    put_u32(&mut buf, chunk.lexicon_groups.len());
    for &g in &chunk.lexicon_groups {
        put_u32(&mut buf, g);
    }
    put_u32(&mut buf, chunk.origin.doc_ids.len());
    for (&doc, &off) in chunk.origin.doc_ids.iter().zip(&chunk.origin.offsets) {
        buf.extend_from_slice(&doc.to_le_bytes());
        put_u32(&mut buf, off);
    }
    out.write_all(&(buf.len() as u32).to_le_bytes())?;
    out.write_all(&buf)
}

fn put_u32(buf: &mut Vec<u8>, v: usize) {
    buf.extend_from_slice(&(v as u32).to_le_bytes());
}

/// Reads every record of a binary chunk file. `path` is used for errors;
/// record numbers (1-based) stand in for line numbers.
pub fn read_binary_chunks<R: Read>(mut input: R, path: &Path) -> Result<Vec<TokenChunk>> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
    if bytes.len() < BINARY_MAGIC.len() || &bytes[..BINARY_MAGIC.len()] != BINARY_MAGIC {
        return Err(Error::malformed(path, 0, "missing binary chunk header"));
    }
    let mut cur = Cursor {
        bytes: &bytes[BINARY_MAGIC.len()..],
        path: path.to_owned(),
        record: 0,
    };
    let mut chunks = Vec::new();
    while !cur.bytes.is_empty() {
        cur.record += 1;
        let len = cur.u32()? as usize;
        let payload = cur.take(len)?;
        let mut rec = Cursor {
            bytes: payload,
            path: cur.path.clone(),
            record: cur.record,
        };
        let chunk_id = rec.u64()?;
        let n = rec.u32()? as usize;
        let ids = (0..n).map(|_| rec.u32()).collect::<Result<Vec<_>>>()?;
        let n = rec.u32()? as usize;
        let groups = (0..n)
            .map(|_| Ok(Span::new(rec.u32()? as usize, rec.u32()? as usize)))
            .collect::<Result<Vec<_>>>()?;
        let n = rec.u32()? as usize;
        let lexicon_groups = (0..n).map(|_| Ok(rec.u32()? as usize)).collect::<Result<Vec<_>>>()?;
        let n = rec.u32()? as usize;
        let mut origin = ChunkOrigin {
            chunk_id,
            ..Default::default()
        };
        for _ in 0..n {
            origin.doc_ids.push(rec.u64()?);
            origin.offsets.push(rec.u32()? as usize);
        }
        if !rec.bytes.is_empty() {
            return Err(rec.error("trailing bytes in record"));
        }
        chunks.push(TokenChunk {
            ids,
            groups,
            lexicon_groups,
            origin,
        });
    }
    Ok(chunks)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    path: PathBuf,
    record: usize,
}

impl<'a> Cursor<'a> {
    fn error(&self, msg: &str) -> Error {
        Error::malformed(&self.path, self.record, msg)
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() < n {
            return Err(self.error("truncated record"));
        }
        let (head, tail) = self.bytes.split_at(n);
        self.bytes = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
