//! `LYRE` song-embedding files.
//!
//! Little-endian layout: magic `LYRE`, `u32` version (1), `u32` dimension,
//! `u64` count, then per record a `u32` id length, the UTF-8 id bytes and
//! `dimension` × `f32`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;

use super::SongEmbedding;
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"LYRE";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub dimension: usize,
    pub embeddings: BTreeMap<String, SongEmbedding>,
}

pub fn write_embeddings<W: Write>(mut out: W, dimension: usize, embeddings: &[SongEmbedding]) -> Result<()> {
    let dim = u32::try_from(dimension).map_err(|_| Error::Format(format!("dimension {dimension} too large")))?;
    let io = |e: std::io::Error| Error::Format(e.to_string());
    out.write_all(&MAGIC).map_err(io)?;
    out.write_all(&VERSION.to_le_bytes()).map_err(io)?;
    out.write_all(&dim.to_le_bytes()).map_err(io)?;
    out.write_all(&(embeddings.len() as u64).to_le_bytes()).map_err(io)?;
    for e in embeddings {
        if e.values.len() != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                got: e.values.len(),
            });
        }
        let id = e.record_id.as_bytes();
        let len = u32::try_from(id.len()).map_err(|_| Error::Format("record id too long".into()))?;
        out.write_all(&len.to_le_bytes()).map_err(io)?;
        out.write_all(id).map_err(io)?;
        for v in &e.values {
            out.write_all(&v.to_le_bytes()).map_err(io)?;
        }
    }
    out.flush().map_err(io)
}

fn read_exact_or<R: Read>(input: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    input.read_exact(buf).map_err(|e| match e.kind() {
        ErrorKind::UnexpectedEof => Error::Format(format!("truncated payload while reading {what}")),
        _ => Error::Format(e.to_string()),
    })
}

fn read_u32<R: Read>(input: &mut R, what: &str) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact_or(input, &mut b, what)?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_embeddings<R: Read>(mut input: R, provider_tag: &str) -> Result<EmbeddingTable> {
    let mut magic = [0u8; 4];
    read_exact_or(&mut input, &mut magic, "magic")?;
    if magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let version = read_u32(&mut input, "version")?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dimension = read_u32(&mut input, "dimension")? as usize;
    let mut count = [0u8; 8];
    read_exact_or(&mut input, &mut count, "count")?;
    let count = u64::from_le_bytes(count);

    let mut embeddings = BTreeMap::new();
    let mut floats = vec![0u8; dimension * 4];
    for i in 0..count {
        let len = read_u32(&mut input, "id length")? as usize;
        let mut id = vec![0u8; len];
        read_exact_or(&mut input, &mut id, "record id")?;
        let id = String::from_utf8(id).map_err(|_| Error::Format(format!("record {i}: id is not UTF-8")))?;
        read_exact_or(&mut input, &mut floats, "vector")?;
        let values = floats
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")))
            .collect();
        let embedding = SongEmbedding {
            record_id: id.clone(),
            values,
            provider_tag: provider_tag.to_string(),
        };
        if embeddings.insert(id.clone(), embedding).is_some() {
            return Err(Error::Format(format!("duplicate record id `{id}`")));
        }
    }
    let mut probe = [0u8; 1];
    match input.read(&mut probe) {
        Ok(0) => Ok(EmbeddingTable { dimension, embeddings }),
        Ok(_) => Err(Error::Format(format!(
            "header declares {count} records but more data follows"
        ))),
        Err(e) => Err(Error::Format(e.to_string())),
    }
}

pub fn save_embedding_file(path: &Path, dimension: usize, embeddings: &[SongEmbedding]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_embeddings(BufWriter::new(file), dimension, embeddings).map_err(|e| e.context(path.display().to_string()))
}

pub fn load_embedding_file(path: &Path) -> Result<EmbeddingTable> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let tag = format!("file:{}", path.display());
    read_embeddings(BufReader::new(file), &tag).map_err(|e| e.context(path.display().to_string()))
}
