//! Lattice container and sidecar files.
//!
//! Binary layout (all little-endian):
//!
//! ```text
//! offset  size      field
//! 0       4         magic "CTCL"
//! 4       4         version (u32) = 1
//! 8       8         frames T (u64)
//! 16      8         columns V+1 (u64)
//! 24      8         frame_duration_ms (f64)
//! 32      4*T*(V+1) log-probs (f32), row-major
//! ```
//!
//! The vocabulary lives next to the container (`<stem>.vocab`, one UTF-8
//! surface per line, blank last). An optional `<stem>.mask` sidecar holds one
//! byte per frame: 1 = speech, 0 = non-speech.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{CtcLattice, Vocabulary};
use crate::{Error, Result};

pub const MAGIC: [u8; 4] = *b"CTCL";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 32;

pub fn encode_container(lattice: &CtcLattice) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + lattice.as_flat().len() * 4);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(lattice.frames() as u64).to_le_bytes());
    out.extend_from_slice(&(lattice.width() as u64).to_le_bytes());
    out.extend_from_slice(&lattice.frame_duration_ms().to_le_bytes());
    for &v in lattice.as_flat() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        match end {
            Some(end) => {
                let s = &self.buf[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::Truncated {
                offset: self.buf.len() as u64,
                needed: (self.pos as u64 + n as u64) - self.buf.len() as u64,
            }),
        }
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }
}

pub fn decode_container(bytes: &[u8]) -> Result<CtcLattice> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let magic: [u8; 4] = r.array()?;
    if magic != MAGIC {
        return Err(Error::BadMagic { found: magic });
    }
    let version = u32::from_le_bytes(r.array()?);
    if version != VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            expected: VERSION,
        });
    }
    let frames = u64::from_le_bytes(r.array()?);
    let width = u64::from_le_bytes(r.array()?);
    let frame_ms = f64::from_le_bytes(r.array()?);
    let count = frames
        .checked_mul(width)
        .and_then(|c| usize::try_from(c).ok())
        .ok_or_else(|| Error::validation("lattice dimensions overflow"))?;
    let payload = r.take(count.checked_mul(4).ok_or_else(|| Error::validation("lattice dimensions overflow"))?)?;
    if r.pos != bytes.len() {
        return Err(Error::validation(format!(
            "{} trailing bytes after lattice payload",
            bytes.len() - r.pos
        )));
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("chunk of 4")) as f64)
        .collect();
    CtcLattice::from_flat(width as usize, frame_ms, data)
}

pub fn vocab_path_for(lattice_path: &Path) -> PathBuf {
    lattice_path.with_extension("vocab")
}

pub fn mask_path_for(lattice_path: &Path) -> PathBuf {
    lattice_path.with_extension("mask")
}

/// Write the container plus its `.vocab` sidecar.
pub fn save_lattice(path: &Path, lattice: &CtcLattice, vocab: &Vocabulary) -> Result<()> {
    lattice.check_vocabulary(vocab)?;
    fs::write(path, encode_container(lattice))?;
    fs::write(vocab_path_for(path), vocab.to_lines())?;
    Ok(())
}

/// Read a container and its `.vocab` sidecar. `.json` paths are read as the
/// JSON mirror instead.
pub fn load_lattice(path: &Path) -> Result<(CtcLattice, Vocabulary)> {
    if path.extension().is_some_and(|e| e == "json") {
        return load_json_lattice(path);
    }
    let lattice = decode_container(&fs::read(path)?)?;
    let vocab = Vocabulary::from_lines(&fs::read_to_string(vocab_path_for(path))?)?;
    lattice.check_vocabulary(&vocab)?;
    Ok((lattice, vocab))
}

/// JSON mirror of the container. `null` entries stand for zero probability.
#[derive(Debug, Serialize, Deserialize)]
pub struct JsonLattice {
    pub version: u32,
    pub frame_duration_ms: f64,
    pub vocabulary: Vec<String>,
    pub log_probs: Vec<Vec<Option<f64>>>,
}

impl JsonLattice {
    pub fn from_lattice(lattice: &CtcLattice, vocab: &Vocabulary) -> JsonLattice {
        JsonLattice {
            version: VERSION,
            frame_duration_ms: lattice.frame_duration_ms(),
            vocabulary: vocab.surfaces().to_vec(),
            log_probs: lattice
                .rows()
                .map(|r| r.iter().map(|&v| v.is_finite().then_some(v)).collect())
                .collect(),
        }
    }

    pub fn into_lattice(self) -> Result<(CtcLattice, Vocabulary)> {
        if self.version != VERSION {
            return Err(Error::UnsupportedVersion {
                found: self.version,
                expected: VERSION,
            });
        }
        let vocab = Vocabulary::from_lines(&self.vocabulary.join("\n"))?;
        if self.log_probs.iter().any(|r| r.len() != vocab.width()) {
            return Err(Error::validation("JSON lattice row width differs from vocabulary"));
        }
        let data: Vec<f64> = self
            .log_probs
            .iter()
            .flat_map(|row| row.iter().map(|v| v.unwrap_or(f64::NEG_INFINITY)))
            .collect();
        let lattice = CtcLattice::from_flat(vocab.width(), self.frame_duration_ms, data)?;
        Ok((lattice, vocab))
    }
}

pub fn save_json_lattice(path: &Path, lattice: &CtcLattice, vocab: &Vocabulary) -> Result<()> {
    lattice.check_vocabulary(vocab)?;
    let doc = JsonLattice::from_lattice(lattice, vocab);
    fs::write(path, serde_json::to_string(&doc)?)?;
    Ok(())
}

pub fn load_json_lattice(path: &Path) -> Result<(CtcLattice, Vocabulary)> {
    let doc: JsonLattice = serde_json::from_str(&fs::read_to_string(path)?)?;
    doc.into_lattice()
}

pub fn encode_mask_sidecar(speech: &[bool]) -> Vec<u8> {
    speech.iter().map(|&s| u8::from(s)).collect()
}

pub fn decode_mask_sidecar(bytes: &[u8]) -> Result<Vec<bool>> {
    bytes
        .iter()
        .enumerate()
        .map(|(i, &b)| match b {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(Error::validation(format!(
                "mask byte {i} is {other}, expected 0 or 1"
            ))),
        })
        .collect()
}
