use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::eval::RefSegment;
use crate::lattice::io::{decode_container, encode_container, vocab_path_for};
use crate::lattice::{CtcLattice, Vocabulary};
use crate::segmentation::PauseMask;
use crate::synth::{CorpusConfig, GroundTruth, Script};
use crate::{Error, Result};

pub const MANIFEST: &str = "manifest.json";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestStream {
    pub id: String,
    pub frames: usize,
    pub frame_duration_ms: f64,
    pub sentences: usize,
    /// File name → SHA-256 (hex) of its bytes.
    pub files: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: u32,
    pub corpus: Option<CorpusConfig>,
    pub vocab_sha256: String,
    pub streams: Vec<ManifestStream>,
}

impl Manifest {
    /// Hash over the manifest's canonical JSON, used to tie reports to fixtures.
    pub fn digest(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("manifest serializes"))
    }
}

/// One loaded stream.
#[derive(Debug, Clone)]
pub struct FixtureStream {
    pub id: String,
    pub script: Option<Script>,
    pub lattice: CtcLattice,
    pub mask: PauseMask,
    pub truth: GroundTruth,
}

impl FixtureStream {
    pub fn frame_duration_ms(&self) -> f64 {
        self.lattice.frame_duration_ms()
    }

    pub fn duration_ms(&self) -> f64 {
        self.lattice.duration_ms()
    }

    /// Reference sentences tiling the stream: each runs from the previous
    /// sentence's end to the end of its own final punctuation frame; the
    /// last one runs to the end of the stream.
    pub fn ref_segments(&self) -> Vec<RefSegment> {
        let ms = self.frame_duration_ms();
        let n = self.truth.reference_text.len();
        let mut start = 0.0;
        (0..n)
            .map(|i| {
                let end = if i + 1 == n {
                    self.duration_ms()
                } else {
                    (self.truth.boundary_frames[i] + 1) as f64 * ms
                };
                let seg = RefSegment {
                    text: self.truth.reference_text[i].clone(),
                    start_ms: start,
                    end_ms: end,
                };
                start = end;
                seg
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct FixtureSet {
    pub root: PathBuf,
    pub manifest: Manifest,
    pub vocab: Vocabulary,
    pub streams: Vec<FixtureStream>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn fixture_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Fixture(format!("{}: {e}", path.display()))
}

fn write(path: &Path, bytes: &[u8], files: &mut BTreeMap<String, String>) -> Result<()> {
    fs::write(path, bytes).map_err(|e| fixture_err(path, e))?;
    let name = path.file_name().unwrap().to_string_lossy().into_owned();
    files.insert(name, sha256_hex(bytes));
    Ok(())
}

/// Generate a synthetic corpus into `dir`:
///
/// ```text
/// dir/manifest.json
/// dir/vocab.txt
/// dir/streams/<id>/{script.json, lattice.ctcl, lattice.vocab, lattice.mask,
///                   mask.tsv, ref.txt, truth.json}
/// ```
pub fn gen_synth(corpus: &CorpusConfig, dir: &Path) -> Result<Manifest> {
    corpus.validate().map_err(|e| Error::Config(e.to_string()))?;
    let (vocab, streams) = corpus.generate()?;
    let vocab_text = vocab.to_lines();
    fs::create_dir_all(dir.join("streams")).map_err(|e| fixture_err(dir, e))?;
    fs::write(dir.join("vocab.txt"), &vocab_text).map_err(|e| fixture_err(dir, e))?;
    let mut entries = Vec::with_capacity(streams.len());
    for s in &streams {
        let sdir = dir.join("streams").join(&s.id);
        fs::create_dir_all(&sdir).map_err(|e| fixture_err(&sdir, e))?;
        let mut files = BTreeMap::new();
        let lattice_path = sdir.join("lattice.ctcl");
        write(&sdir.join("script.json"), &serde_json::to_vec_pretty(&s.script)?, &mut files)?;
        write(&lattice_path, &encode_container(&s.lattice), &mut files)?;
        write(&vocab_path_for(&lattice_path), vocab_text.as_bytes(), &mut files)?;
        let mask = PauseMask::new(s.mask.clone(), s.lattice.frame_duration_ms())?;
        write(&sdir.join("lattice.mask"), &mask.to_sidecar(), &mut files)?;
        write(&sdir.join("mask.tsv"), mask.to_tsv().as_bytes(), &mut files)?;
        let mut refs = s.truth.reference_text.join("\n");
        refs.push('\n');
        write(&sdir.join("ref.txt"), refs.as_bytes(), &mut files)?;
        write(&sdir.join("truth.json"), &serde_json::to_vec_pretty(&s.truth)?, &mut files)?;
        entries.push(ManifestStream {
            id: s.id.clone(),
            frames: s.lattice.frames(),
            frame_duration_ms: s.lattice.frame_duration_ms(),
            sentences: s.script.sentences.len(),
            files,
        });
    }
    let manifest = Manifest {
        format: FORMAT_VERSION,
        corpus: Some(corpus.clone()),
        vocab_sha256: sha256_hex(vocab_text.as_bytes()),
        streams: entries,
    };
    let path = dir.join(MANIFEST);
    fs::write(&path, serde_json::to_vec_pretty(&manifest)?).map_err(|e| fixture_err(&path, e))?;
    Ok(manifest)
}

fn read_checked(dir: &Path, name: &str, entry: &ManifestStream) -> Result<Vec<u8>> {
    let path = dir.join(name);
    let bytes = fs::read(&path).map_err(|e| fixture_err(&path, e))?;
    if let Some(expected) = entry.files.get(name) {
        if sha256_hex(&bytes) != *expected {
            return Err(fixture_err(&path, "content hash does not match the manifest"));
        }
    }
    Ok(bytes)
}

/// Load and hash-check a fixture tree. `script.json` is optional (streams
/// dumped from a real model have none); the lattice, mask and truth are not.
pub fn load_fixtures(dir: &Path) -> Result<FixtureSet> {
    let mpath = dir.join(MANIFEST);
    let mbytes = fs::read(&mpath).map_err(|e| fixture_err(&mpath, e))?;
    let manifest: Manifest = serde_json::from_slice(&mbytes).map_err(|e| fixture_err(&mpath, e))?;
    if manifest.format != FORMAT_VERSION {
        return Err(fixture_err(&mpath, format!("unsupported format {}", manifest.format)));
    }
    let vpath = dir.join("vocab.txt");
    let vtext = fs::read_to_string(&vpath).map_err(|e| fixture_err(&vpath, e))?;
    if sha256_hex(vtext.as_bytes()) != manifest.vocab_sha256 {
        return Err(fixture_err(&vpath, "content hash does not match the manifest"));
    }
    let vocab = Vocabulary::from_lines(&vtext).map_err(|e| fixture_err(&vpath, e))?;
    let mut streams = Vec::with_capacity(manifest.streams.len());
    for entry in &manifest.streams {
        let sdir = dir.join("streams").join(&entry.id);
        let ctx = |e: Error| fixture_err(&sdir, e);
        let lattice = decode_container(&read_checked(&sdir, "lattice.ctcl", entry)?).map_err(ctx)?;
        lattice.check_vocabulary(&vocab).map_err(ctx)?;
        if lattice.frames() != entry.frames {
            return Err(fixture_err(&sdir, "lattice length differs from the manifest"));
        }
        let ms = lattice.frame_duration_ms();
        let mask = if entry.files.contains_key("lattice.mask") {
            PauseMask::from_sidecar(&read_checked(&sdir, "lattice.mask", entry)?, ms).map_err(ctx)?
        } else {
            let text = String::from_utf8(read_checked(&sdir, "mask.tsv", entry)?)
                .map_err(|e| fixture_err(&sdir, e))?;
            PauseMask::from_tsv(&text, ms).map_err(ctx)?
        };
        mask.check_frames(lattice.frames()).map_err(ctx)?;
        let truth: GroundTruth =
            serde_json::from_slice(&read_checked(&sdir, "truth.json", entry)?).map_err(|e| fixture_err(&sdir, e))?;
        if truth.boundary_frames.len() != truth.reference_text.len() {
            return Err(fixture_err(&sdir, "truth has mismatched boundary and sentence counts"));
        }
        let script = if entry.files.contains_key("script.json") {
            let s: Script = serde_json::from_slice(&read_checked(&sdir, "script.json", entry)?)
                .map_err(|e| fixture_err(&sdir, e))?;
            s.validate(&vocab).map_err(ctx)?;
            Some(s)
        } else {
            None
        };
        streams.push(FixtureStream { id: entry.id.clone(), script, lattice, mask, truth });
    }
    Ok(FixtureSet { root: dir.to_path_buf(), manifest, vocab, streams })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CorpusConfig {
        CorpusConfig { streams: 3, sentences_min: 2, sentences_max: 3, ..CorpusConfig::default() }
    }

    #[test]
    fn generation_is_deterministic_and_loads() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let ma = gen_synth(&small(), a.path()).unwrap();
        let mb = gen_synth(&small(), b.path()).unwrap();
        assert_eq!(ma, mb);
        assert_eq!(
            fs::read(a.path().join(MANIFEST)).unwrap(),
            fs::read(b.path().join(MANIFEST)).unwrap()
        );
        let set = load_fixtures(a.path()).unwrap();
        assert_eq!(set.streams.len(), 3);
        let s = &set.streams[0];
        assert_eq!(s.id, "s000");
        let refs = s.ref_segments();
        assert_eq!(refs.len(), s.truth.reference_text.len());
        assert_eq!(refs.last().unwrap().end_ms, s.duration_ms());
        assert!(refs.windows(2).all(|w| w[0].end_ms == w[1].start_ms));
    }

    #[test]
    fn zero_sentences_is_a_config_error() {
        let d = tempfile::tempdir().unwrap();
        let bad = CorpusConfig { sentences_min: 0, sentences_max: 0, ..small() };
        assert!(matches!(gen_synth(&bad, d.path()), Err(Error::Config(_))));
    }

    #[test]
    fn tampering_is_detected() {
        let d = tempfile::tempdir().unwrap();
        gen_synth(&small(), d.path()).unwrap();
        let p = d.path().join("streams/s001/ref.txt");
        fs::write(&p, "changed\n").unwrap();
        let truth = d.path().join("streams/s001/truth.json");
        let mut t = fs::read(&truth).unwrap();
        t.push(b' ');
        fs::write(&truth, t).unwrap();
        let err = load_fixtures(d.path()).unwrap_err();
        assert_eq!(err.exit_code(), 3, "{err}");
        assert!(load_fixtures(&d.path().join("missing")).is_err());
    }
}
