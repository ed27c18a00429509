//! JSON-lines corpora and binary checkpoints.
//!
//! JSONL files hold one record per line. Writers refuse to replace an
//! existing file unless forced and write through a temporary sibling, so a
//! reader never sees a half-written file.
//!
//! Checkpoint layout, all integers little endian:
//!
//! ```text
//! magic   8 bytes  "TMPOCKPT"
//! version u32
//! count   u32
//! count x { name_len u32, name utf-8, rank u32, dims rank x u64, data f32 x prod(dims) }
//! crc32   u32      over every preceding byte
//! ```

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::document::{AnnotatedDocument, DocumentError};
use crate::grammar::{TimexLabel, TimexPairExample};
use crate::nn::{NnError, ParamStore, Tensor};
use crate::normalize::compare;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"TMPOCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0} already exists (use --force to overwrite)")]
    AlreadyExists(PathBuf),
    #[error("line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("line {line}: field {field}: {detail}")]
    SchemaViolation { line: usize, field: String, detail: String },
    #[error("checkpoint checksum mismatch or truncated file")]
    ChecksumMismatch,
    #[error("not a checkpoint file")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    VersionUnsupported(u32),
    #[error("malformed checkpoint: {0}")]
    MalformedCheckpoint(String),
    #[error(transparent)]
    Params(#[from] NnError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io { path: path.to_path_buf(), source }
}

/// One model prediction on an indexed example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub pair_id: String,
    pub gold: String,
    pub pred: String,
    pub probs: Vec<f32>,
}

/// Writes `bytes` to `path` via a temporary sibling; fails on an existing path unless `force`.
pub fn write_atomic(path: &Path, bytes: &[u8], force: bool) -> Result<(), CorpusError> {
    if path.exists() && !force {
        return Err(CorpusError::AlreadyExists(path.to_path_buf()));
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(bytes).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))
}

pub fn to_jsonl<T: Serialize>(records: &[T]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

/// Parses JSONL text, skipping blank lines. `check` maps a record to an optional `(field, detail)` violation.
pub fn parse_jsonl<T, F>(text: impl BufRead, check: F) -> Result<Vec<T>, CorpusError>
where
    T: DeserializeOwned,
    F: Fn(&T) -> Option<(String, String)>,
{
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| CorpusError::ParseError { line: line_no, message: e.to_string() })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: T = serde_json::from_str(&line)
            .map_err(|e| CorpusError::ParseError { line: line_no, message: e.to_string() })?;
        if let Some((field, detail)) = check(&rec) {
            return Err(CorpusError::SchemaViolation { line: line_no, field, detail });
        }
        out.push(rec);
    }
    Ok(out)
}

fn read_jsonl<T, F>(path: &Path, check: F) -> Result<Vec<T>, CorpusError>
where
    T: DeserializeOwned,
    F: Fn(&T) -> Option<(String, String)>,
{
    let f = fs::File::open(path).map_err(io_err(path))?;
    parse_jsonl(BufReader::new(f), check)
}

pub fn document_violation(doc: &AnnotatedDocument) -> Option<(String, String)> {
    match doc.validate() {
        Ok(()) => None,
        Err(DocumentError::Invalid { field, detail }) => Some((field, detail)),
        Err(DocumentError::MalformedTree { sentence, detail }) => {
            Some((format!("sentences[{sentence}].tokens"), detail))
        }
    }
}

pub fn pair_violation(p: &TimexPairExample) -> Option<(String, String)> {
    for (name, t) in [("t1", &p.t1), ("t2", &p.t2)] {
        if t.surface.is_empty() {
            return Some((format!("{name}.surface"), "empty".into()));
        }
        if t.interval.start_day > t.interval.end_day {
            return Some((format!("{name}.interval"), "start after end".into()));
        }
    }
    match TimexLabel::from_relation(compare(&p.t1.interval, &p.t2.interval)) {
        Some(l) if l == p.label => None,
        _ => Some(("label".into(), "disagrees with the stored intervals".into())),
    }
}

pub fn write_documents(path: &Path, docs: &[AnnotatedDocument], force: bool) -> Result<(), CorpusError> {
    write_atomic(path, to_jsonl(docs).as_bytes(), force)
}

pub fn read_documents(path: &Path) -> Result<Vec<AnnotatedDocument>, CorpusError> {
    read_jsonl(path, document_violation)
}

pub fn write_pairs(path: &Path, pairs: &[TimexPairExample], force: bool) -> Result<(), CorpusError> {
    write_atomic(path, to_jsonl(pairs).as_bytes(), force)
}

pub fn read_pairs(path: &Path) -> Result<Vec<TimexPairExample>, CorpusError> {
    read_jsonl(path, pair_violation)
}

pub fn write_predictions(path: &Path, preds: &[PredictionRecord], force: bool) -> Result<(), CorpusError> {
    write_atomic(path, to_jsonl(preds).as_bytes(), force)
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRecord>, CorpusError> {
    read_jsonl(path, |p: &PredictionRecord| {
        p.probs.iter().any(|x| !x.is_finite()).then(|| ("probs".to_string(), "non-finite value".to_string()))
    })
}

pub fn encode_checkpoint(store: &ParamStore) -> Vec<u8> {
    let mut buf = Vec::with_capacity(16 + 4 * store.num_scalars());
    buf.extend_from_slice(CHECKPOINT_MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(store.len() as u32).to_le_bytes());
    for (name, t) in store.iter() {
        buf.extend_from_slice(&(name.len() as u32).to_le_bytes());
        buf.extend_from_slice(name.as_bytes());
        buf.extend_from_slice(&(t.shape().len() as u32).to_le_bytes());
        for &d in t.shape() {
            buf.extend_from_slice(&(d as u64).to_le_bytes());
        }
        for &x in t.data() {
            buf.extend_from_slice(&x.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    buf
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CorpusError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| CorpusError::MalformedCheckpoint("payload shorter than declared".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, CorpusError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CorpusError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Decodes a full checkpoint; any corruption fails before a store is built.
pub fn decode_checkpoint(bytes: &[u8]) -> Result<ParamStore, CorpusError> {
    if bytes.len() < CHECKPOINT_MAGIC.len() || &bytes[..CHECKPOINT_MAGIC.len()] != CHECKPOINT_MAGIC {
        return Err(CorpusError::BadMagic);
    }
    if bytes.len() < CHECKPOINT_MAGIC.len() + 12 {
        return Err(CorpusError::ChecksumMismatch);
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 4);
    if crc32fast::hash(body) != u32::from_le_bytes(trailer.try_into().unwrap()) {
        return Err(CorpusError::ChecksumMismatch);
    }
    let mut cur = Cursor { bytes: body, pos: CHECKPOINT_MAGIC.len() };
    let version = cur.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(CorpusError::VersionUnsupported(version));
    }
    let count = cur.u32()?;
    let mut tensors = Vec::new();
    for _ in 0..count {
        let name_len = cur.u32()? as usize;
        let name = std::str::from_utf8(cur.take(name_len)?)
            .map_err(|_| CorpusError::MalformedCheckpoint("tensor name is not utf-8".into()))?
            .to_string();
        let rank = cur.u32()? as usize;
        let mut dims = Vec::with_capacity(rank.min(8));
        for _ in 0..rank {
            dims.push(usize::try_from(cur.u64()?).map_err(|_| CorpusError::MalformedCheckpoint("dimension overflow".into()))?);
        }
        let len = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| CorpusError::MalformedCheckpoint("tensor size overflow".into()))?;
        let data: Vec<f32> = cur.take(len)?.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
        if data.iter().any(|x| !x.is_finite()) {
            return Err(CorpusError::MalformedCheckpoint(format!("{name}: non-finite value")));
        }
        let tensor = Tensor::from_vec(&dims, data)?;
        if tensors.iter().any(|(n, _): &(String, Tensor)| *n == name) {
            return Err(CorpusError::MalformedCheckpoint(format!("duplicate tensor {name}")));
        }
        tensors.push((name, tensor));
    }
    if cur.pos != body.len() {
        return Err(CorpusError::MalformedCheckpoint("trailing bytes".into()));
    }
    let mut store = ParamStore::new();
    for (name, t) in tensors {
        store.add(name, t);
    }
    Ok(store)
}

pub fn save_checkpoint(path: &Path, store: &ParamStore, force: bool) -> Result<(), CorpusError> {
    write_atomic(path, &encode_checkpoint(store), force)
}

pub fn load_checkpoint(path: &Path) -> Result<ParamStore, CorpusError> {
    decode_checkpoint(&fs::read(path).map_err(io_err(path))?)
}

/// Loads a checkpoint into `target`, replacing every tensor or none.
pub fn load_checkpoint_into(path: &Path, target: &mut ParamStore) -> Result<(), CorpusError> {
    let loaded = load_checkpoint(path)?;
    target.assign_from(&loaded)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store() -> ParamStore {
        let mut s = ParamStore::new();
        s.add("a", Tensor::from_vec(&[2, 3], vec![1.0, -2.0, 3.5, 0.0, 1e-7, -1e7]).unwrap());
        s.add("b.bias", Tensor::from_vec(&[1], vec![0.25]).unwrap());
        s
    }

    #[test]
    fn checkpoint_round_trip() {
        let s = store();
        let back = decode_checkpoint(&encode_checkpoint(&s)).unwrap();
        let a: Vec<_> = s.iter().map(|(n, t)| (n.to_string(), t.clone())).collect();
        let b: Vec<_> = back.iter().map(|(n, t)| (n.to_string(), t.clone())).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn truncated_checkpoint_rejected() {
        let bytes = encode_checkpoint(&store());
        for cut in [bytes.len() - 1, bytes.len() / 2, 9] {
            assert!(matches!(decode_checkpoint(&bytes[..cut]), Err(CorpusError::ChecksumMismatch)));
        }
        assert!(matches!(decode_checkpoint(b"nope"), Err(CorpusError::BadMagic)));
    }

    #[test]
    fn version_checked_after_checksum() {
        let mut bytes = encode_checkpoint(&store());
        bytes[8] = 2;
        let n = bytes.len() - 4;
        let crc = crc32fast::hash(&bytes[..n]);
        bytes[n..].copy_from_slice(&crc.to_le_bytes());
        assert!(matches!(decode_checkpoint(&bytes), Err(CorpusError::VersionUnsupported(2))));
    }

    #[test]
    fn failed_load_leaves_target_untouched() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        let mut other = ParamStore::new();
        other.add("a", Tensor::zeros(&[3, 2]));
        other.add("b.bias", Tensor::zeros(&[1]));
        save_checkpoint(&path, &other, false).unwrap();
        let mut target = store();
        let before = encode_checkpoint(&target);
        assert!(load_checkpoint_into(&path, &mut target).is_err());
        assert_eq!(encode_checkpoint(&target), before);
    }

    #[test]
    fn refuses_overwrite_without_force() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.jsonl");
        write_atomic(&path, b"a\n", false).unwrap();
        assert!(matches!(write_atomic(&path, b"b\n", false), Err(CorpusError::AlreadyExists(_))));
        write_atomic(&path, b"b\n", true).unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"b\n");
    }

    #[test]
    fn parse_error_reports_line() {
        let text = "{\"pair_id\":\"a\",\"gold\":\"before\",\"pred\":\"after\",\"probs\":[0.5,0.5]}\n{oops\n";
        let err = parse_jsonl::<PredictionRecord, _>(text.as_bytes(), |_| None).unwrap_err();
        assert!(matches!(err, CorpusError::ParseError { line: 2, .. }));
    }
}
