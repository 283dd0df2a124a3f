//! Line-delimited JSON record files sealed by a trailing SHA-256 record.
//!
//! Each line is one JSON object whose first field is a `kind` tag. The last
//! line is `{"kind":"checksum","sha256":"<hex>"}` where the digest covers
//! every byte before that line.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename = "checksum")]
struct Checksum {
    sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn encode<'a, R, I>(records: I) -> Result<Vec<u8>>
where
    R: Serialize + 'a,
    I: IntoIterator<Item = &'a R>,
{
    let mut buf = Vec::new();
    for record in records {
        serde_json::to_writer(&mut buf, record).map_err(|e| Error::Config(format!("unserializable record: {e}")))?;
        buf.push(b'\n');
    }
    let seal = Checksum {
        sha256: sha256_hex(&buf),
    };
    serde_json::to_writer(&mut buf, &seal).expect("checksum record serializes");
    buf.push(b'\n');
    Ok(buf)
}

/// Verifies the checksum and decodes every record line. `origin` is only
/// used in error messages.
pub fn decode<R: DeserializeOwned>(bytes: &[u8], origin: &Path) -> Result<Vec<R>> {
    let text = std::str::from_utf8(bytes).map_err(|_| Error::corrupt(origin, "not valid UTF-8"))?;
    let body_len = match text.strip_suffix('\n') {
        Some(rest) => rest.rfind('\n').map_or(0, |i| i + 1),
        None => return Err(Error::corrupt(origin, "missing trailing newline")),
    };
    let (body, last) = text.split_at(body_len);
    let seal: Checksum = serde_json::from_str(last.trim_end_matches('\n'))
        .map_err(|_| Error::corrupt(origin, "missing checksum record"))?;
    if seal.sha256 != sha256_hex(body.as_bytes()) {
        return Err(Error::corrupt(origin, "checksum mismatch"));
    }
    body.lines()
        .enumerate()
        .map(|(i, line)| serde_json::from_str(line).map_err(|e| Error::corrupt(origin, format!("line {}: {e}", i + 1))))
        .collect()
}

/// Writes records atomically: a sibling temp file is renamed into place.
pub fn write<'a, R, I>(path: &Path, records: I) -> Result<()>
where
    R: Serialize + 'a,
    I: IntoIterator<Item = &'a R>,
{
    let bytes = encode(records)?;
    let tmp = path.with_extension("jsonl.tmp");
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn read<R: DeserializeOwned>(path: &Path) -> Result<Vec<R>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, path)
}

/// Like [`read`], but a missing file yields no records.
pub fn read_or_empty<R: DeserializeOwned>(path: &Path) -> Result<Vec<R>> {
    if path.exists() {
        read(path)
    } else {
        Ok(Vec::new())
    }
}
