//! Document records, deduplication and remote source access.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extraction::ConceptOccurrence;
use crate::ldjson::sha256_hex;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocMetadata {
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub author: String,
    #[serde(default)]
    pub journal: String,
    #[serde(default)]
    pub year: Option<i32>,
    #[serde(default)]
    pub volume: String,
    #[serde(default)]
    pub doi: String,
}

impl DocMetadata {
    /// Reads `Key: value` header lines (title, author, journal, year, volume,
    /// doi) from the top of a text file. The header ends at the first blank
    /// line; without a recognised first line the whole input is body.
    pub fn split_header(text: &str) -> (DocMetadata, &str) {
        let mut meta = DocMetadata::default();
        let mut offset = 0;
        let mut seen_any = false;
        for line in text.split_inclusive('\n') {
            let trimmed = line.trim();
            if trimmed.is_empty() {
                if seen_any {
                    offset += line.len();
                }
                break;
            }
            let Some((key, value)) = trimmed.split_once(':') else {
                break;
            };
            let value = value.trim().to_string();
            match key.trim().to_ascii_lowercase().as_str() {
                "title" => meta.title = value,
                "author" | "authors" => meta.author = value,
                "journal" => meta.journal = value,
                "year" => meta.year = value.parse().ok(),
                "volume" => meta.volume = value,
                "doi" => meta.doi = value,
                _ => break,
            }
            seen_any = true;
            offset += line.len();
        }
        if !seen_any {
            return (meta, text);
        }
        (meta, &text[offset..])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContentState {
    FullText,
    Purged,
    MetadataOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub doc_id: u64,
    #[serde(flatten)]
    pub meta: DocMetadata,
    pub content_state: ContentState,
    pub content_hash: Option<String>,
    pub ingest_time: String,
    /// Concept matches, kept after the text is purged.
    #[serde(default)]
    pub occurrences: Vec<ConceptOccurrence>,
}

/// Whitespace collapsed, trimmed text; the input of the content hash.
pub fn normalize_text(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn content_hash(text: &str) -> String {
    sha256_hex(normalize_text(text).as_bytes())
}

pub fn doi_key(doi: &str) -> Option<String> {
    let doi = doi.trim().to_lowercase();
    (!doi.is_empty()).then(|| format!("doi:{doi}"))
}

pub fn hash_key(hash: &str) -> String {
    format!("sha256:{hash}")
}

pub fn external_key(source_id: &str) -> String {
    format!("ext:{source_id}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename = "seen")]
pub struct SeenEntry {
    pub key: String,
    pub doc_id: u64,
}

/// Identity keys (DOI, content hash, external id) of everything ingested.
/// Entries are only ever added.
#[derive(Debug, Clone, Default)]
pub struct SeenRegistry {
    keys: BTreeMap<String, u64>,
}

impl SeenRegistry {
    pub fn from_entries(entries: Vec<SeenEntry>) -> Self {
        Self {
            keys: entries.into_iter().map(|e| (e.key, e.doc_id)).collect(),
        }
    }

    pub fn entries(&self) -> Vec<SeenEntry> {
        self.keys
            .iter()
            .map(|(k, &d)| SeenEntry {
                key: k.clone(),
                doc_id: d,
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<u64> {
        self.keys.get(key).copied()
    }

    /// First registered doc among `keys`, in the given order.
    pub fn find<'a>(&self, keys: impl IntoIterator<Item = &'a str>) -> Option<u64> {
        keys.into_iter().find_map(|k| self.get(k))
    }

    pub fn insert(&mut self, key: String, doc_id: u64) {
        self.keys.entry(key).or_insert(doc_id);
    }
}

/// A document as listed by a remote source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemoteDocRef {
    pub external_id: String,
    #[serde(default)]
    pub doi: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub author: String,
    #[serde(default)]
    pub journal: String,
    #[serde(default)]
    pub year: Option<i32>,
    #[serde(default)]
    pub volume: String,
    pub open_access: bool,
    #[serde(default)]
    pub content: Option<String>,
}

impl RemoteDocRef {
    pub fn metadata(&self) -> DocMetadata {
        DocMetadata {
            title: self.title.clone(),
            author: self.author.clone(),
            journal: self.journal.clone(),
            year: self.year,
            volume: self.volume.clone(),
            doi: self.doi.clone(),
        }
    }

    /// Text to ingest; closed-access documents contribute metadata only.
    pub fn ingestible_text(&self) -> Option<&str> {
        if !self.open_access {
            return None;
        }
        self.content.as_deref().filter(|c| !c.trim().is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceError(pub String);

/// A remote literature source. Each method call is one request.
pub trait SourceClient {
    /// External ids matching `query`, at most `limit`.
    fn search(&mut self, query: &str, limit: usize) -> std::result::Result<Vec<String>, SourceError>;
    fn fetch(&mut self, external_id: &str) -> std::result::Result<RemoteDocRef, SourceError>;
}

/// Serves [`RemoteDocRef`]s from a directory holding one JSON file per
/// document. A ref matches when every query word occurs, case-insensitively,
/// in its title or content; results come in file name order.
#[derive(Debug, Clone)]
pub struct FixtureSource {
    dir: PathBuf,
}

impl FixtureSource {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    fn load_all(&self) -> std::result::Result<Vec<RemoteDocRef>, SourceError> {
        let mut paths: Vec<PathBuf> = std::fs::read_dir(&self.dir)
            .map_err(|e| SourceError(format!("{}: {e}", self.dir.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        paths.iter().map(|p| read_ref(p)).collect()
    }
}

fn read_ref(path: &Path) -> std::result::Result<RemoteDocRef, SourceError> {
    let bytes = std::fs::read(path).map_err(|e| SourceError(format!("{}: {e}", path.display())))?;
    serde_json::from_slice(&bytes).map_err(|e| SourceError(format!("{}: {e}", path.display())))
}

impl SourceClient for FixtureSource {
    fn search(&mut self, query: &str, limit: usize) -> std::result::Result<Vec<String>, SourceError> {
        let words: Vec<String> = query.split_whitespace().map(str::to_lowercase).collect();
        Ok(self
            .load_all()?
            .into_iter()
            .filter(|r| {
                let hay = format!("{} {}", r.title, r.content.as_deref().unwrap_or("")).to_lowercase();
                words.iter().all(|w| hay.contains(w.as_str()))
            })
            .take(limit)
            .map(|r| r.external_id)
            .collect())
    }

    fn fetch(&mut self, external_id: &str) -> std::result::Result<RemoteDocRef, SourceError> {
        self.load_all()?
            .into_iter()
            .find(|r| r.external_id == external_id)
            .ok_or_else(|| SourceError(format!("no document {external_id}")))
    }
}

pub trait Clock {
    fn now(&self) -> Duration;
    fn sleep(&mut self, d: Duration);
}

#[derive(Debug, Clone)]
pub struct SystemClock {
    origin: Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        Self { origin: Instant::now() }
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep(&mut self, d: Duration) {
        std::thread::sleep(d);
    }
}

/// Spaces consecutive requests at least `1 / rate` seconds apart.
#[derive(Debug, Clone)]
pub struct RateLimiter<C> {
    min_interval: Duration,
    last: Option<Duration>,
    clock: C,
}

impl<C: Clock> RateLimiter<C> {
    pub fn new(requests_per_second: f64, clock: C) -> Result<Self> {
        if !(requests_per_second > 0.0 && requests_per_second.is_finite()) {
            return Err(Error::Config(format!(
                "rate limit must be positive, got {requests_per_second}"
            )));
        }
        Ok(Self {
            min_interval: Duration::from_secs_f64(1.0 / requests_per_second),
            last: None,
            clock,
        })
    }

    /// Blocks until a request may be issued and records it.
    pub fn acquire(&mut self) -> Duration {
        if let Some(last) = self.last {
            let ready = last + self.min_interval;
            let now = self.clock.now();
            if now < ready {
                self.clock.sleep(ready - now);
            }
        }
        let now = self.clock.now();
        self.last = Some(now);
        now
    }

    pub fn clock(&self) -> &C {
        &self.clock
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchSummary {
    /// Refs listed by the source.
    pub fetched: u64,
    pub ingested: u64,
    pub skipped_dupe: u64,
    /// Subset of `ingested` stored without text.
    pub metadata_only: u64,
}
