//! The document repository: ontology, candidate queue, document registry and
//! postings kept consistent with each other and persisted under one data
//! directory.
//!
//! A `Repository` is a single-writer structure. Callers that serve
//! concurrent readers wrap it in a lock; every `&self` method is a pure read.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{Config, CONFIG_FILE};
use crate::error::{Error, Result};
use crate::extraction::{extract_candidates, match_concepts, CandidateConcept, CandidateQueue, CorpusStats, Gazetteer};
use crate::index::PostingsIndex;
use crate::ingestion::{
    content_hash, doi_key, external_key, hash_key, Clock, ContentState, DocMetadata, DocumentRecord, FetchSummary,
    RateLimiter, SeenEntry, SeenRegistry, SourceClient,
};
use crate::ldjson;
use crate::ontology::{
    split_records, ConceptId, ConceptNode, ConceptStatus, Ontology, Provenance, Relation, RelationType, StoreRecord,
};
use crate::search::{ConceptPostings, SearchQuery, SearchResponse, Searcher};
use crate::textproc::{TextProcessor, Token};

pub const ONTOLOGY_FILE: &str = "ontology.jsonl";
pub const DOCS_FILE: &str = "docs.jsonl";
pub const INDEX_FILE: &str = "index.jsonl";
pub const SEEN_FILE: &str = "seen.jsonl";
pub const CONTENT_DIR: &str = "content";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum IngestOutcome {
    Ingested { doc_id: u64 },
    Duplicate { doc_id: u64 },
}

impl IngestOutcome {
    pub fn doc_id(self) -> u64 {
        match self {
            IngestOutcome::Ingested { doc_id } | IngestOutcome::Duplicate { doc_id } => doc_id,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StoreSummary {
    pub ontology_version: u64,
    pub concepts: usize,
    pub documents: usize,
    pub index_terms: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum DocRecordLine {
    Document(DocumentRecord),
}

#[derive(Debug, Clone)]
struct DocText {
    tokens: Vec<Token>,
    sentences: Vec<Vec<String>>,
}

pub struct Repository {
    root: Option<PathBuf>,
    config: Config,
    text: TextProcessor,
    ontology: Ontology,
    queue: CandidateQueue,
    docs: BTreeMap<u64, DocumentRecord>,
    seen: SeenRegistry,
    index: PostingsIndex,
    concept_postings: ConceptPostings,
    live: BTreeMap<u64, DocText>,
}

impl Repository {
    /// Creates the directory layout and default config; existing files are
    /// left untouched.
    pub fn init(root: &Path) -> Result<()> {
        let content = root.join(CONTENT_DIR);
        fs::create_dir_all(&content).map_err(|e| Error::io(&content, e))?;
        let conf = root.join(CONFIG_FILE);
        if !conf.exists() {
            fs::write(&conf, Config::template()).map_err(|e| Error::io(&conf, e))?;
        }
        let empty = Repository::in_memory(Config::default())?;
        let repo = Repository {
            root: Some(root.to_path_buf()),
            ..empty
        };
        for (name, write) in [
            (
                ONTOLOGY_FILE,
                Repository::save_ontology as fn(&Repository) -> Result<()>,
            ),
            (DOCS_FILE, Repository::save_docs),
            (INDEX_FILE, Repository::save_index),
            (SEEN_FILE, Repository::save_seen),
        ] {
            if !root.join(name).exists() {
                write(&repo)?;
            }
        }
        Ok(())
    }

    pub fn in_memory(config: Config) -> Result<Self> {
        let text = TextProcessor::load(
            config.stopwords.as_deref(),
            config.abbreviations.as_deref(),
            config.stem,
        )?;
        Ok(Self {
            root: None,
            config,
            text,
            ontology: Ontology::new(),
            queue: CandidateQueue::new(),
            docs: BTreeMap::new(),
            seen: SeenRegistry::default(),
            index: PostingsIndex::new(),
            concept_postings: ConceptPostings::default(),
            live: BTreeMap::new(),
        })
    }

    /// Opens an initialized data directory, reading `cscope.conf` from it.
    pub fn open(root: &Path) -> Result<Self> {
        let config = Config::load(&root.join(CONFIG_FILE))?;
        Self::open_with(root, config)
    }

    pub fn open_with(root: &Path, config: Config) -> Result<Self> {
        if !root.join(CONTENT_DIR).is_dir() {
            return Err(Error::Config(format!(
                "{} is not an initialized data directory",
                root.display()
            )));
        }
        let mut repo = Self::in_memory(config)?;
        repo.root = Some(root.to_path_buf());

        let onto_path = root.join(ONTOLOGY_FILE);
        let (snapshot, candidates) = if onto_path.exists() {
            split_records(ldjson::read(&onto_path)?, &onto_path)?
        } else {
            Default::default()
        };
        repo.ontology = Ontology::from_snapshot(snapshot)?;
        repo.queue = CandidateQueue::from_records(candidates);

        for line in ldjson::read_or_empty::<DocRecordLine>(&root.join(DOCS_FILE))? {
            let DocRecordLine::Document(d) = line;
            repo.docs.insert(d.doc_id, d);
        }
        repo.seen = SeenRegistry::from_entries(ldjson::read_or_empty::<SeenEntry>(&root.join(SEEN_FILE))?);
        repo.index = PostingsIndex::load(&root.join(INDEX_FILE))?;
        let full: Vec<u64> = repo
            .docs
            .values()
            .filter(|d| d.content_state == ContentState::FullText)
            .map(|d| d.doc_id)
            .collect();
        for id in full {
            let path = repo.content_path(id).expect("rooted");
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            repo.live.insert(id, repo.analyze(&text));
        }
        repo.concept_postings = ConceptPostings::from_documents(repo.docs.values());
        Ok(repo)
    }

    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn text_processor(&self) -> &TextProcessor {
        &self.text
    }

    pub fn ontology(&self) -> &Ontology {
        &self.ontology
    }

    pub fn queue(&self) -> &CandidateQueue {
        &self.queue
    }

    pub fn index(&self) -> &PostingsIndex {
        &self.index
    }

    pub fn seen(&self) -> &SeenRegistry {
        &self.seen
    }

    pub fn documents(&self) -> impl Iterator<Item = &DocumentRecord> {
        self.docs.values()
    }

    pub fn document(&self, doc_id: u64) -> Result<&DocumentRecord> {
        self.docs.get(&doc_id).ok_or(Error::UnknownDocument(doc_id))
    }

    fn content_path(&self, doc_id: u64) -> Option<PathBuf> {
        self.root
            .as_ref()
            .map(|r| r.join(CONTENT_DIR).join(format!("{doc_id}.txt")))
    }

    fn analyze(&self, text: &str) -> DocText {
        let a = self.text.analyze(text);
        DocText {
            sentences: a.sentence_norms(),
            tokens: a.tokens,
        }
    }

    // -- persistence ------------------------------------------------------

    fn save_ontology(&self) -> Result<()> {
        if let Some(root) = &self.root {
            let recs: Vec<StoreRecord> = self.ontology.records(&self.queue.records());
            ldjson::write(&root.join(ONTOLOGY_FILE), &recs)?;
        }
        Ok(())
    }

    fn save_docs(&self) -> Result<()> {
        if let Some(root) = &self.root {
            let lines: Vec<DocRecordLine> = self.docs.values().cloned().map(DocRecordLine::Document).collect();
            ldjson::write(&root.join(DOCS_FILE), &lines)?;
        }
        Ok(())
    }

    fn save_index(&self) -> Result<()> {
        match &self.root {
            Some(root) => self.index.save(&root.join(INDEX_FILE)),
            None => Ok(()),
        }
    }

    fn save_seen(&self) -> Result<()> {
        match &self.root {
            Some(root) => ldjson::write(&root.join(SEEN_FILE), &self.seen.entries()),
            None => Ok(()),
        }
    }

    pub fn save(&self) -> Result<()> {
        self.save_ontology()?;
        self.save_docs()?;
        self.save_index()?;
        self.save_seen()
    }

    /// Re-reads every store file and checks it against the in-memory state.
    pub fn verify_store(&self) -> Result<StoreSummary> {
        if let Some(root) = &self.root {
            let disk = Repository::open_with(root, self.config.clone())?;
            let mismatch = |what: &str| Err(Error::corrupt(root, format!("{what} on disk differs from memory")));
            if disk.ontology.snapshot() != self.ontology.snapshot() {
                return mismatch("ontology");
            }
            if disk.docs != self.docs {
                return mismatch("document registry");
            }
            if disk.index != self.index {
                return mismatch("index");
            }
        }
        Ok(StoreSummary {
            ontology_version: self.ontology.version(),
            concepts: self.ontology.concepts().len(),
            documents: self.docs.len(),
            index_terms: self.index.term_count(),
        })
    }

    // -- ingestion --------------------------------------------------------

    /// Registers one document without refreshing the candidate queue or
    /// touching disk stores other than the content file.
    fn ingest_one(&mut self, text: Option<&str>, meta: DocMetadata, extra_keys: &[String]) -> Result<IngestOutcome> {
        let text = text.filter(|t| !t.trim().is_empty());
        let dkey = doi_key(&meta.doi);
        if text.is_none() && dkey.is_none() {
            return Err(Error::EmptyDocument);
        }
        let hash = text.map(content_hash);
        let mut keys: Vec<String> = dkey.into_iter().collect();
        keys.extend(hash.as_deref().map(hash_key));
        keys.extend(extra_keys.iter().cloned());

        if let Some(existing) = self.seen.find(keys.iter().map(String::as_str)) {
            for k in keys {
                self.seen.insert(k, existing);
            }
            return Ok(IngestOutcome::Duplicate { doc_id: existing });
        }

        let doc_id = self.docs.keys().next_back().map_or(1, |id| id + 1);
        let mut record = DocumentRecord {
            doc_id,
            meta,
            content_state: if text.is_some() {
                ContentState::FullText
            } else {
                ContentState::MetadataOnly
            },
            content_hash: hash,
            ingest_time: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            occurrences: Vec::new(),
        };
        if let Some(text) = text {
            if let Some(path) = self.content_path(doc_id) {
                fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            }
            let parsed = self.analyze(text);
            let gaz = Gazetteer::build(&self.ontology, &self.text);
            record.occurrences = match_concepts(doc_id, &parsed.tokens, &gaz);
            let terms: Vec<&str> = parsed.tokens.iter().map(|t| t.norm.as_str()).collect();
            self.index.add_document(doc_id, &terms);
            self.live.insert(doc_id, parsed);
        }
        self.docs.insert(doc_id, record);
        for k in keys {
            self.seen.insert(k, doc_id);
        }
        Ok(IngestOutcome::Ingested { doc_id })
    }

    fn after_ingest(&mut self) -> Result<()> {
        self.concept_postings = ConceptPostings::from_documents(self.docs.values());
        self.refresh_candidates();
        self.save()
    }

    /// Stores a document, deduplicating by DOI and then by content hash.
    pub fn ingest_document(&mut self, text: &str, meta: DocMetadata) -> Result<IngestOutcome> {
        let out = self.ingest_one(Some(text), meta, &[])?;
        if matches!(out, IngestOutcome::Ingested { .. }) {
            self.after_ingest()?;
        } else {
            self.save_seen()?;
        }
        Ok(out)
    }

    /// Ingests several documents and refreshes the queue once at the end.
    /// Stops at the first error, keeping what was ingested before it.
    pub fn ingest_batch<I>(&mut self, items: I) -> Result<Vec<IngestOutcome>>
    where
        I: IntoIterator<Item = (String, DocMetadata)>,
    {
        let mut out = Vec::new();
        let mut failure = None;
        for (text, meta) in items {
            match self.ingest_one(Some(&text), meta, &[]) {
                Ok(o) => out.push(o),
                Err(e) => {
                    failure = Some(e);
                    break;
                }
            }
        }
        self.after_ingest()?;
        match failure {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }

    /// Pulls up to `limit` documents for `query` from a remote source.
    /// Every request to the source passes through `limiter`.
    pub fn fetch_remote<S, C>(
        &mut self,
        query: &str,
        limit: usize,
        client: &mut S,
        limiter: &mut RateLimiter<C>,
    ) -> Result<FetchSummary>
    where
        S: SourceClient + ?Sized,
        C: Clock,
    {
        if limit == 0 {
            return Err(Error::InvalidLimit);
        }
        let mut summary = FetchSummary::default();
        limiter.acquire();
        let ids = client
            .search(query, limit)
            .map_err(|e| Error::SourceUnavailable { summary, reason: e.0 })?;
        summary.fetched = ids.len() as u64;
        let mut failure = None;
        for id in ids {
            let ext = external_key(&id);
            if self.seen.get(&ext).is_some() {
                summary.skipped_dupe += 1;
                continue;
            }
            limiter.acquire();
            let remote = match client.fetch(&id) {
                Ok(r) => r,
                Err(e) => {
                    failure = Some(e.0);
                    break;
                }
            };
            let text = remote.ingestible_text();
            match self.ingest_one(text, remote.metadata(), &[ext]) {
                Ok(IngestOutcome::Ingested { .. }) => {
                    summary.ingested += 1;
                    if text.is_none() {
                        summary.metadata_only += 1;
                    }
                }
                Ok(IngestOutcome::Duplicate { .. }) => summary.skipped_dupe += 1,
                Err(Error::EmptyDocument) => {
                    log::warn!("skipping {id}: closed access without DOI");
                }
                Err(e) => return Err(e),
            }
        }
        self.after_ingest()?;
        match failure {
            Some(reason) => Err(Error::SourceUnavailable { summary, reason }),
            None => Ok(summary),
        }
    }

    /// Deletes the stored text of a document; metadata, DOI, postings and
    /// concept occurrences stay.
    pub fn purge_fulltext(&mut self, doc_id: u64) -> Result<()> {
        let state = self.document(doc_id)?.content_state;
        match state {
            ContentState::Purged => return Err(Error::AlreadyPurged(doc_id)),
            ContentState::MetadataOnly => return Err(Error::NoFullText(doc_id)),
            ContentState::FullText => {}
        }
        if let Some(path) = self.content_path(doc_id) {
            match fs::remove_file(&path) {
                Ok(()) => {}
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
                Err(e) => return Err(Error::io(&path, e)),
            }
        }
        self.live.remove(&doc_id);
        self.docs.get_mut(&doc_id).expect("checked").content_state = ContentState::Purged;
        self.save_docs()
    }

    pub fn full_text(&self, doc_id: u64) -> Result<String> {
        match self.document(doc_id)?.content_state {
            ContentState::Purged => Err(Error::Purged(doc_id)),
            ContentState::MetadataOnly => Err(Error::NoFullText(doc_id)),
            ContentState::FullText => match self.content_path(doc_id) {
                Some(path) => fs::read_to_string(&path).map_err(|e| Error::io(&path, e)),
                None => Ok(self.live[&doc_id]
                    .tokens
                    .iter()
                    .map(|t| t.surface.as_str())
                    .collect::<Vec<_>>()
                    .join(" ")),
            },
        }
    }

    /// Rebuilds postings from live documents plus the stored postings of
    /// purged ones.
    pub fn rebuild_index(&self) -> PostingsIndex {
        let streams: Vec<(u64, Vec<String>)> = self
            .live
            .iter()
            .map(|(&id, t)| (id, t.tokens.iter().map(|t| t.norm.clone()).collect()))
            .collect();
        let retained: BTreeSet<u64> = self
            .docs
            .values()
            .filter(|d| d.content_state == ContentState::Purged)
            .map(|d| d.doc_id)
            .collect();
        PostingsIndex::rebuild(
            streams.iter().map(|(id, t)| (*id, t.as_slice())),
            &self.index,
            &retained,
        )
    }

    // -- enrichment -------------------------------------------------------

    pub fn corpus_stats(&self) -> CorpusStats {
        CorpusStats::collect(
            self.live.iter().map(|(&id, t)| (id, t.sentences.as_slice())),
            &self.ontology,
            &self.text,
        )
    }

    fn refresh_candidates(&mut self) {
        let stats = self.corpus_stats();
        let fresh = extract_candidates(&stats, &self.ontology, &self.queue, &self.text, &self.config.enrichment);
        self.queue.refresh(fresh);
    }

    /// Re-runs candidate extraction over every document with text.
    pub fn extract(&mut self) -> Result<Vec<&CandidateConcept>> {
        self.refresh_candidates();
        self.save_ontology()?;
        Ok(self.queue.list_pending())
    }

    pub fn list_pending(&self) -> Vec<&CandidateConcept> {
        self.queue.list_pending()
    }

    /// Sentences shared between `term` and each approved concept, over the
    /// documents that still have text.
    fn term_cooccurrence(&self, term: &str) -> BTreeMap<ConceptId, u64> {
        let parts: Vec<&str> = term.split(' ').collect();
        let gaz = Gazetteer::build(&self.ontology, &self.text);
        let mut counts = BTreeMap::new();
        for doc in self.live.values() {
            for sentence in &doc.sentences {
                if !sentence
                    .windows(parts.len())
                    .any(|w| w.iter().zip(&parts).all(|(a, b)| a == b))
                {
                    continue;
                }
                let concepts: BTreeSet<ConceptId> = gaz.find_matches(sentence).into_iter().map(|m| m.concept).collect();
                for c in concepts {
                    *counts.entry(c).or_default() += 1;
                }
            }
        }
        counts
    }

    fn rematch(&mut self) {
        let gaz = Gazetteer::build(&self.ontology, &self.text);
        for (id, t) in &self.live {
            if let Some(d) = self.docs.get_mut(id) {
                d.occurrences = match_concepts(*id, &t.tokens, &gaz);
            }
        }
        self.concept_postings = ConceptPostings::from_documents(self.docs.values());
    }

    /// Approves a pending candidate, links it to co-occurring concepts and
    /// refreshes occurrences and the queue.
    pub fn accept_candidate(&mut self, term: &str) -> Result<ConceptId> {
        let norm = crate::ontology::normalize_label(term);
        let cooc = if self.live.is_empty() {
            self.queue
                .get(&norm)
                .map(|c| {
                    c.cooccurring_approved
                        .iter()
                        .map(|c| (c.concept, c.sentences))
                        .collect()
                })
                .unwrap_or_default()
        } else {
            self.term_cooccurrence(&norm)
        };
        let theta = self.config.enrichment.theta;
        let id = self.queue.accept(&norm, &mut self.ontology, &cooc, theta)?;
        self.rematch();
        self.refresh_candidates();
        self.save_ontology()?;
        self.save_docs()?;
        Ok(id)
    }

    pub fn reject_candidate(&mut self, term: &str) -> Result<()> {
        self.queue.reject(term)?;
        self.save_ontology()
    }

    // -- ontology ---------------------------------------------------------

    pub fn add_concept(&mut self, label: &str, synonyms: &[String], status: ConceptStatus) -> Result<ConceptId> {
        let id = self.ontology.add_concept(label, synonyms, status, Provenance::Manual)?;
        if status == ConceptStatus::Approved {
            self.rematch();
            self.refresh_candidates();
            self.save_docs()?;
        }
        self.save_ontology()?;
        Ok(id)
    }

    fn set_status(&mut self, id: ConceptId, to: ConceptStatus) -> Result<()> {
        match to {
            ConceptStatus::Approved => self.ontology.approve(id)?,
            _ => self.ontology.reject(id)?,
        }
        self.rematch();
        self.refresh_candidates();
        self.save_docs()?;
        self.save_ontology()
    }

    pub fn approve_concept(&mut self, id: ConceptId) -> Result<()> {
        self.set_status(id, ConceptStatus::Approved)
    }

    pub fn reject_concept(&mut self, id: ConceptId) -> Result<()> {
        self.set_status(id, ConceptStatus::Rejected)
    }

    pub fn add_relation(
        &mut self,
        src: ConceptId,
        dst: ConceptId,
        rel_type: RelationType,
        weight: f64,
        evidence_count: u64,
    ) -> Result<Relation> {
        let rel = self.ontology.add_relation(src, dst, rel_type, weight, evidence_count)?;
        self.save_ontology()?;
        Ok(rel)
    }

    pub fn concept(&self, id: ConceptId) -> Result<&ConceptNode> {
        self.ontology.get(id).ok_or(Error::UnknownConcept(id.0))
    }

    pub fn neighbors(&self, id: ConceptId, hops: usize, min_weight: f64) -> Result<Vec<(&ConceptNode, f64)>> {
        self.ontology.neighbors(id, hops, min_weight)
    }

    // -- search -----------------------------------------------------------

    pub fn searcher(&self) -> Searcher<'_> {
        Searcher {
            index: &self.index,
            ontology: &self.ontology,
            concept_postings: &self.concept_postings,
            docs: &self.docs,
            text: &self.text,
            params: self.config.search,
        }
    }

    pub fn search(&self, query: &SearchQuery) -> Result<SearchResponse> {
        self.searcher().search(query)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingestion::{RemoteDocRef, SourceError};
    use crate::search::SearchMode;
    use std::time::Duration;

    fn meta(doi: &str, year: i32) -> DocMetadata {
        DocMetadata {
            title: format!("t {doi}"),
            doi: doi.into(),
            year: Some(year),
            ..Default::default()
        }
    }

    #[test]
    fn doi_then_hash_dedup() {
        let mut r = Repository::in_memory(Config::default()).unwrap();
        let a = r.ingest_document("COPD text one.", meta("10.1/a", 2008)).unwrap();
        let b = r.ingest_document("Different text.", meta("10.1/A", 2008)).unwrap();
        assert_eq!(b, IngestOutcome::Duplicate { doc_id: a.doc_id() });
        let c = r.ingest_document("COPD  text one.", meta("10.1/c", 2008)).unwrap();
        assert_eq!(c, IngestOutcome::Duplicate { doc_id: a.doc_id() });
        assert_eq!(r.documents().count(), 1);
        assert_eq!(
            r.ingest_document("  ", meta("", 2008)).unwrap_err().code(),
            "EmptyDocument"
        );
    }

    #[test]
    fn ingested_text_is_searchable_immediately() {
        let mut r = Repository::in_memory(Config::default()).unwrap();
        let id = r
            .ingest_document("Renal toxicity in CKD.", meta("10.1/x", 2010))
            .unwrap()
            .doc_id();
        let resp = r.search(&SearchQuery::new(SearchMode::FreeText, "toxicity")).unwrap();
        assert_eq!(resp.results[0].doc_id, id);
    }

    #[test]
    fn purge_keeps_search_and_blocks_text() {
        let dir = tempfile::tempdir().unwrap();
        Repository::init(dir.path()).unwrap();
        let mut r = Repository::open(dir.path()).unwrap();
        r.add_concept("copd", &[], ConceptStatus::Approved).unwrap();
        let id = r
            .ingest_document("COPD and cough. COPD again.", meta("10.1/p", 2008))
            .unwrap()
            .doc_id();
        let queries = [
            SearchQuery::new(SearchMode::FreeText, "cough"),
            SearchQuery::new(SearchMode::Concept, "copd"),
        ];
        let before: Vec<_> = queries.iter().map(|q| r.search(q).unwrap()).collect();
        let index_before = r.index().clone();
        assert!(r.full_text(id).unwrap().contains("cough"));
        r.purge_fulltext(id).unwrap();
        assert_eq!(r.full_text(id).unwrap_err().code(), "Purged");
        assert_eq!(r.purge_fulltext(id).unwrap_err().code(), "AlreadyPurged");
        assert_eq!(r.purge_fulltext(99).unwrap_err().code(), "UnknownDocument");
        assert!(!dir.path().join(CONTENT_DIR).join(format!("{id}.txt")).exists());
        let after: Vec<_> = queries.iter().map(|q| r.search(q).unwrap()).collect();
        assert_eq!(before, after);
        assert_eq!(r.rebuild_index(), index_before);

        let reopened = Repository::open(dir.path()).unwrap();
        let again: Vec<_> = queries.iter().map(|q| reopened.search(q).unwrap()).collect();
        assert_eq!(before, again);
        assert_eq!(reopened.document(id).unwrap().content_state, ContentState::Purged);
    }

    #[test]
    fn init_is_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        Repository::init(dir.path()).unwrap();
        let mut r = Repository::open(dir.path()).unwrap();
        r.ingest_document("Some text.", meta("10.1/i", 2001)).unwrap();
        Repository::init(dir.path()).unwrap();
        assert_eq!(Repository::open(dir.path()).unwrap().documents().count(), 1);
    }

    struct ListSource {
        refs: Vec<RemoteDocRef>,
        fail_after: Option<usize>,
        fetches: usize,
    }

    impl SourceClient for ListSource {
        fn search(&mut self, _q: &str, limit: usize) -> std::result::Result<Vec<String>, SourceError> {
            Ok(self.refs.iter().take(limit).map(|r| r.external_id.clone()).collect())
        }
        fn fetch(&mut self, id: &str) -> std::result::Result<RemoteDocRef, SourceError> {
            if self.fail_after.is_some_and(|n| self.fetches >= n) {
                return Err(SourceError("connection reset".into()));
            }
            self.fetches += 1;
            Ok(self.refs.iter().find(|r| r.external_id == id).cloned().unwrap())
        }
    }

    #[derive(Default)]
    struct StepClock {
        now: Duration,
        stamps: Vec<Duration>,
    }

    impl Clock for StepClock {
        fn now(&self) -> Duration {
            self.now
        }
        fn sleep(&mut self, d: Duration) {
            self.now += d;
            self.stamps.push(self.now);
        }
    }

    fn remote(i: usize, open: bool) -> RemoteDocRef {
        RemoteDocRef {
            external_id: format!("pm{i}"),
            doi: format!("10.7/{i}"),
            title: format!("Doc {i}"),
            author: "A".into(),
            journal: "J".into(),
            year: Some(2008),
            volume: "1".into(),
            open_access: open,
            content: open.then(|| format!("Document number {i} about copd.")),
        }
    }

    #[test]
    fn fetch_counts_and_dedup() {
        let mut r = Repository::in_memory(Config::default()).unwrap();
        r.ingest_document("Document number 0 about copd.", meta("10.7/0", 2008))
            .unwrap();
        r.ingest_document("Document number 1 about copd.", meta("10.7/1", 2008))
            .unwrap();
        let mut src = ListSource {
            refs: (0..5).map(|i| remote(i, true)).collect(),
            fail_after: None,
            fetches: 0,
        };
        let mut rl = RateLimiter::new(1000.0, StepClock::default()).unwrap();
        let s = r.fetch_remote("copd", 10, &mut src, &mut rl).unwrap();
        assert_eq!(
            s,
            FetchSummary {
                fetched: 5,
                ingested: 3,
                skipped_dupe: 2,
                metadata_only: 0
            }
        );
        let s = r.fetch_remote("copd", 10, &mut src, &mut rl).unwrap();
        assert_eq!((s.ingested, s.skipped_dupe), (0, 5));
        assert_eq!(
            r.fetch_remote("copd", 0, &mut src, &mut rl).unwrap_err().code(),
            "InvalidLimit"
        );
    }

    #[test]
    fn closed_access_is_metadata_only() {
        let mut r = Repository::in_memory(Config::default()).unwrap();
        let mut src = ListSource {
            refs: (0..4).map(|i| remote(i, false)).collect(),
            fail_after: None,
            fetches: 0,
        };
        let mut rl = RateLimiter::new(1000.0, StepClock::default()).unwrap();
        let s = r.fetch_remote("", 10, &mut src, &mut rl).unwrap();
        assert_eq!((s.fetched, s.metadata_only, s.ingested), (4, 4, 4));
        assert_eq!(r.index().term_count(), 0);
        let id = r.documents().next().unwrap().doc_id;
        assert_eq!(r.full_text(id).unwrap_err().code(), "NoFullText");
        assert_eq!(r.purge_fulltext(id).unwrap_err().code(), "NoFullText");
    }

    #[test]
    fn fetch_failure_commits_partial_results() {
        let mut r = Repository::in_memory(Config::default()).unwrap();
        let mut src = ListSource {
            refs: (0..5).map(|i| remote(i, true)).collect(),
            fail_after: Some(2),
            fetches: 0,
        };
        let mut rl = RateLimiter::new(1000.0, StepClock::default()).unwrap();
        match r.fetch_remote("", 10, &mut src, &mut rl).unwrap_err() {
            Error::SourceUnavailable { summary, .. } => assert_eq!(summary.ingested, 2),
            e => panic!("unexpected {e}"),
        }
        assert_eq!(r.documents().count(), 2);
    }

    #[test]
    fn fetch_respects_rate_limit() {
        let mut r = Repository::in_memory(Config::default()).unwrap();
        let mut src = ListSource {
            refs: (0..4).map(|i| remote(i, true)).collect(),
            fail_after: None,
            fetches: 0,
        };
        let mut rl = RateLimiter::new(1.0, StepClock::default()).unwrap();
        r.fetch_remote("", 10, &mut src, &mut rl).unwrap();
        // 1 search + 4 fetches, each spaced one second apart
        let stamps = &rl.clock().stamps;
        assert_eq!(stamps.len(), 4);
        assert!(stamps.windows(2).all(|w| w[1] - w[0] >= Duration::from_secs(1)));
        assert_eq!(rl.clock().now, Duration::from_secs(4));
    }

    #[test]
    fn accept_builds_relation_from_live_cooccurrence() {
        let mut r = Repository::in_memory(Config::default()).unwrap();
        r.add_concept("copd", &[], ConceptStatus::Approved).unwrap();
        r.ingest_document(
            "Renal toxicity with COPD. Renal toxicity and COPD again.",
            meta("10.2/1", 2008),
        )
        .unwrap();
        r.ingest_document("Renal toxicity seen in COPD.", meta("10.2/2", 2009))
            .unwrap();
        let pending: Vec<String> = r.list_pending().iter().map(|c| c.term.clone()).collect();
        assert!(pending.contains(&"renal toxicity".to_string()));
        let id = r.accept_candidate("renal toxicity").unwrap();
        let rel = r.ontology().relations().find(|rel| rel.src == id).unwrap();
        assert_eq!(rel.evidence_count, 3);
        assert!((rel.weight - 3.0 / 8.0).abs() < 1e-12);
        // the new concept now matches in documents
        let resp = r
            .search(&SearchQuery::new(SearchMode::Concept, "renal toxicity"))
            .unwrap();
        assert_eq!(resp.results.len(), 2);
        assert!(r.list_pending().iter().all(|c| c.term != "renal toxicity"));
        assert_eq!(
            r.accept_candidate("renal toxicity").unwrap_err().code(),
            "AlreadyResolved"
        );
    }
}
