//! The three query modes: metadata filtering, concept search with graph
//! expansion, and BM25 free-text ranking.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extraction::Gazetteer;
use crate::index::PostingsIndex;
use crate::ingestion::DocumentRecord;
use crate::ontology::{ConceptId, Ontology};
use crate::ranking::{concept_association, Bm25};
use crate::textproc::TextProcessor;

pub const DEFAULT_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Metadata,
    Concept,
    FreeText,
}

impl std::str::FromStr for SearchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "metadata" => Ok(SearchMode::Metadata),
            "concept" => Ok(SearchMode::Concept),
            "free_text" | "freetext" | "free-text" => Ok(SearchMode::FreeText),
            other => Err(Error::parse("mode", 1, format!("unknown search mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetadataFilter {
    pub author: Option<String>,
    pub journal: Option<String>,
    pub year_from: Option<i32>,
    pub year_to: Option<i32>,
    pub doi: Option<String>,
}

fn present(s: &Option<String>) -> Option<String> {
    s.as_deref()
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_lowercase)
}

impl MetadataFilter {
    pub fn is_empty(&self) -> bool {
        present(&self.author).is_none()
            && present(&self.journal).is_none()
            && present(&self.doi).is_none()
            && self.year_from.is_none()
            && self.year_to.is_none()
    }

    pub fn matches(&self, doc: &DocumentRecord) -> bool {
        let m = &doc.meta;
        let contains = |field: &str, needle: Option<String>| needle.is_none_or(|n| field.to_lowercase().contains(&n));
        let year_ok = |bound: Option<i32>, ok: fn(i32, i32) -> bool| match bound {
            None => true,
            Some(b) => m.year.is_some_and(|y| ok(y, b)),
        };
        contains(&m.author, present(&self.author))
            && contains(&m.journal, present(&self.journal))
            && present(&self.doi).is_none_or(|d| m.doi.trim().to_lowercase() == d)
            && year_ok(self.year_from, |y, b| y >= b)
            && year_ok(self.year_to, |y, b| y <= b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchQuery {
    pub mode: SearchMode,
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub filters: MetadataFilter,
    pub limit: usize,
}

impl SearchQuery {
    pub fn new(mode: SearchMode, text: impl Into<String>) -> Self {
        Self {
            mode,
            text: text.into(),
            filters: MetadataFilter::default(),
            limit: DEFAULT_LIMIT,
        }
    }

    pub fn metadata(filters: MetadataFilter) -> Self {
        Self {
            mode: SearchMode::Metadata,
            text: String::new(),
            filters,
            limit: DEFAULT_LIMIT,
        }
    }

    pub fn with_limit(mut self, limit: usize) -> Self {
        self.limit = limit;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedConcept {
    pub concept: ConceptId,
    pub activation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub doc_id: u64,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub matched_concepts: Vec<MatchedConcept>,
    pub doi: String,
    pub title: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResponse {
    pub mode: SearchMode,
    pub results: Vec<SearchResult>,
    /// Concept mode: non-stopword query tokens that matched no concept.
    #[serde(default)]
    pub unmatched_tokens: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchParams {
    pub bm25: Bm25<f64>,
    pub decay: f64,
    pub hops: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            bm25: Bm25::default(),
            decay: 0.5,
            hops: 1,
        }
    }
}

/// Concept -> document -> match count.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConceptPostings {
    map: BTreeMap<ConceptId, BTreeMap<u64, u64>>,
}

impl ConceptPostings {
    pub fn from_documents<'a>(docs: impl IntoIterator<Item = &'a DocumentRecord>) -> Self {
        let mut cp = ConceptPostings::default();
        for d in docs {
            for o in &d.occurrences {
                cp.map.entry(o.concept_id).or_default().insert(d.doc_id, o.tf);
            }
        }
        cp
    }

    pub fn docs(&self, concept: ConceptId) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.map.get(&concept).into_iter().flatten().map(|(&d, &tf)| (d, tf))
    }
}

/// Read-only view of everything a query touches.
pub struct Searcher<'a> {
    pub index: &'a PostingsIndex,
    pub ontology: &'a Ontology,
    pub concept_postings: &'a ConceptPostings,
    pub docs: &'a BTreeMap<u64, DocumentRecord>,
    pub text: &'a TextProcessor,
    pub params: SearchParams,
}

fn rank(scores: BTreeMap<u64, f64>, limit: usize) -> Vec<(u64, f64)> {
    let mut ranked: Vec<(u64, f64)> = scores.into_iter().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(limit);
    ranked
}

impl Searcher<'_> {
    fn result(&self, doc_id: u64, score: f64) -> SearchResult {
        let (doi, title) = self
            .docs
            .get(&doc_id)
            .map(|d| (d.meta.doi.clone(), d.meta.title.clone()))
            .unwrap_or_default();
        SearchResult {
            doc_id,
            score,
            matched_concepts: Vec::new(),
            doi,
            title,
        }
    }

    pub fn search(&self, query: &SearchQuery) -> Result<SearchResponse> {
        if query.limit == 0 {
            return Err(Error::InvalidLimit);
        }
        match query.mode {
            SearchMode::Metadata => Ok(SearchResponse {
                mode: SearchMode::Metadata,
                results: self.search_metadata(&query.filters, query.limit)?,
                unmatched_tokens: Vec::new(),
            }),
            SearchMode::Concept => self.search_concept(&query.text, query.limit),
            SearchMode::FreeText => Ok(SearchResponse {
                mode: SearchMode::FreeText,
                results: self.search_freetext(&query.text, query.limit)?,
                unmatched_tokens: Vec::new(),
            }),
        }
    }

    /// Documents satisfying every filter, by id, each scored 1.
    pub fn search_metadata(&self, filters: &MetadataFilter, limit: usize) -> Result<Vec<SearchResult>> {
        if filters.is_empty() {
            return Err(Error::NoFilter);
        }
        Ok(self
            .docs
            .values()
            .filter(|d| filters.matches(d))
            .take(limit)
            .map(|d| self.result(d.doc_id, 1.0))
            .collect())
    }

    /// Seeds concepts found in the query, spreads activation over the graph
    /// and scores documents by `sum activation * tf / (tf + 1)`.
    pub fn search_concept(&self, text: &str, limit: usize) -> Result<SearchResponse> {
        if text.trim().is_empty() {
            return Err(Error::EmptyQuery);
        }
        let gaz = Gazetteer::build(self.ontology, self.text);
        let tokens = self.text.analyze(text).tokens;
        let mut covered = vec![false; tokens.len()];
        let mut seeds: BTreeSet<ConceptId> = BTreeSet::new();
        let mut offset = 0;
        for sentence in tokens.chunk_by(|a, b| a.sentence_index == b.sentence_index) {
            let norms: Vec<&str> = sentence.iter().map(|t| t.norm.as_str()).collect();
            for m in gaz.find_matches(&norms) {
                seeds.insert(m.concept);
                covered[offset + m.start..offset + m.start + m.len].fill(true);
            }
            offset += sentence.len();
        }
        let mut unmatched = Vec::new();
        for (t, hit) in tokens.iter().zip(&covered) {
            if !hit && !self.text.is_stopword(&t.norm) && !unmatched.contains(&t.norm) {
                unmatched.push(t.norm.clone());
            }
        }

        let seed_list: Vec<(ConceptId, f64)> = seeds.iter().map(|&c| (c, 1.0)).collect();
        let activation = self.ontology.expand(&seed_list, self.params.hops, self.params.decay);
        let mut scores: BTreeMap<u64, f64> = BTreeMap::new();
        let mut matched: BTreeMap<u64, Vec<MatchedConcept>> = BTreeMap::new();
        for (&concept, &act) in &activation {
            for (doc, tf) in self.concept_postings.docs(concept) {
                *scores.entry(doc).or_default() += act * concept_association::<f64>(tf);
                matched.entry(doc).or_default().push(MatchedConcept {
                    concept,
                    activation: act,
                });
            }
        }
        let results = rank(scores, limit)
            .into_iter()
            .map(|(doc, score)| SearchResult {
                matched_concepts: matched.remove(&doc).unwrap_or_default(),
                ..self.result(doc, score)
            })
            .collect();
        Ok(SearchResponse {
            mode: SearchMode::Concept,
            results,
            unmatched_tokens: unmatched,
        })
    }

    /// BM25 over the distinct non-stopword query terms.
    pub fn search_freetext(&self, text: &str, limit: usize) -> Result<Vec<SearchResult>> {
        if text.trim().is_empty() {
            return Err(Error::EmptyQuery);
        }
        let mut terms: Vec<String> = Vec::new();
        for t in self.text.terms(text) {
            if !self.text.is_stopword(&t) && !terms.contains(&t) {
                terms.push(t);
            }
        }
        let bm25 = self.params.bm25;
        let n_docs = self.index.n_docs();
        let avg = self.index.avg_doc_len();
        let mut scores: BTreeMap<u64, f64> = BTreeMap::new();
        for term in &terms {
            let postings = self.index.postings(term);
            if postings.is_empty() {
                continue;
            }
            let idf = bm25.idf(postings.len() as u64, n_docs);
            for p in postings {
                let len = self.index.doc_len(p.doc_id).unwrap_or(0);
                *scores.entry(p.doc_id).or_default() += bm25.term_score(p.tf, len, avg, idf);
            }
        }
        Ok(rank(scores, limit)
            .into_iter()
            .map(|(doc, score)| self.result(doc, score))
            .collect())
    }
}
