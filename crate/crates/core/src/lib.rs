//! Ontology-backed document search.
//!
//! Documents are ingested into a [`Repository`], matched against an evolving
//! concept ontology, and searched by metadata, concept expansion or BM25.
//! The ranking and evaluation math is generic over [`Scalar`]; the aliases
//! below fix it to `f64`.

pub mod config;
pub mod error;
pub mod evaluation;
pub mod extraction;
pub mod index;
pub mod ingestion;
pub mod ldjson;
pub mod ontology;
pub mod ranking;
pub mod repository;
pub mod scalar;
pub mod search;
pub mod textproc;

pub use config::Config;
pub use error::{Error, ErrorClass, Result, ERROR_CODES};
pub use evaluation::{compare_systems, evaluate_run, f_measure, precision, recall, RelevanceJudgments, Run};
pub use extraction::{CandidateConcept, CandidateQueue, EnrichmentParams};
pub use index::PostingsIndex;
pub use ingestion::{DocMetadata, DocumentRecord, FetchSummary, FixtureSource, RateLimiter, SourceClient};
pub use ontology::{ConceptId, ConceptNode, ConceptStatus, Ontology, Relation, RelationType};
pub use repository::{IngestOutcome, Repository};
pub use scalar::Scalar;
pub use search::{MetadataFilter, SearchMode, SearchQuery, SearchResponse, SearchResult};
pub use textproc::TextProcessor;

pub type Real = f64;
pub type Bm25Scorer = ranking::Bm25<Real>;
pub type Weighting = ranking::CandidateWeighting<Real>;
pub type Report = evaluation::EvalReport<Real>;
pub type QueryEval = evaluation::QueryEval<Real>;
pub type Comparison = evaluation::SystemComparison<Real>;
pub type ComparisonRow = evaluation::ComparisonRow<Real>;
