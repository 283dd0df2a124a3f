//! Operations shared by the CLI and the HTTP API. Each returns the exact
//! payload both front ends serialize.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use cscope_core::extraction::CandidateStatus;
use cscope_core::ingestion::{Clock, FixtureSource};
use cscope_core::{
    compare_systems, f_measure, precision, recall, CandidateConcept, Comparison, ConceptId, ConceptNode, ConceptStatus,
    DocMetadata, Error, FetchSummary, MetadataFilter, RateLimiter, Relation, RelationType, RelevanceJudgments,
    Repository, Result, Run, SearchMode, SearchQuery,
};

/// Error type of the front ends: a library error or a failure to bind the
/// listening socket.
#[derive(Debug)]
pub enum AppError {
    Core(Error),
    BindFailure(String),
}

impl From<Error> for AppError {
    fn from(e: Error) -> Self {
        AppError::Core(e)
    }
}

impl AppError {
    pub fn code(&self) -> &'static str {
        match self {
            AppError::Core(e) => e.code(),
            AppError::BindFailure(_) => "BindFailure",
        }
    }
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Core(e) => e.fmt(f),
            AppError::BindFailure(m) => write!(f, "cannot bind: {m}"),
        }
    }
}

pub fn ok_envelope<T: Serialize + ?Sized>(payload: &T) -> Value {
    json!({ "status": "ok", "payload": payload })
}

pub fn error_envelope(e: &AppError) -> Value {
    json!({ "status": "error", "error_code": e.code(), "message": e.to_string() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestRequest {
    pub text: String,
    #[serde(flatten)]
    pub meta: DocMetadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FetchRequest {
    pub query: String,
    pub limit: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AddConceptRequest {
    pub label: String,
    #[serde(default)]
    pub synonyms: Vec<String>,
    #[serde(default = "approved")]
    pub status: ConceptStatus,
}

fn approved() -> ConceptStatus {
    ConceptStatus::Approved
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AddRelationRequest {
    pub src: u64,
    pub dst: u64,
    pub rel_type: RelationType,
    pub weight: f64,
    #[serde(default)]
    pub evidence_count: u64,
}

/// Precision, recall and F for one `(g_r, N, G)` triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointEval {
    pub g_r: i64,
    pub n: i64,
    pub g: i64,
    pub beta: f64,
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
}

pub fn point_eval(g_r: i64, n: i64, g: i64, beta: f64) -> Result<PointEval> {
    let p = precision::<f64>(g_r, n)?;
    let r = recall::<f64>(g_r, g)?;
    Ok(PointEval {
        g_r,
        n,
        g,
        beta,
        precision: p,
        recall: r,
        f: f_measure(p, r, beta)?,
    })
}

pub fn add_concept(repo: &mut Repository, req: &AddConceptRequest) -> Result<AcceptOutcome> {
    let id = repo.add_concept(&req.label, &req.synonyms, req.status)?;
    concept_with_relations(repo, id)
}

pub fn set_concept_status(repo: &mut Repository, id: u64, approve: bool) -> Result<AcceptOutcome> {
    if approve {
        repo.approve_concept(ConceptId(id))?;
    } else {
        repo.reject_concept(ConceptId(id))?;
    }
    concept_with_relations(repo, ConceptId(id))
}

pub fn add_relation(repo: &mut Repository, req: &AddRelationRequest) -> Result<Relation> {
    repo.add_relation(
        ConceptId(req.src),
        ConceptId(req.dst),
        req.rel_type,
        req.weight,
        req.evidence_count,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcceptOutcome {
    pub concept: ConceptNode,
    pub relations: Vec<Relation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectOutcome {
    pub term: String,
    pub status: CandidateStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Neighbor {
    pub concept: ConceptNode,
    pub weight: f64,
}

pub fn parse_status(s: &str) -> Result<CandidateStatus> {
    match s {
        "pending" => Ok(CandidateStatus::Pending),
        "accepted" => Ok(CandidateStatus::Accepted),
        "rejected" => Ok(CandidateStatus::Rejected),
        other => Err(Error::parse("status", 1, format!("unknown candidate status {other:?}"))),
    }
}

/// Pending candidates in review order, or resolved ones by term.
pub fn candidates(repo: &Repository, status: CandidateStatus) -> Vec<CandidateConcept> {
    match status {
        CandidateStatus::Pending => repo.list_pending().into_iter().cloned().collect(),
        s => repo.queue().resolved().filter(|c| c.status == s).cloned().collect(),
    }
}

pub fn accept(repo: &mut Repository, term: &str) -> Result<AcceptOutcome> {
    let id = repo.accept_candidate(term)?;
    concept_with_relations(repo, id)
}

fn concept_with_relations(repo: &Repository, id: ConceptId) -> Result<AcceptOutcome> {
    Ok(AcceptOutcome {
        concept: repo.concept(id)?.clone(),
        relations: repo
            .ontology()
            .relations()
            .filter(|r| r.src == id || r.dst == id)
            .cloned()
            .collect(),
    })
}

pub fn reject(repo: &mut Repository, term: &str) -> Result<RejectOutcome> {
    repo.reject_candidate(term)?;
    Ok(RejectOutcome {
        term: cscope_core::ontology::normalize_label(term),
        status: CandidateStatus::Rejected,
    })
}

pub fn concept(repo: &Repository, id: u64) -> Result<AcceptOutcome> {
    concept_with_relations(repo, ConceptId(id))
}

pub fn neighbors(repo: &Repository, id: u64, hops: usize, min_weight: f64) -> Result<Vec<Neighbor>> {
    Ok(repo
        .neighbors(ConceptId(id), hops, min_weight)?
        .into_iter()
        .map(|(c, weight)| Neighbor {
            concept: c.clone(),
            weight,
        })
        .collect())
}

pub fn fetch<C: Clock>(
    repo: &mut Repository,
    source_dir: Option<&Path>,
    query: &str,
    limit: usize,
    limiter: &mut RateLimiter<C>,
) -> Result<FetchSummary> {
    let dir = source_dir.ok_or_else(|| Error::Config("no source_dir configured".into()))?;
    let mut client = FixtureSource::new(dir);
    repo.fetch_remote(query, limit, &mut client, limiter)
}

/// Builds a query from `key=value` parameters: `mode`, `q`, `limit`, and the
/// metadata filters `author`, `journal`, `year_from`, `year_to`, `doi`.
pub fn search_query<'a, I>(params: I) -> Result<SearchQuery>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    let mut mode = None;
    let mut text = String::new();
    let mut limit = None;
    let mut filters = MetadataFilter::default();
    let int = |k: &str, v: &str| -> Result<i64> {
        v.trim()
            .parse()
            .map_err(|_| Error::parse("query", 1, format!("{k}: expected an integer, got {v:?}")))
    };
    for (k, v) in params {
        match k {
            "mode" => mode = Some(v.parse::<SearchMode>()?),
            "q" | "query" => text = v.to_string(),
            "limit" => {
                let n = int(k, v)?;
                limit = Some(usize::try_from(n).map_err(|_| Error::InvalidLimit)?);
            }
            "author" => filters.author = Some(v.to_string()),
            "journal" => filters.journal = Some(v.to_string()),
            "doi" => filters.doi = Some(v.to_string()),
            "year_from" => filters.year_from = Some(int(k, v)? as i32),
            "year_to" => filters.year_to = Some(int(k, v)? as i32),
            other => return Err(Error::parse("query", 1, format!("unknown parameter {other:?}"))),
        }
    }
    let mode = mode.unwrap_or(if filters.is_empty() {
        SearchMode::FreeText
    } else {
        SearchMode::Metadata
    });
    let mut q = SearchQuery::new(mode, text);
    q.filters = filters;
    if let Some(l) = limit {
        q.limit = l;
    }
    Ok(q)
}

pub fn parse_g_values(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<u64>()
                .map_err(|_| Error::parse("g_values", 1, format!("not a count: {t:?}")))
        })
        .collect()
}

pub struct CompareInput<'a> {
    pub runs_a: &'a str,
    pub runs_b: &'a str,
    pub judgments: &'a str,
    pub name_a: &'a str,
    pub name_b: &'a str,
    pub beta: f64,
    pub g_values: &'a [u64],
}

pub fn compare(input: &CompareInput<'_>) -> Result<Comparison> {
    let a = Run::parse(input.runs_a, input.name_a, "runs_a")?;
    let b = Run::parse(input.runs_b, input.name_b, "runs_b")?;
    let j = RelevanceJudgments::parse(input.judgments, "judgments")?;
    compare_systems(&a, &b, &j, input.beta, input.g_values)
}
