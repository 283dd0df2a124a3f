//! HTTP front end. Every route answers with one JSON envelope.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, PoisonError, RwLock};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Multipart, Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;

use cscope_core::ingestion::SystemClock;
use cscope_core::{Error, ErrorClass, RateLimiter, Repository, Result};

use crate::ops::{
    self, error_envelope, ok_envelope, AddConceptRequest, AddRelationRequest, AppError, CompareInput, FetchRequest,
    IngestRequest,
};

pub struct AppState {
    repo: RwLock<Repository>,
    limiter: Mutex<RateLimiter<SystemClock>>,
    source_dir: Option<PathBuf>,
}

pub type Shared = Arc<AppState>;

impl AppState {
    pub fn new(repo: Repository) -> Result<Shared> {
        let limiter = RateLimiter::new(repo.config().rate_limit, SystemClock::default())?;
        let source_dir = repo.config().source_dir.clone();
        Ok(Arc::new(Self {
            repo: RwLock::new(repo),
            limiter: Mutex::new(limiter),
            source_dir,
        }))
    }

    /// Read access for callers that want to compare against the library.
    pub fn with_repo<T>(&self, f: impl FnOnce(&Repository) -> T) -> T {
        f(&self.repo.read().unwrap_or_else(PoisonError::into_inner))
    }

    fn write(&self) -> std::sync::RwLockWriteGuard<'_, Repository> {
        self.repo.write().unwrap_or_else(PoisonError::into_inner)
    }
}

pub fn status_for(e: &AppError) -> StatusCode {
    match e {
        AppError::BindFailure(_) => StatusCode::INTERNAL_SERVER_ERROR,
        AppError::Core(e) => match e.class() {
            ErrorClass::Invalid => StatusCode::BAD_REQUEST,
            ErrorClass::NotFound => StatusCode::NOT_FOUND,
            ErrorClass::Conflict => StatusCode::CONFLICT,
            ErrorClass::Server => StatusCode::INTERNAL_SERVER_ERROR,
        },
    }
}

struct Reply(Response);

impl IntoResponse for Reply {
    fn into_response(self) -> Response {
        self.0
    }
}

impl<T: Serialize> From<Result<T>> for Reply {
    fn from(r: Result<T>) -> Self {
        Reply(match r {
            Ok(v) => (StatusCode::OK, Json(ok_envelope(&v))).into_response(),
            Err(e) => {
                let e = AppError::Core(e);
                (status_for(&e), Json(error_envelope(&e))).into_response()
            }
        })
    }
}

fn id(raw: &str, what: &str) -> Result<u64> {
    raw.parse()
        .map_err(|_| Error::parse(what, 1, format!("expected a numeric id, got {raw:?}")))
}

fn body<T>(payload: std::result::Result<Json<T>, JsonRejection>) -> Result<T> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| Error::parse("body", 1, e.body_text()))
}

type Params = std::result::Result<Query<HashMap<String, String>>, QueryRejection>;

fn params(q: Params) -> Result<HashMap<String, String>> {
    q.map(|Query(m)| m).map_err(|e| Error::parse("query", 1, e.body_text()))
}

async fn ingest(State(s): State<Shared>, payload: std::result::Result<Json<IngestRequest>, JsonRejection>) -> Reply {
    let r = body(payload).and_then(|req| s.write().ingest_document(&req.text, req.meta));
    r.into()
}

async fn fetch(State(s): State<Shared>, payload: std::result::Result<Json<FetchRequest>, JsonRejection>) -> Reply {
    let req = match body(payload) {
        Ok(r) => r,
        Err(e) => return Err::<(), _>(e).into(),
    };
    // the limiter sleeps, so keep it off the async workers
    let r = tokio::task::spawn_blocking(move || {
        let mut limiter = s.limiter.lock().unwrap_or_else(PoisonError::into_inner);
        let mut repo = s.write();
        ops::fetch(&mut repo, s.source_dir.as_deref(), &req.query, req.limit, &mut limiter)
    })
    .await
    .unwrap_or_else(|e| Err(Error::InvariantViolation(format!("fetch task failed: {e}"))));
    r.into()
}

async fn get_document(State(s): State<Shared>, Path(raw): Path<String>) -> Reply {
    id(&raw, "doc_id")
        .and_then(|d| s.with_repo(|r| r.document(d).cloned()))
        .into()
}

async fn get_text(State(s): State<Shared>, Path(raw): Path<String>) -> Reply {
    id(&raw, "doc_id")
        .and_then(|d| s.with_repo(|r| r.full_text(d)))
        .map(|text| serde_json::json!({ "text": text }))
        .into()
}

async fn purge(State(s): State<Shared>, Path(raw): Path<String>) -> Reply {
    id(&raw, "doc_id")
        .and_then(|d| {
            let mut repo = s.write();
            repo.purge_fulltext(d)?;
            repo.document(d).cloned()
        })
        .into()
}

async fn list_candidates(State(s): State<Shared>, q: Params) -> Reply {
    params(q)
        .and_then(|m| ops::parse_status(m.get("status").map_or("pending", String::as_str)))
        .map(|st| s.with_repo(|r| ops::candidates(r, st)))
        .into()
}

async fn accept(State(s): State<Shared>, Path(term): Path<String>) -> Reply {
    ops::accept(&mut s.write(), &term).into()
}

async fn reject(State(s): State<Shared>, Path(term): Path<String>) -> Reply {
    ops::reject(&mut s.write(), &term).into()
}

async fn search(State(s): State<Shared>, q: Params) -> Reply {
    params(q)
        .and_then(|m| ops::search_query(m.iter().map(|(k, v)| (k.as_str(), v.as_str()))))
        .and_then(|query| s.with_repo(|r| r.search(&query)))
        .into()
}

async fn get_concept(State(s): State<Shared>, Path(raw): Path<String>) -> Reply {
    id(&raw, "concept_id")
        .and_then(|c| s.with_repo(|r| ops::concept(r, c)))
        .into()
}

async fn add_concept(
    State(s): State<Shared>,
    payload: std::result::Result<Json<AddConceptRequest>, JsonRejection>,
) -> Reply {
    body(payload)
        .and_then(|req| ops::add_concept(&mut s.write(), &req))
        .into()
}

async fn approve_concept(State(s): State<Shared>, Path(raw): Path<String>) -> Reply {
    id(&raw, "concept_id")
        .and_then(|c| ops::set_concept_status(&mut s.write(), c, true))
        .into()
}

async fn reject_concept(State(s): State<Shared>, Path(raw): Path<String>) -> Reply {
    id(&raw, "concept_id")
        .and_then(|c| ops::set_concept_status(&mut s.write(), c, false))
        .into()
}

async fn add_relation(
    State(s): State<Shared>,
    payload: std::result::Result<Json<AddRelationRequest>, JsonRejection>,
) -> Reply {
    body(payload)
        .and_then(|req| ops::add_relation(&mut s.write(), &req))
        .into()
}

async fn point_eval(State(s): State<Shared>, q: Params) -> Reply {
    let run = || {
        let m = params(q)?;
        let int = |k: &str| -> Result<i64> {
            let v = m
                .get(k)
                .ok_or_else(|| Error::parse("query", 1, format!("missing {k}")))?;
            v.parse()
                .map_err(|_| Error::parse("query", 1, format!("{k}: not an integer: {v:?}")))
        };
        let beta = match m.get("beta") {
            Some(b) => b
                .parse()
                .map_err(|_| Error::parse("beta", 1, format!("not a number: {b:?}")))?,
            None => s.with_repo(|r| r.config().beta),
        };
        ops::point_eval(int("g_r")?, int("n")?, int("g")?, beta)
    };
    run().into()
}

async fn verify(State(s): State<Shared>) -> Reply {
    s.with_repo(|r| r.verify_store()).into()
}

async fn neighbors(State(s): State<Shared>, Path(raw): Path<String>, q: Params) -> Reply {
    let run = || {
        let c = id(&raw, "concept_id")?;
        let m = params(q)?;
        let hops = match m.get("hops") {
            Some(h) => h
                .parse()
                .map_err(|_| Error::parse("hops", 1, format!("not a count: {h:?}")))?,
            None => s.with_repo(|r| r.config().search.hops),
        };
        let min_weight = match m.get("min_weight") {
            Some(w) => w
                .parse()
                .map_err(|_| Error::parse("min_weight", 1, format!("not a number: {w:?}")))?,
            None => 0.0,
        };
        s.with_repo(|r| ops::neighbors(r, c, hops, min_weight))
    };
    run().into()
}

async fn compare(State(s): State<Shared>, mut form: Multipart) -> Reply {
    let mut fields: HashMap<String, String> = HashMap::new();
    loop {
        match form.next_field().await {
            Ok(Some(f)) => {
                let name = f.name().unwrap_or_default().to_string();
                match f.text().await {
                    Ok(t) => {
                        fields.insert(name, t);
                    }
                    Err(e) => return Err::<(), _>(Error::parse("multipart", 1, e.body_text())).into(),
                }
            }
            Ok(None) => break,
            Err(e) => return Err::<(), _>(Error::parse("multipart", 1, e.body_text())).into(),
        }
    }
    let run = || {
        let need = |k: &str| {
            fields
                .get(k)
                .map(String::as_str)
                .ok_or_else(|| Error::parse("multipart", 1, format!("missing field {k:?}")))
        };
        let beta = match fields.get("beta") {
            Some(b) => b
                .trim()
                .parse()
                .map_err(|_| Error::parse("beta", 1, format!("not a number: {b:?}")))?,
            None => s.with_repo(|r| r.config().beta),
        };
        let g_values = ops::parse_g_values(fields.get("g_values").map_or("", String::as_str))?;
        ops::compare(&CompareInput {
            runs_a: need("runs_a")?,
            runs_b: need("runs_b")?,
            judgments: need("judgments")?,
            name_a: fields.get("name_a").map_or("A", String::as_str),
            name_b: fields.get("name_b").map_or("B", String::as_str),
            beta,
            g_values: &g_values,
        })
    };
    run().into()
}

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/documents", post(ingest))
        .route("/documents/{id}", get(get_document))
        .route("/documents/{id}/text", get(get_text))
        .route("/documents/{id}/purge", post(purge))
        .route("/fetch", post(fetch))
        .route("/candidates", get(list_candidates))
        .route("/candidates/{term}/accept", post(accept))
        .route("/candidates/{term}/reject", post(reject))
        .route("/search", get(search))
        .route("/concepts", post(add_concept))
        .route("/concepts/{id}", get(get_concept))
        .route("/concepts/{id}/approve", post(approve_concept))
        .route("/concepts/{id}/reject", post(reject_concept))
        .route("/relations", post(add_relation))
        .route("/concepts/{id}/neighbors", get(neighbors))
        .route("/eval/compare", post(compare))
        .route("/eval/point", get(point_eval))
        .route("/store/verify", post(verify))
        .with_state(state)
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(repo: Repository, addr: SocketAddr) -> std::result::Result<(), AppError> {
    let state = AppState::new(repo)?;
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| AppError::BindFailure(format!("{addr}: {e}")))?;
    log::info!("listening on {}", listener.local_addr().map_or(addr, |a| a));
    axum::serve(listener, router(state))
        .await
        .map_err(|e| AppError::BindFailure(e.to_string()))
}
