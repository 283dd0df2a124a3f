//! Command line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::Serialize;

use cscope_core::ingestion::SystemClock;
use cscope_core::search::DEFAULT_LIMIT;
use cscope_core::{
    evaluate_run, ConceptStatus, Config, DocMetadata, Error, ErrorClass, IngestOutcome, MetadataFilter, RateLimiter,
    RelevanceJudgments, Repository, Result, Run, SearchMode, SearchQuery,
};

use crate::ops::{self, error_envelope, ok_envelope, AppError, CompareInput};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CLIENT: i32 = 3;
pub const EXIT_SERVER: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "cscope", version, about = "Ontology-backed literature search")]
pub struct Cli {
    /// Data directory holding the stores and cscope.conf.
    #[arg(long, env = "CSCOPE_DATA_DIR", global = true, default_value = "cscope-data")]
    pub data_dir: PathBuf,
    /// Print one JSON envelope instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create the data directory and a default config; safe to repeat.
    Init,
    /// Ingest plain-text files, reading an optional `Key: value` header.
    Ingest {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Pull documents from the configured source.
    Fetch {
        #[arg(long)]
        query: String,
        #[arg(long, default_value_t = 20)]
        limit: usize,
        /// Fixture source directory, overriding source_dir in the config.
        #[arg(long)]
        source: Option<PathBuf>,
    },
    /// Recompute candidate concepts and list the pending queue.
    Extract,
    /// Review candidate concepts.
    Queue {
        #[command(subcommand)]
        action: QueueAction,
    },
    /// Query the repository.
    Search(SearchArgs),
    /// Delete stored full text, keeping metadata and postings.
    Purge {
        doc_ids: Vec<u64>,
        /// Purge every document that still has text.
        #[arg(long, conflicts_with = "doc_ids")]
        all: bool,
    },
    /// Retrieval evaluation from run and judgment files.
    Eval {
        #[command(subcommand)]
        action: EvalAction,
    },
    /// Inspect and edit ontology concepts.
    Concept {
        #[command(subcommand)]
        action: ConceptAction,
    },
    /// Inspect stored documents.
    Docs {
        #[command(subcommand)]
        action: DocsAction,
    },
    /// Start the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
}

#[derive(Debug, Subcommand)]
pub enum QueueAction {
    /// Candidates in review order.
    List {
        #[arg(long, default_value = "pending")]
        status: String,
    },
    /// Accept one term, or the first N pending terms.
    Accept {
        #[arg(required_unless_present = "top", conflicts_with = "top")]
        term: Option<String>,
        #[arg(long)]
        top: Option<usize>,
    },
    Reject {
        term: String,
    },
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long, default_value = "free_text")]
    pub mode: String,
    #[arg(long, short)]
    pub query: Option<String>,
    #[arg(long)]
    pub author: Option<String>,
    #[arg(long)]
    pub journal: Option<String>,
    #[arg(long)]
    pub year_from: Option<i32>,
    #[arg(long)]
    pub year_to: Option<i32>,
    #[arg(long)]
    pub doi: Option<String>,
    #[arg(long, default_value_t = DEFAULT_LIMIT)]
    pub limit: usize,
}

#[derive(Debug, Subcommand)]
pub enum EvalAction {
    /// F-measure of two systems side by side.
    Compare {
        #[arg(long)]
        runs_a: PathBuf,
        #[arg(long)]
        runs_b: PathBuf,
        #[arg(long)]
        judgments: PathBuf,
        #[arg(long)]
        beta: Option<f64>,
        /// Comma separated G values; each re-evaluates all queries.
        #[arg(long)]
        g_values: Option<String>,
        #[arg(long, default_value = "A")]
        name_a: String,
        #[arg(long, default_value = "B")]
        name_b: String,
        /// Write the G/F curve of system A here.
        #[arg(long)]
        curve_a: Option<PathBuf>,
        #[arg(long)]
        curve_b: Option<PathBuf>,
    },
    /// Per-query precision, recall and F of one run.
    Run {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        judgments: PathBuf,
        #[arg(long)]
        beta: Option<f64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum ConceptAction {
    /// Add an approved concept.
    Add {
        label: String,
        #[arg(long = "synonym")]
        synonyms: Vec<String>,
        #[arg(long)]
        candidate: bool,
    },
    /// Add approved concepts from a file, one `label|synonym|...` per line.
    Import {
        file: PathBuf,
    },
    Show {
        id: u64,
    },
    List,
    Neighbors {
        id: u64,
        #[arg(long)]
        hops: Option<usize>,
        #[arg(long, default_value_t = 0.0)]
        min_weight: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum DocsAction {
    List,
    Show {
        id: u64,
        /// Print stored full text; fails once purged.
        #[arg(long)]
        text: bool,
    },
}

/// Result of a command: a JSON payload and its human rendering.
struct Output {
    json: serde_json::Value,
    text: String,
}

fn out<T: Serialize>(payload: &T, text: String) -> Output {
    Output {
        json: serde_json::to_value(payload).unwrap_or(serde_json::Value::Null),
        text,
    }
}

pub fn exit_code(e: &AppError) -> i32 {
    match e {
        AppError::BindFailure(_) => EXIT_SERVER,
        AppError::Core(e) => match e.class() {
            ErrorClass::Server => EXIT_SERVER,
            _ => EXIT_CLIENT,
        },
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
        }
    };
    let usage = match &cli.command {
        Command::Search(s) if s.mode != "metadata" && s.query.as_deref().is_none_or(|q| q.trim().is_empty()) => {
            Some("search needs --query unless --mode metadata")
        }
        Command::Purge { doc_ids, all: false } if doc_ids.is_empty() => Some("purge needs doc ids or --all"),
        _ => None,
    };
    if let Some(msg) = usage {
        let _ = Cli::command().error(ErrorKind::MissingRequiredArgument, msg).print();
        return EXIT_USAGE;
    }
    let json = cli.json;
    match execute(cli) {
        Ok(o) => {
            if json {
                println!("{}", ok_envelope(&o.json));
            } else {
                print!("{}", o.text);
            }
            0
        }
        Err(e) => {
            if json {
                println!("{}", error_envelope(&e));
            } else {
                eprintln!("error [{}]: {e}", e.code());
            }
            exit_code(&e)
        }
    }
}

fn open(dir: &Path) -> Result<Repository> {
    let repo = Repository::open(dir)?;
    for w in repo.config().validate()? {
        log::warn!("{w}");
    }
    Ok(repo)
}

fn read_text(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    String::from_utf8(bytes).map_err(|_| Error::parse(path.display().to_string(), 1, "file is not UTF-8 text"))
}

/// Text of an upload: `.txt` files are read directly, others go through the
/// configured extraction command when there is one.
fn load_upload(path: &Path, config: &Config) -> Result<String> {
    let is_text = path.extension().is_none_or(|x| x == "txt");
    let cmd = match (&config.text_extract_command, is_text) {
        (Some(c), false) => c,
        _ => return read_text(path),
    };
    let mut parts = cmd.split_whitespace();
    let prog = parts
        .next()
        .ok_or_else(|| Error::Config("empty text_extract_command".into()))?;
    let output = Process::new(prog)
        .args(parts)
        .arg(path)
        .output()
        .map_err(|e| Error::io(path, e))?;
    if !output.status.success() {
        return Err(Error::parse(
            path.display().to_string(),
            1,
            format!("text extraction exited with {}", output.status),
        ));
    }
    String::from_utf8(output.stdout)
        .map_err(|_| Error::parse(path.display().to_string(), 1, "extracted text is not UTF-8"))
}

fn candidate_table(list: &[cscope_core::CandidateConcept]) -> String {
    let mut s = String::new();
    for c in list {
        let _ = writeln!(s, "{:.6}\t{}\t{:.4}\t{}", c.weight, c.df, c.cooc, c.term);
    }
    s
}

fn execute(cli: Cli) -> std::result::Result<Output, AppError> {
    let dir = cli.data_dir.as_path();
    let output = match cli.command {
        Command::Init => {
            Repository::init(dir)?;
            out(
                &serde_json::json!({ "data_dir": dir }),
                format!("initialized {}\n", dir.display()),
            )
        }
        Command::Ingest { files } => {
            let mut repo = open(dir)?;
            let mut items = Vec::with_capacity(files.len());
            for f in &files {
                let raw = load_upload(f, repo.config())?;
                let (meta, body) = DocMetadata::split_header(&raw);
                items.push((body.to_string(), meta));
            }
            let results = repo.ingest_batch(items)?;
            let mut text = String::new();
            for (f, r) in files.iter().zip(&results) {
                let status = match r {
                    IngestOutcome::Ingested { .. } => "ingested",
                    IngestOutcome::Duplicate { .. } => "duplicate",
                };
                let _ = writeln!(text, "{status}\t{}\t{}", r.doc_id(), f.display());
            }
            out(&results, text)
        }
        Command::Fetch { query, limit, source } => {
            let mut repo = open(dir)?;
            let source = source.or_else(|| repo.config().source_dir.clone());
            let mut limiter = RateLimiter::new(repo.config().rate_limit, SystemClock::default())?;
            let s = ops::fetch(&mut repo, source.as_deref(), &query, limit, &mut limiter)?;
            let text = format!(
                "fetched {} ingested {} skipped_dupe {} metadata_only {}\n",
                s.fetched, s.ingested, s.skipped_dupe, s.metadata_only
            );
            out(&s, text)
        }
        Command::Extract => {
            let mut repo = open(dir)?;
            let list: Vec<_> = repo.extract()?.into_iter().cloned().collect();
            out(&list, candidate_table(&list))
        }
        Command::Queue { action } => {
            let mut repo = open(dir)?;
            match action {
                QueueAction::List { status } => {
                    let list = ops::candidates(&repo, ops::parse_status(&status)?);
                    out(&list, candidate_table(&list))
                }
                QueueAction::Accept { term: Some(term), .. } => {
                    let o = ops::accept(&mut repo, &term)?;
                    let text = format!(
                        "accepted {} as concept {} ({} relations)\n",
                        o.concept.label,
                        o.concept.id,
                        o.relations.len()
                    );
                    out(&o, text)
                }
                QueueAction::Accept { term: None, top } => {
                    let terms: Vec<String> = repo
                        .list_pending()
                        .into_iter()
                        .take(top.unwrap_or(0))
                        .map(|c| c.term.clone())
                        .collect();
                    let mut done = Vec::new();
                    let mut text = String::new();
                    for t in terms {
                        let o = ops::accept(&mut repo, &t)?;
                        let _ = writeln!(
                            text,
                            "accepted {} as concept {} ({} relations)",
                            o.concept.label,
                            o.concept.id,
                            o.relations.len()
                        );
                        done.push(o);
                    }
                    out(&done, text)
                }
                QueueAction::Reject { term } => {
                    let o = ops::reject(&mut repo, &term)?;
                    let text = format!("rejected {}\n", o.term);
                    out(&o, text)
                }
            }
        }
        Command::Search(a) => {
            let repo = open(dir)?;
            let mode: SearchMode = a.mode.parse()?;
            let query = SearchQuery {
                mode,
                text: a.query.unwrap_or_default(),
                filters: MetadataFilter {
                    author: a.author,
                    journal: a.journal,
                    year_from: a.year_from,
                    year_to: a.year_to,
                    doi: a.doi,
                },
                limit: a.limit,
            };
            let resp = repo.search(&query)?;
            let mut text = String::new();
            for r in &resp.results {
                let _ = writeln!(text, "{}\t{:.6}\t{}\t{}", r.doc_id, r.score, r.doi, r.title);
            }
            if !resp.unmatched_tokens.is_empty() {
                let _ = writeln!(text, "unmatched: {}", resp.unmatched_tokens.join(" "));
            }
            out(&resp, text)
        }
        Command::Purge { doc_ids, all } => {
            let mut repo = open(dir)?;
            let ids: Vec<u64> = if all {
                repo.documents()
                    .filter(|d| d.content_state == cscope_core::ingestion::ContentState::FullText)
                    .map(|d| d.doc_id)
                    .collect()
            } else {
                doc_ids
            };
            for &id in &ids {
                repo.purge_fulltext(id)?;
            }
            out(&ids, format!("purged {} documents\n", ids.len()))
        }
        Command::Eval { action } => eval(dir, action)?,
        Command::Concept { action } => concept(dir, action)?,
        Command::Docs { action } => {
            let repo = open(dir)?;
            match action {
                DocsAction::List => {
                    let docs: Vec<_> = repo.documents().cloned().collect();
                    let mut text = String::new();
                    for d in &docs {
                        let _ = writeln!(
                            text,
                            "{}\t{:?}\t{}\t{}",
                            d.doc_id, d.content_state, d.meta.doi, d.meta.title
                        );
                    }
                    out(&docs, text)
                }
                DocsAction::Show { id, text: false } => {
                    let d = repo.document(id)?.clone();
                    let text = serde_json::to_string_pretty(&d).unwrap_or_default() + "\n";
                    out(&d, text)
                }
                DocsAction::Show { id, text: true } => {
                    let body = repo.full_text(id)?;
                    out(&body, body.clone())
                }
            }
        }
        Command::Serve { addr } => {
            let repo = open(dir)?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| Error::io(dir, e))?;
            rt.block_on(crate::api::serve(repo, addr))?;
            out(&(), String::new())
        }
    };
    Ok(output)
}

fn eval(dir: &Path, action: EvalAction) -> Result<Output> {
    let default_beta = || Config::load(&dir.join(cscope_core::config::CONFIG_FILE)).map(|c| c.beta);
    match action {
        EvalAction::Compare {
            runs_a,
            runs_b,
            judgments,
            beta,
            g_values,
            name_a,
            name_b,
            curve_a,
            curve_b,
        } => {
            let beta = match beta {
                Some(b) => b,
                None => default_beta()?,
            };
            let g_values = ops::parse_g_values(g_values.as_deref().unwrap_or(""))?;
            let (ta, tb, tj) = (read_text(&runs_a)?, read_text(&runs_b)?, read_text(&judgments)?);
            let cmp = ops::compare(&CompareInput {
                runs_a: &ta,
                runs_b: &tb,
                judgments: &tj,
                name_a: &name_a,
                name_b: &name_b,
                beta,
                g_values: &g_values,
            })?;
            for (path, side_b) in [(curve_a, false), (curve_b, true)] {
                if let Some(p) = path {
                    std::fs::write(&p, cmp.curve_tsv(side_b)).map_err(|e| Error::io(&p, e))?;
                }
            }
            let text = cmp.to_tsv();
            Ok(out(&cmp, text))
        }
        EvalAction::Run { run, judgments, beta } => {
            let beta = match beta {
                Some(b) => b,
                None => default_beta()?,
            };
            let name = run
                .file_stem()
                .map_or("run".into(), |s| s.to_string_lossy().into_owned());
            let r = Run::parse(&read_text(&run)?, &name, &run.display().to_string())?;
            let j = RelevanceJudgments::parse(&read_text(&judgments)?, &judgments.display().to_string())?;
            let report = evaluate_run::<f64>(&r, &j, beta)?;
            let mut text = String::from("query\tg_r\tN\tG\tP\tR\tF\n");
            for q in &report.queries {
                let _ = writeln!(
                    text,
                    "{}\t{}\t{}\t{}\t{:.9}\t{:.9}\t{:.9}",
                    q.query_id, q.g_r, q.n, q.g, q.precision, q.recall, q.f
                );
            }
            let _ = writeln!(
                text,
                "mean\t\t\t\t{:.9}\t{:.9}\t{:.9}",
                report.mean_precision, report.mean_recall, report.mean_f
            );
            Ok(out(&report, text))
        }
    }
}

fn concept(dir: &Path, action: ConceptAction) -> Result<Output> {
    let mut repo = open(dir)?;
    match action {
        ConceptAction::Add {
            label,
            synonyms,
            candidate,
        } => {
            let status = if candidate {
                ConceptStatus::Candidate
            } else {
                ConceptStatus::Approved
            };
            let id = repo.add_concept(&label, &synonyms, status)?;
            let c = repo.concept(id)?.clone();
            Ok(out(&c, format!("{}\t{}\n", c.id, c.label)))
        }
        ConceptAction::Import { file } => {
            let body = read_text(&file)?;
            let mut added = Vec::new();
            for line in body
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
            {
                let mut parts = line.split('|').map(str::trim);
                let label = parts.next().unwrap_or_default();
                let synonyms: Vec<String> = parts.filter(|s| !s.is_empty()).map(String::from).collect();
                added.push(repo.add_concept(label, &synonyms, ConceptStatus::Approved)?);
            }
            Ok(out(&added, format!("imported {} concepts\n", added.len())))
        }
        ConceptAction::Show { id } => {
            let c = ops::concept(&repo, id)?;
            let text = serde_json::to_string_pretty(&c).unwrap_or_default() + "\n";
            Ok(out(&c, text))
        }
        ConceptAction::List => {
            let list: Vec<_> = repo.ontology().concepts().to_vec();
            let mut text = String::new();
            for c in &list {
                let _ = writeln!(text, "{}\t{}\t{}", c.id, c.status.as_str(), c.label);
            }
            Ok(out(&list, text))
        }
        ConceptAction::Neighbors { id, hops, min_weight } => {
            let hops = hops.unwrap_or(repo.config().search.hops);
            let list = ops::neighbors(&repo, id, hops, min_weight)?;
            let mut text = String::new();
            for n in &list {
                let _ = writeln!(text, "{}\t{:.6}\t{}", n.concept.id, n.weight, n.concept.label);
            }
            Ok(out(&list, text))
        }
    }
}
