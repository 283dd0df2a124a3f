//! Term postings, persisted on their own so they survive full-text purges.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ldjson;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub doc_id: u64,
    pub tf: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum IndexRecord {
    Doc { doc_id: u64, length: u64 },
    Term { term: String, postings: Vec<(u64, u64)> },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PostingsIndex {
    terms: BTreeMap<String, Vec<Posting>>,
    doc_lengths: BTreeMap<u64, u64>,
}

impl PostingsIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn n_docs(&self) -> u64 {
        self.doc_lengths.len() as u64
    }

    pub fn avg_doc_len(&self) -> f64 {
        if self.doc_lengths.is_empty() {
            return 0.0;
        }
        self.doc_lengths.values().sum::<u64>() as f64 / self.doc_lengths.len() as f64
    }

    pub fn doc_len(&self, doc_id: u64) -> Option<u64> {
        self.doc_lengths.get(&doc_id).copied()
    }

    pub fn contains_doc(&self, doc_id: u64) -> bool {
        self.doc_lengths.contains_key(&doc_id)
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.terms.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Indexes one document's terms, replacing any earlier entry for it.
    pub fn add_document<S: AsRef<str>>(&mut self, doc_id: u64, terms: &[S]) {
        self.remove_document(doc_id);
        let mut tf: BTreeMap<&str, u64> = BTreeMap::new();
        for t in terms {
            *tf.entry(t.as_ref()).or_default() += 1;
        }
        for (term, count) in tf {
            let list = self.terms.entry(term.to_string()).or_default();
            let at = list.partition_point(|p| p.doc_id < doc_id);
            list.insert(at, Posting { doc_id, tf: count });
        }
        self.doc_lengths.insert(doc_id, terms.len() as u64);
    }

    pub fn remove_document(&mut self, doc_id: u64) {
        if self.doc_lengths.remove(&doc_id).is_none() {
            return;
        }
        self.terms.retain(|_, list| {
            list.retain(|p| p.doc_id != doc_id);
            !list.is_empty()
        });
    }

    /// Copies every posting of `doc_id` from `other`.
    fn copy_document(&mut self, other: &PostingsIndex, doc_id: u64) {
        let Some(len) = other.doc_len(doc_id) else { return };
        for (term, list) in &other.terms {
            if let Ok(i) = list.binary_search_by_key(&doc_id, |p| p.doc_id) {
                let dst = self.terms.entry(term.clone()).or_default();
                let at = dst.partition_point(|p| p.doc_id < doc_id);
                dst.insert(at, list[i]);
            }
        }
        self.doc_lengths.insert(doc_id, len);
    }

    /// Builds an index from live token streams, carrying over the postings of
    /// documents in `retained` from `previous`.
    pub fn rebuild<'a, I>(streams: I, previous: &PostingsIndex, retained: &BTreeSet<u64>) -> Self
    where
        I: IntoIterator<Item = (u64, &'a [String])>,
    {
        let mut idx = PostingsIndex::new();
        for &doc in retained {
            idx.copy_document(previous, doc);
        }
        for (doc, terms) in streams {
            idx.add_document(doc, terms);
        }
        idx
    }

    fn records(&self) -> Vec<IndexRecord> {
        let docs = self
            .doc_lengths
            .iter()
            .map(|(&doc_id, &length)| IndexRecord::Doc { doc_id, length });
        let terms = self.terms.iter().map(|(t, list)| IndexRecord::Term {
            term: t.clone(),
            postings: list.iter().map(|p| (p.doc_id, p.tf)).collect(),
        });
        docs.chain(terms).collect()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        ldjson::encode(&self.records())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        ldjson::write(path, &self.records())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut idx = PostingsIndex::new();
        for rec in ldjson::read_or_empty::<IndexRecord>(path)? {
            match rec {
                IndexRecord::Doc { doc_id, length } => {
                    idx.doc_lengths.insert(doc_id, length);
                }
                IndexRecord::Term { term, postings } => {
                    let list: Vec<Posting> = postings
                        .into_iter()
                        .map(|(doc_id, tf)| Posting { doc_id, tf })
                        .collect();
                    if list.windows(2).any(|w| w[0].doc_id >= w[1].doc_id)
                        || list.iter().any(|p| !idx.doc_lengths.contains_key(&p.doc_id))
                    {
                        return Err(Error::corrupt(path, format!("bad postings for {term:?}")));
                    }
                    idx.terms.insert(term, list);
                }
            }
        }
        Ok(idx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn terms(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn postings_sorted_and_counted() {
        let mut idx = PostingsIndex::new();
        idx.add_document(5, &terms("copd copd treatment"));
        idx.add_document(2, &terms("copd kidney"));
        assert_eq!(
            idx.postings("copd"),
            &[Posting { doc_id: 2, tf: 1 }, Posting { doc_id: 5, tf: 2 }]
        );
        assert_eq!(idx.n_docs(), 2);
        assert!((idx.avg_doc_len() - 2.5).abs() < 1e-12);
        idx.remove_document(5);
        assert!(idx.postings("treatment").is_empty());
        assert_eq!(idx.n_docs(), 1);
    }

    #[test]
    fn rebuild_is_deterministic_and_keeps_retained_docs() {
        let mut prev = PostingsIndex::new();
        prev.add_document(1, &terms("a b b"));
        prev.add_document(2, &terms("b c"));
        let live = [(2u64, terms("b c"))];
        let build = || {
            PostingsIndex::rebuild(
                live.iter().map(|(d, t)| (*d, t.as_slice())),
                &prev,
                &BTreeSet::from([1]),
            )
        };
        let a = build();
        assert_eq!(a, prev);
        assert_eq!(a.to_bytes().unwrap(), build().to_bytes().unwrap());
        let empty = PostingsIndex::rebuild(std::iter::empty(), &PostingsIndex::new(), &BTreeSet::new());
        assert_eq!(empty.n_docs(), 0);
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("index.jsonl");
        let mut idx = PostingsIndex::new();
        idx.add_document(1, &terms("x y x"));
        idx.save(&path).unwrap();
        assert_eq!(PostingsIndex::load(&path).unwrap(), idx);
        assert_eq!(
            PostingsIndex::load(&dir.path().join("none")).unwrap(),
            PostingsIndex::new()
        );
    }
}
