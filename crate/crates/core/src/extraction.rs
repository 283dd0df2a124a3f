//! Gazetteer matching of known concepts and the candidate enrichment queue.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ontology::{normalize_label, ConceptId, ConceptStatus, Ontology, Provenance, RelationType};
use crate::ranking::{relation_strength, CandidateWeighting};
use crate::textproc::{is_numeric_token, TextProcessor, Token};

/// Longest candidate n-gram, in tokens.
pub const MAX_NGRAM: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptOccurrence {
    pub doc_id: u64,
    pub concept_id: ConceptId,
    /// Sentence indices holding at least one match, ascending.
    pub sentences: Vec<usize>,
    pub tf: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Match {
    pub start: usize,
    pub len: usize,
    pub concept: ConceptId,
}

/// Token-sequence dictionary of every approved label and synonym.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    entries: HashMap<Vec<String>, ConceptId>,
    max_len: usize,
}

impl Gazetteer {
    /// When two names normalize to the same tokens the lower concept id wins.
    pub fn build(onto: &Ontology, tp: &TextProcessor) -> Self {
        let mut gaz = Gazetteer::default();
        for c in onto.approved() {
            for name in c.names() {
                let norms = tp.label_norms(name);
                if norms.is_empty() {
                    continue;
                }
                gaz.max_len = gaz.max_len.max(norms.len());
                gaz.entries.entry(norms).or_insert(c.id);
            }
        }
        gaz
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, norms: &[String]) -> Option<ConceptId> {
        self.entries.get(norms).copied()
    }

    /// Greedy left-to-right longest match within one token sequence.
    pub fn find_matches<S: AsRef<str>>(&self, norms: &[S]) -> Vec<Match> {
        let mut out = Vec::new();
        let mut key: Vec<String> = Vec::with_capacity(self.max_len);
        let mut i = 0;
        while i < norms.len() {
            let longest = self.max_len.min(norms.len() - i);
            let hit = (1..=longest).rev().find_map(|len| {
                key.clear();
                key.extend(norms[i..i + len].iter().map(|s| s.as_ref().to_string()));
                self.entries.get(&key).map(|&concept| Match { start: i, len, concept })
            });
            match hit {
                Some(m) => {
                    i += m.len;
                    out.push(m);
                }
                None => i += 1,
            }
        }
        out
    }
}

/// Matches approved concepts in a document's tokens, never across sentences,
/// and aggregates the hits per concept.
pub fn match_concepts(doc_id: u64, tokens: &[Token], gazetteer: &Gazetteer) -> Vec<ConceptOccurrence> {
    let mut agg: BTreeMap<ConceptId, (BTreeSet<usize>, u64)> = BTreeMap::new();
    for sentence in tokens.chunk_by(|a, b| a.sentence_index == b.sentence_index) {
        let norms: Vec<&str> = sentence.iter().map(|t| t.norm.as_str()).collect();
        for m in gazetteer.find_matches(&norms) {
            let e = agg.entry(m.concept).or_default();
            e.0.insert(sentence[0].sentence_index);
            e.1 += 1;
        }
    }
    agg.into_iter()
        .map(|(concept_id, (sentences, tf))| ConceptOccurrence {
            doc_id,
            concept_id,
            sentences: sentences.into_iter().collect(),
            tf,
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TermStats {
    pub source_docs: BTreeSet<u64>,
    /// Approved concept -> number of sentences shared with the term.
    pub cooccurrence: BTreeMap<ConceptId, u64>,
}

impl TermStats {
    pub fn df(&self) -> u64 {
        self.source_docs.len() as u64
    }
}

/// N-gram document frequencies and sentence co-occurrence with approved
/// concepts over a set of processed documents.
#[derive(Debug, Clone, Default)]
pub struct CorpusStats {
    pub n_docs: u64,
    pub approved: u64,
    pub terms: BTreeMap<String, TermStats>,
}

impl CorpusStats {
    /// `docs` yields each document id with its token norms grouped by sentence.
    pub fn collect<'a, I>(docs: I, onto: &Ontology, tp: &TextProcessor) -> Self
    where
        I: IntoIterator<Item = (u64, &'a [Vec<String>])>,
    {
        let gaz = Gazetteer::build(onto, tp);
        let mut stats = CorpusStats {
            approved: onto.approved().count() as u64,
            ..Default::default()
        };
        for (doc_id, sentences) in docs {
            stats.n_docs += 1;
            for sentence in sentences {
                let concepts: BTreeSet<ConceptId> = gaz.find_matches(sentence).into_iter().map(|m| m.concept).collect();
                for term in sentence_ngrams(sentence, tp) {
                    let e = stats.terms.entry(term).or_default();
                    e.source_docs.insert(doc_id);
                    for &c in &concepts {
                        *e.cooccurrence.entry(c).or_default() += 1;
                    }
                }
            }
        }
        stats
    }
}

/// Distinct admissible n-grams (n = 1..=3) of one sentence: no stopword at
/// either end and no all-digit token anywhere.
pub fn sentence_ngrams<S: AsRef<str>>(sentence: &[S], tp: &TextProcessor) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for start in 0..sentence.len() {
        for len in 1..=MAX_NGRAM.min(sentence.len() - start) {
            let gram = &sentence[start..start + len];
            if is_numeric_token(gram[len - 1].as_ref()) {
                break;
            }
            if tp.is_stopword(gram[0].as_ref()) {
                break;
            }
            if tp.is_stopword(gram[len - 1].as_ref()) {
                continue;
            }
            let joined = gram.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(" ");
            out.insert(joined);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateStatus {
    Pending,
    Accepted,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cooccurrence {
    pub concept: ConceptId,
    pub sentences: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateConcept {
    pub term: String,
    pub df: u64,
    pub weight: f64,
    /// Fraction of approved concepts sharing a sentence with the term.
    pub cooc: f64,
    pub cooccurring_approved: Vec<Cooccurrence>,
    pub status: CandidateStatus,
    pub source_docs: BTreeSet<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnrichmentParams {
    pub lambda: f64,
    pub theta: u64,
    pub min_df: u64,
}

impl Default for EnrichmentParams {
    fn default() -> Self {
        Self {
            lambda: 0.5,
            theta: 2,
            min_df: 2,
        }
    }
}

/// Correspondence weight of a term against the approved concepts.
pub fn score_candidate(stats: &TermStats, corpus: &CorpusStats, lambda: f64) -> f64 {
    let cooc = stats.cooccurrence.len() as u64;
    CandidateWeighting::new(lambda).weight(stats.df(), corpus.n_docs, cooc, corpus.approved)
}

/// Terms that may not be proposed again: every name of a concept in the
/// ontology (rejected ones included) plus resolved queue entries.
fn blocked_terms(onto: &Ontology, queue: &CandidateQueue, tp: &TextProcessor) -> HashSet<String> {
    let mut blocked: HashSet<String> = HashSet::new();
    for c in onto.concepts() {
        for name in c.names() {
            blocked.insert(name.to_string());
            blocked.insert(tp.label_norms(name).join(" "));
        }
    }
    blocked.extend(queue.resolved().map(|c| c.term.clone()));
    blocked
}

pub fn extract_candidates(
    corpus: &CorpusStats,
    onto: &Ontology,
    queue: &CandidateQueue,
    tp: &TextProcessor,
    params: &EnrichmentParams,
) -> Vec<CandidateConcept> {
    let blocked = blocked_terms(onto, queue, tp);
    corpus
        .terms
        .iter()
        .filter(|(term, s)| s.df() >= params.min_df && !blocked.contains(*term))
        .map(|(term, s)| {
            let approved = corpus.approved.max(1);
            CandidateConcept {
                term: term.clone(),
                df: s.df(),
                weight: score_candidate(s, corpus, params.lambda),
                cooc: s.cooccurrence.len() as f64 / approved as f64,
                cooccurring_approved: s
                    .cooccurrence
                    .iter()
                    .map(|(&concept, &sentences)| Cooccurrence { concept, sentences })
                    .collect(),
                status: CandidateStatus::Pending,
                source_docs: s.source_docs.clone(),
            }
        })
        .collect()
}

/// Pending candidates plus the tombstones of every resolved one.
#[derive(Debug, Clone, Default)]
pub struct CandidateQueue {
    items: BTreeMap<String, CandidateConcept>,
}

impl CandidateQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records(records: Vec<CandidateConcept>) -> Self {
        Self {
            items: records.into_iter().map(|c| (c.term.clone(), c)).collect(),
        }
    }

    pub fn records(&self) -> Vec<CandidateConcept> {
        self.items.values().cloned().collect()
    }

    pub fn get(&self, term: &str) -> Option<&CandidateConcept> {
        self.items.get(&normalize_label(term))
    }

    pub fn resolved(&self) -> impl Iterator<Item = &CandidateConcept> {
        self.items.values().filter(|c| c.status != CandidateStatus::Pending)
    }

    /// Replaces every pending entry with a fresh extraction result.
    pub fn refresh(&mut self, fresh: Vec<CandidateConcept>) {
        self.items.retain(|_, c| c.status != CandidateStatus::Pending);
        for c in fresh {
            if !self.items.contains_key(&c.term) {
                self.items.insert(c.term.clone(), c);
            }
        }
    }

    /// Pending candidates by descending weight, ties by term.
    pub fn list_pending(&self) -> Vec<&CandidateConcept> {
        let mut out: Vec<_> = self
            .items
            .values()
            .filter(|c| c.status == CandidateStatus::Pending)
            .collect();
        out.sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| a.term.cmp(&b.term)));
        out
    }

    fn pending(&self, term: &str) -> Result<&CandidateConcept> {
        let c = self
            .items
            .get(term)
            .ok_or_else(|| Error::UnknownCandidate(term.to_string()))?;
        if c.status != CandidateStatus::Pending {
            return Err(Error::AlreadyResolved(term.to_string()));
        }
        Ok(c)
    }

    /// Promotes a pending term to an approved concept and links it to every
    /// approved concept it shares at least `theta` sentences with, using
    /// `cooccurrence` (concept -> sentence count) as the evidence.
    pub fn accept(
        &mut self,
        term: &str,
        onto: &mut Ontology,
        cooccurrence: &BTreeMap<ConceptId, u64>,
        theta: u64,
    ) -> Result<ConceptId> {
        let term = normalize_label(term);
        let cand = self.pending(&term)?;
        let origin = cand.source_docs.first().copied();
        let id = onto.add_concept(
            &term,
            Vec::<&str>::new(),
            ConceptStatus::Approved,
            Provenance::Extraction { doc: origin },
        )?;
        for (&other, &n) in cooccurrence {
            if n >= theta.max(1) && other != id && onto.is_approved(other) {
                onto.add_relation(id, other, RelationType::RelatedTo, relation_strength(n), n)?;
            }
        }
        self.items.get_mut(&term).expect("pending entry").status = CandidateStatus::Accepted;
        Ok(id)
    }

    pub fn reject(&mut self, term: &str) -> Result<()> {
        let term = normalize_label(term);
        self.pending(&term)?;
        self.items.get_mut(&term).expect("pending entry").status = CandidateStatus::Rejected;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn onto_with(labels: &[&str]) -> Ontology {
        let mut o = Ontology::new();
        for l in labels {
            o.add_concept(l, Vec::<&str>::new(), ConceptStatus::Approved, Provenance::Manual)
                .unwrap();
        }
        o
    }

    fn occurrences(text: &str, onto: &Ontology) -> Vec<(String, u64)> {
        let tp = TextProcessor::default();
        let gaz = Gazetteer::build(onto, &tp);
        match_concepts(1, &tp.analyze(text).tokens, &gaz)
            .into_iter()
            .map(|o| (onto.get(o.concept_id).unwrap().label.clone(), o.tf))
            .collect()
    }

    #[test]
    fn longest_match_suppresses_nested_entries() {
        let o = onto_with(&["chronic kidney disease", "kidney"]);
        assert_eq!(
            occurrences("chronic kidney disease stage", &o),
            vec![("chronic kidney disease".to_string(), 1)]
        );
        assert_eq!(occurrences("the kidney", &o), vec![("kidney".to_string(), 1)]);
    }

    #[test]
    fn empty_ontology_matches_nothing() {
        assert!(occurrences("copd copd", &Ontology::new()).is_empty());
    }

    #[test]
    fn repeated_matches_aggregate() {
        let o = onto_with(&["copd"]);
        assert_eq!(occurrences("copd copd", &o), vec![("copd".to_string(), 2)]);
        let tp = TextProcessor::default();
        let occ = match_concepts(
            9,
            &tp.analyze("COPD here. Then COPD again. None.").tokens,
            &Gazetteer::build(&o, &tp),
        );
        assert_eq!(occ[0].sentences, vec![0, 1]);
        assert_eq!(occ[0].doc_id, 9);
    }

    #[test]
    fn matches_do_not_cross_sentences() {
        let o = onto_with(&["kidney disease"]);
        assert!(occurrences("Bad kidney. Disease follows.", &o).is_empty());
    }

    #[test]
    fn synonyms_match() {
        let mut o = Ontology::new();
        o.add_concept(
            "copd",
            ["chronic obstructive pulmonary disease"],
            ConceptStatus::Approved,
            Provenance::Manual,
        )
        .unwrap();
        assert_eq!(
            occurrences("Chronic obstructive pulmonary disease and COPD", &o),
            vec![("copd".to_string(), 2)]
        );
    }

    #[test]
    fn ngram_filters() {
        let tp = TextProcessor::default();
        let s: Vec<String> = ["the", "renal", "toxicity", "of", "2008", "drugs"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let grams = sentence_ngrams(&s, &tp);
        let expect: BTreeSet<String> = ["renal", "toxicity", "renal toxicity", "drugs"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(grams, expect);
    }

    fn corpus(docs: &[&str]) -> Vec<(u64, Vec<Vec<String>>)> {
        let tp = TextProcessor::default();
        docs.iter()
            .enumerate()
            .map(|(i, d)| (i as u64 + 1, tp.analyze(d).sentence_norms()))
            .collect()
    }

    fn stats(docs: &[(u64, Vec<Vec<String>>)], onto: &Ontology) -> CorpusStats {
        CorpusStats::collect(
            docs.iter().map(|(id, s)| (*id, s.as_slice())),
            onto,
            &TextProcessor::default(),
        )
    }

    #[test]
    fn candidates_counted_over_fixture() {
        let mut texts = vec!["Renal toxicity was seen in copd."; 3];
        texts.extend(["Unrelated words only."; 7]);
        let docs = corpus(&texts);
        let onto = onto_with(&["copd"]);
        let st = stats(&docs, &onto);
        let q = CandidateQueue::new();
        let tp = TextProcessor::default();
        let cands = extract_candidates(&st, &onto, &q, &tp, &EnrichmentParams::default());
        let c = cands.iter().find(|c| c.term == "renal toxicity").unwrap();
        assert_eq!(c.df, 3);
        // (3/10) * (0.5 + 0.5 * 1/1)
        assert!((c.weight - 0.3).abs() < 1e-12);
        assert_eq!(
            c.cooccurring_approved,
            vec![Cooccurrence {
                concept: ConceptId(1),
                sentences: 3
            }]
        );
        assert!(!cands.iter().any(|c| c.term == "copd"));

        let strict = EnrichmentParams {
            min_df: 5,
            ..Default::default()
        };
        let cands = extract_candidates(&st, &onto, &q, &tp, &strict);
        assert!(!cands.iter().any(|c| c.term == "renal toxicity"));
    }

    #[test]
    fn score_example() {
        let mut ts = TermStats::default();
        ts.source_docs.extend([1, 2, 3, 4]);
        ts.cooccurrence.insert(ConceptId(1), 1);
        ts.cooccurrence.insert(ConceptId(2), 3);
        let corpus = CorpusStats {
            n_docs: 10,
            approved: 5,
            terms: BTreeMap::new(),
        };
        assert!((score_candidate(&ts, &corpus, 0.5) - 0.28).abs() < 1e-12);
        let empty = CorpusStats {
            n_docs: 10,
            approved: 0,
            terms: BTreeMap::new(),
        };
        ts.cooccurrence.clear();
        assert!((score_candidate(&ts, &empty, 0.5) - 0.2).abs() < 1e-12);
    }

    fn cand(term: &str, weight: f64) -> CandidateConcept {
        CandidateConcept {
            term: term.into(),
            df: 2,
            weight,
            cooc: 0.0,
            cooccurring_approved: vec![],
            status: CandidateStatus::Pending,
            source_docs: [1].into(),
        }
    }

    #[test]
    fn pending_order() {
        let mut q = CandidateQueue::new();
        assert!(q.list_pending().is_empty());
        q.refresh(vec![cand("b", 0.2), cand("a", 0.3), cand("c", 0.2)]);
        let terms: Vec<_> = q.list_pending().iter().map(|c| c.term.as_str()).collect();
        assert_eq!(terms, vec!["a", "b", "c"]);
    }

    #[test]
    fn accept_builds_relations_above_threshold() {
        let mut onto = onto_with(&["copd", "ckd"]);
        let mut q = CandidateQueue::new();
        q.refresh(vec![cand("renal toxicity", 0.3)]);
        let cooc = BTreeMap::from([(ConceptId(1), 5), (ConceptId(2), 1)]);
        let id = q.accept("Renal Toxicity", &mut onto, &cooc, 2).unwrap();
        assert_eq!(onto.get(id).unwrap().status, ConceptStatus::Approved);
        let rels: Vec<_> = onto.relations().collect();
        assert_eq!(rels.len(), 1);
        assert_eq!(
            (rels[0].src, rels[0].dst, rels[0].evidence_count),
            (id, ConceptId(1), 5)
        );
        assert!((rels[0].weight - 0.5).abs() < 1e-12);
        assert_eq!(
            q.accept("renal toxicity", &mut onto, &cooc, 2).unwrap_err().code(),
            "AlreadyResolved"
        );
        assert_eq!(q.reject("renal toxicity").unwrap_err().code(), "AlreadyResolved");
    }

    #[test]
    fn accept_below_threshold_adds_no_relation() {
        let mut onto = onto_with(&["copd"]);
        let mut q = CandidateQueue::new();
        q.refresh(vec![cand("wheeze", 0.3)]);
        q.accept("wheeze", &mut onto, &BTreeMap::from([(ConceptId(1), 1)]), 2)
            .unwrap();
        assert_eq!(onto.relations().count(), 0);
    }

    #[test]
    fn reject_is_permanent() {
        let docs = corpus(&["Renal toxicity again.", "Renal toxicity again."]);
        let onto = Ontology::new();
        let tp = TextProcessor::default();
        let params = EnrichmentParams::default();
        let mut q = CandidateQueue::new();
        let st = stats(&docs, &onto);
        q.refresh(extract_candidates(&st, &onto, &q, &tp, &params));
        assert!(q.get("renal toxicity").is_some());
        q.reject("renal toxicity").unwrap();
        q.refresh(extract_candidates(&st, &onto, &q, &tp, &params));
        assert_eq!(q.get("renal toxicity").unwrap().status, CandidateStatus::Rejected);
        assert!(q.list_pending().iter().all(|c| c.term != "renal toxicity"));
        assert_eq!(q.reject("nope").unwrap_err().code(), "UnknownCandidate");
    }

    #[test]
    fn duplicate_label_leaves_candidate_pending() {
        let mut onto = onto_with(&["wheeze"]);
        let mut q = CandidateQueue::new();
        q.refresh(vec![cand("wheeze", 0.3)]);
        assert_eq!(
            q.accept("wheeze", &mut onto, &BTreeMap::new(), 2).unwrap_err().code(),
            "DuplicateLabel"
        );
        assert_eq!(q.get("wheeze").unwrap().status, CandidateStatus::Pending);
    }
}
