//! Weighted concept graph with an approval lifecycle.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extraction::CandidateConcept;
use crate::ldjson;
use crate::ranking::relation_strength;

const SNAPSHOT_FORMAT: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConceptId(pub u64);

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConceptStatus {
    Approved,
    Candidate,
    Rejected,
}

impl ConceptStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ConceptStatus::Approved => "approved",
            ConceptStatus::Candidate => "candidate",
            ConceptStatus::Rejected => "rejected",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum Provenance {
    Manual,
    Extraction { doc: Option<u64> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptNode {
    pub id: ConceptId,
    pub label: String,
    pub synonyms: BTreeSet<String>,
    pub status: ConceptStatus,
    pub created_from: Provenance,
}

impl ConceptNode {
    /// Label followed by synonyms.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.label.as_str()).chain(self.synonyms.iter().map(String::as_str))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationType {
    RelatedTo,
    IsA,
    Treats,
    SymptomOf,
    ComorbidityOf,
}

impl std::str::FromStr for RelationType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "related_to" => RelationType::RelatedTo,
            "is_a" => RelationType::IsA,
            "treats" => RelationType::Treats,
            "symptom_of" => RelationType::SymptomOf,
            "comorbidity_of" => RelationType::ComorbidityOf,
            other => return Err(Error::Config(format!("unknown relation type {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub src: ConceptId,
    pub dst: ConceptId,
    pub rel_type: RelationType,
    pub weight: f64,
    pub evidence_count: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OntologySnapshot {
    pub concepts: Vec<ConceptNode>,
    pub relations: Vec<Relation>,
    pub version: u64,
}

/// One line of the ontology store file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StoreRecord {
    Meta { format: u32, version: u64 },
    Concept(ConceptNode),
    Relation(Relation),
    Candidate(CandidateConcept),
}

/// Lowercases, trims and collapses inner whitespace.
pub fn normalize_label(s: &str) -> String {
    s.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, Default)]
pub struct Ontology {
    concepts: Vec<ConceptNode>,
    relations: BTreeMap<(ConceptId, ConceptId, RelationType), Relation>,
    // label/synonym -> owner, non-rejected concepts only
    lexicon: HashMap<String, ConceptId>,
    version: u64,
}

impl Ontology {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn concepts(&self) -> &[ConceptNode] {
        &self.concepts
    }

    pub fn relations(&self) -> impl Iterator<Item = &Relation> {
        self.relations.values()
    }

    pub fn get(&self, id: ConceptId) -> Option<&ConceptNode> {
        let idx = usize::try_from(id.0).ok()?.checked_sub(1)?;
        self.concepts.get(idx)
    }

    fn require(&self, id: ConceptId) -> Result<&ConceptNode> {
        self.get(id).ok_or(Error::UnknownConcept(id.0))
    }

    pub fn approved(&self) -> impl Iterator<Item = &ConceptNode> {
        self.concepts.iter().filter(|c| c.status == ConceptStatus::Approved)
    }

    pub fn is_approved(&self, id: ConceptId) -> bool {
        self.get(id).is_some_and(|c| c.status == ConceptStatus::Approved)
    }

    /// True when `name` is the label or a synonym of some non-rejected concept.
    pub fn is_taken(&self, name: &str) -> bool {
        self.lexicon.contains_key(&normalize_label(name))
    }

    /// True when `name` belongs to a rejected concept.
    pub fn is_rejected_name(&self, name: &str) -> bool {
        let name = normalize_label(name);
        self.concepts
            .iter()
            .any(|c| c.status == ConceptStatus::Rejected && c.names().any(|n| n == name))
    }

    pub fn add_concept<I, S>(
        &mut self,
        label: &str,
        synonyms: I,
        status: ConceptStatus,
        created_from: Provenance,
    ) -> Result<ConceptId>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let label = normalize_label(label);
        if label.is_empty() {
            return Err(Error::InvalidLabel);
        }
        let synonyms: BTreeSet<String> = synonyms
            .into_iter()
            .map(|s| normalize_label(s.as_ref()))
            .filter(|s| !s.is_empty() && *s != label)
            .collect();
        if status != ConceptStatus::Rejected {
            if let Some(taken) = std::iter::once(&label)
                .chain(&synonyms)
                .find(|n| self.lexicon.contains_key(*n))
            {
                return Err(Error::DuplicateLabel(taken.clone()));
            }
        }
        let id = ConceptId(self.concepts.len() as u64 + 1);
        let node = ConceptNode {
            id,
            label,
            synonyms,
            status,
            created_from,
        };
        if status != ConceptStatus::Rejected {
            for n in node.names() {
                self.lexicon.insert(n.to_string(), id);
            }
        }
        self.concepts.push(node);
        self.version += 1;
        Ok(id)
    }

    fn transition(&mut self, id: ConceptId, to: ConceptStatus) -> Result<()> {
        let from = self.require(id)?.status;
        if from != ConceptStatus::Candidate || to == ConceptStatus::Candidate {
            return Err(Error::InvalidTransition {
                id: id.0,
                from: from.as_str(),
                to: to.as_str(),
            });
        }
        let node = &mut self.concepts[id.0 as usize - 1];
        node.status = to;
        if to == ConceptStatus::Rejected {
            for n in node.names() {
                self.lexicon.remove(n);
            }
        }
        self.version += 1;
        Ok(())
    }

    pub fn approve(&mut self, id: ConceptId) -> Result<()> {
        self.transition(id, ConceptStatus::Approved)
    }

    pub fn reject(&mut self, id: ConceptId) -> Result<()> {
        self.transition(id, ConceptStatus::Rejected)
    }

    /// Inserts a relation, or merges evidence into the existing one with the
    /// same `(src, dst, rel_type)`. Merged relations with positive evidence
    /// take the weight `n / (n + 5)`.
    pub fn add_relation(
        &mut self,
        src: ConceptId,
        dst: ConceptId,
        rel_type: RelationType,
        weight: f64,
        evidence_count: u64,
    ) -> Result<Relation> {
        for id in [src, dst] {
            if self.require(id)?.status == ConceptStatus::Rejected {
                return Err(Error::UnknownConcept(id.0));
            }
        }
        if src == dst {
            return Err(Error::SelfLoop(src.0));
        }
        if !(weight > 0.0 && weight <= 1.0) {
            return Err(Error::InvalidWeight(weight));
        }
        let rel = self
            .relations
            .entry((src, dst, rel_type))
            .and_modify(|r| {
                r.evidence_count += evidence_count;
                r.weight = if r.evidence_count > 0 {
                    relation_strength(r.evidence_count)
                } else {
                    weight
                };
            })
            .or_insert(Relation {
                src,
                dst,
                rel_type,
                weight,
                evidence_count,
            })
            .clone();
        self.version += 1;
        Ok(rel)
    }

    /// Case-insensitive exact lookup on labels and synonyms.
    pub fn find_concepts(&self, term: &str) -> Vec<&ConceptNode> {
        self.lexicon
            .get(&normalize_label(term))
            .and_then(|&id| self.get(id))
            .into_iter()
            .collect()
    }

    /// Undirected adjacency over approved concepts; parallel relations of
    /// different types collapse to their strongest weight.
    fn approved_adjacency(&self) -> BTreeMap<ConceptId, Vec<(ConceptId, f64)>> {
        let mut best: BTreeMap<(ConceptId, ConceptId), f64> = BTreeMap::new();
        for r in self.relations.values() {
            for (a, b) in [(r.src, r.dst), (r.dst, r.src)] {
                let w = best.entry((a, b)).or_insert(0.0);
                *w = w.max(r.weight);
            }
        }
        let mut adj: BTreeMap<ConceptId, Vec<(ConceptId, f64)>> = BTreeMap::new();
        for ((a, b), w) in best {
            if self.is_approved(b) {
                adj.entry(a).or_default().push((b, w));
            }
        }
        adj
    }

    /// Max-product activation spread from `seeds` over at most `hops` edges.
    /// Every edge traversed multiplies by `weight * decay`; only approved
    /// concepts are entered. Seeds are part of the result.
    pub fn expand(&self, seeds: &[(ConceptId, f64)], hops: usize, decay: f64) -> BTreeMap<ConceptId, f64> {
        let adj = self.approved_adjacency();
        let mut best: BTreeMap<ConceptId, f64> = BTreeMap::new();
        for &(id, a) in seeds {
            if self.get(id).is_some() {
                let e = best.entry(id).or_insert(a);
                *e = e.max(a);
            }
        }
        let mut frontier = best.clone();
        for _ in 0..hops {
            let mut next: BTreeMap<ConceptId, f64> = BTreeMap::new();
            for (u, a) in &frontier {
                for &(v, w) in adj.get(u).map(Vec::as_slice).unwrap_or(&[]) {
                    let cand = a * w * decay;
                    if cand > best.get(&v).copied().unwrap_or(0.0) && cand > next.get(&v).copied().unwrap_or(0.0) {
                        next.insert(v, cand);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            best.extend(next.iter().map(|(&k, &v)| (k, v)));
            frontier = next;
        }
        best
    }

    /// Concepts reachable from `src` in at most `max_hops` edges with the
    /// weight of their strongest path, strongest first, ties by id.
    pub fn neighbors(&self, src: ConceptId, max_hops: usize, min_weight: f64) -> Result<Vec<(&ConceptNode, f64)>> {
        self.require(src)?;
        let mut out: Vec<(ConceptId, f64)> = self
            .expand(&[(src, 1.0)], max_hops, 1.0)
            .into_iter()
            .filter(|&(id, w)| id != src && w >= min_weight)
            .collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Ok(out
            .into_iter()
            .map(|(id, w)| (self.get(id).expect("expanded concept exists"), w))
            .collect())
    }

    /// Relation endpoints resolve and no two non-rejected concepts share a name.
    pub fn check_integrity(&self) -> Result<()> {
        for (i, c) in self.concepts.iter().enumerate() {
            if c.id.0 != i as u64 + 1 {
                return Err(Error::InvariantViolation(format!(
                    "concept id {} out of sequence",
                    c.id
                )));
            }
            if c.label.is_empty() {
                return Err(Error::InvalidLabel);
            }
        }
        let mut seen: HashMap<&str, ConceptId> = HashMap::new();
        for c in self.concepts.iter().filter(|c| c.status != ConceptStatus::Rejected) {
            for n in c.names() {
                if seen.insert(n, c.id).is_some() {
                    return Err(Error::DuplicateLabel(n.to_string()));
                }
            }
        }
        for r in self.relations.values() {
            self.require(r.src)?;
            self.require(r.dst)?;
            if r.src == r.dst {
                return Err(Error::SelfLoop(r.src.0));
            }
            if !(r.weight > 0.0 && r.weight <= 1.0) {
                return Err(Error::InvalidWeight(r.weight));
            }
        }
        Ok(())
    }

    pub fn snapshot(&self) -> OntologySnapshot {
        OntologySnapshot {
            concepts: self.concepts.clone(),
            relations: self.relations.values().cloned().collect(),
            version: self.version,
        }
    }

    pub fn from_snapshot(snapshot: OntologySnapshot) -> Result<Self> {
        let mut onto = Ontology {
            concepts: snapshot.concepts,
            relations: BTreeMap::new(),
            lexicon: HashMap::new(),
            version: snapshot.version,
        };
        for r in snapshot.relations {
            let key = (r.src, r.dst, r.rel_type);
            if onto.relations.insert(key, r).is_some() {
                return Err(Error::InvariantViolation("repeated relation key".into()));
            }
        }
        onto.check_integrity()?;
        for c in onto.concepts.iter().filter(|c| c.status != ConceptStatus::Rejected) {
            for n in c.names() {
                onto.lexicon.insert(n.to_string(), c.id);
            }
        }
        Ok(onto)
    }

    /// Store records for this ontology, optionally followed by queue records.
    pub fn records(&self, candidates: &[CandidateConcept]) -> Vec<StoreRecord> {
        let mut out = Vec::with_capacity(1 + self.concepts.len() + self.relations.len() + candidates.len());
        out.push(StoreRecord::Meta {
            format: SNAPSHOT_FORMAT,
            version: self.version,
        });
        out.extend(self.concepts.iter().cloned().map(StoreRecord::Concept));
        out.extend(self.relations.values().cloned().map(StoreRecord::Relation));
        out.extend(candidates.iter().cloned().map(StoreRecord::Candidate));
        out
    }

    pub fn save_snapshot(&self, path: &Path) -> Result<u64> {
        ldjson::write(path, &self.records(&[]))?;
        Ok(self.version)
    }
}

/// Splits store records into the ontology snapshot and queued candidates.
pub fn split_records(records: Vec<StoreRecord>, origin: &Path) -> Result<(OntologySnapshot, Vec<CandidateConcept>)> {
    let mut snap = OntologySnapshot::default();
    let mut candidates = Vec::new();
    let mut saw_meta = false;
    for rec in records {
        match rec {
            StoreRecord::Meta { format, version } => {
                if format != SNAPSHOT_FORMAT {
                    return Err(Error::corrupt(origin, format!("unsupported format {format}")));
                }
                saw_meta = true;
                snap.version = version;
            }
            StoreRecord::Concept(c) => snap.concepts.push(c),
            StoreRecord::Relation(r) => snap.relations.push(r),
            StoreRecord::Candidate(c) => candidates.push(c),
        }
    }
    if !saw_meta {
        return Err(Error::corrupt(origin, "missing meta record"));
    }
    Ok((snap, candidates))
}

pub fn load_snapshot(path: &Path) -> Result<OntologySnapshot> {
    let (snap, _) = split_records(ldjson::read(path)?, path)?;
    // validates referential integrity
    Ontology::from_snapshot(snap.clone())?;
    Ok(snap)
}
