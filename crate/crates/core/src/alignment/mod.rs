//! Lexical alignment between taxonomies and mapping-set arithmetic.

mod lexical;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use lexical::{align_lexical, block_candidates, levenshtein, normalize_label, similarity, Entity, StopWords};

use crate::graph::{StoreError, Term, TripleStore};
use crate::vocab;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlignError {
    #[error("reference mapping set is empty")]
    EmptyReference,
    #[error("intersection needs at least two mapping sets, got {0}")]
    TooFewSets(usize),
    #[error("mapping line {line}: {message}")]
    Format { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Levenshtein,
    Consensus,
    External(String),
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Levenshtein => f.write_str("levenshtein"),
            Method::Consensus => f.write_str("consensus"),
            Method::External(name) => write!(f, "external:{name}"),
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "levenshtein" => Ok(Method::Levenshtein),
            "consensus" => Ok(Method::Consensus),
            other => match other.strip_prefix("external:") {
                Some(name) if !name.is_empty() => Ok(Method::External(name.to_string())),
                _ => Err(format!("unknown mapping method {other:?}")),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mapping {
    pub source: String,
    pub target: String,
    pub score: f64,
    pub method: Method,
}

impl Mapping {
    pub fn new(source: &str, target: &str, score: f64, method: Method) -> Self {
        Mapping {
            source: source.to_string(),
            target: target.to_string(),
            score: score.clamp(0.0, 1.0),
            method,
        }
    }
}

/// Mappings keyed by `(source, target)`; at most one per pair.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingSet {
    pub method: Method,
    mappings: BTreeMap<(String, String), Mapping>,
}

impl MappingSet {
    pub fn new(method: Method) -> Self {
        MappingSet {
            method,
            mappings: BTreeMap::new(),
        }
    }

    /// Keeps the higher score when the pair is already present.
    pub fn insert(&mut self, mapping: Mapping) -> bool {
        let key = (mapping.source.clone(), mapping.target.clone());
        match self.mappings.get_mut(&key) {
            Some(existing) => {
                if mapping.score > existing.score {
                    *existing = mapping;
                }
                false
            }
            None => {
                self.mappings.insert(key, mapping);
                true
            }
        }
    }

    pub fn contains_pair(&self, source: &str, target: &str) -> bool {
        self.mappings.contains_key(&(source.to_string(), target.to_string()))
    }

    pub fn get(&self, source: &str, target: &str) -> Option<&Mapping> {
        self.mappings.get(&(source.to_string(), target.to_string()))
    }

    pub fn len(&self) -> usize {
        self.mappings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mappings.is_empty()
    }

    /// Sorted by source then target.
    pub fn iter(&self) -> impl Iterator<Item = &Mapping> {
        self.mappings.values()
    }

    pub fn retain_threshold(&mut self, threshold: f64) {
        self.mappings.retain(|_, m| m.score >= threshold);
    }

    /// Interchange TSV: source IRI, target IRI, score, method.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for m in self.iter() {
            out.push_str(&format!("{}\t{}\t{}\t{}\n", m.source, m.target, m.score, m.method));
        }
        out
    }

    /// Reads the interchange TSV. A missing method column falls back to
    /// `method`, which also tags the set.
    pub fn from_tsv(text: &str, method: Method) -> Result<Self, AlignError> {
        let mut set = MappingSet::new(method.clone());
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| AlignError::Format { line: i + 1, message };
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            if cols.len() < 2 {
                return Err(err("expected source and target columns".into()));
            }
            if i == 0 && cols[0] == "source" {
                continue;
            }
            let score = match cols.get(2) {
                Some(s) if !s.is_empty() => s
                    .parse::<f64>()
                    .ok()
                    .filter(|v| (0.0..=1.0).contains(v))
                    .ok_or_else(|| err(format!("score {s:?} is not in [0,1]")))?,
                _ => 1.0,
            };
            let m = match cols.get(3) {
                Some(s) if !s.is_empty() => s.parse::<Method>().map_err(err)?,
                _ => method.clone(),
            };
            set.insert(Mapping::new(strip_angles(cols[0]), strip_angles(cols[1]), score, m));
        }
        Ok(set)
    }
}

fn strip_angles(s: &str) -> &str {
    s.strip_prefix('<').and_then(|r| r.strip_suffix('>')).unwrap_or(s)
}

/// `|computed ∩ reference| / |reference|` over `(source, target)` pairs.
pub fn evaluate(computed: &MappingSet, reference: &MappingSet) -> Result<f64, AlignError> {
    if reference.is_empty() {
        return Err(AlignError::EmptyReference);
    }
    let hits = reference
        .mappings
        .keys()
        .filter(|k| computed.mappings.contains_key(*k))
        .count();
    Ok(hits as f64 / reference.len() as f64)
}

/// `|s1 \ s2|`. Not symmetric.
pub fn disagreement(s1: &MappingSet, s2: &MappingSet) -> usize {
    s1.mappings.keys().filter(|k| !s2.mappings.contains_key(*k)).count()
}

/// Pairs present in every set, with averaged scores.
pub fn intersect(sets: &[&MappingSet]) -> Result<MappingSet, AlignError> {
    if sets.len() < 2 {
        return Err(AlignError::TooFewSets(sets.len()));
    }
    let mut out = MappingSet::new(Method::Consensus);
    for (key, first) in &sets[0].mappings {
        let scores: Option<Vec<f64>> = sets
            .iter()
            .map(|s| s.mappings.get(key).map(|m| m.score))
            .collect();
        if let Some(scores) = scores {
            let mean = scores.iter().sum::<f64>() / scores.len() as f64;
            out.insert(Mapping::new(&first.source, &first.target, mean, Method::Consensus));
        }
    }
    Ok(out)
}

/// Emits `<source> owl:sameAs <target>` per mapping.
pub fn emit_sameas(set: &MappingSet, store: &mut TripleStore) -> Result<usize, StoreError> {
    let mut added = 0;
    for m in set.iter() {
        let s = Term::iri(m.source.as_str())?;
        let o = Term::iri(m.target.as_str())?;
        added += usize::from(store.add(s, vocab::owl_same_as(), o)?);
    }
    Ok(added)
}

/// IRI subjects starting with `namespace` together with their `rdfs:label`
/// values.
pub fn labelled_entities(store: &TripleStore, namespace: &str) -> Vec<Entity> {
    let mut by_iri: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for t in store.match_pattern(None, Some(&vocab::rdfs_label()), None) {
        if let (Some(iri), Some(lit)) = (t.subject().as_iri(), t.object().as_literal()) {
            if iri.starts_with(namespace) {
                by_iri.entry(iri.to_string()).or_default().push(lit.lexical().to_string());
            }
        }
    }
    by_iri
        .into_iter()
        .map(|(iri, labels)| Entity { iri, labels })
        .collect()
}
