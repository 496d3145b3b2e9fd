use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use super::{Mapping, MappingSet, Method};

const DEFAULT_STOP_WORDS: &[&str] = &[
    "a", "an", "and", "at", "by", "de", "for", "from", "in", "of", "on", "or", "the", "to", "with",
    "species", "genus", "var", "sp", "spp", "ssp", "subsp",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopWords(BTreeSet<String>);

impl Default for StopWords {
    fn default() -> Self {
        StopWords(DEFAULT_STOP_WORDS.iter().map(|s| s.to_string()).collect())
    }
}

impl StopWords {
    pub fn none() -> Self {
        StopWords(BTreeSet::new())
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        StopWords(
            words
                .into_iter()
                .flat_map(|w| normalize_label(w.as_ref(), &StopWords::none()))
                .collect(),
        )
    }

    /// One word per line; `#` starts a comment line.
    pub fn from_text(text: &str) -> Self {
        Self::from_words(text.lines().filter(|l| !l.trim_start().starts_with('#')))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Lowercases, drops punctuation, splits on whitespace and removes stop words.
pub fn normalize_label(label: &str, stop: &StopWords) -> Vec<String> {
    let cleaned: String = label
        .chars()
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .flat_map(char::to_lowercase)
        .collect();
    cleaned
        .split_whitespace()
        .filter(|t| !stop.contains(t))
        .map(str::to_string)
        .collect()
}

/// An entity to align: IRI plus every label it carries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entity {
    pub iri: String,
    pub labels: Vec<String>,
}

impl Entity {
    pub fn new(iri: &str, labels: &[&str]) -> Self {
        Entity {
            iri: iri.to_string(),
            labels: labels.iter().map(|l| l.to_string()).collect(),
        }
    }
}

struct Prepared {
    tokens: BTreeSet<String>,
    labels: Vec<Vec<char>>,
}

fn prepare(entities: &[Entity], stop: &StopWords) -> Vec<Prepared> {
    entities
        .par_iter()
        .map(|e| {
            let mut tokens = BTreeSet::new();
            let mut labels = Vec::new();
            for label in &e.labels {
                let toks = normalize_label(label, stop);
                if toks.is_empty() {
                    continue;
                }
                let joined: Vec<char> = toks.join(" ").chars().collect();
                if !labels.contains(&joined) {
                    labels.push(joined);
                }
                tokens.extend(toks);
            }
            Prepared { tokens, labels }
        })
        .collect()
}

fn inverted_index(prepared: &[Prepared]) -> BTreeMap<&str, Vec<usize>> {
    let mut index: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, p) in prepared.iter().enumerate() {
        for t in &p.tokens {
            index.entry(t.as_str()).or_default().push(i);
        }
    }
    index
}

fn candidates_for(source: &Prepared, index: &BTreeMap<&str, Vec<usize>>) -> BTreeSet<usize> {
    source
        .tokens
        .iter()
        .filter_map(|t| index.get(t.as_str()))
        .flatten()
        .copied()
        .collect()
}

/// Index pairs `(source, target)` whose normalized labels share at least one
/// token that is not a stop word.
pub fn block_candidates(source: &[Entity], target: &[Entity], stop: &StopWords) -> BTreeSet<(usize, usize)> {
    let src = prepare(source, stop);
    let tgt = prepare(target, stop);
    let index = inverted_index(&tgt);
    src.iter()
        .enumerate()
        .flat_map(|(i, s)| candidates_for(s, &index).into_iter().map(move |j| (i, j)))
        .collect()
}

/// Insert/delete/substitute edit distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_chars(&a, &b)
}

fn levenshtein_chars(a: &[char], b: &[char]) -> usize {
    if a.len() < b.len() {
        return levenshtein_chars(b, a);
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `1 - d / max(len)`; two empty strings score 1.
pub fn similarity(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    similarity_chars(&a, &b)
}

fn similarity_chars(a: &[char], b: &[char]) -> f64 {
    let max = a.len().max(b.len());
    if max == 0 {
        return 1.0;
    }
    1.0 - levenshtein_chars(a, b) as f64 / max as f64
}

/// Best score over the cross product of the two label lists.
fn best_score(a: &Prepared, b: &Prepared, threshold: f64) -> f64 {
    let mut best = 0.0f64;
    for la in &a.labels {
        for lb in &b.labels {
            let max = la.len().max(lb.len()).max(1);
            let bound = 1.0 - la.len().abs_diff(lb.len()) as f64 / max as f64;
            if bound < threshold || bound <= best {
                continue;
            }
            best = best.max(similarity_chars(la, lb));
        }
    }
    best
}

/// Scores blocked pairs and keeps, per source, the best target at or above
/// `threshold`. Ties go to the lexicographically smaller target IRI.
pub fn align_lexical(source: &[Entity], target: &[Entity], threshold: f64, stop: &StopWords) -> MappingSet {
    let src = prepare(source, stop);
    let tgt = prepare(target, stop);
    let index = inverted_index(&tgt);
    let best: Vec<Option<Mapping>> = src
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let mut winner: Option<(f64, &str)> = None;
            for j in candidates_for(s, &index) {
                let score = best_score(s, &tgt[j], threshold);
                if score < threshold {
                    continue;
                }
                let iri = target[j].iri.as_str();
                let better = match winner {
                    None => true,
                    Some((ws, wi)) => score > ws || (score == ws && iri < wi),
                };
                if better {
                    winner = Some((score, iri));
                }
            }
            winner.map(|(score, iri)| Mapping::new(&source[i].iri, iri, score, Method::Levenshtein))
        })
        .collect();
    let mut set = MappingSet::new(Method::Levenshtein);
    for m in best.into_iter().flatten() {
        set.insert(m);
    }
    set
}
