use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::QueryError;
use crate::alignment::{normalize_label, similarity, StopWords};
use crate::graph::{Term, TripleStore};
use crate::vocab;

fn is_name_predicate(p: &Term) -> bool {
    *p == vocab::rdfs_label() || p.as_iri().is_some_and(|i| i.starts_with(vocab::NCBI))
}

fn normalized(label: &str) -> String {
    normalize_label(label, &StopWords::none()).join(" ")
}

/// Top `k` IRIs by best label similarity to `name`, over `rdfs:label` and
/// NCBI name-class literals. Ties are ordered by IRI.
pub fn fuzzy_lookup(store: &TripleStore, name: &str, k: usize) -> Vec<(Term, f64)> {
    let query = normalized(name);
    let mut best: BTreeMap<Term, f64> = BTreeMap::new();
    for t in store.iter() {
        let (Some(lit), true) = (t.object().as_literal(), t.subject().is_iri()) else {
            continue;
        };
        if !is_name_predicate(t.predicate()) {
            continue;
        }
        let score = similarity(&query, &normalized(lit.lexical()));
        let e = best.entry(t.subject().clone()).or_insert(score);
        *e = e.max(score);
    }
    let mut ranked: Vec<(Term, f64)> = best.into_iter().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(k);
    ranked
}

fn require(store: &TripleStore, taxon: &Term) -> Result<u32, QueryError> {
    store
        .id_of(taxon)
        .ok_or_else(|| QueryError::UnknownEntity(taxon.to_string()))
}

/// Ancestors along `rdfs:subClassOf`, nearest first. With several parents
/// the order is breadth-first, ties by term order.
pub fn lineage(store: &TripleStore, taxon: &Term) -> Result<Vec<Term>, QueryError> {
    let start = require(store, taxon)?;
    let Some(sub) = store.id_of(&vocab::rdfs_subclass_of()) else {
        return Ok(Vec::new());
    };
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    let mut out = Vec::new();
    while let Some(n) = queue.pop_front() {
        let mut parents: Vec<&Term> = store
            .objects(n, sub)
            .filter(|p| seen.insert(*p))
            .map(|p| store.term(p))
            .collect();
        parents.sort();
        for p in parents {
            out.push(p.clone());
            queue.push_back(store.id_of(p).expect("interned"));
        }
    }
    Ok(out)
}

/// Other direct children of the taxon's direct parents.
pub fn siblings(store: &TripleStore, taxon: &Term) -> Result<BTreeSet<Term>, QueryError> {
    let id = require(store, taxon)?;
    let Some(sub) = store.id_of(&vocab::rdfs_subclass_of()) else {
        return Ok(BTreeSet::new());
    };
    Ok(store
        .objects(id, sub)
        .flat_map(|parent| store.subjects(sub, parent))
        .filter(|&c| c != id)
        .map(|c| store.term(c).clone())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree() -> TripleStore {
        let mut s = TripleStore::new();
        let sub = vocab::rdfs_subclass_of();
        for (c, p) in [("d", "c"), ("c", "b"), ("b", "a"), ("e", "c"), ("f", "c")] {
            s.add(vocab::et(c), sub.clone(), vocab::et(p)).unwrap();
        }
        s.add(vocab::et("d"), vocab::rdfs_label(), Term::literal("Coleophora cornella")).unwrap();
        s.add(vocab::et("e"), vocab::rdfs_label(), Term::literal("Coleophora cornela")).unwrap();
        s
    }

    #[test]
    fn lineage_orders_leaf_to_root() {
        let s = tree();
        assert_eq!(
            lineage(&s, &vocab::et("d")).unwrap(),
            vec![vocab::et("c"), vocab::et("b"), vocab::et("a")]
        );
        assert!(lineage(&s, &vocab::et("a")).unwrap().is_empty());
        assert!(matches!(lineage(&s, &vocab::et("zz")), Err(QueryError::UnknownEntity(_))));
    }

    #[test]
    fn sibling_set() {
        let s = tree();
        assert_eq!(
            siblings(&s, &vocab::et("d")).unwrap(),
            BTreeSet::from([vocab::et("e"), vocab::et("f")])
        );
        assert!(siblings(&s, &vocab::et("a")).unwrap().is_empty());
    }

    #[test]
    fn fuzzy_ranking() {
        let s = tree();
        let got = fuzzy_lookup(&s, "Coleophora cornella", 5);
        assert_eq!(got[0], (vocab::et("d"), 1.0));
        assert_eq!(got[1].0, vocab::et("e"));
        assert_eq!(got.len(), 2);
        assert_eq!(fuzzy_lookup(&s, "coleophora CORNELLA", 1), vec![(vocab::et("d"), 1.0)]);
    }
}
