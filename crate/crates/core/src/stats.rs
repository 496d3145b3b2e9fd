//! Graph density statistics and effect-data coverage.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{Term, TripleStore};
use crate::vocab;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("graph has no non-literal triples")]
    EmptyGraph,
    #[error("coverage needs positive counts (tests {tests}, compounds {compounds}, species {species})")]
    ZeroDenominator { tests: u64, compounds: u64, species: u64 },
}

/// Triple, relation and entity counts with literal-object triples removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GraphCounts {
    pub triples: u64,
    pub relations: u64,
    pub entities: u64,
}

pub fn count_graph(store: &TripleStore) -> GraphCounts {
    let mut relations = BTreeSet::new();
    let mut entities = BTreeSet::new();
    let mut triples = 0u64;
    for [s, p, o] in store.match_ids(None, None, None) {
        if store.term(o).is_literal() {
            continue;
        }
        triples += 1;
        relations.insert(p);
        entities.insert(s);
        entities.insert(o);
    }
    GraphCounts {
        triples,
        relations: relations.len() as u64,
        entities: entities.len() as u64,
    }
}

fn nonempty(c: &GraphCounts) -> Result<(), StatsError> {
    if c.triples == 0 || c.relations == 0 || c.entities == 0 {
        Err(StatsError::EmptyGraph)
    } else {
        Ok(())
    }
}

/// `|T| / |R|`
pub fn relational_density(c: &GraphCounts) -> Result<f64, StatsError> {
    nonempty(c)?;
    Ok(c.triples as f64 / c.relations as f64)
}

/// `|T| / |E|`
pub fn entity_density(c: &GraphCounts) -> Result<f64, StatsError> {
    nonempty(c)?;
    Ok(c.triples as f64 / c.entities as f64)
}

/// `|T| / (|E| (|E| - 1))`
pub fn absolute_density(c: &GraphCounts) -> Result<f64, StatsError> {
    nonempty(c)?;
    if c.entities < 2 {
        return Err(StatsError::EmptyGraph);
    }
    Ok(entity_density(c)? / (c.entities - 1) as f64)
}

/// `tests / (compounds * species)` as a percentage.
pub fn coverage(tests: u64, compounds: u64, species: u64) -> Result<f64, StatsError> {
    if tests == 0 || compounds == 0 || species == 0 {
        return Err(StatsError::ZeroDenominator { tests, compounds, species });
    }
    Ok(100.0 * tests as f64 / (compounds as f64 * species as f64))
}

/// Counts tests and the distinct compounds and species they reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EffectCounts {
    pub tests: u64,
    pub compounds: u64,
    pub species: u64,
}

pub fn effect_counts(store: &TripleStore) -> EffectCounts {
    let tests: BTreeSet<Term> = store
        .match_pattern(None, Some(&vocab::rdf_type()), Some(&vocab::et("Test")))
        .into_iter()
        .map(|t| t.subject().clone())
        .collect();
    let objects = |p: &str| -> BTreeSet<Term> {
        store
            .match_pattern(None, Some(&vocab::et(p)), None)
            .into_iter()
            .filter(|t| tests.contains(t.subject()))
            .map(|t| t.object().clone())
            .collect()
    };
    EffectCounts {
        tests: tests.len() as u64,
        compounds: objects("compound").len() as u64,
        species: objects("species").len() as u64,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub counts: GraphCounts,
    pub relational_density: f64,
    pub entity_density: f64,
    pub absolute_density: f64,
    pub effects: Option<EffectCounts>,
    pub coverage_percent: Option<f64>,
}

impl StatsReport {
    pub fn from_store(store: &TripleStore) -> Result<Self, StatsError> {
        let counts = count_graph(store);
        let effects = Some(effect_counts(store)).filter(|e| e.tests > 0);
        let coverage_percent = match effects {
            Some(e) => coverage(e.tests, e.compounds, e.species).ok(),
            None => None,
        };
        Ok(StatsReport {
            counts,
            relational_density: relational_density(&counts)?,
            entity_density: entity_density(&counts)?,
            absolute_density: absolute_density(&counts)?,
            effects,
            coverage_percent,
        })
    }

    pub fn to_tsv(&self) -> String {
        let mut rows = vec![
            ("triples".to_string(), self.counts.triples.to_string()),
            ("relations".into(), self.counts.relations.to_string()),
            ("entities".into(), self.counts.entities.to_string()),
            ("relational_density".into(), self.relational_density.to_string()),
            ("entity_density".into(), self.entity_density.to_string()),
            ("absolute_density".into(), self.absolute_density.to_string()),
        ];
        if let Some(e) = self.effects {
            rows.push(("tests".into(), e.tests.to_string()));
            rows.push(("compounds".into(), e.compounds.to_string()));
            rows.push(("species".into(), e.species.to_string()));
        }
        if let Some(c) = self.coverage_percent {
            rows.push(("coverage_percent".into(), c.to_string()));
        }
        let mut out = String::from("metric\tvalue\n");
        for (k, v) in rows {
            out.push_str(&format!("{k}\t{v}\n"));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "|T| = {}\n|R| = {}\n|E| = {}\nRD  = {:.4}\nED  = {:.4}\nAD  = {:.6e}\n",
            self.counts.triples,
            self.counts.relations,
            self.counts.entities,
            self.relational_density,
            self.entity_density,
            self.absolute_density
        );
        if let (Some(e), Some(c)) = (self.effects, self.coverage_percent) {
            out.push_str(&format!(
                "coverage = {c:.4}% ({} tests, {} compounds, {} species)\n",
                e.tests, e.compounds, e.species
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_triples_excluded() {
        let mut s = TripleStore::new();
        s.add(vocab::ncbi("taxon/1"), vocab::rdfs_label(), Term::literal("x")).unwrap();
        assert_eq!(count_graph(&s).triples, 0);
        assert_eq!(relational_density(&count_graph(&s)), Err(StatsError::EmptyGraph));
    }

    #[test]
    fn two_rows() {
        let mut s = TripleStore::new();
        s.add(vocab::ncbi("taxon/687295"), vocab::rdfs_subclass_of(), vocab::ncbi("taxon/513583")).unwrap();
        s.add(vocab::ncbi("division/2"), vocab::owl_disjoint_with(), vocab::ncbi("division/4")).unwrap();
        assert_eq!(count_graph(&s), GraphCounts { triples: 2, relations: 2, entities: 4 });
    }

    #[test]
    fn star_closed_form() {
        let n = 7u64;
        let c = GraphCounts { triples: n, relations: 1, entities: n + 1 };
        assert_eq!(relational_density(&c).unwrap(), n as f64);
        assert_eq!(entity_density(&c).unwrap(), n as f64 / (n + 1) as f64);
        assert!((absolute_density(&c).unwrap() - 1.0 / (n + 1) as f64).abs() < 1e-15);
    }

    #[test]
    fn coverage_figures() {
        let c = coverage(940_000, 12_000, 13_000).unwrap();
        assert!((c - 0.6026).abs() < 1e-3);
        assert_eq!(coverage(9, 1, 9).unwrap(), 100.0);
        assert!(coverage(1, 0, 1).is_err());
    }

    #[test]
    fn fb15k_relational_density() {
        let c = GraphCounts { triples: 483_142, relations: 1345, entities: 14_951 };
        assert_eq!(relational_density(&c).unwrap().round(), 359.0);
    }
}
