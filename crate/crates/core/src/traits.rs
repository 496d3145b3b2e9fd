//! Trait tables (habitat, endemic region, presence, conservation status)
//! keyed by taxon IRIs, with glossary mapping of local terms to concept IRIs.

use std::collections::BTreeMap;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::{parse_term, PrefixMap, StoreError, Term, Triple, TripleStore};
use crate::vocab;

pub fn habitat() -> Term {
    vocab::iri(vocab::EOL, "habitat")
}

pub fn endemic_to() -> Term {
    vocab::iri(vocab::EOL, "endemicTo")
}

pub fn present_in() -> Term {
    vocab::iri(vocab::EOL, "presentIn")
}

pub fn conservation_status() -> Term {
    vocab::iri(vocab::EOL, "conservationStatus")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraitError {
    #[error("traits line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("unresolved glossary terms: {}", .0.join(", "))]
    UnresolvedGlossary(Vec<String>),
    #[error(transparent)]
    Store(#[from] StoreError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Iri,
    Literal,
    Glossary,
}

impl FromStr for ValueKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "iri" => Ok(ValueKind::Iri),
            "literal" => Ok(ValueKind::Literal),
            "glossary" => Ok(ValueKind::Glossary),
            other => Err(format!("unknown value kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraitRow {
    pub taxon: Term,
    pub property: Term,
    pub value: String,
    pub kind: ValueKind,
}

/// Local term to concept IRI.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Glossary {
    entries: BTreeMap<String, Term>,
}

impl Glossary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, term: &str, iri: Term) {
        self.entries.insert(term.to_string(), iri);
    }

    /// Looks up the value text as written, then its bare lexical form when
    /// the value is a quoted literal.
    pub fn lookup(&self, value: &str) -> Option<&Term> {
        self.entries.get(value).or_else(|| {
            let lexical = literal_value(value).ok()?;
            self.entries.get(lexical.as_literal()?.lexical())
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Two columns: term, IRI (curie or full).
    pub fn from_tsv(text: &str, prefixes: &PrefixMap) -> Result<Self, TraitError> {
        let mut glossary = Glossary::new();
        for (i, line) in data_lines(text) {
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() < 2 {
                return Err(format_err(i, "expected term and iri columns"));
            }
            let iri = prefixes
                .resolve(cols[1].trim())
                .map_err(|e| format_err(i, &e.to_string()))?;
            glossary.insert(cols[0].trim(), iri);
        }
        Ok(glossary)
    }
}

fn format_err(line: usize, message: &str) -> TraitError {
    TraitError::Format {
        line,
        message: message.to_string(),
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

/// Quoted values are read in N-Triples form (`"Oslofjorden"@no`), anything
/// else becomes a plain literal.
fn literal_value(value: &str) -> Result<Term, String> {
    if value.starts_with('"') {
        parse_term(value).and_then(|t| if t.is_literal() { Ok(t) } else { Err("not a literal".into()) })
    } else {
        Ok(Term::literal(value))
    }
}

/// Four columns: taxon IRI, property, value, value kind.
pub fn read_traits(text: &str, prefixes: &PrefixMap) -> Result<Vec<TraitRow>, TraitError> {
    let mut rows = Vec::new();
    for (i, line) in data_lines(text) {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(format_err(i, &format!("expected 4 columns, found {}", cols.len())));
        }
        if i == 1 && cols[0].trim() == "taxon" {
            continue;
        }
        let resolve = |s: &str| prefixes.resolve(s.trim()).map_err(|e| format_err(i, &e.to_string()));
        let kind = cols[3].parse::<ValueKind>().map_err(|e| format_err(i, &e))?;
        rows.push(TraitRow {
            taxon: resolve(cols[0])?,
            property: resolve(cols[1])?,
            value: cols[2].trim().to_string(),
            kind,
        });
    }
    Ok(rows)
}

/// Emits one triple per distinct row. `iri` values are resolved through the
/// prefix map, `glossary` values must appear in the glossary, and `literal`
/// values are replaced by a glossary IRI when one exists.
pub fn ingest_traits(rows: &[TraitRow], glossary: &Glossary, store: &mut TripleStore) -> Result<usize, TraitError> {
    let prefixes = store.prefixes().clone();
    let mut unresolved = Vec::new();
    let mut triples = Vec::with_capacity(rows.len());
    for row in rows {
        let object = match row.kind {
            ValueKind::Iri => prefixes.resolve(&row.value).ok(),
            ValueKind::Glossary => glossary.lookup(&row.value).cloned(),
            ValueKind::Literal => match glossary.lookup(&row.value) {
                Some(t) => Some(t.clone()),
                None => literal_value(&row.value).ok(),
            },
        };
        match object {
            Some(o) => triples.push((row.taxon.clone(), row.property.clone(), o)),
            None => unresolved.push(row.value.clone()),
        }
    }
    if !unresolved.is_empty() {
        unresolved.sort();
        unresolved.dedup();
        return Err(TraitError::UnresolvedGlossary(unresolved));
    }
    let mut added = 0;
    for (s, p, o) in triples {
        let t = Triple::new(s, p, o).map_err(|e| TraitError::Store(StoreError::Term(e)))?;
        added += usize::from(store.add_triple(t)?);
    }
    Ok(added)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store() -> TripleStore {
        TripleStore::with_prefixes(PrefixMap::with_defaults())
    }

    #[test]
    fn verbatim_iri_rows() {
        let p = PrefixMap::with_defaults();
        let rows = read_traits(
            "ncbi:taxon/35525\teol:habitat\tENVO:00000873\tiri\nncbi:taxon/35525\teol:presentIn\tworms:Oostende\tiri\n",
            &p,
        )
        .unwrap();
        let mut s = store();
        assert_eq!(ingest_traits(&rows, &Glossary::new(), &mut s).unwrap(), 2);
        let t = Triple::new(
            vocab::ncbi("taxon/35525"),
            habitat(),
            Term::Iri("http://purl.obolibrary.org/obo/ENVO_00000873".into()),
        )
        .unwrap();
        assert!(s.contains(&t));
    }

    #[test]
    fn glossary_replaces_literal() {
        let p = PrefixMap::with_defaults();
        let glossary = Glossary::from_tsv("Oslofjorden\twd:Q1047080\n", &p).unwrap();
        let rows = read_traits("ncbi:taxon/1\teol:endemicTo\t\"Oslofjorden\"@no\tliteral\n", &p).unwrap();
        let mut s = store();
        ingest_traits(&rows, &glossary, &mut s).unwrap();
        let objects: Vec<_> = s.iter().map(|t| t.object().clone()).collect();
        assert_eq!(objects, vec![Term::Iri("http://www.wikidata.org/entity/Q1047080".into())]);
    }

    #[test]
    fn unresolved_glossary_terms_are_listed() {
        let p = PrefixMap::with_defaults();
        let rows = read_traits(
            "ncbi:taxon/1\teol:habitat\tmarsh\tglossary\nncbi:taxon/1\teol:habitat\tbog\tglossary\n",
            &p,
        )
        .unwrap();
        let err = ingest_traits(&rows, &Glossary::new(), &mut store()).unwrap_err();
        assert_eq!(err, TraitError::UnresolvedGlossary(vec!["bog".into(), "marsh".into()]));
    }

    #[test]
    fn duplicate_rows_collapse() {
        let p = PrefixMap::with_defaults();
        let rows = read_traits(
            "ncbi:taxon/1\teol:conservationStatus\tvulnerable\tliteral\nncbi:taxon/1\teol:conservationStatus\tvulnerable\tliteral\n",
            &p,
        )
        .unwrap();
        assert_eq!(ingest_traits(&rows, &Glossary::new(), &mut store()).unwrap(), 1);
        assert_eq!(rows[0].property, conservation_status());
    }

    #[test]
    fn bad_rows() {
        let p = PrefixMap::with_defaults();
        assert!(read_traits("a\tb\tc\n", &p).is_err());
        assert!(read_traits("ncbi:1\teol:habitat\tx\tnumber\n", &p).is_err());
        assert!(read_traits("nope:1\teol:habitat\tx\tiri\n", &p).is_err());
    }
}
