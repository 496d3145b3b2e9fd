//! ECOTOX table cleaning and conversion into triples.
//!
//! Species leaves are minted from their numeric species number
//! (`et:taxon/34010`); lineage nodes use the sanitized taxon name
//! (`et:taxon/hirta`). Tests and results get addressable nodes
//! (`et:test/{id}`, `et:result/{id}`), and a result's concentration hangs off
//! `et:result/{id}/concentration`.

mod chemicals;
mod effects;
mod species;
mod table;

use thiserror::Error;

use crate::graph::{StoreError, Term, TripleStore};
use crate::vocab;

pub use chemicals::{chemical_records, ingest_chemicals, ChemicalRecord};
pub use effects::{
    ingest_tests, parse_concentration, result_records, test_records, Concentration, ResultRecord,
    TestRecord,
};
pub use species::{
    clean_species_name, ingest_species, species_records, synthesize_lineage, LineageLevel,
    SpeciesRecord,
};
pub use table::Table;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EcotoxError {
    #[error("{table} line {line}: {message}")]
    Table {
        table: String,
        line: usize,
        message: String,
    },
    #[error("{table}: missing column {column:?}")]
    MissingColumn { table: String, column: String },
    #[error("species {0}: lineage has no filled level")]
    EmptyLineage(String),
    #[error("species {species}: cannot mint a parent IRI from {name:?}")]
    UnresolvableParent { species: String, name: String },
    #[error("duplicate {kind} id {id}")]
    DuplicateId { kind: &'static str, id: String },
    #[error("result {result} refers to unknown test {test}")]
    OrphanResult { result: String, test: String },
    #[error("result {result}: negative concentration {value}")]
    NegativeConcentration { result: String, value: String },
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Non-fatal findings from an ingestion pass.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Warnings(pub Vec<String>);

impl Warnings {
    pub fn push(&mut self, msg: impl Into<String>) {
        self.0.push(msg.into());
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }
}

/// Cleaning configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EcotoxConfig {
    /// Cell values treated as missing.
    pub missing_values: Vec<String>,
    /// Tokens removed from species names.
    pub name_filter_tokens: Vec<String>,
}

impl Default for EcotoxConfig {
    fn default() -> Self {
        EcotoxConfig {
            missing_values: ["", "--", "NA", "NR", "/"].map(String::from).to_vec(),
            name_filter_tokens: ["sp.", "var.", "ssp.", "spp."].map(String::from).to_vec(),
        }
    }
}

impl EcotoxConfig {
    pub fn is_missing(&self, value: &str) -> bool {
        let v = value.trim();
        self.missing_values.iter().any(|m| m == v)
    }

    /// Trimmed cell value, or `None` when it is a missing-value shorthand.
    pub fn cell(&self, value: &str) -> Option<String> {
        (!self.is_missing(value)).then(|| value.trim().to_string())
    }
}

/// Lowercased, spaces to underscores, other non-alphanumerics dropped.
pub fn sanitize_name(name: &str) -> String {
    name.trim()
        .chars()
        .filter_map(|c| match c {
            c if c.is_whitespace() => Some('_'),
            c if c.is_alphanumeric() || c == '_' => Some(c),
            _ => None,
        })
        .flat_map(char::to_lowercase)
        .collect::<String>()
        .split('_')
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join("_")
}

/// Uppercased code with trailing punctuation stripped (`LC50/` -> `LC50`).
pub fn code_local_name(code: &str) -> String {
    let trimmed = code.trim().trim_end_matches(|c: char| !c.is_alphanumeric());
    trimmed
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { '_' })
        .flat_map(char::to_uppercase)
        .collect()
}

/// Group label to IRI-safe local name, case preserved (`Standard Test Species` -> `StandardTestSpecies`).
pub fn group_local_name(group: &str) -> String {
    group.chars().filter(|c| c.is_alphanumeric()).collect()
}

/// First `;`-separated component of a group cell.
pub(crate) fn primary_group(cell: &str) -> Option<String> {
    let g = cell.split(';').next()?.trim();
    (!g.is_empty() && !group_local_name(g).is_empty()).then(|| g.to_string())
}

pub fn species_iri(number: &str) -> Term {
    vocab::et(&format!("taxon/{number}"))
}

pub fn lineage_iri(name: &str) -> Option<Term> {
    let local = sanitize_name(name);
    (!local.is_empty()).then(|| vocab::et(&format!("taxon/{local}")))
}

pub fn chemical_iri(cas_digits: &str) -> Term {
    vocab::et(&format!("chemical/{cas_digits}"))
}

pub fn test_iri(id: &str) -> Term {
    vocab::et(&format!("test/{id}"))
}

pub fn result_iri(id: &str) -> Term {
    vocab::et(&format!("result/{id}"))
}

/// Emits `owl:disjointWith` for every unordered pair, earlier-listed first.
pub(crate) fn emit_pairwise_disjoint(groups: &[Term], store: &mut TripleStore) -> Result<usize, StoreError> {
    let disjoint = vocab::owl_disjoint_with();
    let mut added = 0;
    for (i, a) in groups.iter().enumerate() {
        for b in &groups[i + 1..] {
            added += usize::from(store.add(a.clone(), disjoint.clone(), b.clone())?);
        }
    }
    Ok(added)
}

pub(crate) fn is_id(text: &str) -> bool {
    !text.is_empty() && text.bytes().all(|b| b.is_ascii_digit()) && text.bytes().any(|b| b != b'0')
}
