//! Identifier rewriting between vocabularies and construction of
//! `owl:sameAs` links from external id tables.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::{PrefixMap, StoreError, Term, TripleStore};
use crate::vocab;

pub const ET_CHEMICAL_NS: &str = "https://cfpub.epa.gov/ecotox/chemical/";
pub const NCBI_TAXON_NS: &str = "https://www.ncbi.nlm.nih.gov/taxonomy/taxon/";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdError {
    #[error("invalid CAS registry number {0:?}")]
    InvalidCas(String),
    #[error("invalid NCBI taxon id {0:?}")]
    InvalidNcbiId(String),
    #[error("invalid IRI {0:?}")]
    InvalidIri(String),
    #[error("IRI {0:?} is outside the expected namespace")]
    ForeignIri(String),
    #[error("unknown rewrite rule {0:?}")]
    UnknownRule(String),
    #[error("pair table line {line}: {message}")]
    Format { line: usize, message: String },
}

/// CAS check: `D{2,7}-DD-D` whose last digit equals the sum of the other
/// digits weighted by position from the right, modulo 10.
pub fn validate_cas(cas: &str) -> bool {
    let parts: Vec<&str> = cas.split('-').collect();
    let [a, b, c] = parts.as_slice() else {
        return false;
    };
    let digits = |s: &str| s.bytes().all(|x| x.is_ascii_digit());
    if !(2..=7).contains(&a.len()) || b.len() != 2 || c.len() != 1 || !digits(a) || !digits(b) || !digits(c) {
        return false;
    }
    let check = u32::from(c.as_bytes()[0] - b'0');
    let sum: u32 = a
        .bytes()
        .chain(b.bytes())
        .rev()
        .enumerate()
        .map(|(i, d)| (i as u32 + 1) * u32::from(d - b'0'))
        .sum();
    sum % 10 == check
}

/// Accepts hyphenated or bare-digit CAS text and returns the hyphenated
/// form. Shape only; the check digit is not verified.
pub fn normalize_cas(text: &str) -> Option<String> {
    let t = text.trim();
    if t.contains('-') {
        let parts: Vec<&str> = t.split('-').collect();
        let ok = parts.len() == 3
            && (2..=7).contains(&parts[0].len())
            && parts[1].len() == 2
            && parts[2].len() == 1
            && parts.iter().all(|p| p.bytes().all(|b| b.is_ascii_digit()));
        return ok.then(|| t.to_string());
    }
    if !(5..=10).contains(&t.len()) || !t.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let n = t.len();
    Some(format!("{}-{}-{}", &t[..n - 3], &t[n - 3..n - 1], &t[n - 1..]))
}

/// `877-43-0` -> `<https://cfpub.epa.gov/ecotox/chemical/877430>`.
pub fn cas_to_iri(cas: &str) -> Result<Term, IdError> {
    if !validate_cas(cas) {
        return Err(IdError::InvalidCas(cas.to_string()));
    }
    Ok(Term::Iri(format!("{ET_CHEMICAL_NS}{}", cas.replace('-', ""))))
}

/// Inverse of [`cas_to_iri`].
pub fn iri_to_cas(iri: &str) -> Result<String, IdError> {
    let digits = iri
        .strip_prefix(ET_CHEMICAL_NS)
        .ok_or_else(|| IdError::ForeignIri(iri.to_string()))?;
    normalize_cas(digits)
        .filter(|c| validate_cas(c))
        .ok_or_else(|| IdError::InvalidCas(digits.to_string()))
}

/// `311871` -> `<https://www.ncbi.nlm.nih.gov/taxonomy/taxon/311871>`.
/// Leading zeros are dropped so the mapping stays injective.
pub fn ncbi_id_to_iri(id: &str) -> Result<Term, IdError> {
    let t = id.trim();
    let n: u64 = t
        .parse()
        .ok()
        .filter(|&n| n >= 1 && t.bytes().all(|b| b.is_ascii_digit()))
        .ok_or_else(|| IdError::InvalidNcbiId(id.to_string()))?;
    Ok(Term::Iri(format!("{NCBI_TAXON_NS}{n}")))
}

/// Inverse of [`ncbi_id_to_iri`].
pub fn iri_to_ncbi_id(iri: &str) -> Result<String, IdError> {
    let local = iri
        .strip_prefix(NCBI_TAXON_NS)
        .ok_or_else(|| IdError::ForeignIri(iri.to_string()))?;
    ncbi_id_to_iri(local)?;
    Ok(local.to_string())
}

/// How the first column of a pair table becomes the local subject IRI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewriteRule {
    Cas,
    Ncbi,
    Verbatim,
}

impl FromStr for RewriteRule {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cas" => Ok(RewriteRule::Cas),
            "ncbi" => Ok(RewriteRule::Ncbi),
            "verbatim" => Ok(RewriteRule::Verbatim),
            _ => Err(IdError::UnknownRule(s.to_string())),
        }
    }
}

impl fmt::Display for RewriteRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RewriteRule::Cas => "cas",
            RewriteRule::Ncbi => "ncbi",
            RewriteRule::Verbatim => "verbatim",
        })
    }
}

/// One row of an external id table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdPair {
    pub external_id: String,
    pub external_iri: String,
}

impl IdPair {
    pub fn new(external_id: &str, external_iri: &str) -> Self {
        IdPair {
            external_id: external_id.to_string(),
            external_iri: external_iri.to_string(),
        }
    }
}

/// Reads a two-column pair table TSV. `#` comments and blank lines are skipped.
pub fn read_pairs(text: &str) -> Result<Vec<IdPair>, IdError> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split('\t');
        match (cols.next(), cols.next()) {
            (Some(id), Some(iri)) => pairs.push(IdPair::new(id.trim(), iri.trim())),
            _ => {
                return Err(IdError::Format {
                    line: i + 1,
                    message: "expected two tab-separated columns".into(),
                })
            }
        }
    }
    Ok(pairs)
}

/// Outcome of [`construct_sameas`]: inserted count and the pairs rejected.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BridgeReport {
    pub inserted: usize,
    pub rejected: Vec<(usize, IdError)>,
}

pub fn local_iri(rule: RewriteRule, external_id: &str, prefixes: &PrefixMap) -> Result<Term, IdError> {
    match rule {
        RewriteRule::Cas => cas_to_iri(external_id.trim()),
        RewriteRule::Ncbi => ncbi_id_to_iri(external_id),
        RewriteRule::Verbatim => resolve_iri(external_id, prefixes),
    }
}

fn resolve_iri(text: &str, prefixes: &PrefixMap) -> Result<Term, IdError> {
    prefixes
        .resolve(text)
        .map_err(|_| IdError::InvalidIri(text.to_string()))
}

/// Emits `<local> owl:sameAs <external>` for each valid pair. Invalid pairs
/// are collected in the report; the rest are still emitted.
pub fn construct_sameas(
    pairs: &[IdPair],
    rule: RewriteRule,
    store: &mut TripleStore,
) -> Result<BridgeReport, StoreError> {
    let prefixes = store.prefixes().clone();
    let mut report = BridgeReport::default();
    for (i, pair) in pairs.iter().enumerate() {
        let resolved = local_iri(rule, &pair.external_id, &prefixes)
            .and_then(|local| Ok((local, resolve_iri(&pair.external_iri, &prefixes)?)));
        match resolved {
            Ok((local, external)) => {
                report.inserted += usize::from(store.add(local, vocab::owl_same_as(), external)?);
            }
            Err(e) => report.rejected.push((i, e)),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Triple;

    #[test]
    fn cas_checksums() {
        assert!(validate_cas("877-43-0"));
        assert!(validate_cas("79-06-1"));
        assert!(validate_cas("7732-18-5"));
        assert!(!validate_cas("877-43-1"));
        assert!(!validate_cas("8-43-0"));
        assert!(!validate_cas("12345678-43-0"));
        assert!(!validate_cas("877430"));
        assert!(!validate_cas("abc"));
    }

    #[test]
    fn cas_iris() {
        assert_eq!(
            cas_to_iri("877-43-0").unwrap(),
            Term::Iri("https://cfpub.epa.gov/ecotox/chemical/877430".into())
        );
        assert_eq!(
            cas_to_iri("79-06-1").unwrap(),
            Term::Iri("https://cfpub.epa.gov/ecotox/chemical/79061".into())
        );
        assert_eq!(cas_to_iri("abc"), Err(IdError::InvalidCas("abc".into())));
        assert_eq!(iri_to_cas("https://cfpub.epa.gov/ecotox/chemical/79061").unwrap(), "79-06-1");
    }

    #[test]
    fn normalize_forms() {
        assert_eq!(normalize_cas("877430").as_deref(), Some("877-43-0"));
        assert_eq!(normalize_cas("79061").as_deref(), Some("79-06-1"));
        assert_eq!(normalize_cas("877-43-0").as_deref(), Some("877-43-0"));
        assert_eq!(normalize_cas("1234"), None);
        assert_eq!(normalize_cas("87-7-43-0"), None);
    }

    #[test]
    fn ncbi_iris() {
        assert_eq!(
            ncbi_id_to_iri("311871").unwrap(),
            Term::Iri("https://www.ncbi.nlm.nih.gov/taxonomy/taxon/311871".into())
        );
        assert!(ncbi_id_to_iri("0").is_err());
        assert!(ncbi_id_to_iri("12a").is_err());
        assert!(ncbi_id_to_iri("-4").is_err());
        assert!(ncbi_id_to_iri("+4").is_err());
        assert_eq!(ncbi_id_to_iri("007").unwrap(), ncbi_id_to_iri("7").unwrap());
        assert!(iri_to_ncbi_id("https://example.org/taxon/1").is_err());
    }

    #[test]
    fn sameas_from_pairs() {
        let mut store = TripleStore::with_prefixes(PrefixMap::with_defaults());
        let pairs = vec![
            IdPair::new("311871", "wd:Q13828695"),
            IdPair::new("311871", "wd:Q13828695"),
            IdPair::new("zero", "wd:Q1"),
        ];
        let report = construct_sameas(&pairs, RewriteRule::Ncbi, &mut store).unwrap();
        assert_eq!(report.inserted, 1);
        assert_eq!(report.rejected.len(), 1);
        let t = Triple::new(
            Term::Iri(format!("{NCBI_TAXON_NS}311871")),
            vocab::owl_same_as(),
            Term::Iri("http://www.wikidata.org/entity/Q13828695".into()),
        )
        .unwrap();
        assert!(store.contains(&t));
    }

    #[test]
    fn verbatim_rule_uses_curies() {
        let mut store = TripleStore::with_prefixes(PrefixMap::with_defaults());
        let pairs = vec![IdPair::new("et:taxon/33155", "ncbi:taxon/311871")];
        construct_sameas(&pairs, RewriteRule::Verbatim, &mut store).unwrap();
        let t = Triple::new(vocab::et("taxon/33155"), vocab::owl_same_as(), vocab::ncbi("taxon/311871")).unwrap();
        assert!(store.contains(&t));
    }

    #[test]
    fn pair_table_reader() {
        let pairs = read_pairs("# cas\twd\n877-43-0\twd:Q1\n\n79-06-1\twd:Q2\n").unwrap();
        assert_eq!(pairs.len(), 2);
        assert!(read_pairs("lonely\n").is_err());
        assert_eq!("CAS".parse::<RewriteRule>().unwrap(), RewriteRule::Cas);
        assert!("x".parse::<RewriteRule>().is_err());
    }
}
