use std::collections::BTreeMap;

use thiserror::Error;

use super::term::{check_iri, Term, TermError};
use crate::vocab::DEFAULT_PREFIXES;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrefixError {
    #[error("unknown prefix {0:?}")]
    UnknownPrefix(String),
    #[error("not a compact IRI: {0:?}")]
    NotCurie(String),
    #[error("invalid prefix label {0:?}")]
    InvalidLabel(String),
    #[error("prefix {0:?} is already bound to a different namespace")]
    Conflict(String),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Term(#[from] TermError),
}

/// Prefix label to namespace bindings.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrefixMap {
    bindings: BTreeMap<String, String>,
}

impl PrefixMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_defaults() -> Self {
        let mut pm = Self::new();
        for (label, ns) in DEFAULT_PREFIXES {
            pm.bindings.insert((*label).to_string(), (*ns).to_string());
        }
        pm
    }

    /// Binds `label` to `namespace`. Rebinding a label to the same namespace
    /// is a no-op.
    pub fn insert(&mut self, label: &str, namespace: &str) -> Result<(), PrefixError> {
        if !is_prefix_label(label) {
            return Err(PrefixError::InvalidLabel(label.to_string()));
        }
        check_iri(namespace)?;
        match self.bindings.get(label) {
            Some(existing) if existing != namespace => Err(PrefixError::Conflict(label.to_string())),
            _ => {
                self.bindings.insert(label.to_string(), namespace.to_string());
                Ok(())
            }
        }
    }

    pub fn namespace(&self, label: &str) -> Option<&str> {
        self.bindings.get(label).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    /// Expands `prefix:local` into a full IRI term.
    pub fn expand(&self, curie: &str) -> Result<Term, PrefixError> {
        let (label, local) = curie
            .split_once(':')
            .ok_or_else(|| PrefixError::NotCurie(curie.to_string()))?;
        let ns = self
            .bindings
            .get(label)
            .ok_or_else(|| PrefixError::UnknownPrefix(label.to_string()))?;
        Ok(Term::iri(format!("{ns}{local}"))?)
    }

    /// Compacts an IRI using the longest matching namespace.
    pub fn compact(&self, iri: &str) -> Option<String> {
        self.bindings
            .iter()
            .filter(|(_, ns)| iri.starts_with(ns.as_str()))
            .max_by(|a, b| a.1.len().cmp(&b.1.len()).then_with(|| b.0.cmp(a.0)))
            .map(|(label, ns)| format!("{label}:{}", &iri[ns.len()..]))
    }

    /// Accepts `<iri>`, a bare absolute IRI (`scheme://...`), or a curie.
    pub fn resolve(&self, text: &str) -> Result<Term, PrefixError> {
        let text = text.trim();
        if let Some(inner) = text.strip_prefix('<').and_then(|t| t.strip_suffix('>')) {
            return Ok(Term::iri(inner)?);
        }
        if text.contains("://") || text.starts_with("urn:") {
            return Ok(Term::iri(text)?);
        }
        self.expand(text)
    }

    /// Renders a term compactly when a prefix matches, otherwise in N-Triples form.
    pub fn display(&self, term: &Term) -> String {
        match term {
            Term::Iri(iri) => self
                .compact(iri)
                .filter(|c| c.split_once(':').is_some_and(|(_, l)| is_simple_local(l)))
                .unwrap_or_else(|| term.to_string()),
            _ => term.to_string(),
        }
    }

    /// Loads a two-column TSV (prefix, namespace). Blank lines and `#`
    /// comments are skipped.
    pub fn from_tsv(text: &str) -> Result<Self, PrefixError> {
        let mut pm = Self::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            let (Some(label), Some(ns)) = (cols.next(), cols.next()) else {
                return Err(PrefixError::Format {
                    line: i + 1,
                    message: "expected two tab-separated columns".into(),
                });
            };
            pm.insert(label.trim().trim_end_matches(':'), ns.trim())
                .map_err(|e| PrefixError::Format {
                    line: i + 1,
                    message: e.to_string(),
                })?;
        }
        Ok(pm)
    }

    pub fn to_tsv(&self) -> String {
        self.iter().map(|(l, ns)| format!("{l}\t{ns}\n")).collect()
    }

    /// Adds every binding of `other` not already present.
    pub fn merge(&mut self, other: &PrefixMap) {
        for (label, ns) in other.iter() {
            self.bindings
                .entry(label.to_string())
                .or_insert_with(|| ns.to_string());
        }
    }
}

fn is_prefix_label(label: &str) -> bool {
    label.is_empty()
        || (label.starts_with(|c: char| c.is_ascii_alphabetic())
            && label
                .bytes()
                .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-'))
}

fn is_simple_local(local: &str) -> bool {
    local
        .chars()
        .all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '/' | '.' | '#'))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expand_ncbi_taxon() {
        let pm = PrefixMap::with_defaults();
        assert_eq!(
            pm.expand("ncbi:taxon/687295").unwrap(),
            Term::iri("https://www.ncbi.nlm.nih.gov/taxonomy/taxon/687295").unwrap()
        );
        assert_eq!(
            pm.expand("et:taxon/34010").unwrap(),
            Term::iri("https://cfpub.epa.gov/ecotox/taxon/34010").unwrap()
        );
    }

    #[test]
    fn unknown_prefix() {
        let pm = PrefixMap::with_defaults();
        assert_eq!(
            pm.expand("zz:1"),
            Err(PrefixError::UnknownPrefix("zz".into()))
        );
    }

    #[test]
    fn compact_is_left_inverse() {
        let pm = PrefixMap::with_defaults();
        for curie in ["ncbi:taxon/687295", "et:chemical/877430", "rdfs:label", "wd:Q13828695"] {
            let Term::Iri(iri) = pm.expand(curie).unwrap() else { unreachable!() };
            assert_eq!(pm.compact(&iri).as_deref(), Some(curie));
        }
    }

    #[test]
    fn compact_prefers_longest_namespace() {
        let mut pm = PrefixMap::new();
        pm.insert("a", "http://x/").unwrap();
        pm.insert("b", "http://x/y/").unwrap();
        assert_eq!(pm.compact("http://x/y/z").as_deref(), Some("b:z"));
        assert_eq!(pm.compact("http://x/q").as_deref(), Some("a:q"));
        assert_eq!(pm.compact("http://other/q"), None);
    }

    #[test]
    fn tsv_load() {
        let pm = PrefixMap::from_tsv("# comment\net\thttps://cfpub.epa.gov/ecotox/\nncbi:\thttps://www.ncbi.nlm.nih.gov/taxonomy/\n").unwrap();
        assert_eq!(pm.len(), 2);
        assert_eq!(pm.namespace("ncbi"), Some("https://www.ncbi.nlm.nih.gov/taxonomy/"));
        assert!(matches!(
            PrefixMap::from_tsv("et\n"),
            Err(PrefixError::Format { line: 1, .. })
        ));
    }

    #[test]
    fn resolve_forms() {
        let pm = PrefixMap::with_defaults();
        let want = Term::iri("http://eol.org/schema/terms/habitat").unwrap();
        assert_eq!(pm.resolve("eol:habitat").unwrap(), want);
        assert_eq!(pm.resolve("<http://eol.org/schema/terms/habitat>").unwrap(), want);
        assert_eq!(pm.resolve("http://eol.org/schema/terms/habitat").unwrap(), want);
    }
}
