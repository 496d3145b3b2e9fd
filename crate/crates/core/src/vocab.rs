//! Namespaces and well-known IRIs used across the graph.

use crate::graph::Term;

pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const OWL: &str = "http://www.w3.org/2002/07/owl#";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
pub const QUDT: &str = "http://qudt.org/schema/qudt#";
pub const UNIT: &str = "http://qudt.org/1.1/vocab/unit#";
pub const ET: &str = "https://cfpub.epa.gov/ecotox/";
pub const NCBI: &str = "https://www.ncbi.nlm.nih.gov/taxonomy/";
pub const EOL: &str = "http://eol.org/schema/terms/";
pub const WD: &str = "http://www.wikidata.org/entity/";
pub const WDT: &str = "http://www.wikidata.org/prop/direct/";
pub const ENVO: &str = "http://purl.obolibrary.org/obo/ENVO_";
pub const WORMS: &str = "http://www.marinespecies.org/";
pub const FOAF: &str = "http://xmlns.com/foaf/0.1/";

/// Prefix bindings registered by default.
pub const DEFAULT_PREFIXES: &[(&str, &str)] = &[
    ("rdf", RDF),
    ("rdfs", RDFS),
    ("owl", OWL),
    ("xsd", XSD),
    ("qudt", QUDT),
    ("unit", UNIT),
    ("et", ET),
    ("ncbi", NCBI),
    ("eol", EOL),
    ("wd", WD),
    ("wdt", WDT),
    ("ENVO", ENVO),
    ("worms", WORMS),
    ("foaf", FOAF),
];

/// Builds an IRI term from a namespace and a local part that is already
/// known to be IRI-safe.
pub(crate) fn iri(ns: &str, local: &str) -> Term {
    Term::Iri(format!("{ns}{local}"))
}

pub fn rdf_type() -> Term {
    iri(RDF, "type")
}

pub fn rdf_value() -> Term {
    iri(RDF, "value")
}

pub fn rdfs_label() -> Term {
    iri(RDFS, "label")
}

pub fn rdfs_subclass_of() -> Term {
    iri(RDFS, "subClassOf")
}

pub fn owl_same_as() -> Term {
    iri(OWL, "sameAs")
}

pub fn owl_disjoint_with() -> Term {
    iri(OWL, "disjointWith")
}

pub fn xsd(local: &str) -> String {
    format!("{XSD}{local}")
}

pub fn et(local: &str) -> Term {
    iri(ET, local)
}

pub fn ncbi(local: &str) -> Term {
    iri(NCBI, local)
}
