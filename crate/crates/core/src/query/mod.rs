//! Basic graph patterns, property paths and convenience lookups.

mod lookup;
mod path;
mod pattern;
mod syntax;

use thiserror::Error;

pub use lookup::{fuzzy_lookup, lineage, siblings};
pub use path::{eval_path, PathExpr};
pub use pattern::{construct, select, GraphPattern, Node, Query, Solutions, TriplePattern, Verb};
pub use syntax::{parse_path, parse_pattern, parse_query};

use crate::graph::TripleStore;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("syntax error at offset {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("projected variable ?{0} does not occur in the pattern")]
    UnboundVariable(String),
    #[error("template variable ?{0} is not bound by the pattern")]
    UnboundTemplateVariable(String),
    #[error("unknown entity {0}")]
    UnknownEntity(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Result of [`run_query`].
#[derive(Debug)]
pub enum QueryOutput {
    Table(Solutions),
    Graph(TripleStore),
}

pub fn run_query(store: &TripleStore, query: &Query) -> Result<QueryOutput, QueryError> {
    match query {
        Query::Select { projection, pattern } => select(store, pattern, projection).map(QueryOutput::Table),
        Query::Construct { template, pattern } => construct(store, pattern, template).map(QueryOutput::Graph),
    }
}
