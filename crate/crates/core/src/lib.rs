//! Building blocks for an ecotoxicology knowledge graph: an indexed RDF
//! store, ingesters for taxonomy dumps, effect tables and trait tables, a
//! QUDT-style unit registry, lexical taxonomy alignment, identifier
//! bridging, a small query engine and graph statistics.

pub mod alignment;
pub mod bridge;
pub mod ecotox;
pub mod graph;
pub mod ncbi;
pub mod pipeline;
pub mod query;
pub mod stats;
pub mod traits;
pub mod units;
pub mod vocab;

use std::path::PathBuf;

use thiserror::Error;

/// Coarse failure category, mapped to process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Validation,
    Internal,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Input => 2,
            ErrorClass::Validation => 3,
            ErrorClass::Internal => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorClass::Input => "input-error",
            ErrorClass::Validation => "validation-error",
            ErrorClass::Internal => "internal-error",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    NTriples {
        context: String,
        #[source]
        source: graph::ParseError,
    },
    #[error(transparent)]
    Prefix(#[from] graph::PrefixError),
    #[error(transparent)]
    Store(#[from] graph::StoreError),
    #[error(transparent)]
    Ncbi(#[from] ncbi::NcbiError),
    #[error(transparent)]
    Ecotox(#[from] ecotox::EcotoxError),
    #[error(transparent)]
    Traits(#[from] traits::TraitError),
    #[error(transparent)]
    Units(#[from] units::UnitError),
    #[error(transparent)]
    Align(#[from] alignment::AlignError),
    #[error(transparent)]
    Bridge(#[from] bridge::IdError),
    #[error(transparent)]
    Query(#[from] query::QueryError),
    #[error(transparent)]
    Stats(#[from] stats::StatsError),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use ecotox::EcotoxError as E;
        match self {
            Error::Io { .. } | Error::Config(_) | Error::NTriples { .. } | Error::Prefix(_) => ErrorClass::Input,
            Error::Store(graph::StoreError::Frozen) => ErrorClass::Internal,
            Error::Store(_) => ErrorClass::Validation,
            Error::Ncbi(ncbi::NcbiError::Malformed { .. }) => ErrorClass::Input,
            Error::Ncbi(_) => ErrorClass::Validation,
            Error::Ecotox(E::Table { .. } | E::MissingColumn { .. }) => ErrorClass::Input,
            Error::Ecotox(_) => ErrorClass::Validation,
            Error::Traits(traits::TraitError::Format { .. }) => ErrorClass::Input,
            Error::Traits(_) => ErrorClass::Validation,
            Error::Units(units::UnitError::Format { .. }) => ErrorClass::Input,
            Error::Units(_) => ErrorClass::Validation,
            Error::Align(alignment::AlignError::Format { .. }) => ErrorClass::Input,
            Error::Align(_) => ErrorClass::Validation,
            Error::Bridge(bridge::IdError::Format { .. } | bridge::IdError::UnknownRule(_)) => ErrorClass::Input,
            Error::Bridge(_) => ErrorClass::Validation,
            Error::Query(query::QueryError::Syntax { .. }) => ErrorClass::Input,
            Error::Query(_) => ErrorClass::Validation,
            Error::Stats(_) => ErrorClass::Validation,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
