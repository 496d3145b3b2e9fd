//! In-memory RDF graph: terms, prefix handling, an indexed triple store and
//! N-Triples I/O.

mod ntriples;
mod prefix;
mod store;
mod term;

pub use ntriples::{parse_into, parse_line, parse_ntriples, parse_term, serialize_ntriples, ParseError};
pub use prefix::{PrefixError, PrefixMap};
pub use store::{IndexOrder, StoreError, TermId, TripleStore};
pub use term::{Literal, Term, TermError, Triple};
