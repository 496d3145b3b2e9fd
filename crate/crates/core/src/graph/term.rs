use std::cmp::Ordering;
use std::fmt;
use std::iter;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("invalid IRI {0:?}")]
    InvalidIri(String),
    #[error("invalid blank node label {0:?}")]
    InvalidBlank(String),
    #[error("invalid language tag {0:?}")]
    InvalidLanguage(String),
    #[error("triple subject must be an IRI or blank node, got {0}")]
    InvalidSubject(String),
    #[error("triple predicate must be an IRI, got {0}")]
    InvalidPredicate(String),
}

/// A literal value: lexical form plus at most one of datatype or language tag.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    lexical: String,
    datatype: Option<String>,
    language: Option<String>,
}

impl Literal {
    pub fn simple(lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: None,
            language: None,
        }
    }

    pub fn typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Result<Self, TermError> {
        let datatype = datatype.into();
        check_iri(&datatype)?;
        Ok(Literal {
            lexical: lexical.into(),
            datatype: Some(datatype),
            language: None,
        })
    }

    pub fn lang(lexical: impl Into<String>, language: impl Into<String>) -> Result<Self, TermError> {
        let language = language.into();
        if !is_language_tag(&language) {
            return Err(TermError::InvalidLanguage(language));
        }
        Ok(Literal {
            lexical: lexical.into(),
            datatype: None,
            language: Some(language),
        })
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> Option<&str> {
        self.datatype.as_deref()
    }

    pub fn language(&self) -> Option<&str> {
        self.language.as_deref()
    }

    fn suffix_bytes(&self) -> Vec<u8> {
        match (&self.datatype, &self.language) {
            (Some(dt), _) => {
                let mut v = Vec::with_capacity(dt.len() + 4);
                v.extend_from_slice(b"^^<");
                v.extend_from_slice(dt.as_bytes());
                v.push(b'>');
                v
            }
            (None, Some(lang)) => {
                let mut v = Vec::with_capacity(lang.len() + 1);
                v.push(b'@');
                v.extend_from_slice(lang.as_bytes());
                v
            }
            (None, None) => Vec::new(),
        }
    }
}

/// An RDF term.
///
/// Terms order by their N-Triples rendering, so sorting triples by
/// `(subject, predicate, object)` gives the same order as sorting the
/// serialized lines.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Iri(String),
    Literal(Literal),
    Blank(String),
}

impl Term {
    pub fn iri(value: impl Into<String>) -> Result<Self, TermError> {
        let value = value.into();
        check_iri(&value)?;
        Ok(Term::Iri(value))
    }

    pub fn blank(label: impl Into<String>) -> Result<Self, TermError> {
        let label = label.into();
        if is_blank_label(&label) {
            Ok(Term::Blank(label))
        } else {
            Err(TermError::InvalidBlank(label))
        }
    }

    pub fn literal(lexical: impl Into<String>) -> Self {
        Term::Literal(Literal::simple(lexical))
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Term::Blank(_))
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(lit) => Some(lit),
            _ => None,
        }
    }

    fn kind_rank(&self) -> u8 {
        // '"' < '<' < '_'
        match self {
            Term::Literal(_) => 0,
            Term::Iri(_) => 1,
            Term::Blank(_) => 2,
        }
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Term::Iri(a), Term::Iri(b)) => a
                .bytes()
                .chain(iter::once(b'>'))
                .cmp(b.bytes().chain(iter::once(b'>'))),
            (Term::Blank(a), Term::Blank(b)) => a.cmp(b),
            (Term::Literal(a), Term::Literal(b)) => {
                let (sa, sb) = (a.suffix_bytes(), b.suffix_bytes());
                escaped_bytes(&a.lexical)
                    .chain(iter::once(b'"'))
                    .chain(sa)
                    .cmp(escaped_bytes(&b.lexical).chain(iter::once(b'"')).chain(sb))
            }
            _ => self.kind_rank().cmp(&other.kind_rank()),
        }
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => write!(f, "<{iri}>"),
            Term::Blank(label) => write!(f, "_:{label}"),
            Term::Literal(lit) => {
                f.write_str("\"")?;
                for c in lit.lexical.chars() {
                    let mut buf = [0u8; 10];
                    let n = escape_into(c, &mut buf);
                    // escape_into only emits ASCII or a whole UTF-8 sequence
                    f.write_str(std::str::from_utf8(&buf[..n]).expect("utf-8"))?;
                }
                f.write_str("\"")?;
                if let Some(dt) = &lit.datatype {
                    write!(f, "^^<{dt}>")?;
                } else if let Some(lang) = &lit.language {
                    write!(f, "@{lang}")?;
                }
                Ok(())
            }
        }
    }
}

/// A subject–predicate–object statement.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    subject: Term,
    predicate: Term,
    object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Result<Self, TermError> {
        if subject.is_literal() {
            return Err(TermError::InvalidSubject(subject.to_string()));
        }
        if !predicate.is_iri() {
            return Err(TermError::InvalidPredicate(predicate.to_string()));
        }
        Ok(Triple {
            subject,
            predicate,
            object,
        })
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &Term {
        &self.predicate
    }

    pub fn object(&self) -> &Term {
        &self.object
    }

    pub fn into_parts(self) -> (Term, Term, Term) {
        (self.subject, self.predicate, self.object)
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

pub(crate) fn check_iri(value: &str) -> Result<(), TermError> {
    let bad = |c: char| {
        c.is_whitespace()
            || c.is_control()
            || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\')
    };
    if value.is_empty() || value.chars().any(bad) || !value.contains(':') {
        return Err(TermError::InvalidIri(value.to_string()));
    }
    Ok(())
}

pub(crate) fn is_blank_label(label: &str) -> bool {
    !label.is_empty() && label.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

pub(crate) fn is_language_tag(tag: &str) -> bool {
    let mut parts = tag.split('-');
    let first = parts.next().unwrap_or("");
    !first.is_empty()
        && first.bytes().all(|b| b.is_ascii_alphabetic())
        && parts.all(|p| !p.is_empty() && p.bytes().all(|b| b.is_ascii_alphanumeric()))
}

/// Writes the N-Triples escape of `c` into `buf` and returns the byte count.
pub(crate) fn escape_into(c: char, buf: &mut [u8; 10]) -> usize {
    let simple = |buf: &mut [u8; 10], b: u8| {
        buf[0] = b'\\';
        buf[1] = b;
        2
    };
    match c {
        '"' => simple(buf, b'"'),
        '\\' => simple(buf, b'\\'),
        '\n' => simple(buf, b'n'),
        '\r' => simple(buf, b'r'),
        '\t' => simple(buf, b't'),
        c if (c as u32) < 0x20 || c == '\u{7f}' => {
            let s = format!("\\u{:04X}", c as u32);
            buf[..6].copy_from_slice(s.as_bytes());
            6
        }
        c => c.encode_utf8(&mut buf[..]).len(),
    }
}

fn escaped_bytes(s: &str) -> impl Iterator<Item = u8> + '_ {
    s.chars().flat_map(|c| {
        let mut buf = [0u8; 10];
        let n = escape_into(c, &mut buf);
        buf.into_iter().take(n)
    })
}
