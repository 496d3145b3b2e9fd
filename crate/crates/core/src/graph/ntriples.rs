//! N-Triples reader and writer.
//!
//! The writer emits one triple per line in sorted order, so a store always
//! serializes to the same bytes.

use thiserror::Error;

use super::store::{StoreError, TripleStore};
use super::term::{is_blank_label, is_language_tag, Literal, Term, TermError, Triple};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

pub fn serialize_ntriples(store: &TripleStore) -> String {
    let mut lines: Vec<String> = store
        .match_ids(None, None, None)
        .map(|[s, p, o]| format!("{} {} {} .", store.term(s), store.term(p), store.term(o)))
        .collect();
    lines.sort_unstable();
    let mut out = String::with_capacity(lines.iter().map(|l| l.len() + 1).sum());
    for line in lines {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

pub fn parse_ntriples(text: &str) -> Result<TripleStore, ParseError> {
    let mut store = TripleStore::new();
    parse_into(text, &mut store)?;
    Ok(store)
}

/// Parses `text` and inserts every triple into `store`; returns the number
/// of newly inserted triples.
pub fn parse_into(text: &str, store: &mut TripleStore) -> Result<usize, ParseError> {
    let mut added = 0;
    for (i, line) in text.lines().enumerate() {
        let err = |message: String| ParseError { line: i + 1, message };
        if let Some(t) = parse_line(line).map_err(err)? {
            added += usize::from(store.add_triple(t).map_err(|e: StoreError| err(e.to_string()))?);
        }
    }
    Ok(added)
}

/// Parses one N-Triples line. Blank and comment-only lines yield `None`.
pub fn parse_line(line: &str) -> Result<Option<Triple>, String> {
    let mut cur = Cursor::new(line);
    cur.skip_ws();
    if cur.at_end() || cur.peek() == Some('#') {
        return Ok(None);
    }
    let s = cur.term()?;
    cur.require_ws()?;
    let p = cur.term()?;
    cur.require_ws()?;
    let o = cur.term()?;
    cur.skip_ws();
    if cur.peek() != Some('.') {
        return Err("missing terminal '.'".into());
    }
    cur.bump();
    cur.skip_ws();
    if !cur.at_end() && cur.peek() != Some('#') {
        return Err(format!("unexpected trailing content at column {}", cur.pos + 1));
    }
    Triple::new(s, p, o).map(Some).map_err(|e| e.to_string())
}

/// Parses a single N-Triples term (IRI, blank node or literal).
pub fn parse_term(text: &str) -> Result<Term, String> {
    let mut cur = Cursor::new(text.trim());
    let t = cur.term()?;
    if !cur.at_end() {
        return Err(format!("unexpected trailing content in term {text:?}"));
    }
    Ok(t)
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t' | '\r')) {
            self.pos += 1;
        }
    }

    fn require_ws(&mut self) -> Result<(), String> {
        let before = self.pos;
        self.skip_ws();
        if self.pos == before {
            return Err(format!("expected whitespace at column {}", self.pos + 1));
        }
        Ok(())
    }

    fn term(&mut self) -> Result<Term, String> {
        match self.peek() {
            Some('<') => self.iri().map(Term::Iri),
            Some('_') => self.blank(),
            Some('"') => self.literal(),
            Some(c) => Err(format!("unexpected character {c:?} at column {}", self.pos + 1)),
            None => Err("unexpected end of line".into()),
        }
    }

    fn iri(&mut self) -> Result<String, String> {
        let start = self.pos;
        self.bump();
        let mut value = String::new();
        loop {
            match self.bump() {
                Some('>') => break,
                Some('\\') => match self.bump() {
                    Some('u') => value.push(self.hex_escape(4)?),
                    Some('U') => value.push(self.hex_escape(8)?),
                    _ => return Err(format!("bad escape in IRI at column {}", self.pos)),
                },
                Some(c) => value.push(c),
                None => return Err(format!("unclosed IRI starting at column {}", start + 1)),
            }
        }
        Term::iri(value.clone())
            .map(|_| value)
            .map_err(|e: TermError| e.to_string())
    }

    fn blank(&mut self) -> Result<Term, String> {
        if !self.rest().starts_with("_:") {
            return Err(format!("malformed blank node at column {}", self.pos + 1));
        }
        self.pos += 2;
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        let label = &self.src[start..self.pos];
        if !is_blank_label(label) {
            return Err(format!("empty blank node label at column {}", start + 1));
        }
        Ok(Term::Blank(label.to_string()))
    }

    fn literal(&mut self) -> Result<Term, String> {
        let start = self.pos;
        self.bump();
        let mut lexical = String::new();
        loop {
            match self.bump() {
                Some('"') => break,
                Some('\\') => {
                    let c = match self.bump() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') => self.hex_escape(4)?,
                        Some('U') => self.hex_escape(8)?,
                        _ => return Err(format!("bad escape in literal at column {}", self.pos)),
                    };
                    lexical.push(c);
                }
                Some(c) => lexical.push(c),
                None => return Err(format!("unclosed literal starting at column {}", start + 1)),
            }
        }
        if self.rest().starts_with("^^") {
            self.pos += 2;
            if self.peek() != Some('<') {
                return Err(format!("expected datatype IRI at column {}", self.pos + 1));
            }
            let dt = self.iri()?;
            return Literal::typed(lexical, dt)
                .map(Term::Literal)
                .map_err(|e| e.to_string());
        }
        if self.peek() == Some('@') {
            self.bump();
            let start = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '-') {
                self.pos += 1;
            }
            let tag = &self.src[start..self.pos];
            if !is_language_tag(tag) {
                return Err(format!("bad language tag {tag:?}"));
            }
            return Literal::lang(lexical, tag)
                .map(Term::Literal)
                .map_err(|e| e.to_string());
        }
        Ok(Term::literal(lexical))
    }

    fn hex_escape(&mut self, digits: usize) -> Result<char, String> {
        let rest = self.rest();
        let hex = rest
            .get(..digits)
            .filter(|h| h.bytes().all(|b| b.is_ascii_hexdigit()))
            .ok_or_else(|| format!("bad unicode escape at column {}", self.pos + 1))?;
        let code = u32::from_str_radix(hex, 16).expect("validated hex");
        self.pos += digits;
        char::from_u32(code).ok_or_else(|| format!("invalid code point U+{code:X}"))
    }
}
