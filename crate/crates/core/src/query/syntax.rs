//! Lexer and recursive-descent parser for property paths and mini-queries.
//!
//! Patterns use a Turtle-like surface: `;` repeats the subject, `,` repeats
//! subject and predicate, and `[ ... ]` introduces an anonymous node.

use std::collections::BTreeMap;

use super::path::PathExpr;
use super::pattern::{GraphPattern, Node, Query, TriplePattern, Verb};
use super::QueryError;
use crate::graph::{Literal, PrefixMap, Term};
use crate::vocab;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Iri(String),
    Name(String),
    Var(String),
    Blank(String),
    Str(String),
    LangTag(String),
    Number(String),
    DoubleCaret,
    Punct(char),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: usize,
}

const PUNCT: &str = "[]{}().;,|/^*+?";

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | ':' | '%')
}

fn syntax(pos: usize, message: impl Into<String>) -> QueryError {
    QueryError::Syntax {
        pos,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>, QueryError> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let at = |i: usize| chars.get(i).map(|&(_, c)| c);
    let offset = |i: usize| chars.get(i).map_or(text.len(), |&(p, _)| p);
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i].1 != '\n' {
                i += 1;
            }
            continue;
        }
        let tok = match c {
            '<' => {
                let start = i + 1;
                i = start;
                while at(i).is_some_and(|c| c != '>') {
                    i += 1;
                }
                if at(i).is_none() {
                    return Err(syntax(pos, "unterminated IRI"));
                }
                i += 1;
                Tok::Iri(text[offset(start)..offset(i - 1)].to_string())
            }
            '"' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match at(i) {
                        None => return Err(syntax(pos, "unterminated string")),
                        Some('"') => break,
                        Some('\\') => {
                            let e = at(i + 1).ok_or_else(|| syntax(pos, "dangling escape"))?;
                            s.push(match e {
                                'n' => '\n',
                                't' => '\t',
                                'r' => '\r',
                                '"' => '"',
                                '\\' => '\\',
                                other => return Err(syntax(offset(i), format!("unknown escape \\{other}"))),
                            });
                            i += 2;
                        }
                        Some(c) => {
                            s.push(c);
                            i += 1;
                        }
                    }
                }
                i += 1;
                Tok::Str(s)
            }
            '@' => {
                let start = i + 1;
                i = start;
                while at(i).is_some_and(|c| c.is_ascii_alphanumeric() || c == '-') {
                    i += 1;
                }
                Tok::LangTag(text[offset(start)..offset(i)].to_string())
            }
            '?' | '$' if at(i + 1).is_some_and(|c| c.is_alphanumeric() || c == '_') => {
                let start = i + 1;
                i = start;
                while at(i).is_some_and(|c| c.is_alphanumeric() || c == '_') {
                    i += 1;
                }
                Tok::Var(text[offset(start)..offset(i)].to_string())
            }
            '_' if at(i + 1) == Some(':') => {
                let start = i + 2;
                i = start;
                while at(i).is_some_and(|c| c.is_alphanumeric() || c == '_') {
                    i += 1;
                }
                if i == start {
                    return Err(syntax(pos, "empty blank node label"));
                }
                Tok::Blank(text[offset(start)..offset(i)].to_string())
            }
            '^' if at(i + 1) == Some('^') => {
                i += 2;
                Tok::DoubleCaret
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while at(i).is_some_and(|c| c.is_ascii_digit()) {
                    i += 1;
                }
                if at(i) == Some('.') && at(i + 1).is_some_and(|c| c.is_ascii_digit()) {
                    i += 1;
                    while at(i).is_some_and(|c| c.is_ascii_digit()) {
                        i += 1;
                    }
                }
                if matches!(at(i), Some('e' | 'E')) {
                    let mut j = i + 1;
                    if matches!(at(j), Some('+' | '-')) {
                        j += 1;
                    }
                    if at(j).is_some_and(|c| c.is_ascii_digit()) {
                        i = j;
                        while at(i).is_some_and(|c| c.is_ascii_digit()) {
                            i += 1;
                        }
                    }
                }
                Tok::Number(text[offset(start)..offset(i)].to_string())
            }
            c if PUNCT.contains(c) => {
                i += 1;
                Tok::Punct(c)
            }
            c if c.is_alphabetic() || c == ':' => {
                let start = i;
                loop {
                    while at(i).is_some_and(is_name_char) {
                        i += 1;
                    }
                    // `/` continues a local name unless a new path step follows
                    if at(i) == Some('/') && local_continues(&chars, i + 1) {
                        i += 1;
                        continue;
                    }
                    break;
                }
                while i > start + 1 && at(i - 1) == Some('.') {
                    i -= 1;
                }
                Tok::Name(text[offset(start)..offset(i)].to_string())
            }
            other => return Err(syntax(pos, format!("unexpected character {other:?}"))),
        };
        out.push(Token { tok, pos });
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: text.len(),
    });
    Ok(out)
}

/// After a `/` inside a name: the next segment belongs to the same local
/// name when it is non-empty and is not itself a prefixed name or `a`.
fn local_continues(chars: &[(usize, char)], from: usize) -> bool {
    let mut seg = String::new();
    let mut j = from;
    while let Some(&(_, c)) = chars.get(j) {
        if !is_name_char(c) || c == '/' {
            break;
        }
        seg.push(c);
        j += 1;
    }
    !seg.is_empty() && !seg.contains(':') && seg != "a"
}

struct Parser<'a> {
    toks: Vec<Token>,
    i: usize,
    prefixes: PrefixMap,
    blanks: BTreeMap<String, String>,
    anon: &'a mut usize,
}

impl<'a> Parser<'a> {
    fn new(text: &str, prefixes: &PrefixMap, anon: &'a mut usize) -> Result<Self, QueryError> {
        Ok(Parser {
            toks: lex(text)?,
            i: 0,
            prefixes: prefixes.clone(),
            blanks: BTreeMap::new(),
            anon,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.i + k).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> usize {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Punct(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), QueryError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(syntax(self.pos(), format!("expected '{c}'")))
        }
    }

    fn keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Name(n) if n.eq_ignore_ascii_case(kw))
    }

    fn expect_eof(&self) -> Result<(), QueryError> {
        match self.peek() {
            Tok::Eof => Ok(()),
            _ => Err(syntax(self.pos(), "unexpected trailing input")),
        }
    }

    fn name_term(&self, name: &str, pos: usize) -> Result<Term, QueryError> {
        self.prefixes
            .expand(name)
            .map_err(|e| syntax(pos, e.to_string()))
    }

    fn iri_term(&self, iri: &str, pos: usize) -> Result<Term, QueryError> {
        Term::iri(iri).map_err(|e| syntax(pos, e.to_string()))
    }

    fn fresh(&mut self) -> Node {
        *self.anon += 1;
        Node::Var(format!("_:[{}]", self.anon))
    }

    fn blank(&mut self, label: &str) -> Node {
        let name = self
            .blanks
            .entry(label.to_string())
            .or_insert_with(|| format!("_:{label}"))
            .clone();
        Node::Var(name)
    }

    // path := seq ('|' seq)*
    fn path(&mut self) -> Result<PathExpr, QueryError> {
        let mut left = self.path_seq()?;
        while self.eat('|') {
            left = PathExpr::alternative(left, self.path_seq()?);
        }
        Ok(left)
    }

    fn path_seq(&mut self) -> Result<PathExpr, QueryError> {
        let mut left = self.path_unary()?;
        while self.eat('/') {
            left = PathExpr::sequence(left, self.path_unary()?);
        }
        Ok(left)
    }

    fn path_unary(&mut self) -> Result<PathExpr, QueryError> {
        if self.eat('^') {
            return Ok(PathExpr::inverse(self.path_unary()?));
        }
        let mut p = self.path_primary()?;
        loop {
            if self.eat('*') {
                p = PathExpr::repeat(p, 0, None);
            } else if self.eat('+') {
                p = PathExpr::repeat(p, 1, None);
            } else if self.eat('?') {
                p = PathExpr::repeat(p, 0, Some(1));
            } else if *self.peek() == Tok::Punct('{')
                && matches!(self.peek_at(1), Tok::Number(_) | Tok::Punct(','))
            {
                let (min, max) = self.bounds()?;
                p = PathExpr::repeat(p, min, max);
            } else {
                return Ok(p);
            }
        }
    }

    fn bound(&mut self) -> Result<Option<u32>, QueryError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Number(n) => {
                self.bump();
                n.parse().map(Some).map_err(|_| syntax(pos, format!("bad repetition bound {n:?}")))
            }
            _ => Ok(None),
        }
    }

    // {n} | {m,n} | {m,} | {,n}
    fn bounds(&mut self) -> Result<(u32, Option<u32>), QueryError> {
        let pos = self.pos();
        self.expect('{')?;
        let min = self.bound()?;
        let (min, max) = if self.eat(',') {
            (min.unwrap_or(0), self.bound()?)
        } else {
            let n = min.ok_or_else(|| syntax(pos, "empty repetition"))?;
            (n, Some(n))
        };
        self.expect('}')?;
        if max.is_some_and(|m| m < min) {
            return Err(syntax(pos, format!("repetition max {} below min {min}", max.unwrap_or(0))));
        }
        Ok((min, max))
    }

    fn path_primary(&mut self) -> Result<PathExpr, QueryError> {
        let Token { tok, pos } = self.bump();
        match tok {
            Tok::Punct('(') => {
                let p = self.path()?;
                self.expect(')')?;
                Ok(p)
            }
            Tok::Name(n) if n == "a" => Ok(PathExpr::atom(vocab::rdf_type())),
            Tok::Name(n) => Ok(PathExpr::atom(self.name_term(&n, pos)?)),
            Tok::Iri(iri) => Ok(PathExpr::atom(self.iri_term(&iri, pos)?)),
            _ => Err(syntax(pos, "expected a predicate IRI, 'a' or '('")),
        }
    }

    fn literal(&mut self, lexical: String, pos: usize) -> Result<Term, QueryError> {
        match self.peek().clone() {
            Tok::LangTag(tag) => {
                self.bump();
                Literal::lang(lexical, tag)
                    .map(Term::Literal)
                    .map_err(|e| syntax(pos, e.to_string()))
            }
            Tok::DoubleCaret => {
                self.bump();
                let Token { tok, pos: dpos } = self.bump();
                let dt = match tok {
                    Tok::Iri(i) => self.iri_term(&i, dpos)?,
                    Tok::Name(n) => self.name_term(&n, dpos)?,
                    _ => return Err(syntax(dpos, "expected datatype IRI")),
                };
                let dt = dt.as_iri().unwrap_or_default().to_string();
                Literal::typed(lexical, dt)
                    .map(Term::Literal)
                    .map_err(|e| syntax(pos, e.to_string()))
            }
            _ => Ok(Term::literal(lexical)),
        }
    }

    fn node(&mut self, out: &mut Vec<TriplePattern>, subject_position: bool) -> Result<Node, QueryError> {
        let Token { tok, pos } = self.bump();
        let node = match tok {
            Tok::Var(v) => Node::Var(v),
            Tok::Blank(b) => self.blank(&b),
            Tok::Iri(i) => Node::Const(self.iri_term(&i, pos)?),
            Tok::Name(n) => Node::Const(self.name_term(&n, pos)?),
            Tok::Punct('[') => {
                let node = self.fresh();
                if !self.eat(']') {
                    self.predicate_objects(&node, out)?;
                    self.expect(']')?;
                }
                node
            }
            Tok::Str(s) if !subject_position => Node::Const(self.literal(s, pos)?),
            Tok::Number(n) if !subject_position => {
                let dt = if n.contains(['e', 'E']) {
                    "double"
                } else if n.contains('.') {
                    "decimal"
                } else {
                    "integer"
                };
                Node::Const(Term::Literal(
                    Literal::typed(n, vocab::xsd(dt)).map_err(|e| syntax(pos, e.to_string()))?,
                ))
            }
            Tok::Str(_) | Tok::Number(_) => return Err(syntax(pos, "literal in subject position")),
            _ => return Err(syntax(pos, "expected a term")),
        };
        Ok(node)
    }

    fn verb(&mut self) -> Result<Verb, QueryError> {
        if let Tok::Var(v) = self.peek().clone() {
            self.bump();
            return Ok(Verb::Var(v));
        }
        Ok(Verb::Path(self.path()?))
    }

    fn predicate_objects(&mut self, subject: &Node, out: &mut Vec<TriplePattern>) -> Result<(), QueryError> {
        loop {
            let verb = self.verb()?;
            loop {
                let object = self.node(out, false)?;
                out.push(TriplePattern {
                    subject: subject.clone(),
                    verb: verb.clone(),
                    object,
                });
                if !self.eat(',') {
                    break;
                }
            }
            if !self.eat(';') {
                return Ok(());
            }
            while self.eat(';') {}
            if matches!(self.peek(), Tok::Punct('.' | ']' | '}') | Tok::Eof) {
                return Ok(());
            }
        }
    }

    /// Triple statements until `}` or end of input.
    fn triples(&mut self) -> Result<GraphPattern, QueryError> {
        let mut out = Vec::new();
        loop {
            while self.eat('.') {}
            if matches!(self.peek(), Tok::Punct('}') | Tok::Eof) {
                return Ok(GraphPattern { patterns: out });
            }
            let subject = self.node(&mut out, true)?;
            let bare_bracket = matches!(&subject, Node::Var(v) if v.starts_with("_:["))
                && matches!(self.peek(), Tok::Punct('.' | '}') | Tok::Eof);
            if !bare_bracket {
                self.predicate_objects(&subject, &mut out)?;
            }
            if !matches!(self.peek(), Tok::Punct('}') | Tok::Eof) {
                self.expect('.')?;
            }
        }
    }

    fn group(&mut self) -> Result<GraphPattern, QueryError> {
        self.expect('{')?;
        let g = self.triples()?;
        self.expect('}')?;
        Ok(g)
    }

    fn prologue(&mut self) -> Result<(), QueryError> {
        while self.keyword("PREFIX") {
            self.bump();
            let Token { tok, pos } = self.bump();
            let label = match tok {
                Tok::Name(n) if n.ends_with(':') && n.matches(':').count() == 1 => n.trim_end_matches(':').to_string(),
                _ => return Err(syntax(pos, "expected prefix label ending in ':'")),
            };
            let Token { tok, pos } = self.bump();
            let Tok::Iri(ns) = tok else {
                return Err(syntax(pos, "expected <namespace>"));
            };
            self.prefixes
                .insert(&label, &ns)
                .map_err(|e| syntax(pos, e.to_string()))?;
            self.eat('.');
        }
        Ok(())
    }

    fn query(&mut self) -> Result<Query, QueryError> {
        self.prologue()?;
        let query = if self.keyword("SELECT") {
            self.bump();
            if self.keyword("DISTINCT") {
                self.bump();
            }
            let mut projection = Vec::new();
            if !self.eat('*') {
                while let Tok::Var(v) = self.peek().clone() {
                    self.bump();
                    projection.push(v);
                }
                if projection.is_empty() {
                    return Err(syntax(self.pos(), "expected projection variables or '*'"));
                }
            }
            if self.keyword("WHERE") {
                self.bump();
            }
            let pattern = self.group()?;
            let projection = if projection.is_empty() { pattern.variables() } else { projection };
            Query::Select { projection, pattern }
        } else if self.keyword("CONSTRUCT") {
            self.bump();
            let template = self.group()?;
            if self.keyword("WHERE") {
                self.bump();
            }
            let pattern = self.group()?;
            Query::Construct { template, pattern }
        } else {
            let pattern = if *self.peek() == Tok::Punct('{') { self.group()? } else { self.triples()? };
            Query::Select {
                projection: pattern.variables(),
                pattern,
            }
        };
        self.expect_eof()?;
        Ok(query)
    }
}

/// Parses a property path such as `rdfs:label|foaf:name` or
/// `^rdf:type/rdfs:subClassOf{1,3}`.
pub fn parse_path(text: &str, prefixes: &PrefixMap) -> Result<PathExpr, QueryError> {
    let mut anon = 0;
    let mut p = Parser::new(text, prefixes, &mut anon)?;
    let path = p.path()?;
    p.expect_eof()?;
    Ok(path)
}

/// Parses a SELECT, CONSTRUCT or bare pattern query.
pub fn parse_query(text: &str, prefixes: &PrefixMap) -> Result<Query, QueryError> {
    let mut anon = 0;
    Parser::new(text, prefixes, &mut anon)?.query()
}

/// Parses a bare list of triple patterns.
pub fn parse_pattern(text: &str, prefixes: &PrefixMap) -> Result<GraphPattern, QueryError> {
    let mut anon = 0;
    let mut p = Parser::new(text, prefixes, &mut anon)?;
    p.prologue()?;
    let g = p.triples()?;
    p.expect_eof()?;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm() -> PrefixMap {
        PrefixMap::with_defaults()
    }

    fn atom(curie: &str) -> PathExpr {
        PathExpr::atom(pm().expand(curie).unwrap())
    }

    #[test]
    fn alternative() {
        assert_eq!(
            parse_path("rdfs:label|foaf:name", &pm()).unwrap(),
            PathExpr::alternative(atom("rdfs:label"), atom("foaf:name"))
        );
        assert_eq!(
            parse_path("rdfs:label | foaf:name", &pm()).unwrap(),
            PathExpr::alternative(atom("rdfs:label"), atom("foaf:name"))
        );
    }

    #[test]
    fn bounded_repetition() {
        assert_eq!(
            parse_path("rdfs:subClassOf{1,3}", &pm()).unwrap(),
            PathExpr::repeat(atom("rdfs:subClassOf"), 1, Some(3))
        );
        assert_eq!(
            parse_path("rdfs:subClassOf{2}", &pm()).unwrap(),
            PathExpr::repeat(atom("rdfs:subClassOf"), 2, Some(2))
        );
        assert_eq!(
            parse_path("rdfs:subClassOf{2,}", &pm()).unwrap(),
            PathExpr::repeat(atom("rdfs:subClassOf"), 2, None)
        );
        assert!(parse_path("rdfs:subClassOf{3,1}", &pm()).is_err());
    }

    #[test]
    fn precedence() {
        assert_eq!(
            parse_path("^rdf:type/rdfs:subClassOf", &pm()).unwrap(),
            PathExpr::sequence(PathExpr::inverse(atom("rdf:type")), atom("rdfs:subClassOf"))
        );
        assert_eq!(
            parse_path("^a{2}", &pm()).unwrap(),
            PathExpr::inverse(PathExpr::repeat(atom("rdf:type"), 2, Some(2)))
        );
        assert_eq!(
            parse_path("a/b:x|c:y", &PrefixMap::from_tsv("b\thttp://b.org/\nc\thttp://c.org/\n").unwrap()).unwrap(),
            PathExpr::alternative(
                PathExpr::sequence(
                    PathExpr::atom(vocab::rdf_type()),
                    PathExpr::atom(Term::Iri("http://b.org/x".into()))
                ),
                PathExpr::atom(Term::Iri("http://c.org/y".into()))
            )
        );
        assert_eq!(
            parse_path("^(rdf:type|rdfs:label)*", &pm()).unwrap(),
            PathExpr::inverse(PathExpr::repeat(
                PathExpr::alternative(atom("rdf:type"), atom("rdfs:label")),
                0,
                None
            ))
        );
    }

    #[test]
    fn slash_inside_local_names() {
        assert_eq!(parse_path("et:result/1/concentration", &pm()).unwrap(), atom("et:result/1/concentration"));
        assert_eq!(
            parse_path("et:a/b/et:c", &pm()).unwrap(),
            PathExpr::sequence(atom("et:a/b"), atom("et:c"))
        );
    }

    #[test]
    fn errors_carry_positions() {
        match parse_path("rdfs:label|", &pm()) {
            Err(QueryError::Syntax { pos, .. }) => assert_eq!(pos, 11),
            other => panic!("{other:?}"),
        }
        assert!(parse_path("nope:x", &pm()).is_err());
        assert!(parse_path("(rdf:type", &pm()).is_err());
        assert!(parse_path("rdf:type rdf:type", &pm()).is_err());
    }

    #[test]
    fn turtle_shorthand() {
        let q = parse_pattern(
            "?s eol:endemicTo [ rdfs:label \"Oslofjorden\"@no ] .\n_:b a et:Test ; et:species ?s , ?t .",
            &pm(),
        )
        .unwrap();
        assert_eq!(q.patterns.len(), 5);
        assert_eq!(q.variables(), vec!["s".to_string(), "t".to_string()]);
        assert_eq!(
            q.patterns[0].object,
            Node::Const(Term::Literal(Literal::lang("Oslofjorden", "no").unwrap()))
        );
    }

    #[test]
    fn query_forms() {
        let q = parse_query(
            "PREFIX ex: <http://example.org/>\nSELECT ?x WHERE { ?x ex:p 1.5 . ?x ex:q \"v\"^^xsd:string }",
            &pm(),
        )
        .unwrap();
        let Query::Select { projection, pattern } = q else { panic!() };
        assert_eq!(projection, vec!["x"]);
        assert_eq!(pattern.patterns.len(), 2);
        let q = parse_query("CONSTRUCT { ?x owl:sameAs ?y } WHERE { ?y wdt:P685 ?x }", &pm()).unwrap();
        assert!(matches!(q, Query::Construct { .. }));
        assert!(parse_query("SELECT WHERE { ?x a ?y }", &pm()).is_err());
        assert!(parse_query("\"lit\" a ?y", &pm()).is_err());
    }
}
