//! Turtle reader and writer for the subset this crate produces.
//!
//! Supported syntax: `@prefix` directives, prefixed names, the `a` keyword,
//! semicolon/comma predicate-object lists, typed literals (`^^`), language
//! tags, string/numeric/boolean literal shorthands, blank node labels, and
//! `#` comments. Collections, multiline strings, `@base`, and relative IRI
//! resolution are out of scope.
//!
//! The serializer always emits the full prefix block (alphabetical by
//! prefix), groups triples by subject, and writes typed literals in explicit
//! `"lexical"^^prefix:type` form, so `parse_turtle(serialize_turtle(g))`
//! reproduces `g` exactly.

use super::{Graph, RdfError, Term, Triple, RDF_TYPE, XSD_STRING};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";

/// Errors produced while reading a Turtle document.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TurtleError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("unknown prefix '{prefix}:' at {line}:{col}")]
    UnknownPrefix {
        prefix: String,
        line: usize,
        col: usize,
    },
    #[error(transparent)]
    Rdf(#[from] RdfError),
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    PrefixDirective,
    IriRef(String),
    /// `prefix:local`; a directive's `p:` arrives with an empty local part.
    PName {
        prefix: String,
        local: String,
    },
    BlankNode(String),
    /// Quoted string before any datatype/language suffix.
    StringLit(String),
    /// Numeric literal with its shorthand datatype already classified.
    NumberLit {
        lexical: String,
        datatype: &'static str,
    },
    BooleanLit(bool),
    KeywordA,
    Dot,
    Semicolon,
    Comma,
    CaretCaret,
    LangTag(String),
    Eof,
}

#[derive(Debug, Clone)]
struct Spanned {
    token: Token,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn error(&self, message: impl Into<String>) -> TurtleError {
        TurtleError::Syntax {
            line: self.line,
            col: self.col,
            message: message.into(),
        }
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn next_token(&mut self) -> Result<Spanned, TurtleError> {
        self.skip_trivia();
        let line = self.line;
        let col = self.col;
        let at = |token| Spanned { token, line, col };

        let Some(c) = self.peek() else {
            return Ok(at(Token::Eof));
        };

        match c {
            '<' => {
                self.bump();
                let mut iri = String::new();
                loop {
                    match self.bump() {
                        Some('>') => break,
                        Some(c) if c == '\n' || c == '<' || c == '"' => {
                            return Err(self.error("invalid character inside IRI reference"))
                        }
                        Some(c) => iri.push(c),
                        None => return Err(self.error("unterminated IRI reference")),
                    }
                }
                Ok(at(Token::IriRef(iri)))
            }
            '"' => {
                self.bump();
                let mut value = String::new();
                loop {
                    match self.bump() {
                        Some('"') => break,
                        Some('\\') => match self.bump() {
                            Some('t') => value.push('\t'),
                            Some('n') => value.push('\n'),
                            Some('r') => value.push('\r'),
                            Some('"') => value.push('"'),
                            Some('\\') => value.push('\\'),
                            Some('u') => value.push(self.unicode_escape(4)?),
                            Some('U') => value.push(self.unicode_escape(8)?),
                            _ => return Err(self.error("invalid string escape")),
                        },
                        Some(c) if c == '\n' || c == '\r' => {
                            return Err(self.error("unterminated string literal"))
                        }
                        Some(c) => value.push(c),
                        None => return Err(self.error("unterminated string literal")),
                    }
                }
                Ok(at(Token::StringLit(value)))
            }
            '@' => {
                self.bump();
                let word = self.word();
                let lang_tag_shape = !word.is_empty()
                    && word.split('-').enumerate().all(|(i, part)| {
                        !part.is_empty()
                            && part.chars().all(|c| {
                                if i == 0 {
                                    c.is_ascii_alphabetic()
                                } else {
                                    c.is_ascii_alphanumeric()
                                }
                            })
                    });
                if word == "prefix" {
                    Ok(at(Token::PrefixDirective))
                } else if word == "base" {
                    Err(self.error("@base is not supported"))
                } else if lang_tag_shape {
                    // Language tag position is validated by the parser.
                    Ok(at(Token::LangTag(word)))
                } else {
                    Err(self.error(format!("unknown directive @{word}")))
                }
            }
            '^' => {
                self.bump();
                if self.peek() == Some('^') {
                    self.bump();
                    Ok(at(Token::CaretCaret))
                } else {
                    Err(self.error("expected '^^'"))
                }
            }
            '.' => {
                self.bump();
                Ok(at(Token::Dot))
            }
            ';' => {
                self.bump();
                Ok(at(Token::Semicolon))
            }
            ',' => {
                self.bump();
                Ok(at(Token::Comma))
            }
            '_' => {
                self.bump();
                if self.bump() != Some(':') {
                    return Err(self.error("expected ':' after '_' in blank node label"));
                }
                let label = self.local_name();
                if label.is_empty() {
                    return Err(self.error("empty blank node label"));
                }
                Ok(at(Token::BlankNode(label)))
            }
            '(' | ')' => Err(self.error("RDF collections are not supported")),
            '[' | ']' => Err(self.error("anonymous blank nodes are not supported")),
            c if c == '+' || c == '-' || c.is_ascii_digit() => {
                let (lexical, datatype) = self.number()?;
                Ok(at(Token::NumberLit { lexical, datatype }))
            }
            _ => {
                // Bare word: `a`, boolean, or a prefixed name.
                let word = self.word();
                if self.peek() == Some(':') {
                    self.bump();
                    let local = self.local_name();
                    return Ok(at(Token::PName {
                        prefix: word,
                        local,
                    }));
                }
                match word.as_str() {
                    "a" => Ok(at(Token::KeywordA)),
                    "true" => Ok(at(Token::BooleanLit(true))),
                    "false" => Ok(at(Token::BooleanLit(false))),
                    "" => Err(self.error(format!("unexpected character '{c}'"))),
                    _ => Err(self.error(format!("unexpected token '{word}'"))),
                }
            }
        }
    }

    fn unicode_escape(&mut self, len: usize) -> Result<char, TurtleError> {
        let mut code = 0u32;
        for _ in 0..len {
            let c = self
                .bump()
                .ok_or_else(|| self.error("unterminated unicode escape"))?;
            let digit = c
                .to_digit(16)
                .ok_or_else(|| self.error("invalid unicode escape digit"))?;
            code = code * 16 + digit;
        }
        char::from_u32(code).ok_or_else(|| self.error("invalid unicode code point"))
    }

    fn word(&mut self) -> String {
        let mut word = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' || c == '-' {
                word.push(c);
                self.bump();
            } else {
                break;
            }
        }
        word
    }

    /// Reads a PN_LOCAL-style name. Dots may appear inside but a trailing
    /// run of dots belongs to the statement terminator, so it is put back by
    /// never consuming a dot that is not followed by another name character.
    fn local_name(&mut self) -> String {
        let mut name = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' || c == '-' {
                name.push(c);
                self.bump();
            } else if c == '.' {
                let mut probe = self.chars.clone();
                probe.next();
                match probe.peek() {
                    Some(&n) if n.is_alphanumeric() || n == '_' || n == '-' || n == '.' => {
                        name.push('.');
                        self.bump();
                    }
                    _ => break,
                }
            } else {
                break;
            }
        }
        name
    }

    fn number(&mut self) -> Result<(String, &'static str), TurtleError> {
        let mut lexical = String::new();
        if matches!(self.peek(), Some('+') | Some('-')) {
            lexical.push(self.bump().unwrap());
        }
        let mut saw_digit = false;
        let mut saw_dot = false;
        let mut saw_exp = false;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                saw_digit = true;
                lexical.push(c);
                self.bump();
            } else if c == '.' && !saw_dot && !saw_exp {
                // A dot not followed by a digit terminates the statement.
                let mut probe = self.chars.clone();
                probe.next();
                match probe.peek() {
                    Some(n) if n.is_ascii_digit() => {
                        saw_dot = true;
                        lexical.push('.');
                        self.bump();
                    }
                    _ => break,
                }
            } else if (c == 'e' || c == 'E') && !saw_exp && saw_digit {
                saw_exp = true;
                lexical.push(c);
                self.bump();
                if matches!(self.peek(), Some('+') | Some('-')) {
                    lexical.push(self.bump().unwrap());
                }
            } else {
                break;
            }
        }
        if !saw_digit {
            return Err(self.error("malformed numeric literal"));
        }
        let datatype = if saw_exp {
            XSD_DOUBLE
        } else if saw_dot {
            XSD_DECIMAL
        } else {
            XSD_INTEGER
        };
        Ok((lexical, datatype))
    }
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    graph: Graph,
    /// Prefixes declared by the document itself; resolution requires these.
    declared: BTreeMap<String, String>,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.tokens[self.pos.min(self.tokens.len() - 1)].clone();
        if self.pos < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, spanned: &Spanned, message: impl Into<String>) -> TurtleError {
        TurtleError::Syntax {
            line: spanned.line,
            col: spanned.col,
            message: message.into(),
        }
    }

    fn expect_dot(&mut self) -> Result<(), TurtleError> {
        let t = self.bump();
        if t.token == Token::Dot {
            Ok(())
        } else {
            Err(self.error_at(&t, "expected '.'"))
        }
    }

    fn resolve(&self, prefix: &str, local: &str, at: &Spanned) -> Result<Term, TurtleError> {
        let ns = self
            .declared
            .get(prefix)
            .ok_or_else(|| TurtleError::UnknownPrefix {
                prefix: prefix.to_string(),
                line: at.line,
                col: at.col,
            })?;
        Ok(Term::iri(format!("{ns}{local}"))?)
    }

    fn document(&mut self) -> Result<(), TurtleError> {
        loop {
            match &self.peek().token {
                Token::Eof => return Ok(()),
                Token::PrefixDirective => self.prefix_directive()?,
                _ => self.statement()?,
            }
        }
    }

    fn prefix_directive(&mut self) -> Result<(), TurtleError> {
        self.bump();
        let name = self.bump();
        let prefix = match &name.token {
            Token::PName { prefix, local } if local.is_empty() => prefix.clone(),
            _ => return Err(self.error_at(&name, "expected 'prefix:' after @prefix")),
        };
        let iri = self.bump();
        let namespace = match &iri.token {
            Token::IriRef(iri) => iri.clone(),
            _ => return Err(self.error_at(&iri, "expected IRI reference in @prefix")),
        };
        self.expect_dot()?;
        self.declared.insert(prefix.clone(), namespace.clone());
        self.graph.add_prefix(prefix, namespace);
        Ok(())
    }

    fn statement(&mut self) -> Result<(), TurtleError> {
        let subject = self.subject()?;
        self.predicate_object_list(&subject)?;
        self.expect_dot()
    }

    fn subject(&mut self) -> Result<Term, TurtleError> {
        let t = self.bump();
        match &t.token {
            Token::IriRef(iri) => Ok(Term::iri(iri.clone())?),
            Token::PName { prefix, local } => self.resolve(prefix, local, &t),
            Token::BlankNode(label) => Ok(Term::blank(label.clone())),
            Token::StringLit(_) | Token::NumberLit { .. } | Token::BooleanLit(_) => {
                Err(self.error_at(&t, "a literal cannot be a subject"))
            }
            _ => Err(self.error_at(&t, "expected subject")),
        }
    }

    fn predicate_object_list(&mut self, subject: &Term) -> Result<(), TurtleError> {
        loop {
            let predicate = self.predicate()?;
            self.object_list(subject, &predicate)?;
            if self.peek().token == Token::Semicolon {
                self.bump();
                // Tolerate a trailing semicolon before the dot.
                if matches!(self.peek().token, Token::Dot) {
                    return Ok(());
                }
            } else {
                return Ok(());
            }
        }
    }

    fn predicate(&mut self) -> Result<Term, TurtleError> {
        let t = self.bump();
        match &t.token {
            Token::KeywordA => Ok(Term::iri(RDF_TYPE)?),
            Token::IriRef(iri) => Ok(Term::iri(iri.clone())?),
            Token::PName { prefix, local } => self.resolve(prefix, local, &t),
            _ => Err(self.error_at(&t, "expected predicate")),
        }
    }

    fn object_list(&mut self, subject: &Term, predicate: &Term) -> Result<(), TurtleError> {
        loop {
            let object = self.object()?;
            self.graph
                .insert(Triple::new(subject.clone(), predicate.clone(), object)?)?;
            if self.peek().token == Token::Comma {
                self.bump();
            } else {
                return Ok(());
            }
        }
    }

    fn object(&mut self) -> Result<Term, TurtleError> {
        let t = self.bump();
        match &t.token {
            Token::IriRef(iri) => Ok(Term::iri(iri.clone())?),
            Token::PName { prefix, local } => self.resolve(prefix, local, &t),
            Token::BlankNode(label) => Ok(Term::blank(label.clone())),
            Token::BooleanLit(b) => Ok(Term::typed_literal(b.to_string(), XSD_BOOLEAN)?),
            Token::NumberLit { lexical, datatype } => {
                Ok(Term::typed_literal(lexical.clone(), *datatype)?)
            }
            Token::StringLit(value) => {
                let value = value.clone();
                match &self.peek().token {
                    Token::CaretCaret => {
                        self.bump();
                        let dt = self.bump();
                        let datatype = match &dt.token {
                            Token::IriRef(iri) => iri.clone(),
                            Token::PName { prefix, local } => self
                                .resolve(prefix, local, &dt)?
                                .as_iri()
                                .expect("resolved prefixed name is an IRI")
                                .to_string(),
                            _ => return Err(self.error_at(&dt, "expected datatype IRI after ^^")),
                        };
                        Ok(Term::typed_literal(value, datatype)?)
                    }
                    Token::LangTag(tag) => {
                        let tag = tag.clone();
                        self.bump();
                        Ok(Term::lang_literal(value, tag)?)
                    }
                    _ => Ok(Term::literal(value)),
                }
            }
            _ => Err(self.error_at(&t, "expected object")),
        }
    }
}

/// Parses a Turtle document. Prefixed names resolve only against prefixes
/// the document declares; the resulting graph's prefix map additionally
/// carries the standard defaults.
pub fn parse_turtle(text: &str) -> Result<Graph, TurtleError> {
    let mut lexer = Lexer::new(text);
    let mut tokens = Vec::new();
    loop {
        let t = lexer.next_token()?;
        let done = t.token == Token::Eof;
        tokens.push(t);
        if done {
            break;
        }
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        graph: Graph::new(),
        declared: BTreeMap::new(),
    };
    parser.document()?;
    Ok(parser.graph)
}

pub(super) fn escape_literal(lexical: &str) -> String {
    let mut out = String::with_capacity(lexical.len());
    for c in lexical.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            _ => out.push(c),
        }
    }
    out
}

fn valid_local_name(local: &str) -> bool {
    !local.is_empty()
        && !local.starts_with('.')
        && !local.ends_with('.')
        && local
            .chars()
            .all(|c| c.is_alphanumeric() || c == '_' || c == '-' || c == '.')
}

/// Shortens an IRI to `prefix:local` against the longest matching namespace,
/// falling back to `<iri>`.
fn render_iri(iri: &str, prefixes: &BTreeMap<String, String>) -> String {
    let mut best: Option<(&str, &str)> = None;
    for (prefix, ns) in prefixes {
        if let Some(local) = iri.strip_prefix(ns.as_str()) {
            if valid_local_name(local) && best.is_none_or(|(_, b)| ns.len() > iri.len() - b.len()) {
                best = Some((prefix, local));
            }
        }
    }
    match best {
        Some((prefix, local)) => format!("{prefix}:{local}"),
        None => format!("<{iri}>"),
    }
}

fn render_term(term: &Term, prefixes: &BTreeMap<String, String>) -> String {
    match term {
        Term::Iri(iri) => render_iri(iri, prefixes),
        Term::BlankNode(label) => format!("_:{label}"),
        Term::Literal {
            lexical,
            datatype,
            language,
        } => {
            let quoted = format!("\"{}\"", escape_literal(lexical));
            if let Some(lang) = language {
                format!("{quoted}@{lang}")
            } else if datatype == XSD_STRING {
                quoted
            } else {
                format!("{quoted}^^{}", render_iri(datatype, prefixes))
            }
        }
    }
}

/// Serializes a graph as Turtle: the full prefix block (alphabetical), then
/// triples grouped by subject with `rdf:type` rendered first as `a`.
pub fn serialize_turtle(graph: &Graph) -> String {
    let mut out = String::new();
    for (prefix, ns) in graph.prefixes() {
        let _ = writeln!(out, "@prefix {prefix}: <{ns}> .");
    }

    // Group into subject -> predicate -> objects; the source set is sorted,
    // so insertion order here is already canonical.
    let mut by_subject: BTreeMap<&Term, BTreeMap<&Term, Vec<&Term>>> = BTreeMap::new();
    for t in graph.triples() {
        by_subject
            .entry(&t.subject)
            .or_default()
            .entry(&t.predicate)
            .or_default()
            .push(&t.object);
    }

    let rdf_type = Term::Iri(RDF_TYPE.to_string());
    let prefixes = graph.prefixes();
    for (subject, predicates) in by_subject {
        out.push('\n');
        let _ = write!(out, "{}", render_term(subject, prefixes));
        let mut first = true;
        let ordered = predicates
            .iter()
            .filter(|(p, _)| **p == &rdf_type)
            .chain(predicates.iter().filter(|(p, _)| **p != &rdf_type));
        for (predicate, objects) in ordered {
            if first {
                out.push(' ');
                first = false;
            } else {
                out.push_str(" ;\n    ");
            }
            let pred_text = if *predicate == &rdf_type {
                "a".to_string()
            } else {
                render_term(predicate, prefixes)
            };
            let objs: Vec<String> = objects.iter().map(|o| render_term(o, prefixes)).collect();
            let _ = write!(out, "{pred_text} {}", objs.join(", "));
        }
        out.push_str(" .\n");
    }
    out
}
