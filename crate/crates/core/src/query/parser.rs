//! Parser for the SELECT-only query subset.
//!
//! Grammar: `PREFIX` declarations, `SELECT ?v ...`, `WHERE { ... }` with
//! triple patterns (`;` and `,` lists supported, `a` for rdf:type) and
//! `FILTER(<operand> <cmp> <operand>)`, then an optional `LIMIT n`.
//! OPTIONAL, UNION, subqueries, and other SPARQL features are rejected with
//! an explicit unsupported-feature error.

use super::{CompareOp, FilterExpr, FilterOperand, PatternTerm, Query, QueryError, QueryPattern};
use crate::rdf::{Term, RDF_TYPE};
use std::collections::BTreeMap;

const UNSUPPORTED: [&str; 16] = [
    "OPTIONAL",
    "UNION",
    "GRAPH",
    "SERVICE",
    "MINUS",
    "BIND",
    "VALUES",
    "ORDER",
    "GROUP",
    "HAVING",
    "ASK",
    "CONSTRUCT",
    "DESCRIBE",
    "EXISTS",
    "OFFSET",
    "DISTINCT",
];

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Keyword(String),
    Var(String),
    IriRef(String),
    PName { prefix: String, local: String },
    Str(String),
    Number(String, &'static str),
    Boolean(bool),
    LangTag(String),
    CaretCaret,
    OpenBrace,
    CloseBrace,
    OpenParen,
    CloseParen,
    Dot,
    Semicolon,
    Comma,
    Compare(CompareOp),
    KeywordA,
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

    fn error(&self, message: impl Into<String>) -> QueryError {
        QueryError::Syntax {
            line: self.line,
            col: self.col,
            message: message.into(),
        }
    }

    fn word(&mut self) -> String {
        let mut word = String::new();
        while let Some(&c) = self.chars.peek() {
            if c.is_alphanumeric() || c == '_' || c == '-' {
                word.push(c);
                self.bump();
            } else {
                break;
            }
        }
        word
    }

    fn local(&mut self) -> String {
        let mut name = String::new();
        while let Some(&c) = self.chars.peek() {
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

    fn next_token(&mut self) -> Result<Spanned, QueryError> {
        loop {
            match self.chars.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while let Some(&c) = self.chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
        let line = self.line;
        let col = self.col;
        let at = |token| Ok(Spanned { token, line, col });
        let Some(&c) = self.chars.peek() else {
            return at(Token::Eof);
        };
        match c {
            '{' => {
                self.bump();
                at(Token::OpenBrace)
            }
            '}' => {
                self.bump();
                at(Token::CloseBrace)
            }
            '(' => {
                self.bump();
                at(Token::OpenParen)
            }
            ')' => {
                self.bump();
                at(Token::CloseParen)
            }
            '.' => {
                self.bump();
                at(Token::Dot)
            }
            ';' => {
                self.bump();
                at(Token::Semicolon)
            }
            ',' => {
                self.bump();
                at(Token::Comma)
            }
            '?' | '$' => {
                self.bump();
                let name = self.word();
                if name.is_empty() {
                    return Err(self.error("empty variable name"));
                }
                at(Token::Var(name))
            }
            '<' => {
                self.bump();
                match self.chars.peek() {
                    Some('=') => {
                        self.bump();
                        at(Token::Compare(CompareOp::Le))
                    }
                    // IRIs start with a scheme letter; anything else after
                    // '<' means a bare less-than comparison.
                    Some(&c) if c.is_ascii_alphabetic() => {
                        let mut iri = String::new();
                        loop {
                            match self.bump() {
                                Some('>') => break,
                                Some(c) if c.is_whitespace() => {
                                    return Err(self.error("unterminated IRI reference"))
                                }
                                Some(c) => iri.push(c),
                                None => return Err(self.error("unterminated IRI reference")),
                            }
                        }
                        at(Token::IriRef(iri))
                    }
                    _ => at(Token::Compare(CompareOp::Lt)),
                }
            }
            '>' => {
                self.bump();
                if self.chars.peek() == Some(&'=') {
                    self.bump();
                    at(Token::Compare(CompareOp::Ge))
                } else {
                    at(Token::Compare(CompareOp::Gt))
                }
            }
            '=' => {
                self.bump();
                at(Token::Compare(CompareOp::Eq))
            }
            '!' => {
                self.bump();
                if self.bump() == Some('=') {
                    at(Token::Compare(CompareOp::Ne))
                } else {
                    Err(self.error("expected '!='"))
                }
            }
            '^' => {
                self.bump();
                if self.bump() == Some('^') {
                    at(Token::CaretCaret)
                } else {
                    Err(self.error("expected '^^'"))
                }
            }
            '@' => {
                self.bump();
                let tag = self.word();
                if tag.is_empty() {
                    return Err(self.error("empty language tag"));
                }
                at(Token::LangTag(tag))
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
                            _ => return Err(self.error("invalid string escape")),
                        },
                        Some('\n') => return Err(self.error("unterminated string literal")),
                        Some(c) => value.push(c),
                        None => return Err(self.error("unterminated string literal")),
                    }
                }
                at(Token::Str(value))
            }
            c if c == '+' || c == '-' || c.is_ascii_digit() => {
                let mut lexical = String::new();
                if c == '+' || c == '-' {
                    lexical.push(self.bump().expect("peeked"));
                }
                let mut saw_dot = false;
                let mut saw_exp = false;
                while let Some(&c) = self.chars.peek() {
                    if c.is_ascii_digit() {
                        lexical.push(c);
                        self.bump();
                    } else if c == '.' && !saw_dot && !saw_exp {
                        saw_dot = true;
                        lexical.push(c);
                        self.bump();
                    } else if (c == 'e' || c == 'E') && !saw_exp {
                        saw_exp = true;
                        lexical.push(c);
                        self.bump();
                        if matches!(self.chars.peek(), Some('+') | Some('-')) {
                            lexical.push(self.bump().expect("peeked"));
                        }
                    } else {
                        break;
                    }
                }
                let datatype = if saw_exp {
                    crate::vocab::XSD_DOUBLE
                } else if saw_dot {
                    crate::vocab::XSD_DECIMAL
                } else {
                    crate::vocab::XSD_INTEGER
                };
                at(Token::Number(lexical, datatype))
            }
            _ => {
                let word = self.word();
                if self.chars.peek() == Some(&':') {
                    self.bump();
                    let local = self.local();
                    return at(Token::PName {
                        prefix: word,
                        local,
                    });
                }
                match word.as_str() {
                    "" => Err(self.error(format!("unexpected character '{c}'"))),
                    "a" => at(Token::KeywordA),
                    "true" => at(Token::Boolean(true)),
                    "false" => at(Token::Boolean(false)),
                    _ => {
                        let upper = word.to_ascii_uppercase();
                        if UNSUPPORTED.contains(&upper.as_str()) {
                            return Err(QueryError::Unsupported(upper));
                        }
                        at(Token::Keyword(upper))
                    }
                }
            }
        }
    }
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    prefixes: BTreeMap<String, String>,
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

    fn err(&self, spanned: &Spanned, message: impl Into<String>) -> QueryError {
        QueryError::Syntax {
            line: spanned.line,
            col: spanned.col,
            message: message.into(),
        }
    }

    fn resolve(&self, prefix: &str, local: &str) -> Result<Term, QueryError> {
        let ns = self
            .prefixes
            .get(prefix)
            .ok_or_else(|| QueryError::UnknownPrefix(prefix.to_string()))?;
        Term::iri(format!("{ns}{local}")).map_err(|e| QueryError::Syntax {
            line: 0,
            col: 0,
            message: e.to_string(),
        })
    }

    fn term(&mut self) -> Result<PatternTerm, QueryError> {
        let t = self.bump();
        match &t.token {
            Token::Var(name) => Ok(PatternTerm::Var(name.clone())),
            Token::IriRef(iri) => Ok(PatternTerm::Term(
                Term::iri(iri.clone()).map_err(|e| self.err(&t, e.to_string()))?,
            )),
            Token::PName { prefix, local } => Ok(PatternTerm::Term(self.resolve(prefix, local)?)),
            Token::KeywordA => Ok(PatternTerm::Term(
                Term::iri(RDF_TYPE).expect("rdf:type is absolute"),
            )),
            Token::Boolean(b) => Ok(PatternTerm::Term(
                Term::typed_literal(b.to_string(), crate::vocab::XSD_BOOLEAN)
                    .expect("xsd:boolean is absolute"),
            )),
            Token::Number(lexical, datatype) => Ok(PatternTerm::Term(
                Term::typed_literal(lexical.clone(), *datatype).expect("xsd types are absolute"),
            )),
            Token::Str(value) => {
                let value = value.clone();
                match &self.peek().token {
                    Token::CaretCaret => {
                        self.bump();
                        let dt = self.bump();
                        let datatype = match &dt.token {
                            Token::IriRef(iri) => iri.clone(),
                            Token::PName { prefix, local } => self
                                .resolve(prefix, local)?
                                .as_iri()
                                .expect("resolved prefixed name")
                                .to_string(),
                            _ => return Err(self.err(&dt, "expected datatype after ^^")),
                        };
                        Ok(PatternTerm::Term(
                            Term::typed_literal(value, datatype)
                                .map_err(|e| self.err(&dt, e.to_string()))?,
                        ))
                    }
                    Token::LangTag(tag) => {
                        let tag = tag.clone();
                        self.bump();
                        Ok(PatternTerm::Term(
                            Term::lang_literal(value, tag)
                                .map_err(|e| self.err(&t, e.to_string()))?,
                        ))
                    }
                    _ => Ok(PatternTerm::Term(Term::literal(value))),
                }
            }
            other => Err(self.err(&t, format!("expected term, got {other:?}"))),
        }
    }

    fn filter(&mut self, filters: &mut Vec<FilterExpr>) -> Result<(), QueryError> {
        let open = self.bump();
        if open.token != Token::OpenParen {
            return Err(self.err(&open, "expected '(' after FILTER"));
        }
        let left = self.operand()?;
        let op_token = self.bump();
        let Token::Compare(op) = op_token.token else {
            return Err(self.err(&op_token, "expected comparison operator"));
        };
        let right = self.operand()?;
        let close = self.bump();
        if close.token != Token::CloseParen {
            return Err(self.err(&close, "expected ')' to close FILTER"));
        }
        filters.push(FilterExpr { left, op, right });
        Ok(())
    }

    fn operand(&mut self) -> Result<FilterOperand, QueryError> {
        let term = self.term()?;
        Ok(match term {
            PatternTerm::Var(v) => FilterOperand::Var(v),
            PatternTerm::Term(t) => FilterOperand::Const(t),
        })
    }

    fn where_block(&mut self) -> Result<(Vec<QueryPattern>, Vec<FilterExpr>), QueryError> {
        let open = self.bump();
        if open.token != Token::OpenBrace {
            return Err(self.err(&open, "expected '{' after WHERE"));
        }
        let mut patterns = Vec::new();
        let mut filters = Vec::new();
        loop {
            match &self.peek().token {
                Token::CloseBrace => {
                    self.bump();
                    break;
                }
                Token::Eof => {
                    let t = self.peek().clone();
                    return Err(self.err(&t, "unterminated WHERE block"));
                }
                Token::Keyword(k) if k == "FILTER" => {
                    self.bump();
                    self.filter(&mut filters)?;
                    if self.peek().token == Token::Dot {
                        self.bump();
                    }
                }
                Token::Keyword(k) if k == "SELECT" => {
                    return Err(QueryError::Unsupported("subquery (nested SELECT)".into()))
                }
                _ => {
                    let subject = self.term()?;
                    loop {
                        let predicate = self.term()?;
                        loop {
                            let object = self.term()?;
                            patterns.push(QueryPattern {
                                subject: subject.clone(),
                                predicate: predicate.clone(),
                                object,
                            });
                            if self.peek().token == Token::Comma {
                                self.bump();
                            } else {
                                break;
                            }
                        }
                        if self.peek().token == Token::Semicolon {
                            self.bump();
                            if matches!(self.peek().token, Token::Dot | Token::CloseBrace) {
                                break;
                            }
                        } else {
                            break;
                        }
                    }
                    if self.peek().token == Token::Dot {
                        self.bump();
                    }
                }
            }
        }
        Ok((patterns, filters))
    }
}

/// Parses a query document.
pub fn parse_query(text: &str) -> Result<Query, QueryError> {
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
        prefixes: crate::vocab::default_prefixes(),
    };
    parser
        .prefixes
        .insert(String::new(), crate::vocab::NS_USER.to_string());

    // PREFIX declarations.
    loop {
        match &parser.peek().token {
            Token::Keyword(k) if k == "PREFIX" => {
                parser.bump();
                let name = parser.bump();
                let prefix = match &name.token {
                    Token::PName { prefix, local } if local.is_empty() => prefix.clone(),
                    _ => return Err(parser.err(&name, "expected 'prefix:' after PREFIX")),
                };
                let iri = parser.bump();
                let Token::IriRef(ns) = &iri.token else {
                    return Err(parser.err(&iri, "expected namespace IRI"));
                };
                parser.prefixes.insert(prefix, ns.clone());
            }
            _ => break,
        }
    }

    let select_kw = parser.bump();
    match &select_kw.token {
        Token::Keyword(k) if k == "SELECT" => {}
        _ => return Err(parser.err(&select_kw, "expected SELECT")),
    }
    let mut select = Vec::new();
    while let Token::Var(name) = &parser.peek().token {
        select.push(name.clone());
        parser.bump();
    }
    if select.is_empty() {
        let t = parser.peek().clone();
        return Err(parser.err(&t, "SELECT needs at least one variable"));
    }

    let where_kw = parser.bump();
    match &where_kw.token {
        Token::Keyword(k) if k == "WHERE" => {}
        _ => return Err(parser.err(&where_kw, "expected WHERE")),
    }
    let (patterns, filters) = parser.where_block()?;
    if patterns.is_empty() {
        return Err(parser.err(&where_kw, "empty graph pattern"));
    }

    let mut limit = None;
    match &parser.peek().token {
        Token::Keyword(k) if k == "LIMIT" => {
            parser.bump();
            let n = parser.bump();
            let Token::Number(lexical, _) = &n.token else {
                return Err(parser.err(&n, "expected number after LIMIT"));
            };
            limit = Some(
                lexical
                    .parse::<usize>()
                    .map_err(|e| parser.err(&n, format!("invalid LIMIT: {e}")))?,
            );
        }
        _ => {}
    }
    let trailing = parser.bump();
    if trailing.token != Token::Eof {
        return Err(parser.err(&trailing, "unexpected trailing input"));
    }

    let bound: std::collections::BTreeSet<&str> =
        patterns.iter().flat_map(|p| p.variables()).collect();
    for v in &select {
        if !bound.contains(v.as_str()) {
            return Err(QueryError::UnboundSelectVariable(v.clone()));
        }
    }

    Ok(Query {
        prefixes: parser.prefixes,
        select,
        patterns,
        filters,
        limit,
    })
}
