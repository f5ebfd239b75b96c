//! Minimal RDF data model and in-memory triple store.
//!
//! Terms are compared lexically: two literals are equal iff their lexical
//! form, datatype, and language tag are equal ("1.0" and "1.00" are distinct).
//! The store keeps triples in a sorted set, so iteration and pattern matching
//! are deterministic. A [`Graph`] supports many concurrent readers or one
//! writer through ordinary `&`/`&mut` borrows; parsing and serialization are
//! pure functions.

mod turtle;

pub use turtle::{parse_turtle, serialize_turtle, TurtleError};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// IRI of the `xsd:string` datatype, the default for plain literals.
pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
/// IRI of `rdf:langString`, the datatype of language-tagged literals.
pub const RDF_LANG_STRING: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";
/// IRI of `rdf:type`.
pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

/// Structural errors raised when assembling terms and triples.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RdfError {
    #[error("IRI is not absolute (missing scheme): {0}")]
    RelativeIri(String),
    #[error("triple subject must not be a literal")]
    LiteralSubject,
    #[error("triple predicate must be an IRI")]
    NonIriPredicate,
    #[error("invalid language tag: {0}")]
    InvalidLanguageTag(String),
}

/// An RDF term: IRI, literal, or blank node.
///
/// The derived ordering (IRIs, then literals, then blank nodes, each by
/// lexical content) is the canonical sort order used throughout the store.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(String),
    Literal {
        lexical: String,
        datatype: String,
        language: Option<String>,
    },
    BlankNode(String),
}

impl Term {
    /// Builds an IRI term, rejecting IRIs without a leading scheme.
    pub fn iri(iri: impl Into<String>) -> Result<Term, RdfError> {
        let iri = iri.into();
        if !has_scheme(&iri) {
            return Err(RdfError::RelativeIri(iri));
        }
        Ok(Term::Iri(iri))
    }

    /// A plain literal with datatype `xsd:string`.
    pub fn literal(lexical: impl Into<String>) -> Term {
        Term::Literal {
            lexical: lexical.into(),
            datatype: XSD_STRING.to_string(),
            language: None,
        }
    }

    /// A typed literal. The datatype must be an absolute IRI.
    pub fn typed_literal(
        lexical: impl Into<String>,
        datatype: impl Into<String>,
    ) -> Result<Term, RdfError> {
        let datatype = datatype.into();
        if !has_scheme(&datatype) {
            return Err(RdfError::RelativeIri(datatype));
        }
        Ok(Term::Literal {
            lexical: lexical.into(),
            datatype,
            language: None,
        })
    }

    /// A language-tagged literal; the datatype is always `rdf:langString`.
    pub fn lang_literal(
        lexical: impl Into<String>,
        language: impl Into<String>,
    ) -> Result<Term, RdfError> {
        let language = language.into();
        let valid = !language.is_empty()
            && language
                .split('-')
                .all(|part| !part.is_empty() && part.chars().all(|c| c.is_ascii_alphanumeric()));
        if !valid {
            return Err(RdfError::InvalidLanguageTag(language));
        }
        Ok(Term::Literal {
            lexical: lexical.into(),
            datatype: RDF_LANG_STRING.to_string(),
            language: Some(language),
        })
    }

    /// A blank node with the given label.
    pub fn blank(label: impl Into<String>) -> Term {
        Term::BlankNode(label.into())
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal { .. })
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Term::BlankNode(_))
    }

    /// The IRI string, if this term is an IRI.
    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    /// The lexical form, if this term is a literal.
    pub fn lexical(&self) -> Option<&str> {
        match self {
            Term::Literal { lexical, .. } => Some(lexical),
            _ => None,
        }
    }

    /// The datatype IRI, if this term is a literal.
    pub fn datatype(&self) -> Option<&str> {
        match self {
            Term::Literal { datatype, .. } => Some(datatype),
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => write!(f, "<{iri}>"),
            Term::Literal {
                lexical,
                datatype,
                language,
            } => {
                write!(f, "\"{}\"", turtle::escape_literal(lexical))?;
                if let Some(lang) = language {
                    write!(f, "@{lang}")
                } else if datatype != XSD_STRING {
                    write!(f, "^^<{datatype}>")
                } else {
                    Ok(())
                }
            }
            Term::BlankNode(label) => write!(f, "_:{label}"),
        }
    }
}

fn has_scheme(iri: &str) -> bool {
    let mut chars = iri.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    for c in chars {
        if c == ':' {
            return true;
        }
        if !(c.is_ascii_alphanumeric() || c == '+' || c == '-' || c == '.') {
            return false;
        }
    }
    false
}

/// A single RDF statement. Subjects are IRIs or blank nodes; predicates are
/// always IRIs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Result<Triple, RdfError> {
        if subject.is_literal() {
            return Err(RdfError::LiteralSubject);
        }
        if !predicate.is_iri() {
            return Err(RdfError::NonIriPredicate);
        }
        Ok(Triple {
            subject,
            predicate,
            object,
        })
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

/// A triple pattern: each slot is either a concrete term or a wildcard.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TriplePattern {
    pub subject: Option<Term>,
    pub predicate: Option<Term>,
    pub object: Option<Term>,
}

impl TriplePattern {
    /// Builds a pattern; a concrete predicate slot must hold an IRI.
    pub fn new(
        subject: Option<Term>,
        predicate: Option<Term>,
        object: Option<Term>,
    ) -> Result<TriplePattern, RdfError> {
        if let Some(p) = &predicate {
            if !p.is_iri() {
                return Err(RdfError::NonIriPredicate);
            }
        }
        Ok(TriplePattern {
            subject,
            predicate,
            object,
        })
    }

    /// The wildcard pattern matching every triple.
    pub fn any() -> TriplePattern {
        TriplePattern::default()
    }

    fn matches(&self, triple: &Triple) -> bool {
        fn slot(want: &Option<Term>, have: &Term) -> bool {
            want.as_ref().is_none_or(|t| t == have)
        }
        slot(&self.subject, &triple.subject)
            && slot(&self.predicate, &triple.predicate)
            && slot(&self.object, &triple.object)
    }
}

/// An in-memory RDF graph with set semantics and a prefix map.
///
/// [`Graph::new`] seeds the prefix map with the namespaces every graph in
/// this crate relies on (prov, sio, stato, doid, dron, food, pho, rdf, rdfs,
/// xsd); [`Graph::empty`] starts with no prefixes at all.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    triples: BTreeSet<Triple>,
    prefixes: BTreeMap<String, String>,
}

impl Graph {
    /// An empty graph carrying the standard prefix map.
    pub fn new() -> Graph {
        Graph {
            triples: BTreeSet::new(),
            prefixes: crate::vocab::default_prefixes(),
        }
    }

    /// An empty graph with an empty prefix map.
    pub fn empty() -> Graph {
        Graph::default()
    }

    /// Registers a prefix. Re-binding an existing prefix overwrites it.
    pub fn add_prefix(&mut self, prefix: impl Into<String>, namespace: impl Into<String>) {
        self.prefixes.insert(prefix.into(), namespace.into());
    }

    pub fn prefixes(&self) -> &BTreeMap<String, String> {
        &self.prefixes
    }

    /// Inserts a triple, re-checking the structural invariants. Returns
    /// `true` when the triple was new, `false` when it was already present.
    pub fn insert(&mut self, triple: Triple) -> Result<bool, RdfError> {
        if triple.subject.is_literal() {
            return Err(RdfError::LiteralSubject);
        }
        if !triple.predicate.is_iri() {
            return Err(RdfError::NonIriPredicate);
        }
        Ok(self.triples.insert(triple))
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Iterates all triples in canonical (subject, predicate, object) order.
    pub fn triples(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    /// Returns the triples unifying with `pattern`, in canonical order.
    pub fn matching(&self, pattern: &TriplePattern) -> Vec<&Triple> {
        self.triples.iter().filter(|t| pattern.matches(t)).collect()
    }

    /// All objects of `(subject, predicate, ?o)`, in canonical order.
    pub fn objects(&self, subject: &Term, predicate: &Term) -> Vec<&Term> {
        self.triples
            .iter()
            .filter(|t| &t.subject == subject && &t.predicate == predicate)
            .map(|t| &t.object)
            .collect()
    }

    /// All subjects of `(?s, predicate, object)`, in canonical order.
    pub fn subjects(&self, predicate: &Term, object: &Term) -> Vec<&Term> {
        self.triples
            .iter()
            .filter(|t| &t.predicate == predicate && &t.object == object)
            .map(|t| &t.subject)
            .collect()
    }

    /// The node universe of the graph: every subject plus every IRI or blank
    /// node appearing in object position. Literals are not nodes.
    pub fn nodes(&self) -> BTreeSet<&Term> {
        let mut nodes = BTreeSet::new();
        for t in &self.triples {
            nodes.insert(&t.subject);
            if !t.object.is_literal() {
                nodes.insert(&t.object);
            }
        }
        nodes
    }

    /// Parses a Turtle document into a graph.
    pub fn from_turtle(text: &str) -> Result<Graph, TurtleError> {
        parse_turtle(text)
    }

    /// Serializes the graph as Turtle with a canonical prefix block.
    pub fn to_turtle(&self) -> String {
        serialize_turtle(self)
    }
}
