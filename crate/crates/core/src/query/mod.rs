//! Query layer: a small SELECT-only query language over graphs plus the
//! library of competency questions answered from a classified knowledge
//! graph.

mod competency;
mod exec;
mod parser;

pub use competency::{answer_competency, CompetencyAnswer, CompetencyParams, Trend, Verdict};
pub use exec::{execute, BindingTable};
pub use parser::parse_query;

use crate::rdf::Term;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QueryError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("unsupported query feature: {0}")]
    Unsupported(String),
    #[error("select variable ?{0} does not appear in the pattern")]
    UnboundSelectVariable(String),
    #[error("unknown prefix '{0}:'")]
    UnknownPrefix(String),
    #[error("unknown question id '{0}'")]
    UnknownQuestion(String),
    #[error("question requires parameter: {0}")]
    MissingParam(&'static str),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error(transparent)]
    Reasoner(#[from] crate::reasoner::ReasonerError),
}

/// A term slot in a query pattern: variable or concrete term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum PatternTerm {
    Var(String),
    Term(Term),
}

impl PatternTerm {
    pub fn var(name: &str) -> PatternTerm {
        PatternTerm::Var(name.to_string())
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            PatternTerm::Var(v) => Some(v),
            PatternTerm::Term(_) => None,
        }
    }
}

/// One basic graph pattern triple.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryPattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

impl QueryPattern {
    pub fn variables(&self) -> impl Iterator<Item = &str> {
        [&self.subject, &self.predicate, &self.object]
            .into_iter()
            .filter_map(|t| t.as_var())
    }
}

/// Comparison operators allowed in FILTER expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

/// A filter operand: variable or constant term.
#[derive(Debug, Clone, PartialEq)]
pub enum FilterOperand {
    Var(String),
    Const(Term),
}

/// `FILTER(<left> <op> <right>)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterExpr {
    pub left: FilterOperand,
    pub op: CompareOp,
    pub right: FilterOperand,
}

/// A parsed SELECT query: prefixes, projection, basic graph pattern,
/// filters, and an optional row limit.
#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub prefixes: BTreeMap<String, String>,
    pub select: Vec<String>,
    pub patterns: Vec<QueryPattern>,
    pub filters: Vec<FilterExpr>,
    pub limit: Option<usize>,
}
