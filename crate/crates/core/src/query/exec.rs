//! Basic graph pattern execution with set semantics.
//!
//! Patterns join through shared variables; filters apply after the join; the
//! projected rows are deduplicated and sorted by their term forms, then
//! truncated to any LIMIT. A comparison over a non-numeric operand simply
//! fails the row, mirroring SPARQL's error-means-false filter behavior.

use super::{CompareOp, FilterExpr, FilterOperand, PatternTerm, Query, QueryPattern};
use crate::rdf::{Graph, Term, TriplePattern};
use std::collections::{BTreeMap, BTreeSet};

/// Query results: one column per selected variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BindingTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Term>>,
}

impl BindingTable {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Tab-separated rendering: header row of variable names, then one row
    /// per solution in canonical term syntax.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        out.push_str(
            &self
                .columns
                .iter()
                .map(|c| format!("?{c}"))
                .collect::<Vec<_>>()
                .join("\t"),
        );
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|t| t.to_string()).collect();
            out.push_str(&cells.join("\t"));
            out.push('\n');
        }
        out
    }
}

type Bindings = BTreeMap<String, Term>;

fn slot_term(slot: &PatternTerm, bindings: &Bindings) -> Option<Term> {
    match slot {
        PatternTerm::Term(t) => Some(t.clone()),
        PatternTerm::Var(v) => bindings.get(v).cloned(),
    }
}

fn extend(
    pattern: &QueryPattern,
    triple: &crate::rdf::Triple,
    bindings: &Bindings,
) -> Option<Bindings> {
    let mut next = bindings.clone();
    for (slot, have) in [
        (&pattern.subject, &triple.subject),
        (&pattern.predicate, &triple.predicate),
        (&pattern.object, &triple.object),
    ] {
        match slot {
            PatternTerm::Term(want) => {
                if want != have {
                    return None;
                }
            }
            PatternTerm::Var(v) => match next.get(v) {
                Some(bound) if bound != have => return None,
                Some(_) => {}
                None => {
                    next.insert(v.clone(), have.clone());
                }
            },
        }
    }
    Some(next)
}

const NUMERIC_DATATYPES: [&str; 4] = [
    crate::vocab::XSD_INTEGER,
    crate::vocab::XSD_DECIMAL,
    crate::vocab::XSD_FLOAT,
    crate::vocab::XSD_DOUBLE,
];

fn numeric_value(term: &Term) -> Option<f64> {
    match term {
        Term::Literal {
            lexical, datatype, ..
        } if NUMERIC_DATATYPES.contains(&datatype.as_str()) => lexical.trim().parse().ok(),
        _ => None,
    }
}

fn operand_term<'a>(operand: &'a FilterOperand, bindings: &'a Bindings) -> Option<&'a Term> {
    match operand {
        FilterOperand::Const(t) => Some(t),
        FilterOperand::Var(v) => bindings.get(v),
    }
}

/// Filter semantics shared with nothing else: equality falls back to plain
/// term equality, order comparisons require two numeric literals.
pub fn filter_accepts(filter: &FilterExpr, bindings: &Bindings) -> bool {
    let (Some(left), Some(right)) = (
        operand_term(&filter.left, bindings),
        operand_term(&filter.right, bindings),
    ) else {
        return false;
    };
    match (numeric_value(left), numeric_value(right)) {
        (Some(a), Some(b)) => match filter.op {
            CompareOp::Eq => a == b,
            CompareOp::Ne => a != b,
            CompareOp::Lt => a < b,
            CompareOp::Le => a <= b,
            CompareOp::Gt => a > b,
            CompareOp::Ge => a >= b,
        },
        _ => match filter.op {
            CompareOp::Eq => left == right,
            CompareOp::Ne => left != right,
            _ => false,
        },
    }
}

/// Executes a parsed query against a graph.
pub fn execute(graph: &Graph, query: &Query) -> BindingTable {
    let mut solutions: Vec<Bindings> = vec![Bindings::new()];
    for pattern in &query.patterns {
        let mut next = Vec::new();
        for solution in &solutions {
            // Pre-substitute bound slots so the store does the narrowing.
            let concrete = TriplePattern {
                subject: slot_term(&pattern.subject, solution),
                predicate: slot_term(&pattern.predicate, solution).filter(|t| t.is_iri()),
                object: slot_term(&pattern.object, solution),
            };
            for triple in graph.matching(&concrete) {
                if let Some(extended) = extend(pattern, triple, solution) {
                    next.push(extended);
                }
            }
        }
        solutions = next;
        if solutions.is_empty() {
            break;
        }
    }

    solutions.retain(|s| query.filters.iter().all(|f| filter_accepts(f, s)));

    let mut rows: BTreeSet<Vec<Term>> = BTreeSet::new();
    for solution in &solutions {
        let row: Vec<Term> = query
            .select
            .iter()
            .map(|v| {
                solution
                    .get(v)
                    .cloned()
                    .expect("select variables are pattern-bound")
            })
            .collect();
        rows.insert(row);
    }
    let mut rows: Vec<Vec<Term>> = rows.into_iter().collect();
    if let Some(limit) = query.limit {
        rows.truncate(limit);
    }
    BindingTable {
        columns: query.select.clone(),
        rows,
    }
}
