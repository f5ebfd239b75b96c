//! Compiles class expressions to executable match plans.
//!
//! A plan evaluates to the closed-world extension of its expression over a
//! graph's node universe: `Named(C)` scans `(?x, rdf:type, C)`, `Some`
//! joins `(?x, p, ?y)` against the inner extension, `Only` keeps the nodes
//! none of whose `p`-values fall outside the inner extension (vacuously
//! satisfied with no `p` edges), and `And`/`Or` intersect and unite. The
//! evaluation route is join/set-difference based, deliberately different
//! from the per-node recursive check used as its test oracle.

use super::ClassExpr;
use crate::rdf::{Graph, Term, TriplePattern};
use crate::vocab;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error("property must be an absolute IRI: {0}")]
    BadProperty(String),
    #[error("class must be an absolute IRI: {0}")]
    BadClass(String),
}

/// One step of a compiled plan. Each step stands for a triple-pattern
/// constraint (or a set operation over sub-plans) with its variables
/// connected through the parent step.
#[derive(Debug, Clone, PartialEq)]
pub enum PlanStep {
    /// `(?x, rdf:type, class)`
    Instances {
        class: String,
    },
    /// `(?x, property, ?y)` joined with `inner(?y)`.
    PropertyExists {
        property: String,
        inner: Box<PlanStep>,
    },
    /// `?x` such that no `(?x, property, ?y)` has `?y` outside `inner`.
    PropertyAll {
        property: String,
        inner: Box<PlanStep>,
    },
    /// `(?x, property, value)`
    PropertyValue {
        property: String,
        value: Term,
    },
    Intersection(Vec<PlanStep>),
    UnionOf(Vec<PlanStep>),
}

/// An executable plan for one class expression.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchPlan {
    pub root: PlanStep,
}

impl MatchPlan {
    /// Evaluates the plan to the expression's extension over `graph`.
    pub fn evaluate<'g>(&self, graph: &'g Graph) -> BTreeSet<&'g Term> {
        let nodes = graph.nodes();
        eval_step(&self.root, graph, &nodes)
    }
}

fn iri_term(iri: &str) -> Term {
    Term::iri(iri).expect("checked during compilation")
}

fn eval_step<'g>(
    step: &PlanStep,
    graph: &'g Graph,
    nodes: &BTreeSet<&'g Term>,
) -> BTreeSet<&'g Term> {
    match step {
        PlanStep::Instances { class } => {
            let pattern =
                TriplePattern::new(None, Some(iri_term(vocab::RDF_TYPE)), Some(iri_term(class)))
                    .expect("rdf:type is an IRI");
            graph
                .matching(&pattern)
                .into_iter()
                .map(|t| &t.subject)
                .collect()
        }
        PlanStep::PropertyExists { property, inner } => {
            let inner_ext = eval_step(inner, graph, nodes);
            let pattern =
                TriplePattern::new(None, Some(iri_term(property)), None).expect("IRI predicate");
            graph
                .matching(&pattern)
                .into_iter()
                .filter(|t| inner_ext.contains(&t.object))
                .map(|t| &t.subject)
                .collect()
        }
        PlanStep::PropertyAll { property, inner } => {
            // Closed-world negation: drop subjects with a counterexample
            // edge; everything else (including nodes with no edges) stays.
            let inner_ext = eval_step(inner, graph, nodes);
            let pattern =
                TriplePattern::new(None, Some(iri_term(property)), None).expect("IRI predicate");
            let mut violating: BTreeSet<&Term> = BTreeSet::new();
            for t in graph.matching(&pattern) {
                if !inner_ext.contains(&t.object) {
                    violating.insert(&t.subject);
                }
            }
            nodes
                .iter()
                .copied()
                .filter(|n| !violating.contains(*n))
                .collect()
        }
        PlanStep::PropertyValue { property, value } => {
            let pattern = TriplePattern::new(None, Some(iri_term(property)), Some(value.clone()))
                .expect("IRI predicate");
            graph
                .matching(&pattern)
                .into_iter()
                .map(|t| &t.subject)
                .collect()
        }
        PlanStep::Intersection(steps) => {
            let mut iter = steps.iter();
            let first = iter.next().expect("compiler rejects empty intersections");
            let mut acc = eval_step(first, graph, nodes);
            for step in iter {
                let ext = eval_step(step, graph, nodes);
                acc.retain(|n| ext.contains(n));
            }
            acc
        }
        PlanStep::UnionOf(steps) => {
            let mut acc = BTreeSet::new();
            for step in steps {
                acc.extend(eval_step(step, graph, nodes));
            }
            acc
        }
    }
}

fn check_iri(iri: &str, err: fn(String) -> CompileError) -> Result<(), CompileError> {
    if Term::iri(iri).is_err() {
        return Err(err(iri.to_string()));
    }
    Ok(())
}

/// Compiles an expression into a plan, rejecting malformed constructs
/// (empty conjunctions/disjunctions, relative IRIs).
pub fn compile_condition(expr: &ClassExpr) -> Result<MatchPlan, CompileError> {
    Ok(MatchPlan {
        root: compile_step(expr)?,
    })
}

fn compile_step(expr: &ClassExpr) -> Result<PlanStep, CompileError> {
    match expr {
        ClassExpr::Named(class) => {
            check_iri(class, CompileError::BadClass)?;
            Ok(PlanStep::Instances {
                class: class.clone(),
            })
        }
        ClassExpr::And(children) => {
            if children.is_empty() {
                return Err(CompileError::Unsupported("empty conjunction (And)".into()));
            }
            Ok(PlanStep::Intersection(
                children
                    .iter()
                    .map(compile_step)
                    .collect::<Result<_, _>>()?,
            ))
        }
        ClassExpr::Or(children) => {
            if children.is_empty() {
                return Err(CompileError::Unsupported("empty disjunction (Or)".into()));
            }
            Ok(PlanStep::UnionOf(
                children
                    .iter()
                    .map(compile_step)
                    .collect::<Result<_, _>>()?,
            ))
        }
        ClassExpr::Some { property, expr } => {
            check_iri(property, CompileError::BadProperty)?;
            Ok(PlanStep::PropertyExists {
                property: property.clone(),
                inner: Box::new(compile_step(expr)?),
            })
        }
        ClassExpr::Only { property, expr } => {
            check_iri(property, CompileError::BadProperty)?;
            Ok(PlanStep::PropertyAll {
                property: property.clone(),
                inner: Box::new(compile_step(expr)?),
            })
        }
        ClassExpr::HasValue { property, value } => {
            check_iri(property, CompileError::BadProperty)?;
            Ok(PlanStep::PropertyValue {
                property: property.clone(),
                value: value.clone(),
            })
        }
    }
}

/// Convenience: compile and evaluate in one call.
pub fn evaluate_expr<'g>(
    expr: &ClassExpr,
    graph: &'g Graph,
) -> Result<BTreeSet<&'g Term>, CompileError> {
    Ok(compile_condition(expr)?.evaluate(graph))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::Triple;

    fn node(name: &str) -> Term {
        Term::iri(format!("https://w3id.org/pho-example/user/{name}")).unwrap()
    }

    fn insert(graph: &mut Graph, s: &Term, p: &str, o: Term) {
        graph
            .insert(Triple::new(s.clone(), vocab::term(p), o).unwrap())
            .unwrap();
    }

    fn typed(graph: &mut Graph, s: &Term, class: &str) {
        insert(graph, s, vocab::RDF_TYPE, vocab::term(class));
    }

    #[test]
    fn named_compiles_to_type_scan() {
        let plan = compile_condition(&ClassExpr::named(vocab::PROV_PERSON)).unwrap();
        assert_eq!(
            plan.root,
            PlanStep::Instances {
                class: vocab::PROV_PERSON.to_string()
            }
        );
        let mut g = Graph::new();
        typed(&mut g, &node("user"), vocab::PROV_PERSON);
        let ext = plan.evaluate(&g);
        assert_eq!(ext.len(), 1);
        assert!(ext.contains(&node("user")));
    }

    #[test]
    fn some_compiles_to_join_of_edge_and_type_patterns() {
        let expr = ClassExpr::some(
            vocab::SIO_HAS_ATTRIBUTE,
            ClassExpr::named(vocab::PHO_FIXED_INSULIN_DOSAGE),
        );
        let plan = compile_condition(&expr).unwrap();
        assert_eq!(
            plan.root,
            PlanStep::PropertyExists {
                property: vocab::SIO_HAS_ATTRIBUTE.to_string(),
                inner: Box::new(PlanStep::Instances {
                    class: vocab::PHO_FIXED_INSULIN_DOSAGE.to_string()
                }),
            }
        );
        let mut g = Graph::new();
        typed(&mut g, &node("dosage"), vocab::PHO_FIXED_INSULIN_DOSAGE);
        insert(
            &mut g,
            &node("user"),
            vocab::SIO_HAS_ATTRIBUTE,
            node("dosage"),
        );
        insert(
            &mut g,
            &node("other"),
            vocab::SIO_HAS_ATTRIBUTE,
            node("unrelated"),
        );
        let ext = plan.evaluate(&g);
        assert!(ext.contains(&node("user")));
        assert!(!ext.contains(&node("other")));
    }

    #[test]
    fn only_requires_every_object_in_both_extensions() {
        let expr = ClassExpr::only(
            vocab::SIO_HAS_ATTRIBUTE,
            ClassExpr::And(vec![
                ClassExpr::named(vocab::PHO_HIGH_CARB_DIET),
                ClassExpr::named(vocab::PHO_LOW_FAT_DIET),
            ]),
        );
        let mut g = Graph::new();
        // "both" is typed with both labels, "single" with one.
        typed(&mut g, &node("both"), vocab::PHO_HIGH_CARB_DIET);
        typed(&mut g, &node("both"), vocab::PHO_LOW_FAT_DIET);
        typed(&mut g, &node("single"), vocab::PHO_HIGH_CARB_DIET);
        insert(&mut g, &node("ok"), vocab::SIO_HAS_ATTRIBUTE, node("both"));
        insert(&mut g, &node("bad"), vocab::SIO_HAS_ATTRIBUTE, node("both"));
        insert(
            &mut g,
            &node("bad"),
            vocab::SIO_HAS_ATTRIBUTE,
            node("single"),
        );
        let ext = evaluate_expr(&expr, &g).unwrap();
        assert!(ext.contains(&node("ok")));
        assert!(!ext.contains(&node("bad")));
    }

    #[test]
    fn only_is_vacuously_satisfied_without_edges() {
        let expr = ClassExpr::only(
            vocab::SIO_HAS_ATTRIBUTE,
            ClassExpr::named(vocab::PHO_HIGH_CARB_DIET),
        );
        let mut g = Graph::new();
        typed(&mut g, &node("edgeless"), vocab::PROV_PERSON);
        let ext = evaluate_expr(&expr, &g).unwrap();
        // No hasAttribute edges at all: every node satisfies the universal.
        assert!(ext.contains(&node("edgeless")));
    }

    #[test]
    fn and_is_extension_intersection_or_is_union() {
        let person = ClassExpr::named(vocab::PROV_PERSON);
        let pattern = ClassExpr::named(vocab::PHO_CONSISTENT_PATTERN);
        let mut g = Graph::new();
        typed(&mut g, &node("a"), vocab::PROV_PERSON);
        typed(&mut g, &node("b"), vocab::PHO_CONSISTENT_PATTERN);
        typed(&mut g, &node("c"), vocab::PROV_PERSON);
        typed(&mut g, &node("c"), vocab::PHO_CONSISTENT_PATTERN);

        let and_ext =
            evaluate_expr(&ClassExpr::And(vec![person.clone(), pattern.clone()]), &g).unwrap();
        let or_ext =
            evaluate_expr(&ClassExpr::Or(vec![person.clone(), pattern.clone()]), &g).unwrap();
        let p_ext = evaluate_expr(&person, &g).unwrap();
        let q_ext = evaluate_expr(&pattern, &g).unwrap();

        let expected_and: BTreeSet<_> = p_ext.intersection(&q_ext).copied().collect();
        let expected_or: BTreeSet<_> = p_ext.union(&q_ext).copied().collect();
        assert_eq!(and_ext, expected_and);
        assert_eq!(or_ext, expected_or);
    }

    #[test]
    fn has_value_selects_exact_edges() {
        let expr = ClassExpr::has_value(
            vocab::PROV_WAS_ASSOCIATED_WITH,
            vocab::term(vocab::DOID_DIABETES),
        );
        let mut g = Graph::new();
        insert(
            &mut g,
            &node("user"),
            vocab::PROV_WAS_ASSOCIATED_WITH,
            vocab::term(vocab::DOID_DIABETES),
        );
        insert(
            &mut g,
            &node("other"),
            vocab::PROV_WAS_ASSOCIATED_WITH,
            vocab::term(vocab::DOID_PRE_DIABETES),
        );
        let ext = evaluate_expr(&expr, &g).unwrap();
        assert!(ext.contains(&node("user")));
        assert!(!ext.contains(&node("other")));
    }

    #[test]
    fn empty_and_or_are_compile_errors() {
        for expr in [ClassExpr::And(vec![]), ClassExpr::Or(vec![])] {
            match compile_condition(&expr) {
                Err(CompileError::Unsupported(msg)) => {
                    assert!(msg.contains("And") || msg.contains("Or"))
                }
                other => panic!("expected Unsupported, got {other:?}"),
            }
        }
    }

    #[test]
    fn relative_iri_is_a_compile_error() {
        assert!(matches!(
            compile_condition(&ClassExpr::named("NotAnIri")),
            Err(CompileError::BadClass(_))
        ));
        assert!(matches!(
            compile_condition(&ClassExpr::some(
                "nope",
                ClassExpr::named(vocab::PROV_PERSON)
            )),
            Err(CompileError::BadProperty(_))
        ));
    }
}
