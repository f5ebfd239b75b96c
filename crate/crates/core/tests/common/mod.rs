//! Shared helpers for the integration tests: a small deterministic RNG and
//! random generators for graphs, class expressions, and queries.

#![allow(dead_code)]

use phkg_core::guidelines::ClassExpr;
use phkg_core::rdf::{Graph, Term, Triple};
use phkg_core::vocab;

/// SplitMix64; deterministic and dependency-free, good enough for fixtures.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> TestRng {
        TestRng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, bound)`.
    pub fn below(&mut self, bound: usize) -> usize {
        (self.next_u64() % bound as u64) as usize
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len())]
    }
}

pub fn class_pool() -> Vec<&'static str> {
    vec![
        vocab::PROV_PERSON,
        vocab::PHO_CONSISTENT_PATTERN,
        vocab::PHO_LOW_CARB_DIET,
        vocab::PHO_HIGH_CARB_DIET,
        vocab::PHO_LOW_FAT_DIET,
        vocab::PHO_HIGH_FAT_DIET,
        vocab::PHO_FIXED_INSULIN_DOSAGE,
        vocab::PHO_LOW_CARB_HIGH_FAT_GOAL,
    ]
}

pub fn property_pool() -> Vec<&'static str> {
    vec![
        vocab::SIO_HAS_ATTRIBUTE,
        vocab::SIO_HAS_PARTICIPANT,
        vocab::PROV_WAS_ASSOCIATED_WITH,
        vocab::PHO_MEAL_SLOT,
    ]
}

pub fn value_pool() -> Vec<Term> {
    vec![
        vocab::term(vocab::DOID_DIABETES),
        vocab::term(vocab::DOID_PRE_DIABETES),
        vocab::term(vocab::DRON_INSULIN),
        vocab::term(vocab::FOOD_CARBOHYDRATES),
        Term::literal("spicy"),
        Term::typed_literal("0.99", vocab::XSD_FLOAT).unwrap(),
    ]
}

pub fn node(index: usize) -> Term {
    Term::iri(format!("{}n{index}", vocab::NS_USER)).unwrap()
}

/// A random graph over small pools: type edges, node-to-node edges, and
/// node-to-value edges.
pub fn random_graph(rng: &mut TestRng, max_triples: usize, node_count: usize) -> Graph {
    let mut graph = Graph::new();
    graph.add_prefix("", vocab::NS_USER);
    let classes = class_pool();
    let properties = property_pool();
    let values = value_pool();
    let triples = rng.below(max_triples + 1);
    for _ in 0..triples {
        let subject = node(rng.below(node_count));
        let triple = match rng.below(3) {
            0 => Triple::new(
                subject,
                vocab::term(vocab::RDF_TYPE),
                vocab::term(rng.pick(&classes)),
            ),
            1 => Triple::new(
                subject,
                vocab::term(rng.pick(&properties)),
                node(rng.below(node_count)),
            ),
            _ => Triple::new(
                subject,
                vocab::term(rng.pick(&properties)),
                rng.pick(&values).clone(),
            ),
        }
        .expect("generated triples are valid");
        graph.insert(triple).expect("generated triples are valid");
    }
    graph
}

/// A random class expression with bounded depth over the vocabulary pools.
pub fn random_class_expr(rng: &mut TestRng, depth: usize) -> ClassExpr {
    let classes = class_pool();
    let properties = property_pool();
    if depth == 0 {
        return match rng.below(2) {
            0 => ClassExpr::named(rng.pick(&classes)),
            _ => {
                let values = value_pool();
                ClassExpr::has_value(rng.pick(&properties), rng.pick(&values).clone())
            }
        };
    }
    match rng.below(6) {
        0 => ClassExpr::named(rng.pick(&classes)),
        1 => {
            let n = 1 + rng.below(3);
            ClassExpr::And((0..n).map(|_| random_class_expr(rng, depth - 1)).collect())
        }
        2 => {
            let n = 1 + rng.below(3);
            ClassExpr::Or((0..n).map(|_| random_class_expr(rng, depth - 1)).collect())
        }
        3 => ClassExpr::some(rng.pick(&properties), random_class_expr(rng, depth - 1)),
        4 => ClassExpr::only(rng.pick(&properties), random_class_expr(rng, depth - 1)),
        _ => {
            let values = value_pool();
            ClassExpr::has_value(rng.pick(&properties), rng.pick(&values).clone())
        }
    }
}

/// Independent per-node recursive membership check; the test oracle for the
/// compiled plan route. Extensions never contain literals.
pub fn oracle_in_extension(graph: &Graph, expr: &ClassExpr, candidate: &Term) -> bool {
    if candidate.is_literal() {
        return false;
    }
    match expr {
        ClassExpr::Named(class) => graph.contains(
            &Triple::new(
                candidate.clone(),
                vocab::term(vocab::RDF_TYPE),
                vocab::term(class),
            )
            .expect("valid triple"),
        ),
        ClassExpr::And(children) => children
            .iter()
            .all(|c| oracle_in_extension(graph, c, candidate)),
        ClassExpr::Or(children) => children
            .iter()
            .any(|c| oracle_in_extension(graph, c, candidate)),
        ClassExpr::Some { property, expr } => graph
            .objects(candidate, &vocab::term(property))
            .into_iter()
            .any(|o| oracle_in_extension(graph, expr, o)),
        ClassExpr::Only { property, expr } => graph
            .objects(candidate, &vocab::term(property))
            .into_iter()
            .all(|o| oracle_in_extension(graph, expr, o)),
        ClassExpr::HasValue { property, value } => graph
            .objects(candidate, &vocab::term(property))
            .into_iter()
            .any(|o| o == value),
    }
}

/// The oracle's node universe, derived directly from the triple list.
pub fn oracle_universe(graph: &Graph) -> Vec<Term> {
    let mut nodes = std::collections::BTreeSet::new();
    for t in graph.triples() {
        nodes.insert(t.subject.clone());
        if !t.object.is_literal() {
            nodes.insert(t.object.clone());
        }
    }
    nodes.into_iter().collect()
}
