//! Round-trip property: parse(serialize(g)) reproduces g for graphs built
//! from the full range of term shapes the store supports.

mod common;

use common::TestRng;
use phkg_core::rdf::{parse_turtle, serialize_turtle, Graph, Term, Triple};
use phkg_core::vocab;
use proptest::prelude::*;

fn wild_graph(rng: &mut TestRng, max_triples: usize) -> Graph {
    let mut graph = Graph::new();
    graph.add_prefix("", vocab::NS_USER);
    graph.add_prefix("ex", "http://example.org/ns#");
    let subjects: Vec<Term> = (0..6)
        .map(|i| Term::iri(format!("{}s{i}", vocab::NS_USER)).unwrap())
        .chain((0..2).map(|i| Term::blank(format!("b{i}"))))
        .chain([
            // Slash-laden local parts force angle-bracket rendering.
            Term::iri(format!(
                "{}pattern/consistency/carbohydrates/2021-09-23",
                vocab::NS_USER
            ))
            .unwrap(),
        ])
        .collect();
    let predicates: Vec<Term> = vec![
        vocab::term(vocab::RDF_TYPE),
        vocab::term(vocab::SIO_HAS_ATTRIBUTE),
        vocab::term(vocab::SIO_HAS_VALUE),
        vocab::term(vocab::PHO_LIKES),
        Term::iri("http://example.org/ns#weird-pred").unwrap(),
    ];
    let lexicals = [
        "plain",
        "with \"quotes\"",
        "back\\slash",
        "line\nbreak and\ttab",
        "unicode méli-mélo ∂x",
        "0.99",
        "",
        "ends with dot.",
    ];
    let datatypes = [
        vocab::XSD_STRING,
        vocab::XSD_FLOAT,
        vocab::XSD_DATE_TIME,
        vocab::XSD_BOOLEAN,
        "http://example.org/ns#customType",
    ];
    let langs = ["en", "en-US", "es"];

    let count = rng.below(max_triples + 1);
    for _ in 0..count {
        let subject = rng.pick(&subjects).clone();
        let predicate = rng.pick(&predicates).clone();
        let object = match rng.below(4) {
            0 => rng.pick(&subjects).clone(),
            1 => Term::literal(*rng.pick(&lexicals)),
            2 => Term::typed_literal(*rng.pick(&lexicals), *rng.pick(&datatypes)).unwrap(),
            _ => Term::lang_literal(*rng.pick(&lexicals), *rng.pick(&langs)).unwrap(),
        };
        graph
            .insert(Triple::new(subject, predicate, object).unwrap())
            .unwrap();
    }
    graph
}

#[test]
fn seeded_round_trips() {
    let mut rng = TestRng::new(0x7071_1e50);
    for case in 0..500 {
        let graph = wild_graph(&mut rng, 60);
        let text = serialize_turtle(&graph);
        let back = parse_turtle(&text).unwrap_or_else(|e| {
            panic!("case {case}: reparse failed: {e}\n--- document ---\n{text}")
        });
        assert_eq!(back, graph, "case {case} round-trip mismatch:\n{text}");
    }
}

#[test]
fn serialization_is_byte_stable() {
    let mut rng = TestRng::new(42);
    let graph = wild_graph(&mut rng, 40);
    assert_eq!(serialize_turtle(&graph), serialize_turtle(&graph));
    let reparsed = parse_turtle(&serialize_turtle(&graph)).unwrap();
    assert_eq!(serialize_turtle(&reparsed), serialize_turtle(&graph));
}

proptest! {
    // Literal escaping over arbitrary content, including control characters.
    #[test]
    fn arbitrary_string_literals_round_trip(value in ".*", lang in "[a-z]{2}") {
        prop_assume!(!value.contains('\u{2028}') && !value.contains('\u{2029}'));
        let mut graph = Graph::new();
        let subject = Term::iri(format!("{}s", vocab::NS_USER)).unwrap();
        graph
            .insert(
                Triple::new(
                    subject.clone(),
                    vocab::term(vocab::PHO_LIKES),
                    Term::literal(value.clone()),
                )
                .unwrap(),
            )
            .unwrap();
        graph
            .insert(
                Triple::new(
                    subject,
                    vocab::term(vocab::PHO_DISLIKES),
                    Term::lang_literal(value, lang).unwrap(),
                )
                .unwrap(),
            )
            .unwrap();
        let back = parse_turtle(&serialize_turtle(&graph)).unwrap();
        prop_assert_eq!(back, graph);
    }
}
