//! Test support: deterministic RNG, random generators, and the independent
//! oracles the acceptance criteria check against.

#![allow(dead_code)]

use phkg_core::guidelines::{ClassExpr, ConstraintPayload};
use phkg_core::query::{CompareOp, FilterExpr, FilterOperand, PatternTerm, Query, QueryPattern};
use phkg_core::rdf::{Graph, Term, Triple};
use phkg_core::reasoner::{ActiveConstraint, ConstraintSet};
use phkg_core::recommend::Recipe;
use phkg_core::vocab;
use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

/// SplitMix64.
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

    pub fn below(&mut self, bound: usize) -> usize {
        (self.next_u64() % bound as u64) as usize
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len())]
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }
}

pub fn fixture_catalog_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/catalog50.json")
}

pub fn phkg_bin() -> &'static str {
    env!("CARGO_BIN_EXE_phkg")
}

// ---------------------------------------------------------------------------
// Random graphs and class expressions (criterion 5).

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

pub fn random_graph(rng: &mut TestRng, max_triples: usize, node_count: usize) -> Graph {
    let mut graph = Graph::new();
    graph.add_prefix("", vocab::NS_USER);
    let classes = class_pool();
    let properties = property_pool();
    let values = value_pool();
    for _ in 0..rng.below(max_triples + 1) {
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

/// Per-node recursive membership oracle; extensions never contain literals.
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

pub fn oracle_universe(graph: &Graph) -> Vec<Term> {
    let mut nodes = BTreeSet::new();
    for t in graph.triples() {
        nodes.insert(t.subject.clone());
        if !t.object.is_literal() {
            nodes.insert(t.object.clone());
        }
    }
    nodes.into_iter().collect()
}

// ---------------------------------------------------------------------------
// Random queries and the enumeration oracle (criterion 6).

const VARS: [&str; 3] = ["a", "b", "c"];

pub fn random_query(rng: &mut TestRng, graph: &Graph) -> Query {
    let terms: Vec<Term> = {
        let mut all = BTreeSet::new();
        for t in graph.triples() {
            all.insert(t.subject.clone());
            all.insert(t.predicate.clone());
            all.insert(t.object.clone());
        }
        all.insert(vocab::term(vocab::RDF_TYPE));
        all.insert(Term::typed_literal("0.5", vocab::XSD_FLOAT).unwrap());
        all.into_iter().collect()
    };
    let slot = |rng: &mut TestRng| -> PatternTerm {
        if rng.below(2) == 0 {
            PatternTerm::Var(rng.pick(&VARS).to_string())
        } else {
            PatternTerm::Term(rng.pick(&terms).clone())
        }
    };
    let patterns: Vec<QueryPattern> = (0..1 + rng.below(4))
        .map(|_| QueryPattern {
            subject: slot(rng),
            predicate: slot(rng),
            object: slot(rng),
        })
        .collect();
    let bound: Vec<String> = {
        let mut seen = BTreeSet::new();
        for p in &patterns {
            for v in p.variables() {
                seen.insert(v.to_string());
            }
        }
        seen.into_iter().collect()
    };
    let select: Vec<String> = if bound.is_empty() {
        Vec::new()
    } else {
        bound
            .iter()
            .take(1 + rng.below(bound.len()))
            .cloned()
            .collect()
    };
    let ops = [
        CompareOp::Eq,
        CompareOp::Ne,
        CompareOp::Lt,
        CompareOp::Le,
        CompareOp::Gt,
        CompareOp::Ge,
    ];
    let filters: Vec<FilterExpr> = (0..rng.below(3).min(bound.len()))
        .map(|_| FilterExpr {
            left: FilterOperand::Var(rng.pick(&bound).clone()),
            op: *rng.pick(&ops),
            right: if rng.below(2) == 0 {
                FilterOperand::Var(rng.pick(&bound).clone())
            } else {
                FilterOperand::Const(rng.pick(&terms).clone())
            },
        })
        .collect();
    Query {
        prefixes: BTreeMap::new(),
        select,
        patterns,
        filters,
        limit: None,
    }
}

fn oracle_filter(filter: &FilterExpr, binding: &BTreeMap<String, Term>) -> bool {
    fn resolve<'a>(op: &'a FilterOperand, b: &'a BTreeMap<String, Term>) -> Option<&'a Term> {
        match op {
            FilterOperand::Const(t) => Some(t),
            FilterOperand::Var(v) => b.get(v),
        }
    }
    fn as_number(t: &Term) -> Option<f64> {
        let numeric = [
            vocab::XSD_INTEGER,
            vocab::XSD_DECIMAL,
            vocab::XSD_FLOAT,
            vocab::XSD_DOUBLE,
        ];
        match t {
            Term::Literal {
                lexical, datatype, ..
            } if numeric.contains(&datatype.as_str()) => lexical.trim().parse().ok(),
            _ => None,
        }
    }
    let (Some(l), Some(r)) = (
        resolve(&filter.left, binding),
        resolve(&filter.right, binding),
    ) else {
        return false;
    };
    if let (Some(a), Some(b)) = (as_number(l), as_number(r)) {
        return match filter.op {
            CompareOp::Eq => a == b,
            CompareOp::Ne => a != b,
            CompareOp::Lt => a < b,
            CompareOp::Le => a <= b,
            CompareOp::Gt => a > b,
            CompareOp::Ge => a >= b,
        };
    }
    match filter.op {
        CompareOp::Eq => l == r,
        CompareOp::Ne => l != r,
        _ => false,
    }
}

/// All-assignments enumeration oracle.
pub fn oracle_execute(graph: &Graph, query: &Query) -> Vec<Vec<Term>> {
    let mut variables = BTreeSet::new();
    for p in &query.patterns {
        for v in p.variables() {
            variables.insert(v.to_string());
        }
    }
    let variables: Vec<String> = variables.into_iter().collect();
    let mut universe = BTreeSet::new();
    for t in graph.triples() {
        universe.insert(t.subject.clone());
        universe.insert(t.predicate.clone());
        universe.insert(t.object.clone());
    }
    let universe: Vec<Term> = universe.into_iter().collect();
    if universe.is_empty() && !variables.is_empty() {
        return Vec::new();
    }
    let slot_value = |slot: &PatternTerm, binding: &BTreeMap<String, Term>| -> Term {
        match slot {
            PatternTerm::Term(t) => t.clone(),
            PatternTerm::Var(v) => binding[v].clone(),
        }
    };
    let mut rows = BTreeSet::new();
    let mut indices = vec![0usize; variables.len()];
    loop {
        let binding: BTreeMap<String, Term> = variables
            .iter()
            .zip(&indices)
            .map(|(v, &i)| (v.clone(), universe[i].clone()))
            .collect();
        let satisfied = query.patterns.iter().all(|p| {
            let s = slot_value(&p.subject, &binding);
            let pr = slot_value(&p.predicate, &binding);
            let o = slot_value(&p.object, &binding);
            if s.is_literal() || !pr.is_iri() {
                return false;
            }
            graph.contains(&Triple::new(s, pr, o).expect("checked shape"))
        }) && query.filters.iter().all(|f| oracle_filter(f, &binding));
        if satisfied {
            rows.insert(
                query
                    .select
                    .iter()
                    .map(|v| binding[v].clone())
                    .collect::<Vec<_>>(),
            );
        }
        let mut pos = 0;
        loop {
            if pos == indices.len() {
                return rows.into_iter().collect();
            }
            indices[pos] += 1;
            if indices[pos] < universe.len() {
                break;
            }
            indices[pos] = 0;
            pos += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Wild graphs exercising every literal shape (criterion 7).

pub fn wild_graph(rng: &mut TestRng, max_triples: usize) -> Graph {
    let mut graph = Graph::new();
    graph.add_prefix("", vocab::NS_USER);
    graph.add_prefix("ex", "http://example.org/ns#");
    let subjects: Vec<Term> = (0..6)
        .map(|i| Term::iri(format!("{}s{i}", vocab::NS_USER)).unwrap())
        .chain((0..2).map(|i| Term::blank(format!("b{i}"))))
        .chain([Term::iri(format!(
            "{}pattern/consistency/carbohydrates/2021-09-23",
            vocab::NS_USER
        ))
        .unwrap()])
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
    for _ in 0..rng.below(max_triples + 1) {
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

// ---------------------------------------------------------------------------
// Random constraint sets plus an independent recipe checker (criterion 9).

const TAGS: [&str; 4] = ["mediterranean", "spicy", "vegan", "nosuchtag"];
const ITEMS: [&str; 8] = [
    "dairy", "nuts", "gluten", "eggs", "soy", "almonds", "peanuts", "chili",
];

pub fn random_constraint_set(rng: &mut TestRng) -> ConstraintSet {
    let mut cs = ConstraintSet::default();
    if rng.chance(0.7) {
        let lower = 5.0 + (rng.unit() * 40.0).round();
        let upper = lower + 5.0 + (rng.unit() * 30.0).round();
        let daily = upper * 3.0;
        cs.constraints.push(ActiveConstraint {
            payload: ConstraintPayload::nutrient("carbohydrate", "g", lower, upper, daily)
                .expect("generated range is valid"),
            rule_ids: vec!["G2".into()],
        });
    }
    if rng.chance(0.4) {
        cs.constraints.push(ActiveConstraint {
            payload: ConstraintPayload::Tag(rng.pick(&TAGS).to_string()),
            rule_ids: vec!["G1".into()],
        });
    }
    for _ in 0..rng.below(3) {
        cs.likes.push(rng.pick(&TAGS).to_string());
    }
    for _ in 0..rng.below(3) {
        cs.dislikes.push(rng.pick(&ITEMS).to_string());
    }
    for _ in 0..rng.below(3) {
        cs.allergies.push(rng.pick(&ITEMS).to_string());
    }
    cs
}

/// Re-checks one recipe against every hard constraint, written from the
/// constraint definitions rather than the filter implementation.
pub fn independent_hard_check(
    recipe: &Recipe,
    cs: &ConstraintSet,
    meal: phkg_core::foodlog::MealType,
) -> bool {
    if !recipe.meal_types.contains(&meal) {
        return false;
    }
    for constraint in &cs.constraints {
        match &constraint.payload {
            ConstraintPayload::Tag(tag) => {
                if !recipe.tags.contains(&tag.to_lowercase()) {
                    return false;
                }
            }
            ConstraintPayload::Nutrient {
                nutrient,
                per_meal_lower,
                per_meal_upper,
                ..
            } => {
                if nutrient == "carbohydrate"
                    && !(recipe.carbohydrates_g >= *per_meal_lower
                        && recipe.carbohydrates_g <= *per_meal_upper)
                {
                    return false;
                }
            }
        }
    }
    for item in cs.allergies.iter().chain(cs.dislikes.iter()) {
        let item = item.to_lowercase();
        if recipe.allergens.contains(&item) || recipe.ingredients.contains(&item) {
            return false;
        }
    }
    true
}
