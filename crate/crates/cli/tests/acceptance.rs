//! Acceptance suite. Each test is one acceptance criterion and prints a
//! pass line; run with `cargo test -p phkg-cli --test acceptance -- --nocapture`.

mod common;

use common::*;
use phkg_core::foodlog::MealType;
use phkg_core::guidelines::{builtin_guidelines, compile_condition};
use phkg_core::phkg::{build_phkg, DiabetesStatus, UserProfile};
use phkg_core::query::{execute, parse_query};
use phkg_core::rdf::{parse_turtle, serialize_turtle, Term};
use phkg_core::reasoner::{active_constraints, augment_question, classify, ConstraintSet};
use phkg_core::recommend::{filter_recipes, load_catalog};
use phkg_core::tss::{
    coefficient_of_variation, CombinedGoal, ConsistencyPattern, DietLabel, DietLabelFrequency,
    Nutrient, PatternSet, Window,
};
use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

fn window_sep23() -> Window {
    Window::daily("2021-09-23".parse().unwrap(), "2021-09-29".parse().unwrap()).unwrap()
}

fn reference_fixture_patterns() -> PatternSet {
    let w = window_sep23();
    PatternSet {
        consistency: vec![ConsistencyPattern {
            nutrient: Nutrient::Carbohydrates,
            window: w,
            value: 0.99,
            consistent: false,
        }],
        frequencies: vec![
            DietLabelFrequency {
                label: DietLabel::LowCarbDiet,
                window: w,
                frequency: 1.0,
            },
            DietLabelFrequency {
                label: DietLabel::HighFatDiet,
                window: w,
                frequency: 1.0,
            },
        ],
        combined: vec![CombinedGoal {
            participants: (DietLabel::LowCarbDiet, DietLabel::HighFatDiet),
            window: w,
            holds: true,
            co_occurrence_fraction: 1.0,
        }],
        windows: Vec::new(),
    }
}

/// Criterion 1: the built graph contains subgraphs isomorphic (modulo node
/// IRIs) to the three published pattern shapes, with exact terms, literals,
/// and datatypes; build plus checks complete within a second.
#[test]
fn acceptance_1_reference_shape_reproduction() {
    let started = Instant::now();
    let graph = build_phkg(&reference_fixture_patterns(), &UserProfile::default());

    let assert_shape = |label: &str, query_text: &str| {
        let query = parse_query(query_text)
            .unwrap_or_else(|e| panic!("criterion 1: {label} query failed to parse: {e}"));
        let table = execute(&graph, &query);
        assert!(
            !table.is_empty(),
            "criterion 1: no subgraph matches the {label} shape"
        );
    };

    assert_shape(
        "consistency shape",
        r#"SELECT ?n WHERE {
            :user a prov:Person .
            :user sio:hasAttribute ?n .
            ?n a stato:coefficientOfVariation ;
               sio:hasValue "0.99"^^xsd:float ;
               prov:startedAtTime "2021-09-23T00:00:00-00:00"^^xsd:dateTime ;
               prov:endedAtTime "2021-09-30T00:00:00-00:00"^^xsd:dateTime .
        }"#,
    );
    assert_shape(
        "frequency shape",
        r#"SELECT ?lc ?hf WHERE {
            :user sio:hasAttribute ?lc, ?hf .
            ?lc a pho:LowCarbDiet ; sio:frequency "1.0"^^xsd:float .
            ?hf a pho:HighFatDiet ; sio:frequency "1.0"^^xsd:float .
        }"#,
    );
    assert_shape(
        "combined goal shape",
        r#"SELECT ?g WHERE {
            :user sio:hasAttribute ?g .
            ?g sio:hasParticipant ?lc, ?hf ;
               sio:hasValue "true"^^xsd:boolean .
            ?lc a pho:LowCarbDiet .
            ?hf a pho:HighFatDiet .
        }"#,
    );

    let turtle = serialize_turtle(&graph);
    assert!(
        turtle.contains("prov:startedAtTime \"2021-09-23T00:00:00-00:00\"^^xsd:dateTime"),
        "criterion 1: serialized text lacks the expected timestamp form"
    );
    assert!(turtle.contains("sio:frequency \"1.0\"^^xsd:float"));
    assert!(turtle.contains("sio:hasValue \"0.99\"^^xsd:float"));
    assert!(turtle.contains("sio:hasValue \"true\"^^xsd:boolean"));

    let elapsed = started.elapsed();
    assert!(
        elapsed < Duration::from_secs(1),
        "criterion 1: took {elapsed:?}, budget 1 s"
    );
    println!("acceptance 1 (reference shape reproduction): PASS ({elapsed:?})");
}

/// Criterion 2: the guideline firing matrix over four profile/pattern
/// combinations, all verdicts exact, within a second.
#[test]
fn acceptance_2_guideline_firing_matrix() {
    let started = Instant::now();
    let rules = builtin_guidelines();
    let w = window_sep23();

    let diabetic = UserProfile {
        diabetes_status: DiabetesStatus::Diabetes,
        ..UserProfile::default()
    };
    let diabetic_insulin = UserProfile {
        diabetes_status: DiabetesStatus::Diabetes,
        fixed_insulin_dosage: true,
        ..UserProfile::default()
    };

    let high_carb_low_fat = PatternSet {
        frequencies: vec![
            DietLabelFrequency {
                label: DietLabel::HighCarbDiet,
                window: w,
                frequency: 1.0,
            },
            DietLabelFrequency {
                label: DietLabel::LowFatDiet,
                window: w,
                frequency: 1.0,
            },
        ],
        ..PatternSet::default()
    };
    let inconsistent_carbs = PatternSet {
        consistency: vec![ConsistencyPattern {
            nutrient: Nutrient::Carbohydrates,
            window: w,
            value: 0.6,
            consistent: false,
        }],
        ..PatternSet::default()
    };
    let consistent_carbs = PatternSet {
        consistency: vec![ConsistencyPattern {
            nutrient: Nutrient::Carbohydrates,
            window: w,
            value: 0.05,
            consistent: true,
        }],
        ..PatternSet::default()
    };

    // (diabetic, high-carb/low-fat pattern) fires the Mediterranean directive.
    let (_, directives, verdicts) =
        classify(&build_phkg(&high_carb_low_fat, &diabetic), &rules).unwrap();
    assert_eq!(directives.len(), 1, "case a: exactly one directive");
    assert_eq!(directives[0].rule_id, "G1");
    assert!(directives[0]
        .directive_class
        .ends_with("MediterraneanDietDirective"));
    assert_eq!(
        verdicts
            .iter()
            .find(|v| v.rule_id == "G1")
            .unwrap()
            .compliant,
        Some(false)
    );

    // (diabetic, fixed insulin, no consistent carbs) fires the consistent-carb directive.
    let (_, directives, verdicts) =
        classify(&build_phkg(&inconsistent_carbs, &diabetic_insulin), &rules).unwrap();
    assert_eq!(directives.len(), 1, "case b: exactly one directive");
    assert_eq!(directives[0].rule_id, "G2");
    assert!(directives[0]
        .directive_class
        .ends_with("ConsistentCarbDietDirective"));
    assert_eq!(
        verdicts
            .iter()
            .find(|v| v.rule_id == "G2")
            .unwrap()
            .compliant,
        Some(false)
    );

    // (diabetic, fixed insulin, consistent carbs) fires nothing, G2 compliant.
    let (_, directives, verdicts) =
        classify(&build_phkg(&consistent_carbs, &diabetic_insulin), &rules).unwrap();
    assert!(directives.is_empty(), "case c: nothing fires");
    assert_eq!(
        verdicts
            .iter()
            .find(|v| v.rule_id == "G2")
            .unwrap()
            .compliant,
        Some(true)
    );

    // (non-diabetic, any patterns) fires nothing, both rules inapplicable.
    let (_, directives, verdicts) = classify(
        &build_phkg(&high_carb_low_fat, &UserProfile::default()),
        &rules,
    )
    .unwrap();
    assert!(directives.is_empty(), "case d: nothing fires");
    for v in &verdicts {
        assert!(!v.applicable);
        assert_eq!(v.compliant, None);
    }

    let elapsed = started.elapsed();
    assert!(
        elapsed < Duration::from_secs(1),
        "criterion 2: took {elapsed:?}, budget 1 s"
    );
    println!("acceptance 2 (guideline firing matrix): PASS ({elapsed:?})");
}

/// Criterion 3: byte-exact question augmentation from a fired G2 constraint.
#[test]
fn acceptance_3_question_augmentation() {
    let profile = UserProfile {
        diabetes_status: DiabetesStatus::Diabetes,
        fixed_insulin_dosage: true,
        likes: vec!["spicy".into()],
        ..UserProfile::default()
    };
    let patterns = PatternSet {
        consistency: vec![ConsistencyPattern {
            nutrient: Nutrient::Carbohydrates,
            window: window_sep23(),
            value: 0.6,
            consistent: false,
        }],
        ..PatternSet::default()
    };
    let graph = build_phkg(&patterns, &profile);
    let (classified, directives, _) = classify(&graph, &builtin_guidelines()).unwrap();
    assert_eq!(directives.len(), 1, "criterion 3: G2 must fire");
    let constraints = active_constraints(&classified).unwrap();
    let augmented = augment_question("What should I eat for breakfast?", &constraints);
    assert_eq!(
        augmented,
        "What should I eat for breakfast [diabetic, prefers spicy food, carbohydrates between \
         30-45 g, not to exceed 150 g daily total]?",
        "criterion 3: augmented question is not byte-exact"
    );
    println!("acceptance 3 (question augmentation): PASS");
}

/// Criterion 4: 1,000 random series against the two-pass oracle at 1e-12
/// relative, plus scale invariance under random positive scalars.
#[test]
fn acceptance_4_cv_oracle_equivalence() {
    fn two_pass_cv(series: &[f64]) -> Option<f64> {
        if series.len() < 2 {
            return None;
        }
        let n = series.len() as f64;
        let mean = series.iter().sum::<f64>() / n;
        if mean <= 0.0 {
            return None;
        }
        let variance = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        Some(variance.sqrt() / mean)
    }
    fn relative_error(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-30)
    }

    let mut rng = TestRng::new(0xacce_0004);
    for case in 0..1000 {
        let len = 2 + rng.below(59);
        let series: Vec<f64> = (0..len).map(|_| rng.unit() * 500.0).collect();
        let expected = two_pass_cv(&series);
        let actual = coefficient_of_variation(&series).ok();
        match (expected, actual) {
            (Some(e), Some(a)) => assert!(
                relative_error(e, a) < 1e-12,
                "criterion 4 case {case}: oracle {e} vs implementation {a}"
            ),
            (None, None) => {}
            other => panic!("criterion 4 case {case}: disagreement {other:?}"),
        }

        let scale = 0.01 + rng.unit() * 999.0;
        let scaled: Vec<f64> = series.iter().map(|x| x * scale).collect();
        if let (Ok(a), Ok(b)) = (
            coefficient_of_variation(&series),
            coefficient_of_variation(&scaled),
        ) {
            assert!(
                relative_error(a, b) < 1e-12,
                "criterion 4 case {case}: scale invariance broken ({a} vs {b}, scale {scale})"
            );
        }
    }
    println!("acceptance 4 (CV oracle equivalence, 1000 cases): PASS");
}

/// Criterion 5: compiled class-expression plans equal the brute-force
/// recursive set evaluation on 200 random graph/expression pairs.
#[test]
fn acceptance_5_classexpr_evaluator_equivalence() {
    let mut rng = TestRng::new(0xacce_0005);
    for case in 0..200 {
        let graph = random_graph(&mut rng, 200, 14);
        let expr = random_class_expr(&mut rng, 4);
        let plan = compile_condition(&expr).expect("generated expressions compile");
        let compiled: BTreeSet<Term> = plan.evaluate(&graph).into_iter().cloned().collect();
        let oracle: BTreeSet<Term> = oracle_universe(&graph)
            .into_iter()
            .filter(|n| oracle_in_extension(&graph, &expr, n))
            .collect();
        assert_eq!(
            compiled, oracle,
            "criterion 5 case {case}: extension mismatch for {expr:?}"
        );
    }
    println!("acceptance 5 (class-expression evaluator equivalence, 200 cases): PASS");
}

/// Criterion 6: the query engine equals the enumerate-all-assignments
/// oracle on 200 random graph/query pairs.
#[test]
fn acceptance_6_query_engine_equivalence() {
    let mut rng = TestRng::new(0xacce_0006);
    let mut checked = 0;
    while checked < 200 {
        let graph = random_graph(&mut rng, 100, 8);
        let query = random_query(&mut rng, &graph);
        if query.select.is_empty() {
            continue;
        }
        checked += 1;
        let expected = oracle_execute(&graph, &query);
        let actual = execute(&graph, &query).rows;
        assert_eq!(
            expected, actual,
            "criterion 6 case {checked}: result mismatch for {query:?}"
        );
    }
    println!("acceptance 6 (query engine equivalence, 200 cases): PASS");
}

/// Criterion 7: 500 random graphs round-trip through Turtle exactly.
#[test]
fn acceptance_7_turtle_round_trip() {
    let mut rng = TestRng::new(0xacce_0007);
    for case in 0..500 {
        let graph = wild_graph(&mut rng, 60);
        let text = serialize_turtle(&graph);
        let back = parse_turtle(&text)
            .unwrap_or_else(|e| panic!("criterion 7 case {case}: reparse failed: {e}\n{text}"));
        assert_eq!(back, graph, "criterion 7 case {case}: round-trip mismatch");
    }
    println!("acceptance 7 (Turtle round-trip, 500 cases): PASS");
}

/// Criterion 8: the full pipeline on a 35-day consistent-carb synthetic log
/// with a diabetic fixed-insulin profile finishes in under five seconds,
/// mines exactly five full windows, reports G2 compliant, and returns a
/// non-empty, constraint-valid recommendation list.
#[test]
fn acceptance_8_end_to_end_pipeline() {
    let dir = tempfile::tempdir().expect("temp dir");
    let log_path = dir.path().join("log.jsonl");
    let profile_path = dir.path().join("profile.json");
    let out_dir = dir.path().join("out");
    std::fs::write(
        &profile_path,
        r#"{"user_id":"user","diabetes_status":"diabetes","fixed_insulin_dosage":true,
            "likes":["spicy"],"dislikes":[],"allergies":[]}"#,
    )
    .unwrap();

    let gen = Command::new(phkg_bin())
        .args([
            "gen",
            "--days",
            "35",
            "--seed",
            "7",
            "--consistent-carbs",
            "--out",
        ])
        .arg(&log_path)
        .output()
        .expect("run gen");
    assert!(gen.status.success(), "gen failed: {gen:?}");

    let started = Instant::now();
    let pipeline = Command::new(phkg_bin())
        .arg("pipeline")
        .arg("--log")
        .arg(&log_path)
        .arg("--profile")
        .arg(&profile_path)
        .arg("--catalog")
        .arg(fixture_catalog_path())
        .arg("--out-dir")
        .arg(&out_dir)
        .output()
        .expect("run pipeline");
    let elapsed = started.elapsed();
    assert!(
        pipeline.status.success(),
        "pipeline failed: {}",
        String::from_utf8_lossy(&pipeline.stderr)
    );
    assert!(
        elapsed < Duration::from_secs(5),
        "criterion 8: pipeline took {elapsed:?}, budget 5 s"
    );

    let patterns: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("patterns.json")).unwrap())
            .unwrap();
    let full_windows = patterns["windows"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|w| w["full"].as_bool() == Some(true))
        .count();
    assert_eq!(
        full_windows, 5,
        "criterion 8: expected exactly 5 full windows"
    );

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap())
            .unwrap();
    let g2 = report["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["rule_id"] == "G2")
        .expect("G2 verdict present");
    assert_eq!(g2["applicable"], serde_json::Value::Bool(true));
    assert_eq!(
        g2["compliant"],
        serde_json::Value::Bool(true),
        "criterion 8: G2 must be compliant"
    );

    let recommendations: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("recommendations.json")).unwrap(),
    )
    .unwrap();
    let names: Vec<String> = recommendations
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["name"].as_str().unwrap().to_string())
        .collect();
    assert!(
        !names.is_empty(),
        "criterion 8: recommendation list must be non-empty"
    );

    let constraints: ConstraintSet = serde_json::from_value(report["constraints"].clone()).unwrap();
    let catalog = load_catalog(&std::fs::read_to_string(fixture_catalog_path()).unwrap()).unwrap();
    for name in &names {
        let recipe = catalog
            .by_name(name)
            .unwrap_or_else(|| panic!("criterion 8: unknown recipe {name}"));
        assert!(
            independent_hard_check(recipe, &constraints, MealType::Breakfast),
            "criterion 8: recommendation '{name}' violates the active constraints"
        );
    }
    println!(
        "acceptance 8 (end-to-end pipeline): PASS ({elapsed:?}, {} recommendations)",
        names.len()
    );
}

/// Criterion 9: for 100 random constraint sets over the 50-recipe catalog,
/// every returned recipe independently re-checks against every hard
/// constraint.
#[test]
fn acceptance_9_recommendation_soundness() {
    let catalog = load_catalog(&std::fs::read_to_string(fixture_catalog_path()).unwrap()).unwrap();
    assert_eq!(
        catalog.len(),
        50,
        "criterion 9: fixture must hold 50 recipes"
    );
    let mut rng = TestRng::new(0xacce_0009);
    let mut returned_total = 0usize;
    for case in 0..100 {
        let cs = random_constraint_set(&mut rng);
        let meal = *rng.pick(&MealType::ALL);
        let recommendations = filter_recipes(&catalog, &cs, meal);
        returned_total += recommendations.len();
        for rec in &recommendations {
            let recipe = catalog
                .by_name(&rec.name)
                .expect("recommended recipe exists");
            assert!(
                independent_hard_check(recipe, &cs, meal),
                "criterion 9 case {case}: '{}' violates constraints {cs:?}",
                rec.name
            );
        }
    }
    println!(
        "acceptance 9 (recommendation hard-constraint soundness, 100 cases, \
         {returned_total} recommendations re-checked): PASS"
    );
}
