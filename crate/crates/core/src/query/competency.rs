//! Competency question answering over a classified knowledge graph.
//!
//! Question ids: `G1-compliance`, `G2-compliance`, `consistency.<nutrient>`,
//! `progress.<nutrient>`, `improve-diet`, `meets-preferences`,
//! `breakfast-rec`, `allergy-rec`, `substitute-rec`.

use super::QueryError;
use crate::foodlog::MealType;
use crate::guidelines::{builtin_guidelines, ConstraintPayload};
use crate::rdf::Graph;
use crate::reasoner::{
    active_constraints, augment_question, evaluate_rule, find_user, latest_full_window_start,
    ReasonerOptions,
};
use crate::recommend::{
    filter_recipes, filter_recipes_any_meal, with_allergen, with_excluded_item, RecipeCatalog,
};
use crate::tss::Nutrient;
use crate::vocab;
use chrono::NaiveDate;
use serde::Serialize;

/// Trend over the two most recent full windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Trend {
    Improving,
    Worsening,
    Maintaining,
}

/// Answer payload; the variant is fixed per question id.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value")]
pub enum Verdict {
    Bool(bool),
    Trend(Trend),
    Items(Vec<String>),
    NotApplicable,
}

/// A structured competency answer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompetencyAnswer {
    pub question: String,
    pub verdict: Verdict,
    pub explanation: String,
    pub bindings: Vec<(String, String)>,
}

/// Extra inputs some questions need.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompetencyParams<'a> {
    pub catalog: Option<&'a RecipeCatalog>,
    pub meal: Option<MealType>,
    pub allergen: Option<&'a str>,
    pub exclude_item: Option<&'a str>,
    pub window_length_days: Option<u32>,
    pub progress_band: Option<f64>,
}

impl<'a> CompetencyParams<'a> {
    fn window_length(&self) -> u32 {
        self.window_length_days.unwrap_or(7)
    }

    fn band(&self) -> f64 {
        self.progress_band.unwrap_or(0.05)
    }

    fn reasoner_options(&self) -> ReasonerOptions {
        ReasonerOptions {
            window_length_days: self.window_length(),
        }
    }
}

/// A daily consistency node in the graph with its window start and value.
struct ConsistencyReading {
    start: NaiveDate,
    value: f64,
    consistent: bool,
}

fn parse_date(lexical: &str) -> Option<NaiveDate> {
    lexical.split('T').next()?.parse().ok()
}

/// Daily-granularity consistency readings for one nutrient attributed to
/// the user, restricted to full windows, most recent first.
fn consistency_readings(
    graph: &Graph,
    nutrient: Nutrient,
    window_length_days: u32,
) -> Result<Vec<ConsistencyReading>, QueryError> {
    let user = find_user(graph)?;
    let nutrient_term = match nutrient {
        Nutrient::Carbohydrates => vocab::FOOD_CARBOHYDRATES,
        Nutrient::Fat => vocab::FOOD_FAT,
        Nutrient::Protein => vocab::FOOD_PROTEIN,
        Nutrient::Calories => vocab::FOOD_CALORIES,
    };
    let mut readings = Vec::new();
    for node in graph.objects(&user, &vocab::term(vocab::SIO_HAS_ATTRIBUTE)) {
        let types = graph.objects(node, &vocab::term(vocab::RDF_TYPE));
        if !types.contains(&&vocab::term(vocab::STATO_COEFFICIENT_OF_VARIATION)) {
            continue;
        }
        let attrs = graph.objects(node, &vocab::term(vocab::SIO_HAS_ATTRIBUTE));
        if !attrs.contains(&&vocab::term(nutrient_term)) {
            continue;
        }
        // Per-meal nodes carry a meal slot; the daily series does not.
        if !graph
            .objects(node, &vocab::term(vocab::PHO_MEAL_SLOT))
            .is_empty()
        {
            continue;
        }
        let Some(start) = graph
            .objects(node, &vocab::term(vocab::PROV_STARTED_AT_TIME))
            .first()
            .and_then(|t| t.lexical())
            .and_then(parse_date)
        else {
            continue;
        };
        let Some(end) = graph
            .objects(node, &vocab::term(vocab::PROV_ENDED_AT_TIME))
            .first()
            .and_then(|t| t.lexical())
            .and_then(parse_date)
        else {
            continue;
        };
        if (end - start).num_days() != window_length_days as i64 {
            continue;
        }
        let Some(value) = graph
            .objects(node, &vocab::term(vocab::SIO_HAS_VALUE))
            .first()
            .and_then(|t| t.lexical())
            .and_then(|s| s.parse::<f64>().ok())
        else {
            continue;
        };
        let consistent = types.contains(&&vocab::term(vocab::PHO_CONSISTENT_PATTERN));
        readings.push(ConsistencyReading {
            start,
            value,
            consistent,
        });
    }
    readings.sort_by_key(|r| std::cmp::Reverse(r.start));
    Ok(readings)
}

fn rule_compliance(
    graph: &Graph,
    rule_id: &str,
    params: &CompetencyParams<'_>,
) -> Result<CompetencyAnswer, QueryError> {
    let rule = builtin_guidelines()
        .into_iter()
        .find(|r| r.id == rule_id)
        .ok_or_else(|| QueryError::UnknownQuestion(format!("{rule_id}-compliance")))?;
    let evaluation = evaluate_rule(graph, &rule, &params.reasoner_options())?;
    let verdict = match evaluation.verdict.compliant {
        None => Verdict::NotApplicable,
        Some(c) => Verdict::Bool(c),
    };
    let explanation = match evaluation.verdict.compliant {
        None => format!("rule {rule_id} does not apply to this user"),
        Some(true) => format!("compliant with {rule_id}: {}", rule.label),
        Some(false) => format!("not compliant with {rule_id}: {}", rule.label),
    };
    let bindings = evaluation
        .verdict
        .evidence
        .iter()
        .map(|e| ("evidence".to_string(), e.clone()))
        .collect();
    Ok(CompetencyAnswer {
        question: format!("{rule_id}-compliance"),
        verdict,
        explanation,
        bindings,
    })
}

fn consistency_answer(
    graph: &Graph,
    nutrient: Nutrient,
    params: &CompetencyParams<'_>,
) -> Result<CompetencyAnswer, QueryError> {
    let readings = consistency_readings(graph, nutrient, params.window_length())?;
    let latest_start = latest_full_window_start(graph, params.window_length());
    let reading = readings
        .iter()
        .find(|r| Some(r.start) == latest_start)
        .or_else(|| readings.first())
        .ok_or_else(|| {
            QueryError::InsufficientData(format!(
                "no full-window {} consistency pattern in the graph",
                nutrient.as_str()
            ))
        })?;
    Ok(CompetencyAnswer {
        question: format!("consistency.{}", nutrient.as_str()),
        verdict: Verdict::Bool(reading.consistent),
        explanation: format!(
            "most recent full week starting {} has a {} coefficient of variation of {}",
            reading.start,
            nutrient.as_str(),
            reading.value
        ),
        bindings: vec![
            ("window_start".to_string(), reading.start.to_string()),
            ("cv".to_string(), reading.value.to_string()),
        ],
    })
}

fn progress_answer(
    graph: &Graph,
    nutrient: Nutrient,
    params: &CompetencyParams<'_>,
) -> Result<CompetencyAnswer, QueryError> {
    let readings = consistency_readings(graph, nutrient, params.window_length())?;
    if readings.len() < 2 {
        return Err(QueryError::InsufficientData(format!(
            "progress needs two full windows, found {}",
            readings.len()
        )));
    }
    let latest = &readings[0];
    let previous = &readings[1];
    let delta = latest.value - previous.value;
    let band = params.band();
    let trend = if delta < -band {
        Trend::Improving
    } else if delta > band {
        Trend::Worsening
    } else {
        Trend::Maintaining
    };
    Ok(CompetencyAnswer {
        question: format!("progress.{}", nutrient.as_str()),
        verdict: Verdict::Trend(trend),
        explanation: format!(
            "{} variation moved from {} (week of {}) to {} (week of {})",
            nutrient.as_str(),
            previous.value,
            previous.start,
            latest.value,
            latest.start
        ),
        bindings: vec![
            ("previous_cv".to_string(), previous.value.to_string()),
            ("latest_cv".to_string(), latest.value.to_string()),
            ("delta".to_string(), delta.to_string()),
        ],
    })
}

fn describe_payload(payload: &ConstraintPayload) -> String {
    match payload {
        ConstraintPayload::Tag(tag) => format!("adopt a {tag} diet"),
        ConstraintPayload::Nutrient {
            nutrient,
            per_meal_lower,
            per_meal_upper,
            daily_total,
            ..
        } => format!(
            "keep {nutrient} between {per_meal_lower}-{per_meal_upper} g per meal, at most {daily_total} g daily"
        ),
    }
}

fn improve_diet_answer(graph: &Graph) -> Result<CompetencyAnswer, QueryError> {
    let mut items = Vec::new();
    let mut bindings = Vec::new();
    let has_rec = vocab::term(vocab::PHO_HAS_RECOMMENDATION);
    let constraint_pred = vocab::term(vocab::PHO_CONSTRAINT);
    for t in graph.triples() {
        if t.predicate != has_rec {
            continue;
        }
        if let Some(payload) = graph
            .objects(&t.object, &constraint_pred)
            .first()
            .and_then(|o| o.lexical())
        {
            if let Ok(parsed) = ConstraintPayload::from_json(payload) {
                items.push(describe_payload(&parsed));
            }
            if let (Some(d), Some(r)) = (t.subject.as_iri(), t.object.as_iri()) {
                bindings.push(("directive".to_string(), d.to_string()));
                bindings.push(("recommendation".to_string(), r.to_string()));
            }
        }
    }
    items.sort();
    items.dedup();
    let explanation = if items.is_empty() {
        "no directives are asserted; current diet strategy needs no change".to_string()
    } else {
        format!("{} directive(s) suggest changes", items.len())
    };
    Ok(CompetencyAnswer {
        question: "improve-diet".to_string(),
        verdict: Verdict::Items(items),
        explanation,
        bindings,
    })
}

fn meets_preferences_answer(
    graph: &Graph,
    params: &CompetencyParams<'_>,
) -> Result<CompetencyAnswer, QueryError> {
    let catalog = params.catalog.ok_or(QueryError::MissingParam("catalog"))?;
    let cs = active_constraints(graph)?;
    let mut unmet = Vec::new();
    for like in &cs.likes {
        let found = filter_recipes_any_meal(catalog, &cs)
            .iter()
            .any(|r| r.matched_tags.iter().any(|t| t == like));
        if !found {
            unmet.push(like.clone());
        }
    }
    let ok = unmet.is_empty();
    let explanation = if cs.likes.is_empty() {
        "no stated likes; any constraint-satisfying diet meets preferences".to_string()
    } else if ok {
        "every liked tag is attainable within the active constraints".to_string()
    } else {
        format!(
            "no constraint-satisfying recipe carries: {}",
            unmet.join(", ")
        )
    };
    Ok(CompetencyAnswer {
        question: "meets-preferences".to_string(),
        verdict: Verdict::Bool(ok),
        explanation,
        bindings: unmet
            .into_iter()
            .map(|u| ("unmet_like".to_string(), u))
            .collect(),
    })
}

fn recommendation_answer(
    graph: &Graph,
    question: &str,
    params: &CompetencyParams<'_>,
) -> Result<CompetencyAnswer, QueryError> {
    let catalog = params.catalog.ok_or(QueryError::MissingParam("catalog"))?;
    let cs = active_constraints(graph)?;
    let (cs, base_question) = match question {
        "breakfast-rec" => (cs, "What should I eat for breakfast?".to_string()),
        "allergy-rec" => {
            let allergen = params
                .allergen
                .ok_or(QueryError::MissingParam("allergen"))?;
            (
                with_allergen(&cs, allergen),
                format!("What foods can I eat if I have a {allergen} allergy?"),
            )
        }
        "substitute-rec" => {
            let item = params
                .exclude_item
                .ok_or(QueryError::MissingParam("exclude_item"))?;
            (
                with_excluded_item(&cs, item),
                format!("What can I substitute for {item}?"),
            )
        }
        _ => return Err(QueryError::UnknownQuestion(question.to_string())),
    };
    let augmented = augment_question(&base_question, &cs);
    let recommendations = match (question, params.meal) {
        ("breakfast-rec", meal) => {
            filter_recipes(catalog, &cs, meal.unwrap_or(MealType::Breakfast))
        }
        (_, Some(meal)) => filter_recipes(catalog, &cs, meal),
        (_, None) => filter_recipes_any_meal(catalog, &cs),
    };
    let names: Vec<String> = recommendations.iter().map(|r| r.name.clone()).collect();
    let bindings = recommendations
        .iter()
        .map(|r| {
            (
                r.name.clone(),
                format!("{} g carbohydrates", r.carbohydrates_g),
            )
        })
        .collect();
    Ok(CompetencyAnswer {
        question: question.to_string(),
        verdict: Verdict::Items(names),
        explanation: augmented,
        bindings,
    })
}

/// Routes one question id to its answer.
pub fn answer_competency(
    graph: &Graph,
    question_id: &str,
    params: &CompetencyParams<'_>,
) -> Result<CompetencyAnswer, QueryError> {
    match question_id {
        "G1-compliance" => rule_compliance(graph, "G1", params),
        "G2-compliance" => rule_compliance(graph, "G2", params),
        "improve-diet" => improve_diet_answer(graph),
        "meets-preferences" => meets_preferences_answer(graph, params),
        "breakfast-rec" | "allergy-rec" | "substitute-rec" => {
            recommendation_answer(graph, question_id, params)
        }
        other => {
            if let Some(rest) = other.strip_prefix("consistency.") {
                let nutrient = Nutrient::parse(rest)
                    .ok_or_else(|| QueryError::UnknownQuestion(other.to_string()))?;
                return consistency_answer(graph, nutrient, params);
            }
            if let Some(rest) = other.strip_prefix("progress.") {
                let nutrient = Nutrient::parse(rest)
                    .ok_or_else(|| QueryError::UnknownQuestion(other.to_string()))?;
                return progress_answer(graph, nutrient, params);
            }
            Err(QueryError::UnknownQuestion(other.to_string()))
        }
    }
}
