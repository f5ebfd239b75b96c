//! Guideline rules: class-expression conditions with directive and
//! recommendation payloads.
//!
//! A rule splits into *condition* (who it applies to) and *compliance* (a
//! pattern evaluated against the graph). Polarity fixes the reading of the
//! compliance expression: with [`Polarity::DirectiveOnMatch`] it describes
//! the non-compliant state and the directive fires when it matches; with
//! [`Polarity::DirectiveOnNonCompliance`] it describes the required habit
//! and the directive fires when it does not match. Either way a rule fires
//! exactly when it is applicable and not compliant.

mod compile;
mod parse;

pub use compile::{compile_condition, evaluate_expr, CompileError, MatchPlan, PlanStep};
pub use parse::{parse_guideline, RuleParseError};

use crate::rdf::Term;
use crate::vocab;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PayloadError {
    #[error("invalid constraint payload: {0}")]
    Invalid(String),
}

/// A closed-world class expression over graph nodes.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassExpr {
    /// Instances of a named class (`?x rdf:type C`).
    Named(String),
    And(Vec<ClassExpr>),
    Or(Vec<ClassExpr>),
    /// Existential restriction: some `property` value is in the inner class.
    Some {
        property: String,
        expr: Box<ClassExpr>,
    },
    /// Universal restriction: every `property` value is in the inner class
    /// (vacuously true when there are none).
    Only {
        property: String,
        expr: Box<ClassExpr>,
    },
    /// Nodes with `property` pointing at exactly this term.
    HasValue {
        property: String,
        value: Term,
    },
}

impl ClassExpr {
    pub fn named(iri: &str) -> ClassExpr {
        ClassExpr::Named(iri.to_string())
    }

    pub fn some(property: &str, expr: ClassExpr) -> ClassExpr {
        ClassExpr::Some {
            property: property.to_string(),
            expr: Box::new(expr),
        }
    }

    pub fn only(property: &str, expr: ClassExpr) -> ClassExpr {
        ClassExpr::Only {
            property: property.to_string(),
            expr: Box::new(expr),
        }
    }

    pub fn has_value(property: &str, value: Term) -> ClassExpr {
        ClassExpr::HasValue {
            property: property.to_string(),
            value,
        }
    }
}

/// Whether the directive fires on a compliance-expression match or on its
/// absence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarity {
    DirectiveOnMatch,
    DirectiveOnNonCompliance,
}

/// Machine-readable constraint attached to a recommendation.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintPayload {
    Tag(String),
    Nutrient {
        nutrient: String,
        unit: String,
        per_meal_lower: f64,
        per_meal_upper: f64,
        daily_total: f64,
    },
}

fn number_lexical(value: f64) -> String {
    if value.fract() == 0.0 && value.abs() < 1e15 {
        format!("{}", value as i64)
    } else {
        format!("{value}")
    }
}

impl ConstraintPayload {
    pub fn nutrient(
        nutrient: &str,
        unit: &str,
        per_meal_lower: f64,
        per_meal_upper: f64,
        daily_total: f64,
    ) -> Result<ConstraintPayload, PayloadError> {
        if per_meal_lower > per_meal_upper {
            return Err(PayloadError::Invalid(format!(
                "lower bound {per_meal_lower} exceeds upper bound {per_meal_upper}"
            )));
        }
        for (name, v) in [
            ("lower", per_meal_lower),
            ("upper", per_meal_upper),
            ("daily_total", daily_total),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(PayloadError::Invalid(format!("{name} must be > 0")));
            }
        }
        if unit != "g" {
            return Err(PayloadError::Invalid(format!("unsupported unit '{unit}'")));
        }
        Ok(ConstraintPayload::Nutrient {
            nutrient: nutrient.to_string(),
            unit: unit.to_string(),
            per_meal_lower,
            per_meal_upper,
            daily_total,
        })
    }

    /// Canonical single-line JSON form, stored verbatim in the graph.
    pub fn to_canonical_json(&self) -> String {
        match self {
            ConstraintPayload::Tag(tag) => {
                format!("{{\"tag\":{}}}", serde_json::to_string(tag).expect("string"))
            }
            ConstraintPayload::Nutrient {
                nutrient,
                unit,
                per_meal_lower,
                per_meal_upper,
                daily_total,
            } => format!(
                "{{{}:{{\"unit\":{},\"meal\":{{\"type\":\"range\",\"lower\":{},\"upper\":{}}},\"daily_total\":{}}}}}",
                serde_json::to_string(nutrient).expect("string"),
                serde_json::to_string(unit).expect("string"),
                number_lexical(*per_meal_lower),
                number_lexical(*per_meal_upper),
                number_lexical(*daily_total),
            ),
        }
    }

    /// Parses either payload shape from JSON. Numbers may also arrive as
    /// quoted strings.
    pub fn from_json(text: &str) -> Result<ConstraintPayload, PayloadError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| PayloadError::Invalid(e.to_string()))?;
        Self::from_value(&value)
    }

    pub fn from_value(value: &serde_json::Value) -> Result<ConstraintPayload, PayloadError> {
        let obj = value
            .as_object()
            .ok_or_else(|| PayloadError::Invalid("payload must be a JSON object".into()))?;
        if let Some(tag) = obj.get("tag") {
            let tag = tag
                .as_str()
                .ok_or_else(|| PayloadError::Invalid("tag must be a string".into()))?;
            if tag.is_empty() {
                return Err(PayloadError::Invalid("tag must be non-empty".into()));
            }
            return Ok(ConstraintPayload::Tag(tag.to_string()));
        }
        if obj.len() == 1 {
            let (nutrient, body) = obj.iter().next().expect("len checked");
            let body = body
                .as_object()
                .ok_or_else(|| PayloadError::Invalid("nutrient body must be an object".into()))?;
            let number = |v: &serde_json::Value, name: &str| -> Result<f64, PayloadError> {
                if let Some(n) = v.as_f64() {
                    return Ok(n);
                }
                if let Some(s) = v.as_str() {
                    return s
                        .trim()
                        .parse::<f64>()
                        .map_err(|_| PayloadError::Invalid(format!("{name} is not numeric")));
                }
                Err(PayloadError::Invalid(format!("{name} is not numeric")))
            };
            let unit = body
                .get("unit")
                .and_then(|u| u.as_str())
                .ok_or_else(|| PayloadError::Invalid("missing unit".into()))?;
            let meal = body
                .get("meal")
                .and_then(|m| m.as_object())
                .ok_or_else(|| PayloadError::Invalid("missing meal range".into()))?;
            if meal.get("type").and_then(|t| t.as_str()) != Some("range") {
                return Err(PayloadError::Invalid(
                    "meal constraint must be a range".into(),
                ));
            }
            let lower = number(
                meal.get("lower")
                    .ok_or_else(|| PayloadError::Invalid("missing lower".into()))?,
                "lower",
            )?;
            let upper = number(
                meal.get("upper")
                    .ok_or_else(|| PayloadError::Invalid("missing upper".into()))?,
                "upper",
            )?;
            let daily = body
                .get("daily_total")
                .or_else(|| body.get("daily total"))
                .ok_or_else(|| PayloadError::Invalid("missing daily_total".into()))?;
            let daily = number(daily, "daily_total")?;
            return ConstraintPayload::nutrient(nutrient, unit, lower, upper, daily);
        }
        Err(PayloadError::Invalid(
            "expected {\"tag\": ...} or {\"<nutrient>\": {...}}".into(),
        ))
    }
}

impl Serialize for ConstraintPayload {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let value: serde_json::Value = serde_json::from_str(&self.to_canonical_json())
            .expect("canonical payload JSON is valid");
        value.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ConstraintPayload {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        ConstraintPayload::from_value(&value).map_err(D::Error::custom)
    }
}

/// One encoded guideline.
#[derive(Debug, Clone, PartialEq)]
pub struct GuidelineRule {
    pub id: String,
    pub label: String,
    pub condition: ClassExpr,
    pub compliance: ClassExpr,
    pub polarity: Polarity,
    pub directive_class: String,
    pub recommendation_class: String,
    pub constraint: ConstraintPayload,
}

fn diabetic_person() -> ClassExpr {
    ClassExpr::And(vec![
        ClassExpr::named(vocab::PROV_PERSON),
        ClassExpr::Or(vec![
            ClassExpr::has_value(
                vocab::PROV_WAS_ASSOCIATED_WITH,
                vocab::term(vocab::DOID_DIABETES),
            ),
            ClassExpr::has_value(
                vocab::PROV_WAS_ASSOCIATED_WITH,
                vocab::term(vocab::DOID_PRE_DIABETES),
            ),
        ]),
    ])
}

/// Guideline: a low-fat, high-carbohydrate diet in a diabetic or
/// pre-diabetic individual should be replaced with a Mediterranean diet.
/// The compliance expression is the offending diet pattern, so the
/// directive fires on match.
pub fn guideline_mediterranean() -> GuidelineRule {
    GuidelineRule {
        id: "G1".to_string(),
        label: "For pre-diabetic and diabetic individuals diet low in total fat but relatively \
                high in carbohydrates should be replaced with Mediterranean diet."
            .to_string(),
        condition: diabetic_person(),
        compliance: ClassExpr::some(
            vocab::SIO_HAS_ATTRIBUTE,
            ClassExpr::And(vec![
                ClassExpr::named(vocab::PHO_CONSISTENT_PATTERN),
                ClassExpr::some(
                    vocab::SIO_HAS_ATTRIBUTE,
                    ClassExpr::named(vocab::PHO_HIGH_CARB_DIET),
                ),
                ClassExpr::some(
                    vocab::SIO_HAS_ATTRIBUTE,
                    ClassExpr::named(vocab::PHO_LOW_FAT_DIET),
                ),
            ]),
        ),
        polarity: Polarity::DirectiveOnMatch,
        directive_class: vocab::PHO_MEDITERRANEAN_DIET_DIRECTIVE.to_string(),
        recommendation_class: vocab::PHO_MEDITERRANEAN_DIET_RECOMMENDATION.to_string(),
        constraint: ConstraintPayload::Tag("Mediterranean".to_string()),
    }
}

/// Guideline: individuals on a fixed insulin dosage should keep a
/// consistent carbohydrate intake; the directive fires when no consistent
/// carbohydrate pattern is present.
pub fn guideline_consistent_carbs() -> GuidelineRule {
    GuidelineRule {
        id: "G2".to_string(),
        label: "For individuals whose daily insulin dosing is fixed, a consistent pattern of \
                carbohydrate intake with respect to time and amount may be recommended to \
                improve glycemic control and reduce the risk of hypoglycemia."
            .to_string(),
        condition: ClassExpr::And(vec![
            diabetic_person(),
            ClassExpr::some(
                vocab::SIO_HAS_ATTRIBUTE,
                ClassExpr::named(vocab::PHO_FIXED_INSULIN_DOSAGE),
            ),
        ]),
        compliance: ClassExpr::some(
            vocab::SIO_HAS_ATTRIBUTE,
            ClassExpr::And(vec![
                ClassExpr::named(vocab::PHO_CONSISTENT_PATTERN),
                // The graph materializes the nutrient as a direct
                // attribute edge to the food:Carbohydrates term.
                ClassExpr::has_value(
                    vocab::SIO_HAS_ATTRIBUTE,
                    vocab::term(vocab::FOOD_CARBOHYDRATES),
                ),
            ]),
        ),
        polarity: Polarity::DirectiveOnNonCompliance,
        directive_class: vocab::PHO_CONSISTENT_CARB_DIET_DIRECTIVE.to_string(),
        recommendation_class: vocab::PHO_CONSISTENT_CARB_RECOMMENDATION.to_string(),
        constraint: ConstraintPayload::nutrient("carbohydrate", "g", 30.0, 45.0, 150.0)
            .expect("built-in constraint is valid"),
    }
}

/// The two built-in guidelines, in evaluation order.
pub fn builtin_guidelines() -> Vec<GuidelineRule> {
    vec![guideline_mediterranean(), guideline_consistent_carbs()]
}
