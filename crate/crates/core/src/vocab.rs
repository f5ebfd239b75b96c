//! Namespace and term constants shared by the graph builder, the guideline
//! rules, and the query layer.
//!
//! Every IRI emitted into a knowledge graph or referenced by a compiled rule
//! resolves to exactly one constant here.

use crate::rdf::Term;
use std::collections::{BTreeMap, BTreeSet};

pub const NS_PROV: &str = "http://www.w3.org/ns/prov#";
pub const NS_SIO: &str = "http://semanticscience.org/resource/";
pub const NS_STATO: &str = "http://purl.obolibrary.org/obo/STATO_";
pub const NS_DOID: &str = "http://purl.obolibrary.org/obo/DOID_";
pub const NS_DRON: &str = "http://purl.obolibrary.org/obo/DRON_";
pub const NS_FOOD: &str = "http://purl.org/heals/food/";
pub const NS_PHO: &str = "https://w3id.org/pho-example/onto#";
pub const NS_RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const NS_RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const NS_XSD: &str = "http://www.w3.org/2001/XMLSchema#";
/// Default namespace for user-level nodes (the graph's `:` prefix).
pub const NS_USER: &str = "https://w3id.org/pho-example/user/";

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";

pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
pub const XSD_FLOAT: &str = "http://www.w3.org/2001/XMLSchema#float";
pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
pub const XSD_DATE_TIME: &str = "http://www.w3.org/2001/XMLSchema#dateTime";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";

pub const PROV_PERSON: &str = "http://www.w3.org/ns/prov#Person";
pub const PROV_WAS_ASSOCIATED_WITH: &str = "http://www.w3.org/ns/prov#wasAssociatedWith";
pub const PROV_STARTED_AT_TIME: &str = "http://www.w3.org/ns/prov#startedAtTime";
pub const PROV_ENDED_AT_TIME: &str = "http://www.w3.org/ns/prov#endedAtTime";

pub const SIO_HAS_ATTRIBUTE: &str = "http://semanticscience.org/resource/hasAttribute";
pub const SIO_HAS_VALUE: &str = "http://semanticscience.org/resource/hasValue";
pub const SIO_FREQUENCY: &str = "http://semanticscience.org/resource/frequency";
pub const SIO_HAS_PARTICIPANT: &str = "http://semanticscience.org/resource/hasParticipant";

pub const STATO_COEFFICIENT_OF_VARIATION: &str =
    "http://purl.obolibrary.org/obo/STATO_coefficientOfVariation";

pub const DOID_DIABETES: &str = "http://purl.obolibrary.org/obo/DOID_Diabetes";
pub const DOID_PRE_DIABETES: &str = "http://purl.obolibrary.org/obo/DOID_PreDiabetes";
pub const DRON_INSULIN: &str = "http://purl.obolibrary.org/obo/DRON_Insulin";

pub const FOOD_CARBOHYDRATES: &str = "http://purl.org/heals/food/Carbohydrates";
pub const FOOD_FAT: &str = "http://purl.org/heals/food/Fat";
pub const FOOD_PROTEIN: &str = "http://purl.org/heals/food/Protein";
pub const FOOD_CALORIES: &str = "http://purl.org/heals/food/Calories";

pub const PHO_CONSISTENT_PATTERN: &str = "https://w3id.org/pho-example/onto#ConsistentPattern";
pub const PHO_LOW_CARB_DIET: &str = "https://w3id.org/pho-example/onto#LowCarbDiet";
pub const PHO_HIGH_CARB_DIET: &str = "https://w3id.org/pho-example/onto#HighCarbDiet";
pub const PHO_LOW_FAT_DIET: &str = "https://w3id.org/pho-example/onto#LowFatDiet";
pub const PHO_HIGH_FAT_DIET: &str = "https://w3id.org/pho-example/onto#HighFatDiet";
pub const PHO_LOW_CARB_HIGH_FAT_GOAL: &str =
    "https://w3id.org/pho-example/onto#LowCarbHighFatNutrientIntakeGoal";
pub const PHO_FIXED_INSULIN_DOSAGE: &str = "https://w3id.org/pho-example/onto#FixedInsulinDosage";
pub const PHO_FIXED_MEDICATION_DOSAGE: &str =
    "https://w3id.org/pho-example/onto#FixedMedicationDosage";
pub const PHO_DIRECTIVE: &str = "https://w3id.org/pho-example/onto#Directive";
pub const PHO_RECOMMENDATION: &str = "https://w3id.org/pho-example/onto#Recommendation";
pub const PHO_CONSTRAINT_CLASS: &str = "https://w3id.org/pho-example/onto#Constraint";
pub const PHO_DIETARY_ASSESSMENT: &str = "https://w3id.org/pho-example/onto#DietaryAssessment";
pub const PHO_MEDITERRANEAN_DIET_DIRECTIVE: &str =
    "https://w3id.org/pho-example/onto#MediterraneanDietDirective";
pub const PHO_MEDITERRANEAN_DIET_RECOMMENDATION: &str =
    "https://w3id.org/pho-example/onto#MediterraneanDietRecommendation";
pub const PHO_CONSISTENT_CARB_DIET_DIRECTIVE: &str =
    "https://w3id.org/pho-example/onto#ConsistentCarbDietDirective";
pub const PHO_CONSISTENT_CARB_RECOMMENDATION: &str =
    "https://w3id.org/pho-example/onto#ConsistentCarbRecommendation";

pub const PHO_LIKES: &str = "https://w3id.org/pho-example/onto#likes";
pub const PHO_DISLIKES: &str = "https://w3id.org/pho-example/onto#dislikes";
pub const PHO_ALLERGIC_TO: &str = "https://w3id.org/pho-example/onto#allergicTo";
pub const PHO_HAS_RECOMMENDATION: &str = "https://w3id.org/pho-example/onto#hasRecommendation";
pub const PHO_CONSTRAINT: &str = "https://w3id.org/pho-example/onto#constraint";
pub const PHO_MEAL_SLOT: &str = "https://w3id.org/pho-example/onto#mealSlot";

pub const PHO_BREAKFAST: &str = "https://w3id.org/pho-example/onto#Breakfast";
pub const PHO_LUNCH: &str = "https://w3id.org/pho-example/onto#Lunch";
pub const PHO_DINNER: &str = "https://w3id.org/pho-example/onto#Dinner";
pub const PHO_SNACK: &str = "https://w3id.org/pho-example/onto#Snack";

/// The standard prefix map every graph starts with.
pub fn default_prefixes() -> BTreeMap<String, String> {
    [
        ("prov", NS_PROV),
        ("sio", NS_SIO),
        ("stato", NS_STATO),
        ("doid", NS_DOID),
        ("dron", NS_DRON),
        ("food", NS_FOOD),
        ("pho", NS_PHO),
        ("rdf", NS_RDF),
        ("rdfs", NS_RDFS),
        ("xsd", NS_XSD),
    ]
    .into_iter()
    .map(|(p, ns)| (p.to_string(), ns.to_string()))
    .collect()
}

/// Every term constant a rule file or emitted triple may reference.
pub fn known_terms() -> BTreeSet<&'static str> {
    [
        RDF_TYPE,
        RDFS_LABEL,
        PROV_PERSON,
        PROV_WAS_ASSOCIATED_WITH,
        PROV_STARTED_AT_TIME,
        PROV_ENDED_AT_TIME,
        SIO_HAS_ATTRIBUTE,
        SIO_HAS_VALUE,
        SIO_FREQUENCY,
        SIO_HAS_PARTICIPANT,
        STATO_COEFFICIENT_OF_VARIATION,
        DOID_DIABETES,
        DOID_PRE_DIABETES,
        DRON_INSULIN,
        FOOD_CARBOHYDRATES,
        FOOD_FAT,
        FOOD_PROTEIN,
        FOOD_CALORIES,
        PHO_CONSISTENT_PATTERN,
        PHO_LOW_CARB_DIET,
        PHO_HIGH_CARB_DIET,
        PHO_LOW_FAT_DIET,
        PHO_HIGH_FAT_DIET,
        PHO_LOW_CARB_HIGH_FAT_GOAL,
        PHO_FIXED_INSULIN_DOSAGE,
        PHO_FIXED_MEDICATION_DOSAGE,
        PHO_DIRECTIVE,
        PHO_RECOMMENDATION,
        PHO_CONSTRAINT_CLASS,
        PHO_DIETARY_ASSESSMENT,
        PHO_MEDITERRANEAN_DIET_DIRECTIVE,
        PHO_MEDITERRANEAN_DIET_RECOMMENDATION,
        PHO_CONSISTENT_CARB_DIET_DIRECTIVE,
        PHO_CONSISTENT_CARB_RECOMMENDATION,
        PHO_LIKES,
        PHO_DISLIKES,
        PHO_ALLERGIC_TO,
        PHO_HAS_RECOMMENDATION,
        PHO_CONSTRAINT,
        PHO_MEAL_SLOT,
        PHO_BREAKFAST,
        PHO_LUNCH,
        PHO_DINNER,
        PHO_SNACK,
    ]
    .into_iter()
    .collect()
}

/// Wraps a vocabulary constant as an IRI term.
pub fn term(iri: &str) -> Term {
    Term::iri(iri).expect("vocabulary IRIs are absolute")
}

/// IRI of the user node for a given user id.
pub fn user_iri(user_id: &str) -> String {
    format!("{NS_USER}{user_id}")
}
