//! Materializes mined patterns and the user profile as RDF.
//!
//! Node IRIs are content-derived (`<userns>pattern/<kind>/<slug>/<window
//! start>`), never generated, so building the same inputs twice yields
//! byte-identical Turtle. Window timestamps serialize as inclusive start /
//! exclusive end at midnight with a `-00:00` offset.

use crate::foodlog::MealType;
use crate::rdf::{Graph, Term, Triple};
use crate::tss::{
    CombinedGoal, ConsistencyPattern, DietLabel, DietLabelFrequency, Granularity, Nutrient,
    PatternSet, Window,
};
use crate::vocab;
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProfileError {
    #[error("invalid profile JSON: {0}")]
    Json(String),
    #[error("invalid profile field {field}: {message}")]
    Field { field: String, message: String },
}

/// Diabetes status recorded in the user profile.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiabetesStatus {
    Diabetes,
    PreDiabetes,
    #[default]
    None,
}

/// Explicit user facts: medical condition, medication regimen, and stated
/// preferences. Tag and name strings are lowercase-normalized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserProfile {
    #[serde(default = "default_user_id")]
    pub user_id: String,
    #[serde(default)]
    pub diabetes_status: DiabetesStatus,
    #[serde(default)]
    pub fixed_insulin_dosage: bool,
    #[serde(default)]
    pub likes: Vec<String>,
    #[serde(default)]
    pub dislikes: Vec<String>,
    #[serde(default)]
    pub allergies: Vec<String>,
}

fn default_user_id() -> String {
    "user".to_string()
}

impl Default for UserProfile {
    fn default() -> UserProfile {
        UserProfile {
            user_id: default_user_id(),
            diabetes_status: DiabetesStatus::None,
            fixed_insulin_dosage: false,
            likes: Vec::new(),
            dislikes: Vec::new(),
            allergies: Vec::new(),
        }
    }
}

impl UserProfile {
    /// Reads and normalizes a profile from its JSON document form.
    pub fn from_json(text: &str) -> Result<UserProfile, ProfileError> {
        let mut profile: UserProfile =
            serde_json::from_str(text).map_err(|e| ProfileError::Json(e.to_string()))?;
        profile.normalize()?;
        Ok(profile)
    }

    /// Lowercases and trims preference strings, rejecting empties, and
    /// checks the user id is IRI-safe.
    pub fn normalize(&mut self) -> Result<(), ProfileError> {
        let ok_id = !self.user_id.is_empty()
            && self
                .user_id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
        if !ok_id {
            return Err(ProfileError::Field {
                field: "user_id".into(),
                message: "must be a non-empty string of [A-Za-z0-9_-]".into(),
            });
        }
        for (field, list) in [
            ("likes", &mut self.likes),
            ("dislikes", &mut self.dislikes),
            ("allergies", &mut self.allergies),
        ] {
            for item in list.iter_mut() {
                *item = item.trim().to_lowercase();
                if item.is_empty() {
                    return Err(ProfileError::Field {
                        field: field.into(),
                        message: "entries must be non-empty".into(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Builder knobs. `sustained_min_fraction` controls which diet label
/// frequencies count as a sustained window pattern (mirrors the miner's
/// `usually_fraction`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    pub sustained_min_fraction: f64,
}

impl Default for BuildOptions {
    fn default() -> BuildOptions {
        BuildOptions {
            sustained_min_fraction: 0.5,
        }
    }
}

/// A borrowed view over any mined pattern, for triple emission.
#[derive(Debug, Clone, Copy)]
pub enum PatternRef<'a> {
    Consistency(&'a ConsistencyPattern),
    Frequency(&'a DietLabelFrequency),
    Combined(&'a CombinedGoal),
}

/// Shortest float form that still shows a decimal point ("1.0", "0.99").
pub fn float_lexical(value: f64) -> String {
    let s = format!("{value}");
    if s.bytes().all(|b| b.is_ascii_digit() || b == b'-') {
        format!("{s}.0")
    } else {
        s
    }
}

/// `xsd:dateTime` lexical form for midnight at the given date, `-00:00`
/// offset.
pub fn datetime_lexical(date: NaiveDate) -> String {
    format!("{date}T00:00:00-00:00")
}

fn nutrient_term(nutrient: Nutrient) -> &'static str {
    match nutrient {
        Nutrient::Carbohydrates => vocab::FOOD_CARBOHYDRATES,
        Nutrient::Fat => vocab::FOOD_FAT,
        Nutrient::Protein => vocab::FOOD_PROTEIN,
        Nutrient::Calories => vocab::FOOD_CALORIES,
    }
}

fn label_class(label: DietLabel) -> &'static str {
    match label {
        DietLabel::LowCarbDiet => vocab::PHO_LOW_CARB_DIET,
        DietLabel::HighCarbDiet => vocab::PHO_HIGH_CARB_DIET,
        DietLabel::LowFatDiet => vocab::PHO_LOW_FAT_DIET,
        DietLabel::HighFatDiet => vocab::PHO_HIGH_FAT_DIET,
    }
}

fn meal_term(meal: MealType) -> &'static str {
    match meal {
        MealType::Breakfast => vocab::PHO_BREAKFAST,
        MealType::Lunch => vocab::PHO_LUNCH,
        MealType::Dinner => vocab::PHO_DINNER,
        MealType::Snack => vocab::PHO_SNACK,
    }
}

fn consistency_node(p: &ConsistencyPattern) -> String {
    let slug = match p.window.granularity {
        Granularity::Daily => p.nutrient.as_str().to_string(),
        Granularity::PerMeal(meal) => format!("{}-{meal}", p.nutrient.as_str()),
    };
    format!(
        "{}pattern/consistency/{slug}/{}",
        vocab::NS_USER,
        p.window.start
    )
}

fn frequency_node(label: DietLabel, window: &Window) -> String {
    format!(
        "{}pattern/frequency/{}/{}",
        vocab::NS_USER,
        label.as_str().to_lowercase(),
        window.start
    )
}

fn goal_node(g: &CombinedGoal) -> String {
    format!(
        "{}pattern/goal/{}-{}/{}",
        vocab::NS_USER,
        g.participants.0.as_str().to_lowercase(),
        g.participants.1.as_str().to_lowercase(),
        g.window.start
    )
}

fn diet_node(start: NaiveDate) -> String {
    format!("{}pattern/diet/window/{start}", vocab::NS_USER)
}

fn insulin_node() -> String {
    format!("{}profile/insulin-dosage", vocab::NS_USER)
}

fn triple(subject: &str, predicate: &str, object: Term) -> Triple {
    Triple::new(vocab::term(subject), vocab::term(predicate), object)
        .expect("builder emits structurally valid triples")
}

fn window_time_triples(node: &str, window: &Window) -> Vec<Triple> {
    let end_exclusive = window
        .end
        .checked_add_days(chrono::Days::new(1))
        .expect("date within calendar range");
    vec![
        triple(
            node,
            vocab::PROV_STARTED_AT_TIME,
            Term::typed_literal(datetime_lexical(window.start), vocab::XSD_DATE_TIME)
                .expect("xsd:dateTime is absolute"),
        ),
        triple(
            node,
            vocab::PROV_ENDED_AT_TIME,
            Term::typed_literal(datetime_lexical(end_exclusive), vocab::XSD_DATE_TIME)
                .expect("xsd:dateTime is absolute"),
        ),
    ]
}

fn float_term(value: f64) -> Term {
    Term::typed_literal(float_lexical(value), vocab::XSD_FLOAT).expect("xsd:float is absolute")
}

/// Emits the triples for one pattern, linked from the user node.
pub fn emit_pattern_triples(pattern: PatternRef<'_>, user_id: &str) -> Vec<Triple> {
    let user = vocab::user_iri(user_id);
    let mut out = Vec::new();
    match pattern {
        PatternRef::Consistency(p) => {
            let node = consistency_node(p);
            out.push(triple(&user, vocab::SIO_HAS_ATTRIBUTE, vocab::term(&node)));
            out.push(triple(
                &node,
                vocab::RDF_TYPE,
                vocab::term(vocab::STATO_COEFFICIENT_OF_VARIATION),
            ));
            if p.consistent {
                out.push(triple(
                    &node,
                    vocab::RDF_TYPE,
                    vocab::term(vocab::PHO_CONSISTENT_PATTERN),
                ));
            }
            out.push(triple(&node, vocab::SIO_HAS_VALUE, float_term(p.value)));
            out.extend(window_time_triples(&node, &p.window));
            out.push(triple(
                &node,
                vocab::SIO_HAS_ATTRIBUTE,
                vocab::term(nutrient_term(p.nutrient)),
            ));
            if let Granularity::PerMeal(meal) = p.window.granularity {
                out.push(triple(
                    &node,
                    vocab::PHO_MEAL_SLOT,
                    vocab::term(meal_term(meal)),
                ));
            }
        }
        PatternRef::Frequency(p) => {
            let node = frequency_node(p.label, &p.window);
            out.push(triple(&user, vocab::SIO_HAS_ATTRIBUTE, vocab::term(&node)));
            out.push(triple(
                &node,
                vocab::RDF_TYPE,
                vocab::term(label_class(p.label)),
            ));
            out.push(triple(&node, vocab::SIO_FREQUENCY, float_term(p.frequency)));
            out.extend(window_time_triples(&node, &p.window));
        }
        PatternRef::Combined(g) => {
            let node = goal_node(g);
            out.push(triple(&user, vocab::SIO_HAS_ATTRIBUTE, vocab::term(&node)));
            out.push(triple(
                &node,
                vocab::RDF_TYPE,
                vocab::term(vocab::PHO_LOW_CARB_HIGH_FAT_GOAL),
            ));
            for label in [g.participants.0, g.participants.1] {
                out.push(triple(
                    &node,
                    vocab::SIO_HAS_PARTICIPANT,
                    vocab::term(&frequency_node(label, &g.window)),
                ));
            }
            out.push(triple(
                &node,
                vocab::SIO_HAS_VALUE,
                Term::typed_literal(g.holds.to_string(), vocab::XSD_BOOLEAN)
                    .expect("xsd:boolean is absolute"),
            ));
            out.extend(window_time_triples(&node, &g.window));
        }
    }
    out
}

/// Emits the user's profile facts.
pub fn emit_profile_triples(profile: &UserProfile) -> Vec<Triple> {
    let user = vocab::user_iri(&profile.user_id);
    let mut out = vec![triple(
        &user,
        vocab::RDF_TYPE,
        vocab::term(vocab::PROV_PERSON),
    )];
    match profile.diabetes_status {
        DiabetesStatus::Diabetes => out.push(triple(
            &user,
            vocab::PROV_WAS_ASSOCIATED_WITH,
            vocab::term(vocab::DOID_DIABETES),
        )),
        DiabetesStatus::PreDiabetes => out.push(triple(
            &user,
            vocab::PROV_WAS_ASSOCIATED_WITH,
            vocab::term(vocab::DOID_PRE_DIABETES),
        )),
        DiabetesStatus::None => {}
    }
    if profile.fixed_insulin_dosage {
        let node = insulin_node();
        out.push(triple(&user, vocab::SIO_HAS_ATTRIBUTE, vocab::term(&node)));
        out.push(triple(
            &node,
            vocab::RDF_TYPE,
            vocab::term(vocab::PHO_FIXED_INSULIN_DOSAGE),
        ));
        out.push(triple(
            &node,
            vocab::SIO_HAS_ATTRIBUTE,
            vocab::term(vocab::DRON_INSULIN),
        ));
        out.push(triple(
            &node,
            vocab::SIO_HAS_ATTRIBUTE,
            vocab::term(vocab::PHO_FIXED_MEDICATION_DOSAGE),
        ));
    }
    for (predicate, values) in [
        (vocab::PHO_LIKES, &profile.likes),
        (vocab::PHO_DISLIKES, &profile.dislikes),
        (vocab::PHO_ALLERGIC_TO, &profile.allergies),
    ] {
        for value in values {
            out.push(triple(&user, predicate, Term::literal(value)));
        }
    }
    out
}

/// Per window, a node typing the window as a sustained temporal pattern and
/// pointing at every diet label that held on more than
/// `sustained_min_fraction` of its data days. This is what lets a rule ask
/// for "a pattern window whose diet labels include X and Y".
fn emit_sustained_diet_triples(
    patterns: &PatternSet,
    user_id: &str,
    opts: &BuildOptions,
) -> Vec<Triple> {
    let user = vocab::user_iri(user_id);
    let mut by_window: std::collections::BTreeMap<
        (NaiveDate, NaiveDate),
        Vec<&DietLabelFrequency>,
    > = std::collections::BTreeMap::new();
    for f in &patterns.frequencies {
        if f.frequency > opts.sustained_min_fraction {
            by_window
                .entry((f.window.start, f.window.end))
                .or_default()
                .push(f);
        }
    }
    let mut out = Vec::new();
    for ((start, _end), sustained) in by_window {
        let node = diet_node(start);
        out.push(triple(&user, vocab::SIO_HAS_ATTRIBUTE, vocab::term(&node)));
        out.push(triple(
            &node,
            vocab::RDF_TYPE,
            vocab::term(vocab::PHO_CONSISTENT_PATTERN),
        ));
        for f in &sustained {
            out.push(triple(
                &node,
                vocab::SIO_HAS_ATTRIBUTE,
                vocab::term(&frequency_node(f.label, &f.window)),
            ));
        }
        if let Some(f) = sustained.first() {
            out.extend(window_time_triples(&node, &f.window));
        }
    }
    out
}

/// Builds the full knowledge graph for one user: profile facts plus every
/// mined pattern, with the default `:` prefix bound to the user namespace.
pub fn build_phkg(patterns: &PatternSet, profile: &UserProfile) -> Graph {
    build_phkg_with(patterns, profile, &BuildOptions::default())
}

pub fn build_phkg_with(patterns: &PatternSet, profile: &UserProfile, opts: &BuildOptions) -> Graph {
    let mut graph = Graph::new();
    graph.add_prefix("", vocab::NS_USER);
    let mut all = emit_profile_triples(profile);
    for p in &patterns.consistency {
        all.extend(emit_pattern_triples(
            PatternRef::Consistency(p),
            &profile.user_id,
        ));
    }
    for p in &patterns.frequencies {
        all.extend(emit_pattern_triples(
            PatternRef::Frequency(p),
            &profile.user_id,
        ));
    }
    for p in &patterns.combined {
        all.extend(emit_pattern_triples(
            PatternRef::Combined(p),
            &profile.user_id,
        ));
    }
    all.extend(emit_sustained_diet_triples(
        patterns,
        &profile.user_id,
        opts,
    ));
    for t in all {
        graph.insert(t).expect("builder triples are valid");
    }
    graph
}
