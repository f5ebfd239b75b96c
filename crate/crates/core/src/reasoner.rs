//! Evaluates guideline rules over a knowledge graph, asserts directive and
//! recommendation triples, extracts the active constraint set, and augments
//! questions with that implicit knowledge.
//!
//! A rule fires exactly when it is applicable and not compliant. For
//! habit-style rules (fire on non-compliance), compliance evidence must come
//! from the most recent full window in the graph: a consistent pattern from
//! three weeks ago does not excuse an inconsistent current week.

use crate::guidelines::{
    compile_condition, ClassExpr, CompileError, ConstraintPayload, GuidelineRule, Polarity,
};
use crate::phkg::{DiabetesStatus, UserProfile};
use crate::rdf::{Graph, Term, Triple};
use crate::vocab;
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReasonerError {
    #[error("graph contains no prov:Person user node")]
    NoUserNode,
    #[error("graph contains {0} prov:Person nodes; expected exactly one")]
    MultipleUserNodes(usize),
    #[error("rule {rule_id}: {source}")]
    Rule {
        rule_id: String,
        source: CompileError,
    },
    #[error("constraint payload on {node} is invalid: {message}")]
    BadPayload { node: String, message: String },
    #[error(
        "conflicting {nutrient} constraints from rules {first} and {second}: ranges do not overlap"
    )]
    ConflictingConstraints {
        nutrient: String,
        first: String,
        second: String,
    },
}

/// Reasoner knobs. `window_length_days` identifies full mining windows when
/// scoping habit evidence to the most recent one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReasonerOptions {
    pub window_length_days: u32,
}

impl Default for ReasonerOptions {
    fn default() -> ReasonerOptions {
        ReasonerOptions {
            window_length_days: 7,
        }
    }
}

/// Why a directive fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiringCause {
    Match,
    NonCompliance,
}

/// An asserted directive with its recommendation payload.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Directive {
    pub rule_id: String,
    pub node: String,
    pub directive_class: String,
    pub user: String,
    pub recommendation_node: String,
    pub recommendation_class: String,
    pub constraint: ConstraintPayload,
    pub fired_because: FiringCause,
}

/// Per-rule evaluation outcome. `compliant` is `None` when the rule did not
/// apply to the user at all.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComplianceVerdict {
    pub rule_id: String,
    pub applicable: bool,
    pub compliant: Option<bool>,
    pub evidence: Vec<String>,
}

/// One active constraint and the rules it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveConstraint {
    pub payload: ConstraintPayload,
    pub rule_ids: Vec<String>,
}

/// The personalized machine-readable constraints plus profile echoes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub constraints: Vec<ActiveConstraint>,
    pub diabetes_status: DiabetesStatus,
    pub likes: Vec<String>,
    pub dislikes: Vec<String>,
    pub allergies: Vec<String>,
}

impl ConstraintSet {
    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
            && matches!(self.diabetes_status, DiabetesStatus::None)
            && self.likes.is_empty()
            && self.dislikes.is_empty()
            && self.allergies.is_empty()
    }

    /// Builds a set with no guideline constraints, only profile echoes.
    pub fn from_profile(profile: &UserProfile) -> ConstraintSet {
        ConstraintSet {
            constraints: Vec::new(),
            diabetes_status: profile.diabetes_status,
            likes: profile.likes.clone(),
            dislikes: profile.dislikes.clone(),
            allergies: profile.allergies.clone(),
        }
    }

    /// The merged per-meal range and daily total for a nutrient, if any.
    pub fn nutrient_range(&self, nutrient: &str) -> Option<(f64, f64, f64)> {
        self.constraints.iter().find_map(|c| match &c.payload {
            ConstraintPayload::Nutrient {
                nutrient: n,
                per_meal_lower,
                per_meal_upper,
                daily_total,
                ..
            } if n == nutrient => Some((*per_meal_lower, *per_meal_upper, *daily_total)),
            _ => None,
        })
    }

    /// Tags every recommended recipe must carry.
    pub fn required_tags(&self) -> Vec<&str> {
        self.constraints
            .iter()
            .filter_map(|c| match &c.payload {
                ConstraintPayload::Tag(tag) => Some(tag.as_str()),
                _ => None,
            })
            .collect()
    }
}

/// Finds the single `prov:Person` node.
pub fn find_user(graph: &Graph) -> Result<Term, ReasonerError> {
    let users = graph.subjects(
        &vocab::term(vocab::RDF_TYPE),
        &vocab::term(vocab::PROV_PERSON),
    );
    match users.len() {
        0 => Err(ReasonerError::NoUserNode),
        1 => Ok(users[0].clone()),
        n => Err(ReasonerError::MultipleUserNodes(n)),
    }
}

fn parse_window_datetime(lexical: &str) -> Option<NaiveDate> {
    lexical.split('T').next()?.parse().ok()
}

fn node_window_start(graph: &Graph, node: &Term) -> Option<NaiveDate> {
    let started = graph.objects(node, &vocab::term(vocab::PROV_STARTED_AT_TIME));
    parse_window_datetime(started.first()?.lexical()?)
}

fn node_window_days(graph: &Graph, node: &Term) -> Option<i64> {
    let start = node_window_start(graph, node)?;
    let ended = graph.objects(node, &vocab::term(vocab::PROV_ENDED_AT_TIME));
    let end = parse_window_datetime(ended.first()?.lexical()?)?;
    Some((end - start).num_days())
}

/// Start date of the most recent full window among timestamped nodes.
pub fn latest_full_window_start(graph: &Graph, window_length_days: u32) -> Option<NaiveDate> {
    let mut latest = None;
    for node in graph.nodes() {
        if node_window_days(graph, node) == Some(window_length_days as i64) {
            let start = node_window_start(graph, node)?;
            if latest.is_none_or(|l| start > l) {
                latest = Some(start);
            }
        }
    }
    latest
}

/// Outcome of evaluating one rule against the graph, before any assertion.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleEvaluation {
    pub verdict: ComplianceVerdict,
    pub fires: bool,
}

/// Evaluates applicability and compliance for one rule. Habit rules
/// (fire-on-non-compliance) only accept timestamped compliance witnesses
/// from the most recent full window; witnesses without timestamps always
/// count.
pub fn evaluate_rule(
    graph: &Graph,
    rule: &GuidelineRule,
    opts: &ReasonerOptions,
) -> Result<RuleEvaluation, ReasonerError> {
    let user = find_user(graph)?;
    let wrap = |source: CompileError| ReasonerError::Rule {
        rule_id: rule.id.clone(),
        source,
    };

    let condition_ext = compile_condition(&rule.condition)
        .map_err(wrap)?
        .evaluate(graph);
    let applicable = condition_ext.contains(&user);
    if !applicable {
        return Ok(RuleEvaluation {
            verdict: ComplianceVerdict {
                rule_id: rule.id.clone(),
                applicable: false,
                compliant: None,
                evidence: Vec::new(),
            },
            fires: false,
        });
    }

    let scope = match rule.polarity {
        Polarity::DirectiveOnNonCompliance => {
            Some(latest_full_window_start(graph, opts.window_length_days))
        }
        Polarity::DirectiveOnMatch => None,
    };
    let (matched, witnesses) =
        eval_compliance(graph, &user, &rule.compliance, scope).map_err(wrap)?;
    let compliant = match rule.polarity {
        Polarity::DirectiveOnMatch => !matched,
        Polarity::DirectiveOnNonCompliance => matched,
    };
    Ok(RuleEvaluation {
        verdict: ComplianceVerdict {
            rule_id: rule.id.clone(),
            applicable: true,
            compliant: Some(compliant),
            evidence: witnesses,
        },
        fires: !compliant,
    })
}

/// Tests the compliance expression for the user, returning the witness node
/// IRIs when the expression is an existential over the user's attributes.
fn eval_compliance(
    graph: &Graph,
    user: &Term,
    expr: &ClassExpr,
    recency_scope: Option<Option<NaiveDate>>,
) -> Result<(bool, Vec<String>), CompileError> {
    if let ClassExpr::Some { property, expr } = expr {
        let inner_ext = compile_condition(expr)?.evaluate(graph);
        let prop = vocab::term(property);
        let mut witnesses: Vec<&Term> = graph
            .objects(user, &prop)
            .into_iter()
            .filter(|o| inner_ext.contains(o))
            .collect();
        if let Some(latest) = recency_scope {
            witnesses.retain(|w| match node_window_start(graph, w) {
                Some(start) => latest == Some(start),
                None => true,
            });
        }
        let names = witnesses
            .iter()
            .filter_map(|w| w.as_iri())
            .map(str::to_string)
            .collect();
        Ok((!witnesses.is_empty(), names))
    } else {
        let ext = compile_condition(expr)?.evaluate(graph);
        let matched = ext.contains(user);
        let names = if matched {
            user.as_iri().map(str::to_string).into_iter().collect()
        } else {
            Vec::new()
        };
        Ok((matched, names))
    }
}

fn window_segment(graph: &Graph, opts: &ReasonerOptions) -> String {
    match latest_full_window_start(graph, opts.window_length_days) {
        Some(date) => date.to_string(),
        None => "latest".to_string(),
    }
}

/// Evaluates every rule, asserting directive/recommendation triples for the
/// rules that fire. Returns the augmented graph (a superset of the input),
/// the directives, and one verdict per rule.
pub fn classify(
    graph: &Graph,
    rules: &[GuidelineRule],
) -> Result<(Graph, Vec<Directive>, Vec<ComplianceVerdict>), ReasonerError> {
    classify_with(graph, rules, &ReasonerOptions::default())
}

pub fn classify_with(
    graph: &Graph,
    rules: &[GuidelineRule],
    opts: &ReasonerOptions,
) -> Result<(Graph, Vec<Directive>, Vec<ComplianceVerdict>), ReasonerError> {
    let user = find_user(graph)?;
    let user_iri = user.as_iri().expect("user node is an IRI").to_string();
    let mut out = graph.clone();
    let mut directives = Vec::new();
    let mut verdicts = Vec::new();
    let segment = window_segment(graph, opts);

    for rule in rules {
        let evaluation = evaluate_rule(graph, rule, opts)?;
        if evaluation.fires {
            let directive_node = format!("{}directive/{}/{segment}", vocab::NS_USER, rule.id);
            let recommendation_node =
                format!("{}recommendation/{}/{segment}", vocab::NS_USER, rule.id);
            let payload = rule.constraint.to_canonical_json();
            let assertions = [
                Triple::new(
                    vocab::term(&directive_node),
                    vocab::term(vocab::RDF_TYPE),
                    vocab::term(&rule.directive_class),
                ),
                Triple::new(
                    vocab::term(&directive_node),
                    vocab::term(vocab::PROV_WAS_ASSOCIATED_WITH),
                    user.clone(),
                ),
                Triple::new(
                    vocab::term(&directive_node),
                    vocab::term(vocab::PHO_HAS_RECOMMENDATION),
                    vocab::term(&recommendation_node),
                ),
                Triple::new(
                    vocab::term(&recommendation_node),
                    vocab::term(vocab::RDF_TYPE),
                    vocab::term(&rule.recommendation_class),
                ),
                Triple::new(
                    vocab::term(&recommendation_node),
                    vocab::term(vocab::PHO_CONSTRAINT),
                    Term::literal(&payload),
                ),
            ];
            for t in assertions {
                out.insert(t.expect("directive triples are valid"))
                    .expect("directive triples are valid");
            }
            directives.push(Directive {
                rule_id: rule.id.clone(),
                node: directive_node,
                directive_class: rule.directive_class.clone(),
                user: user_iri.clone(),
                recommendation_node,
                recommendation_class: rule.recommendation_class.clone(),
                constraint: rule.constraint.clone(),
                fired_because: match rule.polarity {
                    Polarity::DirectiveOnMatch => FiringCause::Match,
                    Polarity::DirectiveOnNonCompliance => FiringCause::NonCompliance,
                },
            });
        }
        verdicts.push(evaluation.verdict);
    }
    Ok((out, directives, verdicts))
}

/// Rule id recovered from a minted recommendation node IRI, or the full IRI
/// for foreign nodes.
fn rule_id_from_recommendation(node: &str) -> String {
    node.strip_prefix(vocab::NS_USER)
        .and_then(|rest| rest.strip_prefix("recommendation/"))
        .and_then(|rest| rest.split('/').next())
        .map(str::to_string)
        .unwrap_or_else(|| node.to_string())
}

/// Reads the asserted recommendation payloads plus profile echoes back out
/// of a classified graph. Overlapping ranges for the same nutrient narrow to
/// their intersection; disjoint ranges are a conflict error.
pub fn active_constraints(graph: &Graph) -> Result<ConstraintSet, ReasonerError> {
    let user = find_user(graph)?;
    let mut set = ConstraintSet::default();

    let constraint_pred = vocab::term(vocab::PHO_CONSTRAINT);
    for t in graph.triples() {
        if t.predicate != constraint_pred {
            continue;
        }
        let node = t.subject.as_iri().unwrap_or_default().to_string();
        let rule_id = rule_id_from_recommendation(&node);
        let Some(lexical) = t.object.lexical() else {
            return Err(ReasonerError::BadPayload {
                node,
                message: "constraint is not a literal".into(),
            });
        };
        let payload =
            ConstraintPayload::from_json(lexical).map_err(|e| ReasonerError::BadPayload {
                node: node.clone(),
                message: e.to_string(),
            })?;
        merge_constraint(&mut set, payload, rule_id)?;
    }

    for node in graph.objects(&user, &vocab::term(vocab::PROV_WAS_ASSOCIATED_WITH)) {
        match node.as_iri() {
            Some(vocab::DOID_DIABETES) => set.diabetes_status = DiabetesStatus::Diabetes,
            Some(vocab::DOID_PRE_DIABETES)
                if !matches!(set.diabetes_status, DiabetesStatus::Diabetes) =>
            {
                set.diabetes_status = DiabetesStatus::PreDiabetes;
            }
            _ => {}
        }
    }
    for (predicate, target) in [
        (vocab::PHO_LIKES, &mut set.likes),
        (vocab::PHO_DISLIKES, &mut set.dislikes),
        (vocab::PHO_ALLERGIC_TO, &mut set.allergies),
    ] {
        for o in graph.objects(&user, &vocab::term(predicate)) {
            if let Some(s) = o.lexical() {
                target.push(s.to_string());
            }
        }
    }
    Ok(set)
}

fn merge_constraint(
    set: &mut ConstraintSet,
    payload: ConstraintPayload,
    rule_id: String,
) -> Result<(), ReasonerError> {
    match &payload {
        ConstraintPayload::Tag(tag) => {
            if let Some(existing) = set
                .constraints
                .iter_mut()
                .find(|c| matches!(&c.payload, ConstraintPayload::Tag(t) if t == tag))
            {
                if !existing.rule_ids.contains(&rule_id) {
                    existing.rule_ids.push(rule_id);
                }
            } else {
                set.constraints.push(ActiveConstraint {
                    payload,
                    rule_ids: vec![rule_id],
                });
            }
        }
        ConstraintPayload::Nutrient {
            nutrient,
            unit,
            per_meal_lower,
            per_meal_upper,
            daily_total,
        } => {
            let existing = set.constraints.iter_mut().find(|c| {
                matches!(&c.payload, ConstraintPayload::Nutrient { nutrient: n, .. } if n == nutrient)
            });
            match existing {
                None => set.constraints.push(ActiveConstraint {
                    payload: payload.clone(),
                    rule_ids: vec![rule_id],
                }),
                Some(entry) => {
                    let ConstraintPayload::Nutrient {
                        per_meal_lower: lo,
                        per_meal_upper: hi,
                        daily_total: daily,
                        ..
                    } = &mut entry.payload
                    else {
                        unreachable!("matched nutrient payload above");
                    };
                    let new_lo = lo.max(*per_meal_lower);
                    let new_hi = hi.min(*per_meal_upper);
                    if new_lo > new_hi {
                        return Err(ReasonerError::ConflictingConstraints {
                            nutrient: nutrient.clone(),
                            first: entry.rule_ids.first().cloned().unwrap_or_default(),
                            second: rule_id,
                        });
                    }
                    *lo = new_lo;
                    *hi = new_hi;
                    *daily = daily.min(*daily_total);
                    let _ = unit;
                    if !entry.rule_ids.contains(&rule_id) {
                        entry.rule_ids.push(rule_id);
                    }
                }
            }
        }
    }
    Ok(())
}

fn display_number(value: f64) -> String {
    if value.fract() == 0.0 && value.abs() < 1e15 {
        format!("{}", value as i64)
    } else {
        format!("{value}")
    }
}

fn nutrient_display_name(nutrient: &str) -> String {
    match nutrient {
        "carbohydrate" => "carbohydrates".to_string(),
        other => other.to_string(),
    }
}

/// Appends the bracketed implicit-knowledge clause before the terminal `?`:
/// diabetes status, then likes, then required diet tags, then nutrient
/// ranges, then exclusions. Questions already carrying a bracketed clause,
/// or an empty constraint set, leave the question unchanged.
pub fn augment_question(question: &str, constraints: &ConstraintSet) -> String {
    if constraints.is_empty() {
        return question.to_string();
    }
    if question.contains('[') && question.contains(']') {
        return question.to_string();
    }

    let mut parts: Vec<String> = Vec::new();
    match constraints.diabetes_status {
        DiabetesStatus::Diabetes => parts.push("diabetic".to_string()),
        DiabetesStatus::PreDiabetes => parts.push("pre-diabetic".to_string()),
        DiabetesStatus::None => {}
    }
    for like in &constraints.likes {
        parts.push(format!("prefers {like} food"));
    }
    for tag in constraints.required_tags() {
        parts.push(format!("{tag} diet"));
    }
    for c in &constraints.constraints {
        if let ConstraintPayload::Nutrient {
            nutrient,
            per_meal_lower,
            per_meal_upper,
            daily_total,
            ..
        } = &c.payload
        {
            parts.push(format!(
                "{} between {}-{} g, not to exceed {} g daily total",
                nutrient_display_name(nutrient),
                display_number(*per_meal_lower),
                display_number(*per_meal_upper),
                display_number(*daily_total),
            ));
        }
    }
    for allergy in &constraints.allergies {
        parts.push(format!("no {allergy}"));
    }
    for dislike in &constraints.dislikes {
        parts.push(format!("no {dislike}"));
    }
    if parts.is_empty() {
        return question.to_string();
    }

    let clause = parts.join(", ");
    let trimmed = question.trim_end();
    if let Some(stripped) = trimmed.strip_suffix('?') {
        format!("{} [{clause}]?", stripped.trim_end())
    } else {
        format!("{trimmed} [{clause}]")
    }
}
