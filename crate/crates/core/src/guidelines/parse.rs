//! Line-oriented rule file format (`.rule`).
//!
//! One rule per file, `key: value` lines, `#` comments. Class expressions
//! use `and` / `or` / `some` / `only` / `hasValue` over prefixed names
//! (resolved against the standard prefix map), with parentheses for
//! grouping; `some`, `only`, and `hasValue` bind tighter than `and`, which
//! binds tighter than `or`. Example:
//!
//! ```text
//! id: G1
//! label: For pre-diabetic and diabetic individuals ...
//! condition: prov:Person and (prov:wasAssociatedWith hasValue doid:Diabetes
//!            or prov:wasAssociatedWith hasValue doid:PreDiabetes)
//! compliance: sio:hasAttribute some (pho:ConsistentPattern and ...)
//! polarity: directive-on-match
//! directive: pho:MediterraneanDietDirective
//! recommendation: pho:MediterraneanDietRecommendation
//! constraint: {"tag":"Mediterranean"}
//! ```
//!
//! Every prefixed name must resolve to a known vocabulary term.

use super::{ClassExpr, ConstraintPayload, GuidelineRule, PayloadError, Polarity};
use crate::rdf::Term;
use crate::vocab;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleParseError {
    #[error("empty rule document")]
    Empty,
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing key '{0}'")]
    MissingKey(&'static str),
    #[error("unknown prefix '{0}:'")]
    UnknownPrefix(String),
    #[error("unknown term {0}")]
    UnknownTerm(String),
    #[error("invalid polarity '{0}' (expected directive-on-match or directive-on-non-compliance)")]
    InvalidPolarity(String),
    #[error("{0}")]
    InvalidClasses(String),
    #[error(transparent)]
    Payload(#[from] PayloadError),
}

/// Parses one rule document.
pub fn parse_guideline(text: &str) -> Result<GuidelineRule, RuleParseError> {
    let mut fields: BTreeMap<String, (usize, String)> = BTreeMap::new();
    let mut saw_content = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        saw_content = true;
        let Some((key, value)) = line.split_once(':') else {
            return Err(RuleParseError::Syntax {
                line: i + 1,
                message: "expected 'key: value'".into(),
            });
        };
        fields.insert(key.trim().to_string(), (i + 1, value.trim().to_string()));
    }
    if !saw_content {
        return Err(RuleParseError::Empty);
    }

    let take = |key: &'static str| -> Result<(usize, String), RuleParseError> {
        fields
            .get(key)
            .cloned()
            .ok_or(RuleParseError::MissingKey(key))
    };

    let (_, id) = take("id")?;
    let (_, label) = take("label")?;
    let (cond_line, condition_text) = take("condition")?;
    let (comp_line, compliance_text) = take("compliance")?;
    let (_pol_line, polarity_text) = take("polarity")?;
    let (dir_line, directive_text) = take("directive")?;
    let (rec_line, recommendation_text) = take("recommendation")?;
    let (con_line, constraint_text) = take("constraint")?;

    let condition = parse_expr(&condition_text, cond_line)?;
    let compliance = parse_expr(&compliance_text, comp_line)?;
    let polarity = match polarity_text.as_str() {
        "directive-on-match" => Polarity::DirectiveOnMatch,
        "directive-on-non-compliance" => Polarity::DirectiveOnNonCompliance,
        other => return Err(RuleParseError::InvalidPolarity(other.to_string())),
    };
    let directive_class = resolve_known(&directive_text, dir_line)?;
    let recommendation_class = resolve_known(&recommendation_text, rec_line)?;
    for (what, class) in [
        ("directive", &directive_class),
        ("recommendation", &recommendation_class),
    ] {
        if !class.starts_with(vocab::NS_PHO) {
            return Err(RuleParseError::InvalidClasses(format!(
                "{what} class must be in the pho namespace: {class}"
            )));
        }
    }
    if directive_class == recommendation_class {
        return Err(RuleParseError::InvalidClasses(
            "directive and recommendation classes must be distinct".into(),
        ));
    }
    let constraint = ConstraintPayload::from_json(&constraint_text).map_err(|e| {
        let _ = con_line;
        RuleParseError::Payload(e)
    })?;

    Ok(GuidelineRule {
        id,
        label,
        condition,
        compliance,
        polarity,
        directive_class,
        recommendation_class,
        constraint,
    })
}

fn resolve_known(name: &str, line: usize) -> Result<String, RuleParseError> {
    let name = name.trim();
    let Some((prefix, local)) = name.split_once(':') else {
        return Err(RuleParseError::Syntax {
            line,
            message: format!("expected prefixed name, got '{name}'"),
        });
    };
    let prefixes = vocab::default_prefixes();
    let ns = prefixes
        .get(prefix)
        .ok_or_else(|| RuleParseError::UnknownPrefix(prefix.to_string()))?;
    let iri = format!("{ns}{local}");
    if !vocab::known_terms().contains(iri.as_str()) {
        return Err(RuleParseError::UnknownTerm(name.to_string()));
    }
    Ok(iri)
}

#[derive(Debug, Clone, PartialEq)]
enum ExprToken {
    Open,
    Close,
    And,
    Or,
    Some_,
    Only,
    HasValue,
    Name(String),
    Str(String),
}

fn tokenize_expr(text: &str, line: usize) -> Result<Vec<ExprToken>, RuleParseError> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' => {
                chars.next();
                tokens.push(ExprToken::Open);
            }
            ')' => {
                chars.next();
                tokens.push(ExprToken::Close);
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') => break,
                        Some('\\') => match chars.next() {
                            Some(e) => s.push(e),
                            None => {
                                return Err(RuleParseError::Syntax {
                                    line,
                                    message: "unterminated string".into(),
                                })
                            }
                        },
                        Some(c) => s.push(c),
                        None => {
                            return Err(RuleParseError::Syntax {
                                line,
                                message: "unterminated string".into(),
                            })
                        }
                    }
                }
                tokens.push(ExprToken::Str(s));
            }
            _ => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_alphanumeric() || c == ':' || c == '_' || c == '-' || c == '.' {
                        word.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                if word.is_empty() {
                    return Err(RuleParseError::Syntax {
                        line,
                        message: format!("unexpected character '{c}'"),
                    });
                }
                tokens.push(match word.as_str() {
                    "and" => ExprToken::And,
                    "or" => ExprToken::Or,
                    "some" => ExprToken::Some_,
                    "only" => ExprToken::Only,
                    "hasValue" => ExprToken::HasValue,
                    _ => ExprToken::Name(word),
                });
            }
        }
    }
    Ok(tokens)
}

struct ExprParser {
    tokens: Vec<ExprToken>,
    pos: usize,
    line: usize,
}

impl ExprParser {
    fn peek(&self) -> Option<&ExprToken> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<ExprToken> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, message: impl Into<String>) -> RuleParseError {
        RuleParseError::Syntax {
            line: self.line,
            message: message.into(),
        }
    }

    fn or_expr(&mut self) -> Result<ClassExpr, RuleParseError> {
        let mut children = vec![self.and_expr()?];
        while self.peek() == Some(&ExprToken::Or) {
            self.bump();
            children.push(self.and_expr()?);
        }
        Ok(if children.len() == 1 {
            children.pop().expect("one child")
        } else {
            ClassExpr::Or(children)
        })
    }

    fn and_expr(&mut self) -> Result<ClassExpr, RuleParseError> {
        let mut children = vec![self.unary()?];
        while self.peek() == Some(&ExprToken::And) {
            self.bump();
            children.push(self.unary()?);
        }
        Ok(if children.len() == 1 {
            children.pop().expect("one child")
        } else {
            ClassExpr::And(children)
        })
    }

    fn unary(&mut self) -> Result<ClassExpr, RuleParseError> {
        match self.bump() {
            Some(ExprToken::Open) => {
                let inner = self.or_expr()?;
                if self.bump() != Some(ExprToken::Close) {
                    return Err(self.err("expected ')'"));
                }
                Ok(inner)
            }
            Some(ExprToken::Name(name)) => {
                let iri = resolve_known(&name, self.line)?;
                match self.peek() {
                    Some(ExprToken::Some_) => {
                        self.bump();
                        Ok(ClassExpr::some(&iri, self.unary()?))
                    }
                    Some(ExprToken::Only) => {
                        self.bump();
                        Ok(ClassExpr::only(&iri, self.unary()?))
                    }
                    Some(ExprToken::HasValue) => {
                        self.bump();
                        let value = match self.bump() {
                            Some(ExprToken::Name(v)) => vocab::term(&resolve_known(&v, self.line)?),
                            Some(ExprToken::Str(s)) => Term::literal(s),
                            _ => return Err(self.err("expected value after hasValue")),
                        };
                        Ok(ClassExpr::has_value(&iri, value))
                    }
                    _ => Ok(ClassExpr::Named(iri)),
                }
            }
            Some(other) => Err(self.err(format!("unexpected token {other:?}"))),
            None => Err(self.err("unexpected end of expression")),
        }
    }
}

fn parse_expr(text: &str, line: usize) -> Result<ClassExpr, RuleParseError> {
    let tokens = tokenize_expr(text, line)?;
    if tokens.is_empty() {
        return Err(RuleParseError::Syntax {
            line,
            message: "empty class expression".into(),
        });
    }
    let mut parser = ExprParser {
        tokens,
        pos: 0,
        line,
    };
    let expr = parser.or_expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(parser.err("trailing tokens after expression"));
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::guidelines::{guideline_consistent_carbs, guideline_mediterranean};

    const G1_DOC: &str = r#"
# Replace a low-fat, high-carb diet with a Mediterranean diet.
id: G1
label: For pre-diabetic and diabetic individuals diet low in total fat but relatively high in carbohydrates should be replaced with Mediterranean diet.
condition: prov:Person and (prov:wasAssociatedWith hasValue doid:Diabetes or prov:wasAssociatedWith hasValue doid:PreDiabetes)
compliance: sio:hasAttribute some (pho:ConsistentPattern and sio:hasAttribute some pho:HighCarbDiet and sio:hasAttribute some pho:LowFatDiet)
polarity: directive-on-match
directive: pho:MediterraneanDietDirective
recommendation: pho:MediterraneanDietRecommendation
constraint: {"tag":"Mediterranean"}
"#;

    const G2_DOC: &str = r#"
id: G2
label: For individuals whose daily insulin dosing is fixed, a consistent pattern of carbohydrate intake with respect to time and amount may be recommended to improve glycemic control and reduce the risk of hypoglycemia.
condition: (prov:Person and (prov:wasAssociatedWith hasValue doid:Diabetes or prov:wasAssociatedWith hasValue doid:PreDiabetes)) and sio:hasAttribute some pho:FixedInsulinDosage
compliance: sio:hasAttribute some (pho:ConsistentPattern and sio:hasAttribute hasValue food:Carbohydrates)
polarity: directive-on-non-compliance
directive: pho:ConsistentCarbDietDirective
recommendation: pho:ConsistentCarbRecommendation
constraint: {"carbohydrate":{"unit":"g","meal":{"type":"range","lower":30,"upper":45},"daily_total":150}}
"#;

    #[test]
    fn restated_g1_equals_builtin() {
        assert_eq!(parse_guideline(G1_DOC).unwrap(), guideline_mediterranean());
    }

    #[test]
    fn restated_g2_equals_builtin() {
        assert_eq!(
            parse_guideline(G2_DOC).unwrap(),
            guideline_consistent_carbs()
        );
    }

    #[test]
    fn empty_document_is_a_syntax_error() {
        assert_eq!(parse_guideline(""), Err(RuleParseError::Empty));
        assert_eq!(
            parse_guideline("# only comments\n"),
            Err(RuleParseError::Empty)
        );
    }

    #[test]
    fn inverted_constraint_range_is_rejected() {
        let doc = G2_DOC.replace("\"lower\":30,\"upper\":45", "\"lower\":50,\"upper\":45");
        assert!(matches!(
            parse_guideline(&doc),
            Err(RuleParseError::Payload(_))
        ));
    }

    #[test]
    fn unknown_term_is_rejected() {
        let doc = G1_DOC.replace("pho:HighCarbDiet", "pho:NoSuchThing");
        assert_eq!(
            parse_guideline(&doc),
            Err(RuleParseError::UnknownTerm("pho:NoSuchThing".into()))
        );
    }

    #[test]
    fn unknown_prefix_is_rejected() {
        let doc = G1_DOC.replace("pho:HighCarbDiet", "mystery:Thing");
        assert_eq!(
            parse_guideline(&doc),
            Err(RuleParseError::UnknownPrefix("mystery".into()))
        );
    }

    #[test]
    fn missing_key_is_reported() {
        let doc = G1_DOC.replace("polarity: directive-on-match", "");
        assert_eq!(
            parse_guideline(&doc),
            Err(RuleParseError::MissingKey("polarity"))
        );
    }

    #[test]
    fn only_keyword_parses() {
        let expr = parse_expr(
            "sio:hasAttribute only (pho:HighCarbDiet and pho:LowFatDiet)",
            1,
        )
        .unwrap();
        match expr {
            ClassExpr::Only { property, expr } => {
                assert_eq!(property, vocab::SIO_HAS_ATTRIBUTE);
                assert!(matches!(*expr, ClassExpr::And(_)));
            }
            other => panic!("unexpected expr {other:?}"),
        }
    }

    #[test]
    fn some_binds_tighter_than_and() {
        let expr = parse_expr("sio:hasAttribute some pho:HighCarbDiet and prov:Person", 1).unwrap();
        match expr {
            ClassExpr::And(children) => {
                assert_eq!(children.len(), 2);
                assert!(matches!(children[0], ClassExpr::Some { .. }));
                assert!(matches!(children[1], ClassExpr::Named(_)));
            }
            other => panic!("unexpected expr {other:?}"),
        }
    }
}
