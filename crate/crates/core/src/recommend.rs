//! Constraint-filtered recipe recommendation over a local catalog.
//!
//! Hard filters: meal type, per-meal carbohydrate range, required tags, and
//! exclusion of anything the user is allergic to or dislikes. Likes are soft
//! and only affect ranking. The ranking is a total order: matched like-tags
//! descending, then distance from the carbohydrate range midpoint ascending,
//! then name ascending.

use crate::foodlog::MealType;
use crate::guidelines::ConstraintPayload;
use crate::reasoner::ConstraintSet;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("invalid catalog JSON: {0}")]
    Json(String),
    #[error("duplicate recipe name '{0}'")]
    DuplicateName(String),
    #[error("recipe '{name}': negative {field}")]
    NegativeNutrient { name: String, field: String },
    #[error("recipe '{name}': unknown meal type '{meal}'")]
    UnknownMealType { name: String, meal: String },
}

/// One recipe with per-serving nutrition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recipe {
    pub name: String,
    pub meal_types: BTreeSet<MealType>,
    #[serde(default)]
    pub tags: BTreeSet<String>,
    #[serde(default)]
    pub ingredients: BTreeSet<String>,
    #[serde(default)]
    pub allergens: BTreeSet<String>,
    pub carbohydrates_g: f64,
    pub calories: f64,
}

/// An immutable recipe catalog with meal-type and tag indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecipeCatalog {
    recipes: Vec<Recipe>,
    by_meal: BTreeMap<MealType, Vec<usize>>,
    by_tag: BTreeMap<String, Vec<usize>>,
}

impl RecipeCatalog {
    pub fn recipes(&self) -> &[Recipe] {
        &self.recipes
    }

    pub fn len(&self) -> usize {
        self.recipes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.recipes.is_empty()
    }

    pub fn by_name(&self, name: &str) -> Option<&Recipe> {
        self.recipes.iter().find(|r| r.name == name)
    }

    pub fn with_meal_type(&self, meal: MealType) -> Vec<&Recipe> {
        self.by_meal
            .get(&meal)
            .map(|ids| ids.iter().map(|&i| &self.recipes[i]).collect())
            .unwrap_or_default()
    }

    pub fn with_tag(&self, tag: &str) -> Vec<&Recipe> {
        self.by_tag
            .get(&tag.to_lowercase())
            .map(|ids| ids.iter().map(|&i| &self.recipes[i]).collect())
            .unwrap_or_default()
    }
}

#[derive(Deserialize)]
struct RawRecipe {
    name: String,
    meal_types: Vec<String>,
    #[serde(default)]
    tags: Vec<String>,
    #[serde(default)]
    ingredients: Vec<String>,
    #[serde(default)]
    allergens: Vec<String>,
    carbohydrates_g: f64,
    calories: f64,
}

/// Loads a catalog from a JSON array of recipe records, lowercasing tags,
/// ingredients, and allergens.
pub fn load_catalog(text: &str) -> Result<RecipeCatalog, CatalogError> {
    let raw: Vec<RawRecipe> =
        serde_json::from_str(text).map_err(|e| CatalogError::Json(e.to_string()))?;
    let mut recipes = Vec::with_capacity(raw.len());
    let mut seen = BTreeSet::new();
    for r in raw {
        let name = r.name.trim().to_string();
        if !seen.insert(name.to_lowercase()) {
            return Err(CatalogError::DuplicateName(name));
        }
        for (field, value) in [
            ("carbohydrates_g", r.carbohydrates_g),
            ("calories", r.calories),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(CatalogError::NegativeNutrient {
                    name,
                    field: field.into(),
                });
            }
        }
        let mut meal_types = BTreeSet::new();
        for m in &r.meal_types {
            let parsed = MealType::parse(m).ok_or_else(|| CatalogError::UnknownMealType {
                name: name.clone(),
                meal: m.clone(),
            })?;
            meal_types.insert(parsed);
        }
        let normalize = |xs: Vec<String>| -> BTreeSet<String> {
            xs.iter().map(|x| x.trim().to_lowercase()).collect()
        };
        recipes.push(Recipe {
            name,
            meal_types,
            tags: normalize(r.tags),
            ingredients: normalize(r.ingredients),
            allergens: normalize(r.allergens),
            carbohydrates_g: r.carbohydrates_g,
            calories: r.calories,
        });
    }

    let mut by_meal: BTreeMap<MealType, Vec<usize>> = BTreeMap::new();
    let mut by_tag: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, recipe) in recipes.iter().enumerate() {
        for &m in &recipe.meal_types {
            by_meal.entry(m).or_default().push(i);
        }
        for tag in &recipe.tags {
            by_tag.entry(tag.clone()).or_default().push(i);
        }
    }
    Ok(RecipeCatalog {
        recipes,
        by_meal,
        by_tag,
    })
}

/// One ranked recommendation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recommendation {
    pub name: String,
    pub carbohydrates_g: f64,
    pub matched_tags: Vec<String>,
    pub rank: usize,
}

fn excluded_items(constraints: &ConstraintSet) -> BTreeSet<String> {
    constraints
        .allergies
        .iter()
        .chain(constraints.dislikes.iter())
        .map(|s| s.to_lowercase())
        .collect()
}

/// Whether a recipe passes every hard constraint for the given meal.
pub fn satisfies_hard_constraints(
    recipe: &Recipe,
    constraints: &ConstraintSet,
    meal: MealType,
) -> bool {
    if !recipe.meal_types.contains(&meal) {
        return false;
    }
    if let Some((lower, upper, _)) = constraints.nutrient_range("carbohydrate") {
        if recipe.carbohydrates_g < lower || recipe.carbohydrates_g > upper {
            return false;
        }
    }
    for tag in constraints.required_tags() {
        if !recipe.tags.contains(&tag.to_lowercase()) {
            return false;
        }
    }
    let excluded = excluded_items(constraints);
    if recipe.allergens.iter().any(|a| excluded.contains(a))
        || recipe.ingredients.iter().any(|i| excluded.contains(i))
    {
        return false;
    }
    true
}

/// Filters the catalog to recipes satisfying every hard constraint and
/// ranks them. An empty result is a valid answer.
pub fn filter_recipes(
    catalog: &RecipeCatalog,
    constraints: &ConstraintSet,
    meal: MealType,
) -> Vec<Recommendation> {
    let midpoint = constraints
        .nutrient_range("carbohydrate")
        .map(|(lower, upper, _)| (lower + upper) / 2.0);
    let mut candidates: Vec<(&Recipe, Vec<String>, f64)> = catalog
        .with_meal_type(meal)
        .into_iter()
        .filter(|r| satisfies_hard_constraints(r, constraints, meal))
        .map(|r| {
            let matched: Vec<String> = constraints
                .likes
                .iter()
                .filter(|like| r.tags.contains(&like.to_lowercase()))
                .map(|like| like.to_lowercase())
                .collect();
            let distance = midpoint.map_or(0.0, |m| (r.carbohydrates_g - m).abs());
            (r, matched, distance)
        })
        .collect();
    candidates.sort_by(|(ra, ta, da), (rb, tb, db)| {
        tb.len()
            .cmp(&ta.len())
            .then_with(|| da.total_cmp(db))
            .then_with(|| ra.name.cmp(&rb.name))
    });
    candidates
        .into_iter()
        .enumerate()
        .map(|(i, (recipe, matched_tags, _))| Recommendation {
            name: recipe.name.clone(),
            carbohydrates_g: recipe.carbohydrates_g,
            matched_tags,
            rank: i + 1,
        })
        .collect()
}

/// Recommendations across all meal slots, deduplicated by recipe name and
/// re-ranked; used for questions that do not fix a meal.
pub fn filter_recipes_any_meal(
    catalog: &RecipeCatalog,
    constraints: &ConstraintSet,
) -> Vec<Recommendation> {
    let mut seen = BTreeSet::new();
    let mut merged = Vec::new();
    for meal in MealType::ALL {
        for rec in filter_recipes(catalog, constraints, meal) {
            if seen.insert(rec.name.clone()) {
                merged.push(rec);
            }
        }
    }
    merged.sort_by(|a, b| {
        b.matched_tags
            .len()
            .cmp(&a.matched_tags.len())
            .then_with(|| a.name.cmp(&b.name))
    });
    for (i, rec) in merged.iter_mut().enumerate() {
        rec.rank = i + 1;
    }
    merged
}

/// A constraint set extended with one more excluded item (substitution
/// questions: "what can I eat instead of X").
pub fn with_excluded_item(constraints: &ConstraintSet, item: &str) -> ConstraintSet {
    let mut cs = constraints.clone();
    cs.dislikes.push(item.to_lowercase());
    cs
}

/// A constraint set extended with one more allergen.
pub fn with_allergen(constraints: &ConstraintSet, allergen: &str) -> ConstraintSet {
    let mut cs = constraints.clone();
    cs.allergies.push(allergen.to_lowercase());
    cs
}

/// Re-checks a returned recommendation against the hard constraints; used
/// by tests and the pipeline's output validation.
pub fn validate_recommendation(
    catalog: &RecipeCatalog,
    constraints: &ConstraintSet,
    meal: MealType,
    recommendation: &Recommendation,
) -> bool {
    catalog
        .by_name(&recommendation.name)
        .is_some_and(|r| satisfies_hard_constraints(r, constraints, meal))
}

/// Remaining carbohydrate budget text when a daily total constraint exists.
pub fn daily_budget_note(
    constraints: &ConstraintSet,
    consumed_today_g: Option<f64>,
) -> Option<String> {
    let (_, _, daily) = constraints.nutrient_range("carbohydrate")?;
    match consumed_today_g {
        Some(consumed) => {
            let remaining = (daily - consumed).max(0.0);
            Some(format!(
                "daily carbohydrate budget {daily} g, {remaining} g remaining after {consumed} g logged today"
            ))
        }
        None => Some(format!(
            "daily carbohydrate total should not exceed {daily} g"
        )),
    }
}

/// Payload helper for tests and the CLI: a set carrying one carb range.
pub fn carb_range_set(lower: f64, upper: f64, daily: f64) -> ConstraintSet {
    ConstraintSet {
        constraints: vec![crate::reasoner::ActiveConstraint {
            payload: ConstraintPayload::nutrient("carbohydrate", "g", lower, upper, daily)
                .expect("valid range"),
            rule_ids: vec!["manual".into()],
        }],
        ..ConstraintSet::default()
    }
}
