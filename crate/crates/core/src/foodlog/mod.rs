//! Meal-level food logs: parsing, validation, and per-day aggregation.
//!
//! Log documents are UTF-8 JSON-lines, one meal per line:
//!
//! ```text
//! {"date":"2021-09-23","meal":"breakfast","foods":["oatmeal","blueberries"],
//!  "calories":320,"carbohydrates_g":54.0,"fat_g":6.0,"protein_g":12.0}
//! ```
//!
//! CSV input with the same column names is also accepted (the `foods` column
//! is `;`-separated). Nutrient values are decimal with 0.1 resolution and are
//! stored internally in integer tenths, so aggregation is exact.

mod gen;

pub use gen::{generate_synthetic_log, GenError, GenSpec};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Errors from reading or constructing food logs.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FoodLogError {
    #[error("record {index}: missing field {field}")]
    MissingField { index: usize, field: String },
    #[error("record {index}: negative nutrient {field}")]
    NegativeNutrient { index: usize, field: String },
    #[error("record {index}: invalid {field}: {message}")]
    InvalidField {
        index: usize,
        field: String,
        message: String,
    },
    #[error("record {index}: {message}")]
    Malformed { index: usize, message: String },
    #[error("log failed validation: {0} violation(s)")]
    Invalid(usize),
}

/// The four meal slots, ordered as they occur in a day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MealType {
    Breakfast,
    Lunch,
    Dinner,
    Snack,
}

impl MealType {
    pub const ALL: [MealType; 4] = [
        MealType::Breakfast,
        MealType::Lunch,
        MealType::Dinner,
        MealType::Snack,
    ];

    pub fn parse(s: &str) -> Option<MealType> {
        match s.to_ascii_lowercase().as_str() {
            "breakfast" => Some(MealType::Breakfast),
            "lunch" => Some(MealType::Lunch),
            "dinner" => Some(MealType::Dinner),
            "snack" => Some(MealType::Snack),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            MealType::Breakfast => "breakfast",
            MealType::Lunch => "lunch",
            MealType::Dinner => "dinner",
            MealType::Snack => "snack",
        }
    }
}

impl fmt::Display for MealType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A non-negative quantity held in integer tenths (0.1 kcal or 0.1 g).
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Amount(u64);

impl Amount {
    pub const ZERO: Amount = Amount(0);

    /// Largest accepted value; keeps sums over any realistic log far from
    /// u64 overflow.
    pub const MAX: f64 = 1e9;

    /// Rounds a finite non-negative value within [`Amount::MAX`] to the
    /// nearest tenth.
    pub fn from_f64(value: f64) -> Option<Amount> {
        if !value.is_finite() || !(0.0..=Amount::MAX).contains(&value) {
            return None;
        }
        Some(Amount((value * 10.0).round() as u64))
    }

    pub fn tenths(&self) -> u64 {
        self.0
    }

    pub fn as_f64(&self) -> f64 {
        self.0 as f64 / 10.0
    }

    pub fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl std::ops::Add for Amount {
    type Output = Amount;
    fn add(self, rhs: Amount) -> Amount {
        Amount(self.0 + rhs.0)
    }
}

impl std::ops::AddAssign for Amount {
    fn add_assign(&mut self, rhs: Amount) {
        self.0 += rhs.0;
    }
}

impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(10) {
            write!(f, "{}", self.0 / 10)
        } else {
            write!(f, "{}.{}", self.0 / 10, self.0 % 10)
        }
    }
}

/// Calories plus the three macronutrients for one meal or one day.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct NutrientVector {
    pub calories: Amount,
    pub carbohydrates_g: Amount,
    pub fat_g: Amount,
    pub protein_g: Amount,
}

impl NutrientVector {
    pub const ZERO: NutrientVector = NutrientVector {
        calories: Amount::ZERO,
        carbohydrates_g: Amount::ZERO,
        fat_g: Amount::ZERO,
        protein_g: Amount::ZERO,
    };

    pub fn sum(&self, other: &NutrientVector) -> NutrientVector {
        NutrientVector {
            calories: self.calories + other.calories,
            carbohydrates_g: self.carbohydrates_g + other.carbohydrates_g,
            fat_g: self.fat_g + other.fat_g,
            protein_g: self.protein_g + other.protein_g,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.calories.is_zero()
            && self.carbohydrates_g.is_zero()
            && self.fat_g.is_zero()
            && self.protein_g.is_zero()
    }
}

/// One logged meal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MealEntry {
    pub date: NaiveDate,
    pub meal_type: MealType,
    pub food_names: Vec<String>,
    pub nutrients: NutrientVector,
}

/// A user's full log, kept sorted by (date, meal slot).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoodLog {
    user_id: String,
    entries: Vec<MealEntry>,
}

impl FoodLog {
    /// Builds a log, sorting entries into canonical order.
    pub fn new(user_id: impl Into<String>, mut entries: Vec<MealEntry>) -> FoodLog {
        entries.sort_by_key(|a| (a.date, a.meal_type));
        FoodLog {
            user_id: user_id.into(),
            entries,
        }
    }

    pub fn user_id(&self) -> &str {
        &self.user_id
    }

    pub fn entries(&self) -> &[MealEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Serializes the log to the canonical JSON-lines document format.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let foods: Vec<String> = e
                .food_names
                .iter()
                .map(|f| serde_json::to_string(f).expect("string serializes"))
                .collect();
            out.push_str(&format!(
                "{{\"date\":\"{}\",\"meal\":\"{}\",\"foods\":[{}],\"calories\":{},\"carbohydrates_g\":{},\"fat_g\":{},\"protein_g\":{}}}\n",
                e.date,
                e.meal_type,
                foods.join(","),
                e.nutrients.calories,
                e.nutrients.carbohydrates_g,
                e.nutrients.fat_g,
                e.nutrients.protein_g,
            ));
        }
        out
    }
}

/// Aggregate nutrients for one calendar day.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DayNutrients {
    pub date: NaiveDate,
    pub total: NutrientVector,
    pub per_meal: BTreeMap<MealType, NutrientVector>,
    pub meals_logged: usize,
}

/// A duplicate (date, meal) pair found during validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub date: NaiveDate,
    pub meal_type: MealType,
    pub count: usize,
}

/// Validation outcome: duplicate slots are violations, missing days between
/// the first and last logged date are warnings.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub gap_days: Vec<NaiveDate>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Parses a log document (JSON-lines or CSV, detected from the first line).
pub fn parse_log(text: &str) -> Result<FoodLog, FoodLogError> {
    let first = text.lines().find(|l| !l.trim().is_empty());
    let entries = match first {
        None => Vec::new(),
        Some(line) if line.trim_start().starts_with('{') => parse_jsonl(text)?,
        Some(_) => parse_csv(text)?,
    };
    Ok(FoodLog::new("user", entries))
}

#[derive(Deserialize)]
struct RawRecord {
    date: String,
    meal: String,
    foods: Vec<String>,
    calories: f64,
    carbohydrates_g: f64,
    fat_g: f64,
    protein_g: f64,
}

fn record_from_fields(
    index: usize,
    date: &str,
    meal: &str,
    foods: Vec<String>,
    nutrients: [(&'static str, f64); 4],
) -> Result<MealEntry, FoodLogError> {
    let date = date
        .parse::<NaiveDate>()
        .map_err(|e| FoodLogError::InvalidField {
            index,
            field: "date".into(),
            message: e.to_string(),
        })?;
    let meal_type = MealType::parse(meal).ok_or_else(|| FoodLogError::InvalidField {
        index,
        field: "meal".into(),
        message: format!("unknown meal type '{meal}'"),
    })?;
    let mut amounts = [Amount::ZERO; 4];
    for (slot, (field, value)) in nutrients.iter().enumerate() {
        if *value < 0.0 {
            return Err(FoodLogError::NegativeNutrient {
                index,
                field: (*field).into(),
            });
        }
        amounts[slot] = Amount::from_f64(*value).ok_or_else(|| FoodLogError::InvalidField {
            index,
            field: (*field).into(),
            message: format!("must be a finite number in [0, {}]", Amount::MAX),
        })?;
    }
    Ok(MealEntry {
        date,
        meal_type,
        food_names: foods,
        nutrients: NutrientVector {
            calories: amounts[0],
            carbohydrates_g: amounts[1],
            fat_g: amounts[2],
            protein_g: amounts[3],
        },
    })
}

fn parse_jsonl(text: &str) -> Result<Vec<MealEntry>, FoodLogError> {
    let mut entries = Vec::new();
    for (index, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(line).map_err(|e| map_serde_error(index, e))?;
        entries.push(record_from_fields(
            index,
            &raw.date,
            &raw.meal,
            raw.foods,
            [
                ("calories", raw.calories),
                ("carbohydrates_g", raw.carbohydrates_g),
                ("fat_g", raw.fat_g),
                ("protein_g", raw.protein_g),
            ],
        )?);
    }
    Ok(entries)
}

fn map_serde_error(index: usize, e: serde_json::Error) -> FoodLogError {
    let message = e.to_string();
    if let Some(rest) = message.strip_prefix("missing field `") {
        if let Some(field) = rest.split('`').next() {
            return FoodLogError::MissingField {
                index,
                field: field.to_string(),
            };
        }
    }
    FoodLogError::Malformed { index, message }
}

/// Splits one CSV line, honoring double-quoted fields with `""` escapes.
fn split_csv_line(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut field = String::new();
    let mut chars = line.chars().peekable();
    let mut in_quotes = false;
    while let Some(c) = chars.next() {
        match c {
            '"' if in_quotes => {
                if chars.peek() == Some(&'"') {
                    chars.next();
                    field.push('"');
                } else {
                    in_quotes = false;
                }
            }
            '"' => in_quotes = true,
            ',' if !in_quotes => {
                fields.push(std::mem::take(&mut field));
            }
            _ => field.push(c),
        }
    }
    fields.push(field);
    fields
}

fn parse_csv(text: &str) -> Result<Vec<MealEntry>, FoodLogError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let Some((_, header)) = lines.next() else {
        return Ok(Vec::new());
    };
    let columns: Vec<String> = split_csv_line(header)
        .into_iter()
        .map(|c| c.trim().to_string())
        .collect();
    let col = |name: &str| columns.iter().position(|c| c == name);
    let required = [
        "date",
        "meal",
        "foods",
        "calories",
        "carbohydrates_g",
        "fat_g",
        "protein_g",
    ];
    let mut idx = BTreeMap::new();
    for name in required {
        match col(name) {
            Some(i) => {
                idx.insert(name, i);
            }
            None => {
                return Err(FoodLogError::MissingField {
                    index: 0,
                    field: name.into(),
                })
            }
        }
    }

    let mut entries = Vec::new();
    for (index, line) in lines {
        let fields = split_csv_line(line);
        let get = |name: &str| -> Result<&str, FoodLogError> {
            fields
                .get(idx[name])
                .map(|s| s.trim())
                .ok_or_else(|| FoodLogError::MissingField {
                    index,
                    field: name.into(),
                })
        };
        let number = |name: &'static str| -> Result<f64, FoodLogError> {
            get(name)?
                .parse::<f64>()
                .map_err(|e| FoodLogError::InvalidField {
                    index,
                    field: name.into(),
                    message: e.to_string(),
                })
        };
        let foods: Vec<String> = get("foods")?
            .split(';')
            .map(|f| f.trim().to_string())
            .filter(|f| !f.is_empty())
            .collect();
        entries.push(record_from_fields(
            index,
            get("date")?,
            get("meal")?,
            foods,
            [
                ("calories", number("calories")?),
                ("carbohydrates_g", number("carbohydrates_g")?),
                ("fat_g", number("fat_g")?),
                ("protein_g", number("protein_g")?),
            ],
        )?);
    }
    Ok(entries)
}

/// Reports duplicate (date, meal) slots and gap days.
pub fn validate_log(log: &FoodLog) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut counts: BTreeMap<(NaiveDate, MealType), usize> = BTreeMap::new();
    for e in log.entries() {
        *counts.entry((e.date, e.meal_type)).or_insert(0) += 1;
    }
    for ((date, meal_type), count) in counts {
        if count > 1 {
            report.violations.push(Violation {
                date,
                meal_type,
                count,
            });
        }
    }
    if let (Some(first), Some(last)) = (log.entries().first(), log.entries().last()) {
        let logged: std::collections::BTreeSet<NaiveDate> =
            log.entries().iter().map(|e| e.date).collect();
        let mut day = first.date;
        while day <= last.date {
            if !logged.contains(&day) {
                report.gap_days.push(day);
            }
            day = day.succ_opt().expect("date within calendar range");
        }
    }
    report
}

/// Aggregates the log into one [`DayNutrients`] per distinct date, in date
/// order. Meals absent from a day simply do not contribute.
pub fn daily_totals(log: &FoodLog) -> Vec<DayNutrients> {
    let mut days: BTreeMap<NaiveDate, BTreeMap<MealType, NutrientVector>> = BTreeMap::new();
    for e in log.entries() {
        let slot = days
            .entry(e.date)
            .or_default()
            .entry(e.meal_type)
            .or_default();
        *slot = slot.sum(&e.nutrients);
    }
    days.into_iter()
        .map(|(date, per_meal)| {
            let total = per_meal
                .values()
                .fold(NutrientVector::ZERO, |acc, v| acc.sum(v));
            let meals_logged = per_meal.len();
            DayNutrients {
                date,
                total,
                per_meal,
                meals_logged,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn date(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn entry(d: &str, meal: MealType, carbs: f64) -> MealEntry {
        MealEntry {
            date: date(d),
            meal_type: meal,
            food_names: vec!["food".into()],
            nutrients: NutrientVector {
                calories: Amount::from_f64(carbs * 4.0).unwrap(),
                carbohydrates_g: Amount::from_f64(carbs).unwrap(),
                fat_g: Amount::ZERO,
                protein_g: Amount::ZERO,
            },
        }
    }

    #[test]
    fn parse_single_jsonl_record() {
        let text = r#"{"date":"2021-09-23","meal":"breakfast","foods":["oatmeal","blueberries"],"calories":320,"carbohydrates_g":54.0,"fat_g":6.0,"protein_g":12.0}"#;
        let log = parse_log(text).unwrap();
        assert_eq!(log.len(), 1);
        let e = &log.entries()[0];
        assert_eq!(e.date, date("2021-09-23"));
        assert_eq!(e.meal_type, MealType::Breakfast);
        assert_eq!(e.food_names, vec!["oatmeal", "blueberries"]);
        assert_eq!(e.nutrients.carbohydrates_g.as_f64(), 54.0);
    }

    #[test]
    fn parse_empty_document() {
        assert_eq!(parse_log("").unwrap().len(), 0);
        assert_eq!(parse_log("\n\n").unwrap().len(), 0);
    }

    #[test]
    fn negative_nutrient_is_rejected() {
        let text = r#"{"date":"2021-09-23","meal":"lunch","foods":[],"calories":100,"carbohydrates_g":-5,"fat_g":0,"protein_g":0}"#;
        let err = parse_log(text).unwrap_err();
        assert_eq!(
            err,
            FoodLogError::NegativeNutrient {
                index: 0,
                field: "carbohydrates_g".into()
            }
        );
        assert!(err.to_string().contains("negative nutrient"));
    }

    #[test]
    fn missing_field_names_record_and_field() {
        let text = r#"{"date":"2021-09-23","meal":"lunch","foods":[],"carbohydrates_g":5,"fat_g":0,"protein_g":0}"#;
        let err = parse_log(text).unwrap_err();
        assert_eq!(
            err,
            FoodLogError::MissingField {
                index: 0,
                field: "calories".into()
            }
        );
    }

    #[test]
    fn bad_date_is_rejected() {
        let text = r#"{"date":"2021-13-40","meal":"lunch","foods":[],"calories":1,"carbohydrates_g":0,"fat_g":0,"protein_g":0}"#;
        match parse_log(text).unwrap_err() {
            FoodLogError::InvalidField {
                index: 0, field, ..
            } => assert_eq!(field, "date"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn parse_csv_document() {
        let text = "date,meal,foods,calories,carbohydrates_g,fat_g,protein_g\n\
                    2021-09-23,Breakfast,oatmeal;blueberries,320,54.0,6.0,12.0\n\
                    2021-09-23,lunch,\"salad, greek\",410,30.5,22.0,18.0\n";
        let log = parse_log(text).unwrap();
        assert_eq!(log.len(), 2);
        assert_eq!(log.entries()[0].meal_type, MealType::Breakfast);
        assert_eq!(log.entries()[1].food_names, vec!["salad, greek"]);
        assert_eq!(log.entries()[1].nutrients.carbohydrates_g.as_f64(), 30.5);
    }

    #[test]
    fn parse_sorts_entries() {
        let text = r#"{"date":"2021-09-24","meal":"dinner","foods":[],"calories":1,"carbohydrates_g":0,"fat_g":0,"protein_g":0}
{"date":"2021-09-23","meal":"lunch","foods":[],"calories":1,"carbohydrates_g":0,"fat_g":0,"protein_g":0}
{"date":"2021-09-23","meal":"breakfast","foods":[],"calories":1,"carbohydrates_g":0,"fat_g":0,"protein_g":0}"#;
        let log = parse_log(text).unwrap();
        let order: Vec<(NaiveDate, MealType)> = log
            .entries()
            .iter()
            .map(|e| (e.date, e.meal_type))
            .collect();
        assert_eq!(
            order,
            vec![
                (date("2021-09-23"), MealType::Breakfast),
                (date("2021-09-23"), MealType::Lunch),
                (date("2021-09-24"), MealType::Dinner),
            ]
        );
    }

    #[test]
    fn duplicate_meal_slot_is_a_violation() {
        let log = FoodLog::new(
            "user",
            vec![
                entry("2021-09-23", MealType::Breakfast, 40.0),
                entry("2021-09-23", MealType::Breakfast, 42.0),
            ],
        );
        let report = validate_log(&log);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].meal_type, MealType::Breakfast);
        assert!(report.gap_days.is_empty());
    }

    #[test]
    fn clean_log_validates_clean() {
        let clean: Vec<MealEntry> = (1..=28)
            .flat_map(|d| {
                [MealType::Breakfast, MealType::Lunch, MealType::Dinner]
                    .into_iter()
                    .map(move |m| entry(&format!("2021-09-{d:02}"), m, 40.0))
            })
            .collect();
        let report = validate_log(&FoodLog::new("user", clean));
        assert!(report.is_clean());
        assert!(report.gap_days.is_empty());
    }

    #[test]
    fn missing_day_is_a_gap_warning_not_a_violation() {
        let log = FoodLog::new(
            "user",
            vec![
                entry("2021-09-16", MealType::Breakfast, 40.0),
                entry("2021-09-18", MealType::Breakfast, 40.0),
            ],
        );
        let report = validate_log(&log);
        assert!(report.violations.is_empty());
        assert_eq!(report.gap_days, vec![date("2021-09-17")]);
    }

    #[test]
    fn daily_totals_sums_meals() {
        let log = FoodLog::new(
            "user",
            vec![
                entry("2021-09-23", MealType::Breakfast, 40.0),
                entry("2021-09-23", MealType::Lunch, 50.0),
                entry("2021-09-23", MealType::Dinner, 60.0),
            ],
        );
        let days = daily_totals(&log);
        assert_eq!(days.len(), 1);
        assert_eq!(days[0].total.carbohydrates_g.as_f64(), 150.0);
        assert_eq!(days[0].meals_logged, 3);
    }

    #[test]
    fn daily_totals_of_empty_log_is_empty() {
        assert!(daily_totals(&FoodLog::new("user", vec![])).is_empty());
    }

    #[test]
    fn dinner_only_day() {
        let log = FoodLog::new("user", vec![entry("2021-09-23", MealType::Dinner, 33.5)]);
        let days = daily_totals(&log);
        assert_eq!(days[0].meals_logged, 1);
        assert_eq!(days[0].total.carbohydrates_g.as_f64(), 33.5);
        assert_eq!(
            days[0].per_meal[&MealType::Dinner].carbohydrates_g.as_f64(),
            33.5
        );
    }

    #[test]
    fn jsonl_round_trip_preserves_log() {
        let log = FoodLog::new(
            "user",
            vec![
                entry("2021-09-23", MealType::Breakfast, 40.3),
                entry("2021-09-23", MealType::Lunch, 50.0),
            ],
        );
        let back = parse_log(&log.to_jsonl()).unwrap();
        assert_eq!(back, log);
    }

    #[test]
    fn absurd_nutrient_magnitudes_are_parse_errors() {
        let text = r#"{"date":"2021-09-23","meal":"lunch","foods":[],"calories":1e300,"carbohydrates_g":0,"fat_g":0,"protein_g":0}"#;
        match parse_log(text).unwrap_err() {
            FoodLogError::InvalidField { field, .. } => assert_eq!(field, "calories"),
            other => panic!("unexpected error {other:?}"),
        }
        assert!(Amount::from_f64(f64::NAN).is_none());
        assert!(Amount::from_f64(f64::INFINITY).is_none());
        assert!(Amount::from_f64(Amount::MAX + 1.0).is_none());
        assert!(Amount::from_f64(Amount::MAX).is_some());
    }

    #[test]
    fn amount_display_drops_trailing_zero() {
        assert_eq!(Amount::from_f64(320.0).unwrap().to_string(), "320");
        assert_eq!(Amount::from_f64(54.5).unwrap().to_string(), "54.5");
    }
}
