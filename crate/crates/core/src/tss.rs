//! Extended time series summarization over daily nutrient series.
//!
//! Instead of prose summaries, the miner emits structured patterns: how
//! consistent a nutrient's intake was over a window (coefficient of
//! variation), how frequently each diet label held, and whether two labels
//! usually co-occurred. Windows tile the log in consecutive, non-overlapping
//! runs of `window_length_days` starting at the first logged date; a shorter
//! trailing window is still mined but flagged as partial.
//!
//! All functions here are pure.

use crate::foodlog::{daily_totals, validate_log, DayNutrients, FoodLog, MealType};
use chrono::NaiveDate;
use serde::Serialize;
use std::collections::BTreeSet;
use thiserror::Error;

const KCAL_PER_G_CARB: f64 = 4.0;
const KCAL_PER_G_FAT: f64 = 9.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TssError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("coefficient of variation undefined for zero-mean series")]
    UndefinedCv,
    #[error("data inconsistency on {date}: {message}")]
    DataInconsistency { date: NaiveDate, message: String },
    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),
    #[error("invalid window: start must not be after end")]
    InvalidWindow,
    #[error("log failed validation with {0} duplicate meal slot(s)")]
    UnvalidatedLog(usize),
}

/// Clinical cutoffs used by the day classifier and the consistency flag.
/// Defaults: low-carb < 130 g/day, high-carb >= 50% of energy, low-fat <=
/// 25% of energy, high-fat >= 40% of energy, consistent CV <= 0.25,
/// "usually" means strictly more than half of data days.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub low_carb_max_g_per_day: f64,
    pub high_carb_energy_fraction: f64,
    pub low_fat_energy_fraction: f64,
    pub high_fat_energy_fraction: f64,
    pub cv_consistent_max: f64,
    pub usually_fraction: f64,
}

impl Default for Thresholds {
    fn default() -> Thresholds {
        Thresholds {
            low_carb_max_g_per_day: 130.0,
            high_carb_energy_fraction: 0.50,
            low_fat_energy_fraction: 0.25,
            high_fat_energy_fraction: 0.40,
            cv_consistent_max: 0.25,
            usually_fraction: 0.5,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<(), TssError> {
        let fractions = [
            ("high_carb_energy_fraction", self.high_carb_energy_fraction),
            ("low_fat_energy_fraction", self.low_fat_energy_fraction),
            ("high_fat_energy_fraction", self.high_fat_energy_fraction),
            ("usually_fraction", self.usually_fraction),
        ];
        for (name, value) in fractions {
            if !(value > 0.0 && value < 1.0) {
                return Err(TssError::InvalidThresholds(format!(
                    "{name} must be in (0,1), got {value}"
                )));
            }
        }
        if !self.low_carb_max_g_per_day.is_finite() || self.low_carb_max_g_per_day <= 0.0 {
            return Err(TssError::InvalidThresholds(
                "low_carb_max_g_per_day must be > 0".into(),
            ));
        }
        if !self.cv_consistent_max.is_finite() || self.cv_consistent_max <= 0.0 {
            return Err(TssError::InvalidThresholds(
                "cv_consistent_max must be > 0".into(),
            ));
        }
        if self.high_fat_energy_fraction <= self.low_fat_energy_fraction {
            return Err(TssError::InvalidThresholds(
                "high_fat_energy_fraction must exceed low_fat_energy_fraction".into(),
            ));
        }
        Ok(())
    }

    /// Sets a threshold field by name; used by config files and CLI flags.
    pub fn set_field(&mut self, name: &str, value: f64) -> Result<(), TssError> {
        match name {
            "low_carb_max_g_per_day" => self.low_carb_max_g_per_day = value,
            "high_carb_energy_fraction" => self.high_carb_energy_fraction = value,
            "low_fat_energy_fraction" => self.low_fat_energy_fraction = value,
            "high_fat_energy_fraction" => self.high_fat_energy_fraction = value,
            "cv_consistent_max" => self.cv_consistent_max = value,
            "usually_fraction" => self.usually_fraction = value,
            _ => {
                return Err(TssError::InvalidThresholds(format!(
                    "unknown threshold field '{name}'"
                )))
            }
        }
        Ok(())
    }
}

/// Per-day diet classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum DietLabel {
    LowCarbDiet,
    HighCarbDiet,
    LowFatDiet,
    HighFatDiet,
}

impl DietLabel {
    pub const ALL: [DietLabel; 4] = [
        DietLabel::LowCarbDiet,
        DietLabel::HighCarbDiet,
        DietLabel::LowFatDiet,
        DietLabel::HighFatDiet,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            DietLabel::LowCarbDiet => "LowCarbDiet",
            DietLabel::HighCarbDiet => "HighCarbDiet",
            DietLabel::LowFatDiet => "LowFatDiet",
            DietLabel::HighFatDiet => "HighFatDiet",
        }
    }
}

/// Nutrient series a consistency pattern can summarize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Nutrient {
    Carbohydrates,
    Fat,
    Protein,
    Calories,
}

impl Nutrient {
    pub fn as_str(&self) -> &'static str {
        match self {
            Nutrient::Carbohydrates => "carbohydrates",
            Nutrient::Fat => "fat",
            Nutrient::Protein => "protein",
            Nutrient::Calories => "calories",
        }
    }

    pub fn parse(s: &str) -> Option<Nutrient> {
        match s.to_ascii_lowercase().as_str() {
            "carbohydrates" | "carbohydrate" | "carbs" => Some(Nutrient::Carbohydrates),
            "fat" => Some(Nutrient::Fat),
            "protein" => Some(Nutrient::Protein),
            "calories" => Some(Nutrient::Calories),
            _ => None,
        }
    }

    fn of(&self, day: &DayNutrients) -> f64 {
        match self {
            Nutrient::Carbohydrates => day.total.carbohydrates_g.as_f64(),
            Nutrient::Fat => day.total.fat_g.as_f64(),
            Nutrient::Protein => day.total.protein_g.as_f64(),
            Nutrient::Calories => day.total.calories.as_f64(),
        }
    }

    fn of_meal(&self, day: &DayNutrients, meal: MealType) -> Option<f64> {
        let v = day.per_meal.get(&meal)?;
        Some(match self {
            Nutrient::Carbohydrates => v.carbohydrates_g.as_f64(),
            Nutrient::Fat => v.fat_g.as_f64(),
            Nutrient::Protein => v.protein_g.as_f64(),
            Nutrient::Calories => v.calories.as_f64(),
        })
    }
}

/// Series granularity: whole-day totals or a single meal slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Granularity {
    Daily,
    PerMeal(MealType),
}

/// An inclusive date window at some granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Window {
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub granularity: Granularity,
}

impl Window {
    pub fn new(
        start: NaiveDate,
        end: NaiveDate,
        granularity: Granularity,
    ) -> Result<Window, TssError> {
        if start > end {
            return Err(TssError::InvalidWindow);
        }
        Ok(Window {
            start,
            end,
            granularity,
        })
    }

    pub fn daily(start: NaiveDate, end: NaiveDate) -> Result<Window, TssError> {
        Window::new(start, end, Granularity::Daily)
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }

    /// Number of calendar days covered, inclusive.
    pub fn days(&self) -> i64 {
        (self.end - self.start).num_days() + 1
    }
}

/// How steady a nutrient series was over a window. `consistent` holds iff
/// the coefficient of variation is at or below `cv_consistent_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyPattern {
    pub nutrient: Nutrient,
    pub window: Window,
    pub value: f64,
    pub consistent: bool,
}

impl ConsistencyPattern {
    /// The statistic this pattern serializes.
    pub fn statistic_kind(&self) -> &'static str {
        "coefficientOfVariation"
    }
}

/// Fraction of data days in the window carrying a diet label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DietLabelFrequency {
    pub label: DietLabel,
    pub window: Window,
    pub frequency: f64,
}

/// Whether two labels usually co-occurred across the window's data days.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombinedGoal {
    pub participants: (DietLabel, DietLabel),
    pub window: Window,
    pub holds: bool,
    pub co_occurrence_fraction: f64,
}

/// One tiled mining window and whether it covered a full period.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinedWindow {
    pub window: Window,
    pub full: bool,
    pub data_days: usize,
}

/// Everything mined from one log.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PatternSet {
    pub consistency: Vec<ConsistencyPattern>,
    pub frequencies: Vec<DietLabelFrequency>,
    pub combined: Vec<CombinedGoal>,
    pub windows: Vec<MinedWindow>,
}

/// Population coefficient of variation (population std dev / mean), computed
/// with Welford's online update.
pub fn coefficient_of_variation(series: &[f64]) -> Result<f64, TssError> {
    if series.len() < 2 {
        return Err(TssError::InsufficientData(format!(
            "need at least 2 points, got {}",
            series.len()
        )));
    }
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    for (i, &x) in series.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (i as f64 + 1.0);
        m2 += delta * (x - mean);
    }
    if mean.is_nan() || mean <= 0.0 {
        return Err(TssError::UndefinedCv);
    }
    let population_variance = m2 / series.len() as f64;
    Ok(population_variance.sqrt() / mean)
}

/// Classifies one day against the thresholds. Low-carb is gram-based; the
/// other three labels are energy fractions and need calories > 0. A day with
/// zero calories but non-zero macros is inconsistent data, as is a day that
/// triggers both labels of an exclusive pair.
pub fn classify_day(
    day: &DayNutrients,
    thresholds: &Thresholds,
) -> Result<BTreeSet<DietLabel>, TssError> {
    let calories = day.total.calories.as_f64();
    let carbs = day.total.carbohydrates_g.as_f64();
    let fat = day.total.fat_g.as_f64();

    if day.total.is_zero() {
        return Ok(BTreeSet::new());
    }
    if calories == 0.0 {
        return Err(TssError::DataInconsistency {
            date: day.date,
            message: "zero calories with non-zero macronutrients".into(),
        });
    }

    let mut labels = BTreeSet::new();
    if carbs < thresholds.low_carb_max_g_per_day {
        labels.insert(DietLabel::LowCarbDiet);
    }
    let carb_fraction = carbs * KCAL_PER_G_CARB / calories;
    if carb_fraction >= thresholds.high_carb_energy_fraction {
        labels.insert(DietLabel::HighCarbDiet);
    }
    let fat_fraction = fat * KCAL_PER_G_FAT / calories;
    if fat_fraction <= thresholds.low_fat_energy_fraction {
        labels.insert(DietLabel::LowFatDiet);
    }
    if fat_fraction >= thresholds.high_fat_energy_fraction {
        labels.insert(DietLabel::HighFatDiet);
    }

    for (a, b, what) in [
        (
            DietLabel::LowCarbDiet,
            DietLabel::HighCarbDiet,
            "carbohydrate",
        ),
        (DietLabel::LowFatDiet, DietLabel::HighFatDiet, "fat"),
    ] {
        if labels.contains(&a) && labels.contains(&b) {
            return Err(TssError::DataInconsistency {
                date: day.date,
                message: format!("both low and high {what} labels fired"),
            });
        }
    }
    Ok(labels)
}

fn data_days<'a>(days: &'a [DayNutrients], window: &Window) -> Vec<&'a DayNutrients> {
    days.iter()
        .filter(|d| window.contains(d.date) && d.meals_logged > 0)
        .collect()
}

/// Frequency of one diet label across the window's data days.
pub fn pattern_frequency(
    days: &[DayNutrients],
    label: DietLabel,
    thresholds: &Thresholds,
    window: Window,
) -> Result<DietLabelFrequency, TssError> {
    let in_window = data_days(days, &window);
    if in_window.is_empty() {
        return Err(TssError::InsufficientData(format!(
            "no data days in window {}..{}",
            window.start, window.end
        )));
    }
    let mut qualifying = 0usize;
    for day in &in_window {
        if classify_day(day, thresholds)?.contains(&label) {
            qualifying += 1;
        }
    }
    Ok(DietLabelFrequency {
        label,
        window,
        frequency: qualifying as f64 / in_window.len() as f64,
    })
}

/// Coefficient-of-variation consistency for one nutrient over a window. The
/// series is daily totals, or one meal slot's values at per-meal granularity
/// (days missing that meal contribute no point).
pub fn detect_consistency(
    days: &[DayNutrients],
    nutrient: Nutrient,
    window: Window,
    thresholds: &Thresholds,
) -> Result<ConsistencyPattern, TssError> {
    let in_window = data_days(days, &window);
    let series: Vec<f64> = match window.granularity {
        Granularity::Daily => in_window.iter().map(|d| nutrient.of(d)).collect(),
        Granularity::PerMeal(meal) => in_window
            .iter()
            .filter_map(|d| nutrient.of_meal(d, meal))
            .collect(),
    };
    let value = coefficient_of_variation(&series)?;
    Ok(ConsistencyPattern {
        nutrient,
        window,
        value,
        consistent: value <= thresholds.cv_consistent_max,
    })
}

/// Fraction of data days on which both labels held, and whether that is
/// "usually" (strictly above `usually_fraction`).
pub fn detect_combined_goal(
    days: &[DayNutrients],
    labels: (DietLabel, DietLabel),
    window: Window,
    thresholds: &Thresholds,
) -> Result<CombinedGoal, TssError> {
    let in_window = data_days(days, &window);
    if in_window.is_empty() {
        return Err(TssError::InsufficientData(format!(
            "no data days in window {}..{}",
            window.start, window.end
        )));
    }
    let mut both = 0usize;
    for day in &in_window {
        let day_labels = classify_day(day, thresholds)?;
        if day_labels.contains(&labels.0) && day_labels.contains(&labels.1) {
            both += 1;
        }
    }
    let fraction = both as f64 / in_window.len() as f64;
    Ok(CombinedGoal {
        participants: labels,
        window,
        holds: fraction > thresholds.usually_fraction,
        co_occurrence_fraction: fraction,
    })
}

/// Mines the full pattern set: per tiled window, a daily carbohydrate
/// consistency pattern, per-meal carbohydrate consistency for each slot with
/// enough data, all four diet label frequencies, and the low-carb/high-fat
/// combined goal. Windows or series without enough points are skipped rather
/// than failing the run; genuinely inconsistent data still errors.
pub fn mine_patterns(
    log: &FoodLog,
    thresholds: &Thresholds,
    window_length_days: u32,
) -> Result<PatternSet, TssError> {
    thresholds.validate()?;
    if window_length_days < 1 {
        return Err(TssError::InvalidWindow);
    }
    let report = validate_log(log);
    if !report.is_clean() {
        return Err(TssError::UnvalidatedLog(report.violations.len()));
    }
    let days = daily_totals(log);
    if days.is_empty() {
        return Err(TssError::InsufficientData("empty log".into()));
    }

    let first = days.first().expect("non-empty").date;
    let last = days.last().expect("non-empty").date;
    let mut set = PatternSet::default();
    let mut start = first;
    while start <= last {
        let nominal_end = start
            .checked_add_days(chrono::Days::new(window_length_days as u64 - 1))
            .expect("date within calendar range");
        let end = nominal_end.min(last);
        let full = end == nominal_end;
        let window = Window::daily(start, end)?;
        let in_window = data_days(&days, &window);
        set.windows.push(MinedWindow {
            window,
            full,
            data_days: in_window.len(),
        });

        if !in_window.is_empty() {
            let skippable =
                |e: &TssError| matches!(e, TssError::InsufficientData(_) | TssError::UndefinedCv);
            match detect_consistency(&days, Nutrient::Carbohydrates, window, thresholds) {
                Ok(p) => set.consistency.push(p),
                Err(e) if skippable(&e) => {}
                Err(e) => return Err(e),
            }
            for meal in MealType::ALL {
                let w = Window::new(start, end, Granularity::PerMeal(meal))?;
                match detect_consistency(&days, Nutrient::Carbohydrates, w, thresholds) {
                    Ok(p) => set.consistency.push(p),
                    Err(e) if skippable(&e) => {}
                    Err(e) => return Err(e),
                }
            }
            for label in DietLabel::ALL {
                set.frequencies
                    .push(pattern_frequency(&days, label, thresholds, window)?);
            }
            set.combined.push(detect_combined_goal(
                &days,
                (DietLabel::LowCarbDiet, DietLabel::HighFatDiet),
                window,
                thresholds,
            )?);
        }

        start = nominal_end
            .checked_add_days(chrono::Days::new(1))
            .expect("date within calendar range");
    }
    Ok(set)
}
