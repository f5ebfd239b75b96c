//! Deterministic synthetic food log generation.
//!
//! Values are drawn from a seeded ChaCha8 stream in a fixed order (skip
//! decision, then carbs, fat, protein, calories per meal slot), so a given
//! [`GenSpec`] always produces the same log byte for byte.

use super::{Amount, FoodLog, MealEntry, MealType, NutrientVector};
use crate::tss::{classify_day, DietLabel, Thresholds};
use chrono::NaiveDate;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("contradictory pattern toggles: {0}")]
    ContradictoryToggles(String),
}

/// Parameters for the synthetic generator. Means and jitters are per meal;
/// each drawn value lies in `[mean*(1-jitter), mean*(1+jitter)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub start: NaiveDate,
    pub num_days: u32,
    pub meal_slots: Vec<MealType>,
    pub carb_mean_g: f64,
    pub carb_jitter: f64,
    pub fat_mean_g: f64,
    pub fat_jitter: f64,
    pub protein_mean_g: f64,
    pub protein_jitter: f64,
    pub calorie_mean: f64,
    pub calorie_jitter: f64,
    pub consistent_carbs: bool,
    pub low_carb_high_fat: bool,
    pub skip_breakfast_probability: f64,
    pub seed: u64,
}

impl Default for GenSpec {
    fn default() -> GenSpec {
        GenSpec {
            start: NaiveDate::from_ymd_opt(2021, 9, 23).expect("valid date"),
            num_days: 35,
            meal_slots: vec![MealType::Breakfast, MealType::Lunch, MealType::Dinner],
            carb_mean_g: 40.0,
            carb_jitter: 0.1,
            fat_mean_g: 25.0,
            fat_jitter: 0.1,
            protein_mean_g: 20.0,
            protein_jitter: 0.1,
            calorie_mean: 465.0,
            calorie_jitter: 0.05,
            consistent_carbs: false,
            low_carb_high_fat: false,
            skip_breakfast_probability: 0.0,
            seed: 7,
        }
    }
}

impl GenSpec {
    pub fn validate(&self) -> Result<(), GenError> {
        if self.num_days < 1 {
            return Err(GenError::InvalidSpec("num_days must be >= 1".into()));
        }
        if self.meal_slots.is_empty() {
            return Err(GenError::InvalidSpec("meal_slots must be non-empty".into()));
        }
        for (name, jitter) in [
            ("carb_jitter", self.carb_jitter),
            ("fat_jitter", self.fat_jitter),
            ("protein_jitter", self.protein_jitter),
            ("calorie_jitter", self.calorie_jitter),
        ] {
            if !(0.0..=1.0).contains(&jitter) {
                return Err(GenError::InvalidSpec(format!("{name} must be in [0,1]")));
            }
        }
        if !(0.0..=1.0).contains(&self.skip_breakfast_probability) {
            return Err(GenError::InvalidSpec(
                "skip_breakfast_probability must be in [0,1]".into(),
            ));
        }
        for (name, mean) in [
            ("carb_mean_g", self.carb_mean_g),
            ("fat_mean_g", self.fat_mean_g),
            ("protein_mean_g", self.protein_mean_g),
            ("calorie_mean", self.calorie_mean),
        ] {
            // The wide 2.25x carb band must still quantize, hence the /3.
            if !mean.is_finite() || !(0.0..=Amount::MAX / 3.0).contains(&mean) {
                return Err(GenError::InvalidSpec(format!(
                    "{name} must be finite and in [0, {}]",
                    Amount::MAX / 3.0
                )));
            }
        }
        Ok(())
    }
}

/// Uniform draw in [0, 1) from the top 53 bits of the stream.
fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn jittered(rng: &mut ChaCha8Rng, mean: f64, jitter: f64) -> f64 {
    let lo = mean * (1.0 - jitter);
    let hi = mean * (1.0 + jitter);
    lo + (hi - lo) * unit(rng)
}

/// Generates a log for the given parameters. With `consistent_carbs` the per-meal carb
/// values stay inside the jitter band; without it they range over a wide
/// band so windows come out inconsistent. With `low_carb_high_fat`, every
/// generated day must classify as both LowCarbDiet and HighFatDiet under
/// default thresholds, otherwise generation fails.
pub fn generate_synthetic_log(spec: &GenSpec) -> Result<FoodLog, GenError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut entries = Vec::new();
    for day_offset in 0..spec.num_days {
        let date = spec
            .start
            .checked_add_days(chrono::Days::new(day_offset as u64))
            .ok_or_else(|| GenError::InvalidSpec("date out of range".into()))?;
        for &slot in &spec.meal_slots {
            if slot == MealType::Breakfast
                && spec.skip_breakfast_probability > 0.0
                && unit(&mut rng) < spec.skip_breakfast_probability
            {
                continue;
            }
            let carbs = if spec.consistent_carbs {
                jittered(&mut rng, spec.carb_mean_g, spec.carb_jitter)
            } else {
                // Wide band: 0.25x to 2.25x the mean.
                let lo = spec.carb_mean_g * 0.25;
                let hi = spec.carb_mean_g * 2.25;
                lo + (hi - lo) * unit(&mut rng)
            };
            let fat = jittered(&mut rng, spec.fat_mean_g, spec.fat_jitter);
            let protein = jittered(&mut rng, spec.protein_mean_g, spec.protein_jitter);
            let calories = jittered(&mut rng, spec.calorie_mean, spec.calorie_jitter);
            let quantize = |v: f64| Amount::from_f64(v).expect("jittered values are finite");
            entries.push(MealEntry {
                date,
                meal_type: slot,
                food_names: vec![format!("synthetic {slot} item")],
                nutrients: NutrientVector {
                    calories: quantize(calories),
                    carbohydrates_g: quantize(carbs),
                    fat_g: quantize(fat),
                    protein_g: quantize(protein),
                },
            });
        }
    }
    let log = FoodLog::new("user", entries);

    if spec.low_carb_high_fat {
        let thresholds = Thresholds::default();
        for day in super::daily_totals(&log) {
            let labels = classify_day(&day, &thresholds)
                .map_err(|e| GenError::ContradictoryToggles(format!("day {}: {e}", day.date)))?;
            if !labels.contains(&DietLabel::LowCarbDiet)
                || !labels.contains(&DietLabel::HighFatDiet)
            {
                return Err(GenError::ContradictoryToggles(format!(
                    "day {} classifies as {:?}, not low-carb/high-fat; adjust means or jitters",
                    day.date, labels
                )));
            }
        }
    }
    Ok(log)
}
