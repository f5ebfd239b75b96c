//! Threshold/window settings resolution: defaults, then config file, then
//! explicit flags.

use crate::pipeline::CliError;
use crate::ThresholdArgs;
use phkg_core::tss::Thresholds;
use std::fs;

#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub thresholds: Thresholds,
    pub window_days: u32,
}

impl Default for Settings {
    fn default() -> Settings {
        Settings {
            thresholds: Thresholds::default(),
            window_days: 7,
        }
    }
}

/// Parses `key = value` lines; `#` starts a comment.
fn apply_config_file(settings: &mut Settings, text: &str, path: &str) -> Result<(), CliError> {
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Validation(format!(
                "{path}:{}: expected 'key = value'",
                i + 1
            )));
        };
        let key = key.trim();
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|e| CliError::Validation(format!("{path}:{}: invalid number: {e}", i + 1)))?;
        if key == "window_length_days" {
            settings.window_days = value as u32;
        } else {
            settings
                .thresholds
                .set_field(key, value)
                .map_err(|e| CliError::Validation(format!("{path}:{}: {e}", i + 1)))?;
        }
    }
    Ok(())
}

/// Builds settings from a config file (if given) and flag overrides.
pub fn resolve(args: &ThresholdArgs) -> Result<Settings, CliError> {
    let mut settings = Settings::default();
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        apply_config_file(&mut settings, &text, &path.display().to_string())?;
    }
    let overrides = [
        ("low_carb_max_g_per_day", args.low_carb_max_g_per_day),
        ("high_carb_energy_fraction", args.high_carb_energy_fraction),
        ("low_fat_energy_fraction", args.low_fat_energy_fraction),
        ("high_fat_energy_fraction", args.high_fat_energy_fraction),
        ("cv_consistent_max", args.cv_consistent_max),
        ("usually_fraction", args.usually_fraction),
    ];
    for (name, value) in overrides {
        if let Some(v) = value {
            settings
                .thresholds
                .set_field(name, v)
                .map_err(|e| CliError::Validation(e.to_string()))?;
        }
    }
    if let Some(days) = args.window_days {
        settings.window_days = days;
    }
    settings
        .thresholds
        .validate()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    if settings.window_days < 1 {
        return Err(CliError::Validation(
            "window_length_days must be at least 1".into(),
        ));
    }
    Ok(settings)
}
