//! Stage implementations. The `pipeline` subcommand chains the same
//! functions the individual subcommands call, so composing stages by hand
//! produces byte-identical files.

use crate::config::Settings;
use crate::GenArgs;
use phkg_core::foodlog::{
    generate_synthetic_log, parse_log, validate_log, FoodLog, GenSpec, MealType,
};
use phkg_core::guidelines::{builtin_guidelines, parse_guideline, GuidelineRule};
use phkg_core::phkg::{build_phkg_with, BuildOptions, UserProfile};
use phkg_core::query::{answer_competency, execute, parse_query, CompetencyParams};
use phkg_core::rdf::Graph;
use phkg_core::reasoner::{
    active_constraints, classify_with, ComplianceVerdict, ConstraintSet, Directive, ReasonerOptions,
};
use phkg_core::recommend::{filter_recipes, load_catalog, RecipeCatalog};
use phkg_core::tss::mine_patterns;
use serde::Serialize;
use std::fs;
use std::path::Path;

/// Errors split by exit code: validation problems exit 1, I/O problems 2.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
}

impl CliError {
    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Io(m) => m,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

macro_rules! validation_from {
    ($($ty:ty),+ $(,)?) => {
        $(impl From<$ty> for CliError {
            fn from(e: $ty) -> CliError {
                CliError::Validation(e.to_string())
            }
        })+
    };
}

validation_from!(
    phkg_core::foodlog::FoodLogError,
    phkg_core::foodlog::GenError,
    phkg_core::tss::TssError,
    phkg_core::phkg::ProfileError,
    phkg_core::rdf::TurtleError,
    phkg_core::guidelines::RuleParseError,
    phkg_core::reasoner::ReasonerError,
    phkg_core::query::QueryError,
    phkg_core::recommend::CatalogError,
    serde_json::Error,
);

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, content: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
        }
    }
    fs::write(path, content).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_or_print(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write(p, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn pretty_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

fn load_log(path: &Path) -> Result<FoodLog, CliError> {
    Ok(parse_log(&read(path)?)?)
}

/// Parses and validates; duplicate meal slots are fatal, gaps are warnings.
fn load_validated_log(path: &Path) -> Result<FoodLog, CliError> {
    let log = load_log(path)?;
    let report = validate_log(&log);
    if !report.is_clean() {
        let details: Vec<String> = report
            .violations
            .iter()
            .map(|v| format!("{} {} logged {} times", v.date, v.meal_type, v.count))
            .collect();
        return Err(CliError::Validation(format!(
            "duplicate meal slots: {}",
            details.join("; ")
        )));
    }
    for day in &report.gap_days {
        eprintln!("warning: no meals logged on {day}");
    }
    Ok(log)
}

pub fn cmd_gen(args: &GenArgs) -> Result<(), CliError> {
    let start = args
        .start
        .parse()
        .map_err(|e| CliError::Validation(format!("invalid --start date: {e}")))?;
    let mut meal_slots = Vec::new();
    for name in args.meals.split(',') {
        let meal = MealType::parse(name.trim())
            .ok_or_else(|| CliError::Validation(format!("unknown meal type '{name}'")))?;
        meal_slots.push(meal);
    }
    let spec = GenSpec {
        start,
        num_days: args.days,
        meal_slots,
        carb_mean_g: args.carb_mean,
        carb_jitter: args.carb_jitter,
        fat_mean_g: args.fat_mean,
        fat_jitter: args.fat_jitter,
        protein_mean_g: args.protein_mean,
        protein_jitter: args.protein_jitter,
        calorie_mean: args.calorie_mean,
        calorie_jitter: args.calorie_jitter,
        consistent_carbs: args.consistent_carbs,
        low_carb_high_fat: args.low_carb_high_fat,
        skip_breakfast_probability: args.skip_breakfast_prob,
        seed: args.seed,
    };
    let log = generate_synthetic_log(&spec)?;
    write(&args.out, &log.to_jsonl())
}

pub fn cmd_ingest(log_path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let log = load_validated_log(log_path)?;
    write_or_print(out, &log.to_jsonl())
}

pub fn cmd_summarize(
    log_path: &Path,
    out: Option<&Path>,
    settings: &Settings,
) -> Result<(), CliError> {
    let log = load_validated_log(log_path)?;
    let patterns = mine_patterns(&log, &settings.thresholds, settings.window_days)?;
    write_or_print(out, &pretty_json(&patterns)?)
}

pub fn cmd_build_kg(
    log_path: &Path,
    profile_path: &Path,
    out: Option<&Path>,
    settings: &Settings,
) -> Result<(), CliError> {
    let log = load_validated_log(log_path)?;
    let profile = UserProfile::from_json(&read(profile_path)?)?;
    let patterns = mine_patterns(&log, &settings.thresholds, settings.window_days)?;
    let graph = build_phkg_with(
        &patterns,
        &profile,
        &BuildOptions {
            sustained_min_fraction: settings.thresholds.usually_fraction,
        },
    );
    write_or_print(out, &graph.to_turtle())
}

/// Built-in rules plus any `.rule` files from the directory, sorted by file
/// name; a file rule with a built-in id replaces the built-in.
fn load_rules(rules_dir: Option<&Path>) -> Result<Vec<GuidelineRule>, CliError> {
    let mut rules = builtin_guidelines();
    let Some(dir) = rules_dir else {
        return Ok(rules);
    };
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "rule"))
        .collect();
    paths.sort();
    for path in paths {
        let rule = parse_guideline(&read(&path)?)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        match rules.iter_mut().find(|r| r.id == rule.id) {
            Some(existing) => *existing = rule,
            None => rules.push(rule),
        }
    }
    Ok(rules)
}

/// The reason stage's JSON report.
#[derive(Serialize)]
struct ReasonReport {
    user: String,
    window_length_days: u32,
    verdicts: Vec<ComplianceVerdict>,
    directives: Vec<Directive>,
    constraints: ConstraintSet,
}

pub fn cmd_reason(
    kg_path: &Path,
    rules_dir: Option<&Path>,
    out_kg: Option<&Path>,
    report_path: Option<&Path>,
    window_days: u32,
) -> Result<(), CliError> {
    let graph = Graph::from_turtle(&read(kg_path)?)?;
    let rules = load_rules(rules_dir)?;
    let opts = ReasonerOptions {
        window_length_days: window_days,
    };
    let (reasoned, directives, verdicts) = classify_with(&graph, &rules, &opts)?;
    let constraints = active_constraints(&reasoned)?;
    let user = phkg_core::reasoner::find_user(&reasoned)?;
    let report = ReasonReport {
        user: user.as_iri().unwrap_or_default().to_string(),
        window_length_days: window_days,
        verdicts,
        directives,
        constraints,
    };
    if let Some(path) = out_kg {
        write(path, &reasoned.to_turtle())?;
    }
    write_or_print(report_path, &pretty_json(&report)?)
}

pub struct QueryRequest<'a> {
    pub kg: &'a Path,
    pub sparql: Option<&'a Path>,
    pub question: Option<&'a str>,
    pub catalog: Option<&'a Path>,
    pub meal: Option<MealType>,
    pub allergen: Option<&'a str>,
    pub exclude: Option<&'a str>,
    pub window_days: u32,
    pub progress_band: f64,
    pub out: Option<&'a Path>,
}

pub fn cmd_query(request: QueryRequest<'_>) -> Result<(), CliError> {
    let graph = Graph::from_turtle(&read(request.kg)?)?;
    match (request.sparql, request.question) {
        (Some(path), None) => {
            let query = parse_query(&read(path)?)?;
            let table = execute(&graph, &query);
            write_or_print(request.out, &table.to_tsv())
        }
        (None, Some(id)) => {
            let catalog = request
                .catalog
                .map(|p| -> Result<RecipeCatalog, CliError> { Ok(load_catalog(&read(p)?)?) })
                .transpose()?;
            let params = CompetencyParams {
                catalog: catalog.as_ref(),
                meal: request.meal,
                allergen: request.allergen,
                exclude_item: request.exclude,
                window_length_days: Some(request.window_days),
                progress_band: Some(request.progress_band),
            };
            let answer = answer_competency(&graph, id, &params)?;
            write_or_print(request.out, &pretty_json(&answer)?)
        }
        _ => Err(CliError::Validation(
            "provide exactly one of --sparql or --question".into(),
        )),
    }
}

/// Reads a ConstraintSet from either its own JSON form or a reason report
/// wrapping one under `constraints`.
fn load_constraints(path: Option<&Path>) -> Result<ConstraintSet, CliError> {
    let Some(path) = path else {
        return Ok(ConstraintSet::default());
    };
    let value: serde_json::Value = serde_json::from_str(&read(path)?)?;
    let subtree = value
        .get("constraints")
        .filter(|c| c.is_object())
        .unwrap_or(&value);
    Ok(serde_json::from_value(subtree.clone())?)
}

pub fn cmd_recommend(
    catalog_path: &Path,
    meal: MealType,
    constraints_path: Option<&Path>,
    today_log: Option<&Path>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let catalog = load_catalog(&read(catalog_path)?)?;
    let constraints = load_constraints(constraints_path)?;
    // A single recipe cannot violate a daily total, so the daily budget is
    // advisory: computed from the most recent logged day when one is given.
    let consumed = today_log
        .map(|path| -> Result<Option<f64>, CliError> {
            let log = load_log(path)?;
            Ok(phkg_core::foodlog::daily_totals(&log)
                .last()
                .map(|d| d.total.carbohydrates_g.as_f64()))
        })
        .transpose()?
        .flatten();
    if let Some(note) = phkg_core::recommend::daily_budget_note(&constraints, consumed) {
        eprintln!("note: {note}");
    }
    let recommendations = filter_recipes(&catalog, &constraints, meal);
    write_or_print(out, &pretty_json(&recommendations)?)
}

pub struct PipelineRequest<'a> {
    pub log: &'a Path,
    pub profile: &'a Path,
    pub catalog: &'a Path,
    pub out_dir: &'a Path,
    pub rules_dir: Option<&'a Path>,
    pub meal: MealType,
    pub settings: Settings,
}

pub fn cmd_pipeline(request: PipelineRequest<'_>) -> Result<(), CliError> {
    let dir = request.out_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let canonical = dir.join("log.canonical.jsonl");
    let patterns = dir.join("patterns.json");
    let kg = dir.join("phkg.ttl");
    let reasoned = dir.join("phkg.reasoned.ttl");
    let report = dir.join("report.json");
    let recommendations = dir.join("recommendations.json");

    cmd_ingest(request.log, Some(&canonical))?;
    cmd_summarize(request.log, Some(&patterns), &request.settings)?;
    cmd_build_kg(request.log, request.profile, Some(&kg), &request.settings)?;
    cmd_reason(
        &kg,
        request.rules_dir,
        Some(&reasoned),
        Some(&report),
        request.settings.window_days,
    )?;
    cmd_recommend(
        request.catalog,
        request.meal,
        Some(&report),
        None,
        Some(&recommendations),
    )?;
    println!(
        "pipeline complete: {}",
        [
            &canonical,
            &patterns,
            &kg,
            &reasoned,
            &report,
            &recommendations
        ]
        .iter()
        .map(|p| p.display().to_string())
        .collect::<Vec<_>>()
        .join(", ")
    );
    Ok(())
}
