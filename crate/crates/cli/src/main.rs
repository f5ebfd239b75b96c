//! Command-line pipeline: synthesize or ingest a food log, mine temporal
//! diet patterns, materialize them as a knowledge graph, reason with the
//! dietary guidelines, and answer questions or recommend recipes.
//!
//! Exit codes: 0 on success, 1 on validation or parse errors (printed as a
//! single `error: ...` line), 2 on I/O errors.

mod config;
mod pipeline;

use clap::{Args, Parser, Subcommand};
use phkg_core::foodlog::MealType;
use pipeline::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "phkg",
    version,
    about = "Food-log mining, personal health knowledge graphs, and guideline-driven dietary recommendations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Threshold overrides shared by every stage that classifies days or mines
/// patterns. A config file of `key = value` lines may set the same fields;
/// explicit flags win.
#[derive(Args, Debug, Clone, Default)]
struct ThresholdArgs {
    /// Config file with `key = value` lines (threshold names or window_length_days)
    #[arg(long, global = false)]
    config: Option<PathBuf>,
    #[arg(long = "thresholds.low_carb_max_g_per_day", value_name = "GRAMS")]
    low_carb_max_g_per_day: Option<f64>,
    #[arg(long = "thresholds.high_carb_energy_fraction", value_name = "FRACTION")]
    high_carb_energy_fraction: Option<f64>,
    #[arg(long = "thresholds.low_fat_energy_fraction", value_name = "FRACTION")]
    low_fat_energy_fraction: Option<f64>,
    #[arg(long = "thresholds.high_fat_energy_fraction", value_name = "FRACTION")]
    high_fat_energy_fraction: Option<f64>,
    #[arg(long = "thresholds.cv_consistent_max", value_name = "RATIO")]
    cv_consistent_max: Option<f64>,
    #[arg(long = "thresholds.usually_fraction", value_name = "FRACTION")]
    usually_fraction: Option<f64>,
    /// Mining window length in days
    #[arg(long = "window-days", value_name = "DAYS")]
    window_days: Option<u32>,
}

#[derive(Args, Debug, Clone)]
struct GenArgs {
    /// Output log path (JSON-lines)
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 35)]
    days: u32,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// First logged date (YYYY-MM-DD)
    #[arg(long, default_value = "2021-09-23")]
    start: String,
    /// Comma-separated meal slots to generate
    #[arg(long, default_value = "breakfast,lunch,dinner")]
    meals: String,
    #[arg(long, default_value_t = 40.0)]
    carb_mean: f64,
    #[arg(long, default_value_t = 0.1)]
    carb_jitter: f64,
    #[arg(long, default_value_t = 25.0)]
    fat_mean: f64,
    #[arg(long, default_value_t = 0.1)]
    fat_jitter: f64,
    #[arg(long, default_value_t = 20.0)]
    protein_mean: f64,
    #[arg(long, default_value_t = 0.1)]
    protein_jitter: f64,
    #[arg(long, default_value_t = 465.0)]
    calorie_mean: f64,
    #[arg(long, default_value_t = 0.05)]
    calorie_jitter: f64,
    /// Keep per-meal carbohydrates inside the jitter band
    #[arg(long)]
    consistent_carbs: bool,
    /// Guarantee every day classifies low-carb and high-fat
    #[arg(long)]
    low_carb_high_fat: bool,
    #[arg(long, default_value_t = 0.0)]
    skip_breakfast_prob: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a deterministic synthetic food log
    Gen(GenArgs),
    /// Validate a log and echo it in canonical JSON-lines form
    Ingest {
        #[arg(long)]
        log: PathBuf,
        /// Write the canonical log here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mine temporal patterns from a log into a JSON report
    Summarize {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        thresholds: ThresholdArgs,
    },
    /// Build the knowledge graph from a log and a profile
    #[command(name = "build-kg")]
    BuildKg {
        #[arg(long)]
        log: PathBuf,
        /// User profile JSON
        #[arg(long)]
        profile: PathBuf,
        /// Output Turtle path
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        thresholds: ThresholdArgs,
    },
    /// Evaluate guideline rules over a knowledge graph
    Reason {
        /// Input knowledge graph (Turtle)
        #[arg(long)]
        kg: PathBuf,
        /// Directory of additional .rule files (override built-ins by id)
        #[arg(long)]
        rules_dir: Option<PathBuf>,
        /// Output Turtle with asserted directives
        #[arg(long)]
        out_kg: Option<PathBuf>,
        /// JSON report of verdicts, directives, and constraints
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long = "window-days", default_value_t = 7)]
        window_days: u32,
    },
    /// Run a query file or a competency question against a graph
    Query {
        #[arg(long)]
        kg: PathBuf,
        /// Query file (SELECT subset); results as TSV
        #[arg(long, conflicts_with = "question")]
        sparql: Option<PathBuf>,
        /// Competency question id; result as JSON
        #[arg(long)]
        question: Option<String>,
        /// Recipe catalog (needed by food questions)
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long)]
        meal: Option<String>,
        /// Allergen for allergy-rec
        #[arg(long)]
        allergen: Option<String>,
        /// Item to exclude for substitute-rec
        #[arg(long)]
        exclude: Option<String>,
        #[arg(long = "window-days", default_value_t = 7)]
        window_days: u32,
        #[arg(long, default_value_t = 0.05)]
        progress_band: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank catalog recipes under a constraint set
    Recommend {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        meal: String,
        /// ConstraintSet JSON, or a reason report containing one
        #[arg(long)]
        constraints: Option<PathBuf>,
        /// Today's log; enables the remaining daily-budget note
        #[arg(long)]
        today_log: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every stage: ingest, summarize, build-kg, reason, recommend
    Pipeline {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        catalog: PathBuf,
        /// Directory for all stage outputs
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        rules_dir: Option<PathBuf>,
        #[arg(long, default_value = "breakfast")]
        meal: String,
        #[command(flatten)]
        thresholds: ThresholdArgs,
    },
}

fn parse_meal(name: &str) -> Result<MealType, CliError> {
    MealType::parse(name).ok_or_else(|| CliError::Validation(format!("unknown meal type '{name}'")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(args) => pipeline::cmd_gen(&args),
        Command::Ingest { log, out } => pipeline::cmd_ingest(&log, out.as_deref()),
        Command::Summarize {
            log,
            out,
            thresholds,
        } => {
            let settings = config::resolve(&thresholds)?;
            pipeline::cmd_summarize(&log, out.as_deref(), &settings)
        }
        Command::BuildKg {
            log,
            profile,
            out,
            thresholds,
        } => {
            let settings = config::resolve(&thresholds)?;
            pipeline::cmd_build_kg(&log, &profile, out.as_deref(), &settings)
        }
        Command::Reason {
            kg,
            rules_dir,
            out_kg,
            report,
            window_days,
        } => pipeline::cmd_reason(
            &kg,
            rules_dir.as_deref(),
            out_kg.as_deref(),
            report.as_deref(),
            window_days,
        ),
        Command::Query {
            kg,
            sparql,
            question,
            catalog,
            meal,
            allergen,
            exclude,
            window_days,
            progress_band,
            out,
        } => {
            let meal = meal.as_deref().map(parse_meal).transpose()?;
            pipeline::cmd_query(pipeline::QueryRequest {
                kg: &kg,
                sparql: sparql.as_deref(),
                question: question.as_deref(),
                catalog: catalog.as_deref(),
                meal,
                allergen: allergen.as_deref(),
                exclude: exclude.as_deref(),
                window_days,
                progress_band,
                out: out.as_deref(),
            })
        }
        Command::Recommend {
            catalog,
            meal,
            constraints,
            today_log,
            out,
        } => pipeline::cmd_recommend(
            &catalog,
            parse_meal(&meal)?,
            constraints.as_deref(),
            today_log.as_deref(),
            out.as_deref(),
        ),
        Command::Pipeline {
            log,
            profile,
            catalog,
            out_dir,
            rules_dir,
            meal,
            thresholds,
        } => {
            let settings = config::resolve(&thresholds)?;
            pipeline::cmd_pipeline(pipeline::PipelineRequest {
                log: &log,
                profile: &profile,
                catalog: &catalog,
                out_dir: &out_dir,
                rules_dir: rules_dir.as_deref(),
                meal: parse_meal(&meal)?,
                settings,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
