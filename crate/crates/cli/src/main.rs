//! `sxi`: prepare data, train, score, evaluate, explain and run experiments.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use sxi_core::evaluation::render_table;
use sxi_core::pipeline::{
    evaluate_table, run_experiment, run_insights, score_rows, train_pipeline, ExperimentConfig,
    ModelArtifact, PipelineConfig,
};
use sxi_core::table::{
    drop_sparse_columns, load_csv, synth_generate, write_csv, DataTable, SchemaHints, SynthSpec,
    DEFAULT_TARGET,
};

#[derive(Debug, Parser)]
#[command(
    name = "sxi",
    version,
    about = "Composite risk scoring for tabular binary outcomes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Drop columns whose missing fraction exceeds the threshold.
    Prepare {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.4)]
        threshold: f64,
        #[arg(long, default_value = DEFAULT_TARGET)]
        target: String,
    },
    /// Write a two-class Gaussian dataset.
    Synth {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long = "pos-frac")]
        pos_frac: f64,
        #[arg(long)]
        sep: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the pipeline and save the model artifact.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Score rows: row_id, sxi_score, flag, probability.
    Score {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Metrics with bootstrap intervals on a labeled file.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Adjust features, fit a shallow forest and print the target rule.
    Insights {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long = "p-up")]
        p_up: Option<f64>,
        #[arg(long = "p-down")]
        p_down: Option<f64>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Train once per case and evaluate on its unseen sets.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Print the default pipeline configuration.
    Config,
}

fn hints(target: &str) -> SchemaHints {
    SchemaHints {
        target: target.to_string(),
        ..SchemaHints::physionet()
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read `{}`", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write `{}`", path.display()))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &serde_json::to_string_pretty(value)?)
}

fn row_ids(table: &DataTable) -> Vec<String> {
    match table.identifiers().next() {
        Some(id) => (0..table.n_rows())
            .map(|r| id.display(r).unwrap_or_else(|| r.to_string()))
            .collect(),
        None => (0..table.n_rows()).map(|r| r.to_string()).collect(),
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Prepare {
            input,
            out,
            threshold,
            target,
        } => {
            let table = load_csv(&input, &hints(&target))?;
            let (kept, dropped) = drop_sparse_columns(&table, threshold)?;
            write_csv(&kept, &out)?;
            writeln!(
                stdout,
                "kept {} features, dropped {}",
                kept.feature_names().len(),
                dropped.len()
            )?;
            for name in dropped {
                writeln!(stdout, "  dropped {name}")?;
            }
        }
        Command::Synth {
            n,
            d,
            pos_frac,
            sep,
            seed,
            out,
        } => {
            let table = synth_generate(&SynthSpec {
                n,
                d,
                positive_frac: pos_frac,
                separation: sep,
                seed,
            })?;
            write_csv(&table, &out)?;
        }
        Command::Train {
            data,
            config,
            out,
            report,
        } => {
            let cfg = match config {
                Some(p) => PipelineConfig::from_json(&read_text(&p)?)?,
                None => PipelineConfig::default(),
            };
            let table = load_csv(&data, &hints(&cfg.target))?;
            let outcome = train_pipeline(&table, &cfg)?;
            outcome.artifact.save(&out)?;
            if let Some(p) = report {
                write_json(&p, &outcome.report)?;
            }
            write!(stdout, "{}", outcome.report.table)?;
        }
        Command::Score { model, input, out } => {
            let artifact = ModelArtifact::load(&model)?;
            let table = load_csv(&input, &hints(&artifact.payload.target).unlabeled())?;
            let scores = score_rows(&artifact, &table)?;
            let mut text = String::from("row_id,sxi_score,flag,probability\n");
            for (id, s) in row_ids(&table).iter().zip(&scores) {
                text.push_str(&format!(
                    "{id},{},{},{}\n",
                    s.sxi_score, s.flag, s.probability
                ));
            }
            write_text(&out, &text)?;
        }
        Command::Eval { model, input, json } => {
            let artifact = ModelArtifact::load(&model)?;
            let table = load_csv(&input, &hints(&artifact.payload.target))?;
            let name = input
                .file_stem()
                .map_or("data".into(), |s| s.to_string_lossy().into_owned());
            let seed = artifact.payload.config.seed;
            let report = evaluate_table(&artifact, &name, &table, seed)?;
            write!(
                stdout,
                "{}",
                render_table("Evaluation", std::slice::from_ref(&report))
            )?;
            if let Some(p) = json {
                write_json(&p, &report)?;
            }
        }
        Command::Insights {
            model,
            data,
            p_up,
            p_down,
            json,
        } => {
            let artifact = ModelArtifact::load(&model)?;
            let table = load_csv(&data, &hints(&artifact.payload.target))?;
            let outcome = run_insights(&artifact, &table, p_up, p_down)?;
            write!(stdout, "{}", outcome.report.to_text())?;
            if let Some(p) = json {
                write_json(&p, &outcome)?;
            }
        }
        Command::Experiment { config, json } => {
            let mut cfg = ExperimentConfig::from_json(&read_text(&config)?)?;
            cfg.resolve_paths(config.parent().unwrap_or(Path::new(".")));
            let report = run_experiment(&cfg)?;
            write!(stdout, "{}", report.to_text())?;
            if let Some(p) = json {
                write_json(&p, &report)?;
            }
        }
        Command::Config => {
            writeln!(
                stdout,
                "{}",
                serde_json::to_string_pretty(&PipelineConfig::default())?
            )?;
        }
    }
    Ok(())
}

/// 2 for bad input data or files, 3 for failures inside a fitting stage.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<sxi_core::Error>() {
            return if e.is_data_error() { 2 } else { 3 };
        }
        if cause.downcast_ref::<std::io::Error>().is_some()
            || cause.downcast_ref::<serde_json::Error>().is_some()
        {
            return 2;
        }
    }
    3
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // Core errors already carry their causes in their message.
            let mut msg = e.to_string();
            for cause in e.chain().skip(1) {
                let c = cause.to_string();
                if !msg.contains(&c) {
                    msg = format!("{msg}: {c}");
                }
            }
            eprintln!("error: {msg}");
            ExitCode::from(exit_code(&e))
        }
    }
}
