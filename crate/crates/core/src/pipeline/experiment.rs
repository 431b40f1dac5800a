//! Imbalance experiments: train once per case, then evaluate the frozen
//! artifact on unseen sets with their own class mixes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::train::{evaluate_table, train_pipeline, SplitSizes};
use super::PipelineConfig;
use crate::error::{Error, Result};
use crate::evaluation::{render_columns, EvaluationReport, TableColumn};
use crate::table::{load_csv, synth_generate, DataTable, SchemaHints, SynthSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    Synth(SynthSpec),
    /// CSV read with the pipeline's target column.
    File(PathBuf),
}

impl DatasetSource {
    fn load(&self, target: &str) -> Result<DataTable> {
        match self {
            DatasetSource::Synth(spec) => {
                let t = synth_generate(spec)?;
                if t.target().name() == target {
                    Ok(t)
                } else {
                    Err(Error::invalid(format!(
                        "synthetic data carries target `{}`, config expects `{target}`",
                        t.target().name()
                    )))
                }
            }
            DatasetSource::File(path) => load_csv(
                path,
                &SchemaHints {
                    target: target.to_string(),
                    ..SchemaHints::physionet()
                },
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnseenSet {
    pub name: String,
    pub data: DatasetSource,
}

/// Reference numbers for a comparison column, keyed by metric name and
/// already on the table's scale (percent, AUC raw).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineColumn {
    pub name: String,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseDescriptor {
    pub name: String,
    pub train: DatasetSource,
    pub unseen: Vec<UnseenSet>,
    #[serde(default)]
    pub baseline: Option<BaselineColumn>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub pipeline: PipelineConfig,
    pub cases: Vec<CaseDescriptor>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.pipeline.validate()?;
        Ok(cfg)
    }

    /// Makes relative file sources relative to `base` (usually the config
    /// file's directory).
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |src: &mut DatasetSource| {
            if let DatasetSource::File(p) = src {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        };
        for case in &mut self.cases {
            fix(&mut case.train);
            case.unseen.iter_mut().for_each(|u| fix(&mut u.data));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub name: String,
    pub sizes: SplitSizes,
    /// The training data's own held-out test split, then each unseen set.
    pub reports: Vec<EvaluationReport>,
    pub table: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub cases: Vec<CaseResult>,
}

impl ExperimentReport {
    pub fn to_text(&self) -> String {
        self.cases
            .iter()
            .map(|c| c.table.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

fn check_classes(case: &str, set: &str, t: &DataTable) -> Result<()> {
    let pos = t.positive_count();
    if pos == 0 || pos == t.n_rows() {
        return Err(Error::invalid(format!(
            "case `{case}`: {set} data has {pos} positives in {} rows; both classes are required",
            t.n_rows()
        )));
    }
    Ok(())
}

/// Loads and checks every case's data before training anything.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.pipeline.validate()?;
    if config.cases.is_empty() {
        return Err(Error::invalid("experiment has no cases"));
    }
    let target = &config.pipeline.target;
    let mut loaded = Vec::with_capacity(config.cases.len());
    for case in &config.cases {
        if case.unseen.is_empty() {
            return Err(Error::invalid(format!(
                "case `{}` has no unseen sets",
                case.name
            )));
        }
        let train = case.train.load(target)?;
        check_classes(&case.name, "training", &train)?;
        let mut unseen = Vec::with_capacity(case.unseen.len());
        for u in &case.unseen {
            let t = u.data.load(target)?;
            check_classes(&case.name, &u.name, &t)?;
            unseen.push(t);
        }
        loaded.push((train, unseen));
    }

    let mut cases = Vec::with_capacity(loaded.len());
    for (case, (train, unseen)) in config.cases.iter().zip(loaded) {
        let outcome = train_pipeline(&train, &config.pipeline)?;
        let mut reports = vec![outcome.report.evaluation[0].clone()];
        reports[0].dataset = "SXI++".to_string();
        for (u, table) in case.unseen.iter().zip(&unseen) {
            reports.push(evaluate_table(
                &outcome.artifact,
                &u.name,
                table,
                config.pipeline.seed_for(4),
            )?);
        }
        let mut columns = Vec::new();
        if let Some(b) = &case.baseline {
            columns.push(TableColumn::from_values(b.name.clone(), &b.metrics));
        }
        columns.extend(reports.iter().map(TableColumn::from_report));
        let level = config.pipeline.evaluation.level;
        let title = format!("{} ({:.0}% CI)", case.name, level * 100.0);
        cases.push(CaseResult {
            name: case.name.clone(),
            sizes: outcome.report.sizes,
            table: render_columns(&title, &columns),
            reports,
        });
    }
    Ok(ExperimentReport { cases })
}
