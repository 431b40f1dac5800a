//! Insights against a trained artifact: the stored imputation and feature
//! signs drive the adjustment, then a fresh forest yields the target rule.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::artifact::ModelArtifact;
use crate::error::{Result, StageContext};
use crate::insights::{
    adjust_features, extract_target_path, fit_random_forest, render_recommendations,
    AdjustmentPolicy, InsightReport, RulePath,
};
use crate::matrix::pearson;
use crate::scoring::{delineation_accuracy, flags_against, ScoreSet};
use crate::table::DataTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InsightOutcome {
    pub report: InsightReport,
    pub path: RulePath,
}

/// `p_up`/`p_down` override the artifact's configured percentages. The
/// correlation sign is measured on `table`: the sign of corr(score, target).
pub fn run_insights(
    artifact: &ModelArtifact,
    table: &DataTable,
    p_up: Option<f64>,
    p_down: Option<f64>,
) -> Result<InsightOutcome> {
    let p = &artifact.payload;
    let defaults = &p.config.insights;
    let labels = table.labels().stage("insights")?;
    let raw = artifact.raw_matrix(table).stage("insights")?;
    let scores = artifact.scores_from_raw(&raw).stage("insights")?;
    let flags = flags_against(&scores, p.benchmark, p.orientation);
    let corr = pearson(
        &scores,
        &labels.iter().map(|&l| f64::from(l)).collect::<Vec<_>>(),
    );
    let policy = AdjustmentPolicy {
        p_up: p_up.unwrap_or(defaults.policy.p_up),
        p_down: p_down.unwrap_or(defaults.policy.p_down),
        correlation_sign: if corr < 0.0 { -1 } else { 1 },
    };
    policy.validate()?;
    let score_set = ScoreSet {
        delineation_accuracy: Some(delineation_accuracy(&flags, &labels)),
        scores,
        benchmark: p.benchmark,
        flags,
        orientation: p.orientation,
    };

    let signs: BTreeMap<String, f64> = p
        .features
        .iter()
        .cloned()
        .zip(p.feature_signs.iter().copied())
        .collect();
    let imputed = p
        .imputation
        .apply(&table.retain_features(&p.features))
        .stage("insights")?;
    let adjusted = adjust_features(&imputed, &signs, &policy).stage("adjust")?;
    let mut forest_cfg = defaults.forest.clone();
    forest_cfg.seed = p.config.seed_for(3);
    let forest = fit_random_forest(&adjusted, &forest_cfg).stage("forest")?;
    let x = adjusted.matrix(&forest.features).stage("forest")?;
    let path = extract_target_path(&forest, &x, &labels, defaults.target_class).stage("path")?;
    let report = render_recommendations(&path, &policy, &score_set, ["No Sepsis", "Sepsis"]);
    Ok(InsightOutcome { report, path })
}
