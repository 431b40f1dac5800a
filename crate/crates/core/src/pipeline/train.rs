//! The training pipeline: every fitting stage sees only the training split.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::artifact::{score_raw, score_rows, ArtifactPayload, ModelArtifact};
use super::PipelineConfig;
use crate::calibration::{alpha_tune_grid, calibrate, AlphaChoice, CalibrationState};
use crate::error::{Error, Result, StageContext};
use crate::evaluation::{evaluate, render_table, EvaluationReport};
use crate::learners::{
    composite_weights, fit_complement_nb, fit_gbt, fit_lasso, fit_pca, mutual_information,
    Algorithm, AlgorithmWeights, FeatureWeightSet,
};
use crate::matrix::normalize_to_unit_sum;
use crate::neural::{
    extract_feature_weights, hyperparameter_search, init_custom, train, SearchResult, TrainingLog,
};
use crate::scoring::{
    benchmark_report, bivariate_weights, compute_scores, fit_normalization, lasso_remap,
    normalize_matrix, BenchmarkReport,
};
use crate::table::{drop_sparse_columns, impute, split, DataTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub fit: usize,
    pub tune: usize,
    pub train: usize,
    pub test: usize,
    pub validation: usize,
}

/// Diagnostics from one training run. Not part of the artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub sizes: SplitSizes,
    pub dropped_columns: Vec<String>,
    pub features: Vec<String>,
    pub bivariate_weights: Vec<f64>,
    pub base_accuracy: f64,
    pub lasso_coefficients: Vec<f64>,
    pub remap_warning: Option<String>,
    pub feature_weights: FeatureWeightSet,
    pub search: SearchResult,
    pub network_log: TrainingLog,
    pub refined_weights: Vec<f64>,
    pub calibration: CalibrationState,
    pub alpha: AlphaChoice,
    pub benchmark: BenchmarkReport,
    pub evaluation: Vec<EvaluationReport>,
    pub table: String,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub artifact: ModelArtifact,
    pub report: TrainingReport,
}

/// Stratified holdout of row indices: (kept, held out).
fn stratified_holdout(labels: &[u8], frac: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut kept, mut held) = (Vec::new(), Vec::new());
    for class in [1u8, 0] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.len() < 2 {
            return Err(Error::CannotStratify(format!(
                "class {class} has {} training rows; at least 2 are needed",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        let k = ((idx.len() as f64 * frac).round() as usize).clamp(1, idx.len() - 1);
        held.extend_from_slice(&idx[..k]);
        kept.extend_from_slice(&idx[k..]);
    }
    kept.sort_unstable();
    held.sort_unstable();
    Ok((kept, held))
}

/// Fits every stage on `train` alone and assembles the artifact.
pub fn fit_model(
    train_split: &DataTable,
    config: &PipelineConfig,
) -> Result<(ModelArtifact, TrainingReport)> {
    config.validate()?;
    let labels_all = train_split.labels().stage("split")?;
    let (fit_idx, tune_idx) =
        stratified_holdout(&labels_all, config.tune_fraction, config.seed_for(1)).stage("split")?;
    let fit_raw = train_split.select_rows(&fit_idx);

    let (fit_clean, dropped_columns) =
        drop_sparse_columns(&fit_raw, config.sparse_threshold).stage("clean")?;
    let features = fit_clean.feature_names();
    let (fit_table, imputation) = impute(&fit_clean).stage("impute")?;
    let y = fit_table.labels().stage("impute")?;
    fit_table.matrix(&features).stage("impute")?;

    let map0 = fit_normalization(&fit_table).stage("normalize")?;
    let x0 = normalize_matrix(&fit_table, &map0).stage("normalize")?;
    let bivariate = bivariate_weights(&x0, &features);
    let base = compute_scores(&x0, &bivariate.weights, Some(&y)).stage("score")?;
    let remap =
        lasso_remap(&fit_table, &x0, &base.flags, &map0, config.lasso_lambda).stage("remap")?;
    let map = remap.map.clone();
    let x = normalize_matrix(&fit_table, &map).stage("remap")?;

    let yf: Vec<f64> = y.iter().map(|&l| f64::from(l)).collect();
    let lasso = fit_lasso(&x, &yf, config.lasso_lambda).stage("lasso")?;
    let cnb = fit_complement_nb(&x, &y).stage("complement_nb")?;
    let gbt = fit_gbt(&x, &y, &config.gbt).stage("gbt")?;
    let mi = mutual_information(&x, &y, config.mi_bins);
    let pca = fit_pca(&x).stage("pca")?;
    let per_algorithm = [
        AlgorithmWeights::new(Algorithm::Lasso, &features, lasso.coefficients.clone()),
        AlgorithmWeights::new(Algorithm::ComplementNb, &features, cnb.signed_weights()),
        AlgorithmWeights::new(Algorithm::Gbt, &features, gbt.gain.clone()),
        AlgorithmWeights::new(Algorithm::MutualInfo, &features, mi),
        AlgorithmWeights::new(Algorithm::Pca, &features, pca.first_component()),
    ];
    let feature_weights = composite_weights(&per_algorithm).stage("composite")?;
    let composite_scores =
        compute_scores(&x, &feature_weights.composite, Some(&y)).stage("score")?;

    // The network sees the features plus the current score as one more input.
    let net_x = x.with_column(&composite_scores.scores).stage("network")?;
    let mut importance = feature_weights.importance_counts.clone();
    importance.push(1);
    let mut space = config.search.clone();
    space.seed = config.seed_for(2);
    let search = hyperparameter_search(&space, &net_x, &y, &importance).stage("network search")?;
    let network = train(
        &search.spec,
        init_custom(&search.spec, &importance)?,
        &net_x,
        &y,
    )
    .stage("network")?;
    let saliency = extract_feature_weights(&network, config.refine_layers);
    let refined_weights = normalize_to_unit_sum(&saliency[..features.len()]);

    let calibration = calibrate(
        &features,
        &feature_weights.composite,
        &x,
        &y,
        &refined_weights,
        &feature_weights.importance_counts,
        &config.calibration,
    )
    .stage("calibrate")?;
    let weights = calibration.current_weights.clone();
    let calibrated = compute_scores(&x, &weights, Some(&y)).stage("calibrate")?;

    let tune_table = imputation
        .apply(
            &train_split
                .select_rows(&tune_idx)
                .retain_features(&features),
        )
        .stage("alpha")?;
    let x_tune = normalize_matrix(&tune_table, &map).stage("alpha")?;
    let alpha = alpha_tune_grid(
        &calibrated,
        &x_tune,
        &weights,
        &tune_table.labels()?,
        &config.alpha_grid,
    )
    .stage("alpha")?;

    let train_table = imputation
        .apply(&train_split.retain_features(&features))
        .stage("final")?;
    let raw_train = train_table.matrix(&features).stage("final")?;
    let training_scores =
        score_raw(&raw_train, &features, &map, &weights, alpha.alpha).stage("final")?;
    let classifier = fit_gbt(
        &raw_train.with_column(&training_scores)?,
        &labels_all,
        &config.final_classifier,
    )
    .stage("final")?;

    let feature_signs = features
        .iter()
        .zip(&lasso.coefficients)
        .map(|(f, &c)| {
            let dir = map.get(f).map_or(1.0, |r| r.direction.sign());
            if c == 0.0 {
                0.0
            } else {
                c.signum() * dir
            }
        })
        .collect();
    let benchmark = benchmark_report(&calibrated, &y).stage("benchmark")?;
    let payload = ArtifactPayload {
        target: train_split.target().name().to_string(),
        features: features.clone(),
        imputation,
        normalization: map,
        feature_weights: feature_weights.clone(),
        calibrated_weights: weights,
        feature_signs,
        alpha: alpha.alpha,
        benchmark: calibrated.benchmark,
        orientation: calibrated.orientation,
        network_spec: search.spec.clone(),
        network: network.clone(),
        classifier,
        training_scores,
        config: config.clone(),
    };
    let artifact = ModelArtifact::new(payload)?;
    let report = TrainingReport {
        sizes: SplitSizes {
            fit: fit_idx.len(),
            tune: tune_idx.len(),
            train: train_split.n_rows(),
            test: 0,
            validation: 0,
        },
        dropped_columns,
        features,
        bivariate_weights: bivariate.weights,
        base_accuracy: base.delineation_accuracy.unwrap_or(0.0),
        lasso_coefficients: remap.coefficients,
        remap_warning: remap.warning,
        feature_weights,
        search,
        network_log: network.log,
        refined_weights,
        calibration,
        alpha,
        benchmark,
        evaluation: Vec::new(),
        table: String::new(),
    };
    Ok((artifact, report))
}

/// Scores a labeled table with the artifact and summarizes the metrics.
pub fn evaluate_table(
    artifact: &ModelArtifact,
    name: &str,
    table: &DataTable,
    seed: u64,
) -> Result<EvaluationReport> {
    let cfg = &artifact.payload.config.evaluation;
    let rows = score_rows(artifact, table)?;
    let labels = table.labels()?;
    let probs: Vec<f64> = rows.iter().map(|r| r.probability).collect();
    let preds: Vec<u8> = probs
        .iter()
        .map(|&p| u8::from(p >= cfg.threshold))
        .collect();
    evaluate(name, &probs, &preds, &labels, cfg.n_boot, cfg.level, seed)
}

/// Fits on `train` and evaluates on `test` and `validation`. Labels of the
/// held-out tables never reach a fitting stage.
pub fn train_on_splits(
    train_split: &DataTable,
    test: &DataTable,
    validation: &DataTable,
    config: &PipelineConfig,
) -> Result<TrainOutcome> {
    let (artifact, mut report) = fit_model(train_split, config)?;
    let seed = config.seed_for(4);
    report.evaluation = vec![
        evaluate_table(&artifact, "test", test, seed).stage("evaluate")?,
        evaluate_table(&artifact, "validation", validation, seed).stage("evaluate")?,
    ];
    report.sizes.test = test.n_rows();
    report.sizes.validation = validation.n_rows();
    report.table = render_table("Held-out evaluation", &report.evaluation);
    Ok(TrainOutcome { artifact, report })
}

/// Splits `table` 70/20/10 (by default) and runs [`train_on_splits`].
pub fn train_pipeline(table: &DataTable, config: &PipelineConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let mut spec = config.split.clone();
    spec.seed = config.seed_for(0);
    let parts = split(table, &spec).stage("split")?;
    train_on_splits(&parts.train, &parts.test, &parts.validation, config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn holdout_is_stratified_and_disjoint() {
        let labels: Vec<u8> = (0..80).map(|i| u8::from(i % 4 == 0)).collect();
        let (kept, held) = stratified_holdout(&labels, 0.125, 3).unwrap();
        assert_eq!(kept.len() + held.len(), 80);
        assert!(kept.iter().all(|i| !held.contains(i)));
        // 20 positives and 60 negatives, an eighth of each held out.
        assert_eq!(held.iter().filter(|&&i| labels[i] == 1).count(), 3);
        assert_eq!(held.iter().filter(|&&i| labels[i] == 0).count(), 8);
        assert_eq!(stratified_holdout(&labels, 0.125, 3).unwrap(), (kept, held));
    }

    #[test]
    fn holdout_needs_two_of_each_class() {
        let labels = [1, 0, 0, 0, 0];
        assert!(matches!(
            stratified_holdout(&labels, 0.2, 0),
            Err(Error::CannotStratify(_))
        ));
    }
}
