use serde::{Deserialize, Serialize};

use crate::calibration::{alpha_grid, CalibrationConfig};
use crate::error::{Error, Result};
use crate::insights::{AdjustmentPolicy, ForestConfig};
use crate::learners::GbtConfig;
use crate::neural::SearchSpace;
use crate::table::{SplitSpec, DEFAULT_TARGET};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InsightsDefaults {
    pub policy: AdjustmentPolicy,
    pub forest: ForestConfig,
    pub target_class: u8,
}

impl Default for InsightsDefaults {
    fn default() -> Self {
        Self {
            policy: AdjustmentPolicy::default(),
            forest: ForestConfig::default(),
            target_class: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub n_boot: usize,
    pub level: f64,
    /// Probability cut-off for the final classifier's predictions.
    pub threshold: f64,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            n_boot: 1000,
            level: 0.95,
            threshold: 0.5,
        }
    }
}

/// Every knob of a training run. Stage seeds are derived from `seed`; the
/// `seed` fields inside `split`, `search` and `insights.forest` are
/// overwritten.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub target: String,
    pub split: SplitSpec,
    /// Share of the training split held back for alpha tuning.
    pub tune_fraction: f64,
    pub sparse_threshold: f64,
    pub lasso_lambda: f64,
    pub mi_bins: usize,
    pub gbt: GbtConfig,
    pub final_classifier: GbtConfig,
    pub search: SearchSpace,
    /// Layers used when turning network weights into feature weights.
    pub refine_layers: usize,
    pub calibration: CalibrationConfig,
    pub alpha_grid: Vec<f64>,
    pub evaluation: EvaluationConfig,
    pub insights: InsightsDefaults,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            target: DEFAULT_TARGET.to_string(),
            split: SplitSpec::default(),
            tune_fraction: 0.125,
            sparse_threshold: 0.4,
            lasso_lambda: 0.01,
            mi_bins: 10,
            gbt: GbtConfig::default(),
            final_classifier: GbtConfig {
                n_trees: 100,
                ..GbtConfig::default()
            },
            search: SearchSpace::default(),
            refine_layers: 5,
            calibration: CalibrationConfig::default(),
            alpha_grid: alpha_grid(),
            evaluation: EvaluationConfig::default(),
            insights: InsightsDefaults::default(),
            seed: 0,
        }
    }
}

fn check_gbt(name: &str, g: &GbtConfig) -> Result<()> {
    if g.max_depth == 0 || !(g.learning_rate > 0.0) || !(g.l2 >= 0.0) {
        return Err(Error::invalid(format!(
            "{name}: depth, learning rate and l2 must be positive"
        )));
    }
    Ok(())
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.split.validate()?;
        if !(self.tune_fraction > 0.0 && self.tune_fraction < 0.5) {
            return Err(Error::invalid("tune_fraction must lie in (0, 0.5)"));
        }
        if !(self.sparse_threshold > 0.0 && self.sparse_threshold < 1.0) {
            return Err(Error::invalid("sparse_threshold must lie in (0, 1)"));
        }
        if !(self.lasso_lambda >= 0.0 && self.lasso_lambda.is_finite()) {
            return Err(Error::invalid(
                "lasso_lambda must be finite and nonnegative",
            ));
        }
        if self.mi_bins < 2 {
            return Err(Error::invalid("mi_bins must be at least 2"));
        }
        check_gbt("gbt", &self.gbt)?;
        check_gbt("final_classifier", &self.final_classifier)?;
        self.search.validate()?;
        if self.refine_layers == 0 {
            return Err(Error::invalid("refine_layers must be at least 1"));
        }
        self.calibration.validate()?;
        if self.alpha_grid.is_empty()
            || self.alpha_grid.iter().any(|&a| !(a > 0.0 && a.is_finite()))
        {
            return Err(Error::invalid("alpha_grid must be nonempty and positive"));
        }
        if self.evaluation.n_boot < 100
            || !(self.evaluation.level > 0.0 && self.evaluation.level < 1.0)
        {
            return Err(Error::invalid(
                "evaluation needs n_boot >= 100 and level in (0, 1)",
            ));
        }
        if !(0.0..=1.0).contains(&self.evaluation.threshold) {
            return Err(Error::invalid("evaluation threshold must lie in [0, 1]"));
        }
        self.insights.policy.validate()?;
        if self.insights.target_class > 1 {
            return Err(Error::invalid("insights target_class must be 0 or 1"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub(crate) fn seed_for(&self, stage: u64) -> u64 {
        self.seed.wrapping_mul(1_000_003).wrapping_add(stage)
    }
}
