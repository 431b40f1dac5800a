//! The trained model as a self-contained, checksummed JSON document, and
//! scoring of new rows against it.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PipelineConfig;
use crate::error::{Error, Result};
use crate::learners::{FeatureWeightSet, GbtModel};
use crate::matrix::Matrix;
use crate::neural::{NetworkParams, NetworkSpec};
use crate::scoring::{flags_against, weighted_mean_scores, NormalizationMap};
use crate::table::{DataTable, ImputationStats};

pub const SCHEMA_VERSION: u32 = 1;

/// Everything needed to score a row. Field order is the serialization order
/// and therefore part of the checksum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactPayload {
    pub target: String,
    /// Modeled features, in matrix column order.
    pub features: Vec<String>,
    pub imputation: ImputationStats,
    pub normalization: NormalizationMap,
    pub feature_weights: FeatureWeightSet,
    pub calibrated_weights: Vec<f64>,
    /// Lasso coefficient sign times normalization direction, per feature.
    pub feature_signs: Vec<f64>,
    pub alpha: f64,
    pub benchmark: f64,
    pub orientation: i8,
    pub network_spec: NetworkSpec,
    pub network: NetworkParams,
    /// Final classifier over `[features..., alpha * score]`.
    pub classifier: GbtModel,
    /// Alpha-scaled scores of the training split, in row order.
    pub training_scores: Vec<f64>,
    pub config: PipelineConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub schema_version: u32,
    /// Hex SHA-256 of the compact JSON serialization of `payload`.
    pub checksum: String,
    pub payload: ArtifactPayload,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RowScore {
    pub sxi_score: f64,
    pub flag: u8,
    pub probability: f64,
}

fn digest(payload: &ArtifactPayload) -> Result<String> {
    let bytes = serde_json::to_vec(payload)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl ModelArtifact {
    pub fn new(payload: ArtifactPayload) -> Result<Self> {
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            checksum: digest(&payload)?,
            payload,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let found = value
            .get("schema_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::invalid("artifact has no schema_version"))?;
        if found != u64::from(SCHEMA_VERSION) {
            return Err(Error::UnsupportedVersion {
                found,
                supported: SCHEMA_VERSION,
            });
        }
        let artifact: ModelArtifact = serde_json::from_value(value)?;
        if digest(&artifact.payload)? != artifact.checksum {
            return Err(Error::ChecksumMismatch);
        }
        Ok(artifact)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Imputed raw feature matrix for `rows`, in artifact feature order.
    pub fn raw_matrix(&self, rows: &DataTable) -> Result<Matrix> {
        let p = &self.payload;
        for f in &p.features {
            if rows.column(f).is_none() {
                return Err(Error::MissingColumn(f.clone()));
            }
        }
        let kept = rows.retain_features(&p.features);
        p.imputation.apply(&kept)?.matrix(&p.features)
    }

    /// Calibrated, alpha-scaled scores from an imputed raw matrix.
    pub fn scores_from_raw(&self, raw: &Matrix) -> Result<Vec<f64>> {
        let p = &self.payload;
        score_raw(
            raw,
            &p.features,
            &p.normalization,
            &p.calibrated_weights,
            p.alpha,
        )
    }
}

/// `alpha * weighted_mean(normalize(raw))`, the one scoring path shared by
/// training and scoring.
pub(crate) fn score_raw(
    raw: &Matrix,
    features: &[String],
    map: &NormalizationMap,
    weights: &[f64],
    alpha: f64,
) -> Result<Vec<f64>> {
    let ranges = features
        .iter()
        .map(|f| map.get(f).ok_or_else(|| Error::MissingColumn(f.clone())))
        .collect::<Result<Vec<_>>>()?;
    let mut x = raw.clone();
    for i in 0..x.rows() {
        for (v, r) in x.row_mut(i).iter_mut().zip(&ranges) {
            *v = r.transform(*v);
        }
    }
    let base = weighted_mean_scores(&x, weights)?;
    Ok(base.into_iter().map(|s| alpha * s).collect())
}

/// Imputes, normalizes, scores, flags against the stored benchmark and runs
/// the final classifier. Extra columns in `rows` are ignored.
pub fn score_rows(artifact: &ModelArtifact, rows: &DataTable) -> Result<Vec<RowScore>> {
    let p = &artifact.payload;
    let raw = artifact.raw_matrix(rows)?;
    let scores = artifact.scores_from_raw(&raw)?;
    let flags = flags_against(&scores, p.benchmark, p.orientation);
    let augmented = raw.with_column(&scores)?;
    Ok(scores
        .iter()
        .zip(flags)
        .enumerate()
        .map(|(i, (&s, flag))| RowScore {
            sxi_score: s,
            flag,
            probability: p.classifier.predict_row(augmented.row(i)),
        })
        .collect())
}
