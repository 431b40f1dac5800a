use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::DataTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSpec {
    pub train_frac: f64,
    pub test_frac: f64,
    pub val_frac: f64,
    pub stratify: bool,
    pub seed: u64,
    /// Keep every row of one identifier value inside a single part.
    pub group_by_patient: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_frac: 0.7,
            test_frac: 0.2,
            val_frac: 0.1,
            stratify: true,
            seed: 0,
            group_by_patient: false,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let fracs = self.fractions();
        if fracs.iter().any(|&f| !(f > 0.0 && f < 1.0)) {
            return Err(Error::invalid(format!(
                "split fractions {fracs:?} must each lie in (0, 1)"
            )));
        }
        let sum: f64 = fracs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "split fractions sum to {sum}, not 1"
            )));
        }
        Ok(())
    }

    fn fractions(&self) -> [f64; 3] {
        [self.train_frac, self.test_frac, self.val_frac]
    }
}

#[derive(Debug, Clone)]
pub struct SplitParts {
    pub train: DataTable,
    pub test: DataTable,
    pub validation: DataTable,
}

/// Largest-remainder apportionment of `count` items across `fracs`.
/// Remainder ties go to the earlier part.
pub(crate) fn apportion(count: usize, fracs: &[f64]) -> Vec<usize> {
    let quotas: Vec<f64> = fracs.iter().map(|f| f * count as f64).collect();
    let mut parts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = parts.iter().sum();
    let mut order: Vec<usize> = (0..fracs.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(count.saturating_sub(assigned)) {
        parts[i] += 1;
    }
    parts
}

/// Row indices for (train, test, validation). Each part is sorted ascending.
/// `groups`, when given, holds one key per row and keeps keys together.
pub fn split_indices(
    labels: &[u8],
    groups: Option<&[String]>,
    spec: &SplitSpec,
) -> Result<[Vec<usize>; 3]> {
    spec.validate()?;
    let n = labels.len();
    if n < 10 {
        return Err(Error::invalid(format!(
            "split needs at least 10 rows, got {n}"
        )));
    }
    let pos = labels.iter().filter(|&&l| l == 1).count();
    if pos == 0 || pos == n {
        return Err(Error::CannotStratify("both classes must be present".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let fracs = spec.fractions();

    // Units are rows, or groups of rows sharing an identifier.
    let units: Vec<Vec<usize>> = match groups {
        None => (0..n).map(|i| vec![i]).collect(),
        Some(keys) => {
            if keys.len() != n {
                return Err(Error::invalid("group key count differs from row count"));
            }
            let mut by_key: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
            for (i, k) in keys.iter().enumerate() {
                by_key.entry(k.as_str()).or_default().push(i);
            }
            by_key.into_values().collect()
        }
    };
    let unit_label = |u: &Vec<usize>| u8::from(u.iter().any(|&i| labels[i] == 1));

    let strata: Vec<Vec<usize>> = if spec.stratify {
        let mut s = [Vec::new(), Vec::new()];
        for (ui, u) in units.iter().enumerate() {
            s[unit_label(u) as usize].push(ui);
        }
        for (class, members) in s.iter().enumerate() {
            if members.len() < fracs.len() {
                return Err(Error::CannotStratify(format!(
                    "class {class} has {} units, fewer than the {} parts",
                    members.len(),
                    fracs.len()
                )));
            }
        }
        // Positives first so the draw order does not depend on class layout.
        vec![s[1].clone(), s[0].clone()]
    } else {
        vec![(0..units.len()).collect()]
    };

    let mut parts: [Vec<usize>; 3] = Default::default();
    for mut stratum in strata {
        stratum.shuffle(&mut rng);
        let sizes = apportion(stratum.len(), &fracs);
        let mut offset = 0;
        for (p, size) in sizes.into_iter().enumerate() {
            for &ui in &stratum[offset..offset + size] {
                parts[p].extend_from_slice(&units[ui]);
            }
            offset += size;
        }
    }
    for p in &mut parts {
        p.sort_unstable();
    }
    Ok(parts)
}

/// Partitions the table's rows into train, test and validation parts.
pub fn split(table: &DataTable, spec: &SplitSpec) -> Result<SplitParts> {
    let labels = table.labels()?;
    let groups = if spec.group_by_patient {
        let id = table
            .identifiers()
            .next()
            .ok_or_else(|| Error::invalid("group_by_patient requires an identifier column"))?;
        Some(
            (0..table.n_rows())
                .map(|r| id.display(r).unwrap_or_else(|| format!("<missing:{r}>")))
                .collect::<Vec<_>>(),
        )
    } else {
        None
    };
    let [train, test, val] = split_indices(&labels, groups.as_deref(), spec)?;
    Ok(SplitParts {
        train: table.select_rows(&train),
        test: table.select_rows(&test),
        validation: table.select_rows(&val),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub holdout: Vec<usize>,
}

/// Stratified k-fold assignment over a label vector. Each class is shuffled
/// and dealt round-robin; negatives continue where positives stopped so fold
/// sizes differ by at most one.
pub fn stratified_kfold_labels(labels: &[u8], k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::invalid(format!("k-fold needs k >= 2, got {k}")));
    }
    let mut pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == 1).collect();
    let mut neg: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] != 1).collect();
    let minority = pos.len().min(neg.len());
    if minority < k {
        return Err(Error::CannotStratify(format!(
            "k = {k} exceeds the minority-class count {minority}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut holdouts = vec![Vec::new(); k];
    for (j, &i) in pos.iter().enumerate() {
        holdouts[j % k].push(i);
    }
    let start = pos.len() % k;
    for (j, &i) in neg.iter().enumerate() {
        holdouts[(start + j) % k].push(i);
    }
    Ok(holdouts
        .into_iter()
        .map(|mut holdout| {
            holdout.sort_unstable();
            let mut in_holdout = vec![false; labels.len()];
            for &i in &holdout {
                in_holdout[i] = true;
            }
            let train = (0..labels.len()).filter(|&i| !in_holdout[i]).collect();
            Fold { train, holdout }
        })
        .collect())
}

pub fn stratified_kfold(table: &DataTable, k: usize, seed: u64) -> Result<Vec<Fold>> {
    stratified_kfold_labels(&table.labels()?, k, seed)
}
