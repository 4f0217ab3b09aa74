//! Relative contribution of features by leave-one-out ablation.
//!
//! The accuracy of a column set is the mean of pooled macro and micro F1
//! under cross validation. Removing unit `i` gives `A_i`; with the full set
//! giving `A_s`, the contribution is `RC_i = -1000 (A_i - A_s)`. Every run
//! reuses the same fold assignment.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::features::{FeatureMatrix, FeatureSchema};
use crate::predict::cv::{cross_validate_with_folds, stratified_folds};
use crate::predict::{CvConfig, Learner};
use crate::{par, Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationMode {
    /// Each matrix column is its own unit.
    #[default]
    PerDimension,
    /// Columns belonging to the same named feature are removed together.
    PerFeature,
}

impl std::str::FromStr for AblationMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dimension" | "per_dimension" => Ok(Self::PerDimension),
            "feature" | "per_feature" => Ok(Self::PerFeature),
            _ => Err(Error::InvalidArgument(format!("unknown ablation mode {s}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationEntry {
    pub rank: usize,
    pub unit: String,
    pub columns: Vec<String>,
    pub accuracy: f64,
    pub rc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub mode: AblationMode,
    pub baseline_accuracy: f64,
    /// Sorted by contribution, largest first; ties keep column order.
    pub entries: Vec<AblationEntry>,
}

impl AblationReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let err = crate::features::csv_err;
        out.write_record(["rank", "unit", "columns", "accuracy", "rc"]).map_err(err)?;
        for e in &self.entries {
            out.write_record([
                e.rank.to_string(),
                e.unit.clone(),
                e.columns.join(" "),
                format!("{:?}", e.accuracy),
                format!("{:?}", e.rc),
            ])
            .map_err(err)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn accuracy<L: Learner>(
    learner: &L,
    matrix: &FeatureMatrix,
    labels: &[u8],
    folds: &[usize],
    cv: &CvConfig,
) -> Result<f64> {
    let rows = matrix.values();
    let r = cross_validate_with_folds(learner, &rows, labels, folds, cv)?;
    Ok((r.evaluation.macro_f1 + r.evaluation.micro_f1) / 2.0)
}

/// `-1000 (A_i - A_s)` with signed zero folded to `+0`.
pub fn relative_contribution(ablated: f64, full: f64) -> f64 {
    let rc = -1000.0 * (ablated - full);
    if rc == 0.0 {
        0.0
    } else {
        rc
    }
}

/// Groups column indices into units. Feature mode uses the standard schema
/// for known columns; unknown columns form singleton units.
fn units(matrix: &FeatureMatrix, mode: AblationMode) -> Vec<(String, Vec<usize>)> {
    match mode {
        AblationMode::PerDimension => matrix
            .columns
            .iter()
            .enumerate()
            .map(|(j, c)| (c.clone(), vec![j]))
            .collect(),
        AblationMode::PerFeature => {
            let schema = FeatureSchema::standard();
            let mut out: Vec<(String, Vec<usize>)> = Vec::new();
            for (j, c) in matrix.columns.iter().enumerate() {
                let name = schema
                    .index_of(c)
                    .map_or_else(|| c.clone(), |i| schema.dims()[i].feature.to_string());
                match out.iter_mut().find(|(n, _)| *n == name) {
                    Some((_, cols)) => cols.push(j),
                    None => out.push((name, vec![j])),
                }
            }
            out
        }
    }
}

pub fn ablation_report<L: Learner>(
    learner: &L,
    matrix: &FeatureMatrix,
    labels: &[u8],
    cv: &CvConfig,
    mode: AblationMode,
) -> Result<AblationReport> {
    if matrix.n_rows() != labels.len() {
        return Err(Error::LengthMismatch { left: matrix.n_rows(), right: labels.len() });
    }
    let groups = units(matrix, mode);
    if groups.len() < 2 {
        return Err(Error::InvalidArgument("ablation needs at least two units".into()));
    }
    let folds = stratified_folds(labels, cv.k, cv.seed)?;
    let full = accuracy(learner, matrix, labels, &folds, cv)?;
    let scored = par::map_indexed(&groups, |_, (_, cols)| {
        accuracy(learner, &matrix.without_columns(cols), labels, &folds, cv)
    });
    let mut entries = Vec::with_capacity(groups.len());
    for ((unit, cols), acc) in groups.into_iter().zip(scored) {
        let acc = acc?;
        entries.push(AblationEntry {
            rank: 0,
            unit,
            columns: cols.iter().map(|&j| matrix.columns[j].clone()).collect(),
            accuracy: acc,
            rc: relative_contribution(acc, full),
        });
    }
    // Stable sort keeps column order among ties.
    entries.sort_by(|a, b| b.rc.total_cmp(&a.rc));
    for (i, e) in entries.iter_mut().enumerate() {
        e.rank = i + 1;
    }
    Ok(AblationReport {
        mode,
        baseline_accuracy: full,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predict::LogisticRegression;

    fn planted() -> (FeatureMatrix, Vec<u8>) {
        let labels: Vec<u8> = (0..80).map(|i| u8::from(i % 3 == 0)).collect();
        let values = labels
            .iter()
            .enumerate()
            .map(|(i, &y)| {
                let t = i as f64;
                vec![(t * 0.91).sin(), f64::from(y) + 0.1 * (t * 2.3).cos(), 0.0]
            })
            .collect();
        let m = FeatureMatrix::from_values(vec!["noise".into(), "signal".into(), "zero".into()], values).unwrap();
        (m, labels)
    }

    #[test]
    fn zero_column_contributes_nothing() {
        let (m, y) = planted();
        let cv = CvConfig { k: 5, ..CvConfig::default() };
        let r = ablation_report(&LogisticRegression::default(), &m, &y, &cv, AblationMode::PerDimension).unwrap();
        let get = |n: &str| r.entries.iter().find(|e| e.unit == n).unwrap();
        assert_eq!(get("zero").rc, 0.0);
        assert!(get("signal").rc > 0.0);
        assert_eq!(r.entries[0].unit, "signal");
    }

    #[test]
    fn feature_mode_groups_schema_columns() {
        let cols = vec!["fc3_pos".to_string(), "fc3_neg".to_string(), "other".to_string()];
        let m = FeatureMatrix::from_values(cols, vec![vec![0.0; 3]]).unwrap();
        let u = units(&m, AblationMode::PerFeature);
        assert_eq!(u, vec![("fc3".to_string(), vec![0, 1]), ("other".to_string(), vec![2])]);
    }

    #[test]
    fn signed_zero_is_folded() {
        assert!(relative_contribution(0.5, 0.5).is_sign_positive());
    }
}
