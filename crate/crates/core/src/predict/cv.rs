//! Stratified k-fold cross validation with pooled out-of-fold predictions.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linear::{Learner, Scorer};
use crate::metrics::{evaluate, Evaluation, RmseInput};
use crate::{par, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvConfig {
    pub k: usize,
    pub seed: u64,
    pub threshold: f64,
    pub rmse_on: RmseInput,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            k: 10,
            seed: 0,
            threshold: 0.5,
            rmse_on: RmseInput::HardLabels,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub test_indices: Vec<usize>,
    pub evaluation: Option<Evaluation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    /// Out-of-fold predictions in the original row order.
    pub predicted: Vec<u8>,
    pub scores: Vec<f64>,
    pub evaluation: Evaluation,
    pub folds: Vec<FoldResult>,
}

/// Fold index per row. Each class is shuffled with the seed, then dealt
/// round-robin; the dealer position carries over between classes so fold
/// sizes differ by at most one.
pub fn stratified_folds(labels: &[u8], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::InvalidArgument("k must be at least 2".into()));
    }
    if labels.len() < k {
        return Err(Error::InvalidArgument(format!(
            "{} rows cannot fill {k} folds",
            labels.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold = vec![0; labels.len()];
    let mut next = 0;
    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            fold[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(fold)
}

pub fn cross_validate<L: Learner>(learner: &L, rows: &[&[f64]], labels: &[u8], config: &CvConfig) -> Result<CvResult> {
    let folds = stratified_folds(labels, config.k, config.seed)?;
    cross_validate_with_folds(learner, rows, labels, &folds, config)
}

/// Runs cross validation over a fixed fold assignment.
pub fn cross_validate_with_folds<L: Learner>(
    learner: &L,
    rows: &[&[f64]],
    labels: &[u8],
    folds: &[usize],
    config: &CvConfig,
) -> Result<CvResult> {
    if rows.len() != labels.len() {
        return Err(Error::LengthMismatch { left: rows.len(), right: labels.len() });
    }
    if folds.len() != labels.len() {
        return Err(Error::LengthMismatch { left: folds.len(), right: labels.len() });
    }
    if labels.iter().any(|&y| y > 1) {
        return Err(Error::InvalidArgument("labels must be 0 or 1".into()));
    }
    let k = folds.iter().max().map_or(0, |m| m + 1);
    let ids: Vec<usize> = (0..k).collect();
    let outcomes = par::map_indexed(&ids, |_, &f| -> Result<(Vec<usize>, Vec<f64>)> {
        let (mut train_x, mut train_y, mut test) = (Vec::new(), Vec::new(), Vec::new());
        for i in 0..rows.len() {
            if folds[i] == f {
                test.push(i);
            } else {
                train_x.push(rows[i]);
                train_y.push(labels[i]);
            }
        }
        let model = learner.fit(&train_x, &train_y)?;
        let scores = test.iter().map(|&i| model.score(rows[i])).collect::<Result<Vec<_>>>()?;
        Ok((test, scores))
    });
    let mut predicted = vec![0u8; rows.len()];
    let mut scores = vec![0.0; rows.len()];
    let mut fold_results = Vec::with_capacity(k);
    for outcome in outcomes {
        let (test, s) = outcome?;
        let truth: Vec<u8> = test.iter().map(|&i| labels[i]).collect();
        let pred: Vec<u8> = s.iter().map(|&x| u8::from(x >= config.threshold)).collect();
        for (j, &i) in test.iter().enumerate() {
            predicted[i] = pred[j];
            scores[i] = s[j];
        }
        let evaluation = if test.is_empty() {
            None
        } else {
            Some(evaluate(&truth, &pred, &s, config.rmse_on)?)
        };
        fold_results.push(FoldResult { test_indices: test, evaluation });
    }
    let evaluation = evaluate(labels, &predicted, &scores, config.rmse_on)?;
    Ok(CvResult {
        predicted,
        scores,
        evaluation,
        folds: fold_results,
    })
}
