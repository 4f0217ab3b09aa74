//! Deterministic L2-regularized logistic regression.
//!
//! Columns are z-scored with training statistics (constant columns keep
//! `std = 1` and therefore standardize to zero). Weights start at zero and
//! are updated by full-batch gradient descent for a fixed number of
//! iterations. The step is `step_scale / L`, where `L` bounds the curvature
//! of the loss: `0.25 * max(lambda_max(Z'Z / n), 1) + l2`, with `lambda_max`
//! estimated by power iteration.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub trait Scorer {
    fn n_features(&self) -> usize;
    /// Probability of the positive class.
    fn score(&self, row: &[f64]) -> Result<f64>;
}

pub trait Learner: Sync {
    type Model: Scorer + Send;
    fn fit(&self, rows: &[&[f64]], labels: &[u8]) -> Result<Self::Model>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticConfig {
    pub step_scale: f64,
    pub iterations: usize,
    pub l2: f64,
    /// Recorded for provenance; training itself draws no random numbers.
    pub seed: u64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            step_scale: 1.0,
            iterations: 300,
            l2: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LogisticRegression {
    pub config: LogisticConfig,
}

impl LogisticRegression {
    pub fn new(config: LogisticConfig) -> Self {
        Self { config }
    }

    /// Fits and also returns the regularized training loss before each step
    /// and after the last.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn fit_with_history(&self, rows: &[&[f64]], labels: &[u8]) -> Result<(LinearModel, Vec<f64>)> {
        let cfg = self.config;
        if !(cfg.step_scale > 0.0 && cfg.step_scale < 2.0) || !(cfg.l2 >= 0.0) {
            return Err(Error::InvalidArgument("step_scale must be in (0, 2) and l2 >= 0".into()));
        }
        let n = rows.len();
        if n == 0 {
            return Err(Error::Empty("training rows"));
        }
        if n != labels.len() {
            return Err(Error::LengthMismatch { left: n, right: labels.len() });
        }
        let d = rows[0].len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::SchemaMismatch("ragged training rows".into()));
        }
        if rows.iter().any(|r| r.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidArgument("training matrix has non-finite values".into()));
        }
        if labels.iter().any(|&y| y > 1) {
            return Err(Error::InvalidArgument("labels must be 0 or 1".into()));
        }
        let positives = labels.iter().filter(|&&y| y == 1).count();
        if positives == 0 || positives == n {
            return Err(Error::DegenerateLabels);
        }

        let nf = n as f64;
        let mut mean = vec![0.0; d];
        let mut std = vec![1.0; d];
        let mut active = Vec::new();
        for j in 0..d {
            let m = rows.iter().map(|r| r[j]).sum::<f64>() / nf;
            let var = rows.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / nf;
            mean[j] = m;
            if var > 0.0 && var.sqrt() > 0.0 {
                std[j] = var.sqrt();
                active.push(j);
            }
        }
        // Standardized active columns, row-major.
        let a = active.len();
        let z: Vec<f64> = rows
            .iter()
            .flat_map(|r| active.iter().map(|&j| (r[j] - mean[j]) / std[j]).collect::<Vec<_>>())
            .collect();
        let y: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();

        let lambda = top_eigenvalue(&z, n, a);
        let lipschitz = 0.25 * lambda.max(1.0) + cfg.l2;
        let step = cfg.step_scale / lipschitz;

        let mut w = vec![0.0; a];
        let mut b = 0.0;
        let mut history = Vec::with_capacity(cfg.iterations + 1);
        let mut grad = vec![0.0; a];
        let mut resid = vec![0.0; n];
        for it in 0..=cfg.iterations {
            let mut loss = 0.0;
            for i in 0..n {
                let zi = &z[i * a..(i + 1) * a];
                let s = b + zi.iter().zip(&w).map(|(x, wj)| x * wj).sum::<f64>();
                loss += log1pexp(s) - y[i] * s;
                resid[i] = sigmoid(s) - y[i];
            }
            loss = loss / nf + 0.5 * cfg.l2 * w.iter().map(|x| x * x).sum::<f64>();
            history.push(loss);
            if it == cfg.iterations {
                break;
            }
            grad.iter_mut().for_each(|g| *g = 0.0);
            for i in 0..n {
                let zi = &z[i * a..(i + 1) * a];
                for (g, x) in grad.iter_mut().zip(zi) {
                    *g += resid[i] * x;
                }
            }
            let gb = resid.iter().sum::<f64>() / nf;
            for (wj, g) in w.iter_mut().zip(&grad) {
                *wj -= step * (g / nf + cfg.l2 * *wj);
            }
            b -= step * gb;
        }

        let mut weights = vec![0.0; d];
        for (k, &j) in active.iter().enumerate() {
            weights[j] = w[k];
        }
        Ok((
            LinearModel {
                weights,
                bias: b,
                mean,
                std,
                trained: true,
                config: cfg,
                schema_hash: None,
            },
            history,
        ))
    }
}

impl Learner for LogisticRegression {
    type Model = LinearModel;
    fn fit(&self, rows: &[&[f64]], labels: &[u8]) -> Result<LinearModel> {
        self.fit_with_history(rows, labels).map(|(m, _)| m)
    }
}

fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^s)` without overflow.
fn log1pexp(s: f64) -> f64 {
    if s > 0.0 {
        s + (-s).exp().ln_1p()
    } else {
        s.exp().ln_1p()
    }
}

/// Largest eigenvalue of `Z'Z / n` for row-major `z` (n x a).
fn top_eigenvalue(z: &[f64], n: usize, a: usize) -> f64 {
    if a == 0 {
        return 0.0;
    }
    let mut v = vec![1.0 / (a as f64).sqrt(); a];
    let mut lambda = 0.0;
    let mut zv = vec![0.0; n];
    for _ in 0..100 {
        for i in 0..n {
            zv[i] = z[i * a..(i + 1) * a].iter().zip(&v).map(|(x, y)| x * y).sum();
        }
        let mut next = vec![0.0; a];
        for i in 0..n {
            for (nx, x) in next.iter_mut().zip(&z[i * a..(i + 1) * a]) {
                *nx += zv[i] * x;
            }
        }
        next.iter_mut().for_each(|x| *x /= n as f64);
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = norm;
        v = next.into_iter().map(|x| x / norm).collect();
    }
    lambda
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub trained: bool,
    pub config: LogisticConfig,
    /// Digest of the column names the model was trained on, when known.
    pub schema_hash: Option<String>,
}

const MODEL_HEADER: &str = "popbench-linear-model 1";

impl LinearModel {
    /// Untrained-style model that scores every row with `sigmoid(bias)`.
    pub fn bias_only(n_features: usize, bias: f64) -> Self {
        Self {
            weights: vec![0.0; n_features],
            bias,
            mean: vec![0.0; n_features],
            std: vec![1.0; n_features],
            trained: true,
            config: LogisticConfig::default(),
            schema_hash: None,
        }
    }

    pub fn with_schema_hash(mut self, hash: impl Into<String>) -> Self {
        self.schema_hash = Some(hash.into());
        self
    }

    pub fn check_schema(&self, hash: &str) -> Result<()> {
        match &self.schema_hash {
            Some(h) if h != hash => Err(Error::SchemaMismatch(format!(
                "model schema {h} does not match matrix schema {hash}"
            ))),
            _ => Ok(()),
        }
    }

    /// Flat text artifact: a header line then `key values...` lines.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        let join = |xs: &[f64]| {
            let mut s = String::new();
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    s.push(' ');
                }
                let _ = write!(s, "{x:?}");
            }
            s
        };
        writeln!(w, "{MODEL_HEADER}")?;
        writeln!(w, "schema_hash {}", self.schema_hash.as_deref().unwrap_or("-"))?;
        writeln!(w, "features {}", self.weights.len())?;
        writeln!(w, "mean {}", join(&self.mean))?;
        writeln!(w, "std {}", join(&self.std))?;
        writeln!(w, "weights {}", join(&self.weights))?;
        writeln!(w, "bias {:?}", self.bias)?;
        writeln!(w, "step_scale {:?}", self.config.step_scale)?;
        writeln!(w, "iterations {}", self.config.iterations)?;
        writeln!(w, "l2 {:?}", self.config.l2)?;
        writeln!(w, "seed {}", self.config.seed)?;
        Ok(())
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == MODEL_HEADER => {}
            _ => return Err(Error::Parse("not a popbench model file".into())),
        }
        let mut fields = std::collections::HashMap::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line.split_once(' ').unwrap_or((line.as_str(), ""));
            fields.insert(k.to_string(), v.trim().to_string());
        }
        let get = |k: &str| fields.get(k).ok_or_else(|| Error::Parse(format!("model file lacks {k}")));
        let nums = |k: &str| -> Result<Vec<f64>> {
            get(k)?
                .split_whitespace()
                .map(|x| x.parse().map_err(|_| Error::Parse(format!("bad number in {k}"))))
                .collect()
        };
        let scalar = |k: &str| -> Result<f64> {
            get(k)?.parse().map_err(|_| Error::Parse(format!("bad {k}")))
        };
        let n: usize = get("features")?.parse().map_err(|_| Error::Parse("bad features".into()))?;
        let (mean, std, weights) = (nums("mean")?, nums("std")?, nums("weights")?);
        if mean.len() != n || std.len() != n || weights.len() != n {
            return Err(Error::Parse("model vectors disagree with feature count".into()));
        }
        if std.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::Parse("model std entries must be positive".into()));
        }
        let schema_hash = match get("schema_hash")?.as_str() {
            "-" => None,
            h => Some(h.to_string()),
        };
        Ok(Self {
            weights,
            bias: scalar("bias")?,
            mean,
            std,
            trained: true,
            config: LogisticConfig {
                step_scale: scalar("step_scale")?,
                iterations: scalar("iterations")? as usize,
                l2: scalar("l2")?,
                seed: get("seed")?.parse().map_err(|_| Error::Parse("bad seed".into()))?,
            },
            schema_hash,
        })
    }
}

impl Scorer for LinearModel {
    fn n_features(&self) -> usize {
        self.weights.len()
    }

    fn score(&self, row: &[f64]) -> Result<f64> {
        if !self.trained {
            return Err(Error::Untrained);
        }
        if row.len() != self.weights.len() {
            return Err(Error::SchemaMismatch(format!(
                "row has {} values, model expects {}",
                row.len(),
                self.weights.len()
            )));
        }
        let mut s = self.bias;
        for (((&x, &w), &m), &sd) in row.iter().zip(&self.weights).zip(&self.mean).zip(&self.std) {
            if w != 0.0 {
                s += w * (x - m) / sd;
            }
        }
        Ok(sigmoid(s))
    }
}

/// Scores and hard labels (`score >= threshold`).
pub fn predict<S: Scorer>(model: &S, rows: &[&[f64]], threshold: f64) -> Result<(Vec<u8>, Vec<f64>)> {
    let scores = rows.iter().map(|r| model.score(r)).collect::<Result<Vec<_>>>()?;
    let labels = scores.iter().map(|&s| u8::from(s >= threshold)).collect();
    Ok((labels, scores))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable() -> (Vec<Vec<f64>>, Vec<u8>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let l = (i % 2) as u8;
            x.push(vec![f64::from(l)]);
            y.push(l);
        }
        (x, y)
    }

    fn refs(x: &[Vec<f64>]) -> Vec<&[f64]> {
        x.iter().map(Vec::as_slice).collect()
    }

    #[test]
    fn separable_data_is_fit_perfectly() {
        let (x, y) = separable();
        let m = LogisticRegression::default().fit(&refs(&x), &y).unwrap();
        let (pred, _) = predict(&m, &refs(&x), 0.5).unwrap();
        assert_eq!(pred, y);
    }

    #[test]
    fn training_is_deterministic() {
        let (x, y) = separable();
        let a = LogisticRegression::default().fit(&refs(&x), &y).unwrap();
        let b = LogisticRegression::default().fit(&refs(&x), &y).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_column_weight_stays_zero() {
        let (mut x, y) = separable();
        for r in &mut x {
            r.push(0.0);
        }
        let m = LogisticRegression::default().fit(&refs(&x), &y).unwrap();
        assert_eq!(m.weights[1], 0.0);
        assert_eq!(m.std[1], 1.0);
    }

    #[test]
    fn single_class_is_degenerate() {
        let x = vec![vec![1.0], vec![2.0]];
        assert!(matches!(
            LogisticRegression::default().fit(&refs(&x), &[1, 1]),
            Err(Error::DegenerateLabels)
        ));
    }

    #[test]
    fn bias_only_scores_half() {
        let m = LinearModel::bias_only(3, 0.0);
        assert_eq!(m.score(&[5.0, -1.0, 9.0]).unwrap(), 0.5);
        let (labels, _) = predict(&m, &[&[0.0, 0.0, 0.0]], 1.0).unwrap();
        assert_eq!(labels, vec![0]);
        assert!(m.score(&[1.0]).is_err());
    }

    #[test]
    fn loss_decreases_monotonically() {
        let x: Vec<Vec<f64>> = (0..60)
            .map(|i| {
                let t = i as f64;
                vec![(t * 0.37).sin(), (t * 1.3).cos() * 4.0, t]
            })
            .collect();
        let y: Vec<u8> = (0..60).map(|i| u8::from((i * 7) % 5 < 2)).collect();
        let (_, h) = LogisticRegression::default().fit_with_history(&refs(&x), &y).unwrap();
        for w in h.windows(2) {
            assert!(w[1] <= w[0] + 1e-15, "{} > {}", w[1], w[0]);
        }
    }

    #[test]
    fn text_round_trip() {
        let (x, y) = separable();
        let m = LogisticRegression::default()
            .fit(&refs(&x), &y)
            .unwrap()
            .with_schema_hash("abc");
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        let back = LinearModel::read_text(buf.as_slice()).unwrap();
        assert_eq!(back, m);
        assert!(back.check_schema("abc").is_ok());
        assert!(back.check_schema("xyz").is_err());
        assert!(LinearModel::read_text("garbage\n".as_bytes()).is_err());
    }
}
