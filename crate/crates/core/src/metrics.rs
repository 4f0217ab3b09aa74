//! Binary classification metrics and method scorecards.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::features::csv_err;
use crate::ranking::Level;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionRecallF1 {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::LengthMismatch { left: a, right: b });
    }
    if a == 0 {
        return Err(Error::Empty("label vector"));
    }
    Ok(())
}

pub fn confusion(truth: &[u8], predicted: &[u8]) -> Result<Confusion> {
    check_lengths(truth.len(), predicted.len())?;
    let mut c = Confusion::default();
    for (&t, &p) in truth.iter().zip(predicted) {
        if t > 1 || p > 1 {
            return Err(Error::InvalidArgument("labels must be 0 or 1".into()));
        }
        match (t, p) {
            (1, 1) => c.tp += 1,
            (0, 1) => c.fp += 1,
            (1, 0) => c.fn_ += 1,
            _ => c.tn += 1,
        }
    }
    Ok(c)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-class scores, treating `class` as the positive label. 0/0 is 0.
pub fn precision_recall_f1(c: &Confusion, class: u8) -> PrecisionRecallF1 {
    let (tp, fp, fn_) = if class == 1 {
        (c.tp, c.fp, c.fn_)
    } else {
        (c.tn, c.fn_, c.fp)
    };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    PrecisionRecallF1 {
        precision,
        recall,
        f1: ratio(2 * tp, 2 * tp + fp + fn_),
    }
}

/// Unweighted mean of the two per-class F1 scores.
pub fn macro_f1(truth: &[u8], predicted: &[u8]) -> Result<f64> {
    let c = confusion(truth, predicted)?;
    Ok((precision_recall_f1(&c, 0).f1 + precision_recall_f1(&c, 1).f1) / 2.0)
}

/// F1 over pooled counts of both classes.
pub fn micro_f1(truth: &[u8], predicted: &[u8]) -> Result<f64> {
    let c = confusion(truth, predicted)?;
    // Pooled over both classes: TP = tp + tn, FP = FN = fp + fn.
    let tp = c.tp + c.tn;
    let err = c.fp + c.fn_;
    Ok(ratio(2 * tp, 2 * tp + 2 * err))
}

pub fn rmse(truth: &[u8], scores: &[f64]) -> Result<f64> {
    check_lengths(truth.len(), scores.len())?;
    let mse = truth
        .iter()
        .zip(scores)
        .map(|(&t, &s)| (s - f64::from(t)).powi(2))
        .sum::<f64>()
        / truth.len() as f64;
    Ok(mse.sqrt())
}

/// What RMSE is computed on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RmseInput {
    #[default]
    HardLabels,
    Scores,
}

/// Five index scores of one evaluated method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub precision: f64,
    pub recall: f64,
    pub macro_f1: f64,
    pub micro_f1: f64,
    pub rmse: f64,
}

/// Precision and recall are reported for the positive (popular) class.
pub fn evaluate(truth: &[u8], predicted: &[u8], scores: &[f64], rmse_on: RmseInput) -> Result<Evaluation> {
    let c = confusion(truth, predicted)?;
    let pos = precision_recall_f1(&c, 1);
    let rm = match rmse_on {
        RmseInput::HardLabels => {
            let hard: Vec<f64> = predicted.iter().map(|&p| f64::from(p)).collect();
            rmse(truth, &hard)?
        }
        RmseInput::Scores => rmse(truth, scores)?,
    };
    Ok(Evaluation {
        precision: pos.precision,
        recall: pos.recall,
        macro_f1: macro_f1(truth, predicted)?,
        micro_f1: micro_f1(truth, predicted)?,
        rmse: rm,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodScorecard {
    pub method: String,
    pub macro_f1: f64,
    pub micro_f1: f64,
    pub rmse: f64,
    pub complexity: Level,
    pub universality: Level,
}

impl MethodScorecard {
    pub fn new(
        method: impl Into<String>,
        macro_f1: f64,
        micro_f1: f64,
        rmse: f64,
        complexity: Level,
        universality: Level,
    ) -> Result<Self> {
        let s = Self {
            method: method.into(),
            macro_f1,
            micro_f1,
            rmse,
            complexity,
            universality,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn from_evaluation(method: impl Into<String>, e: &Evaluation, complexity: Level, universality: Level) -> Result<Self> {
        Self::new(method, e.macro_f1, e.micro_f1, e.rmse, complexity, universality)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !unit(self.macro_f1) || !unit(self.micro_f1) || !(self.rmse >= 0.0 && self.rmse.is_finite()) {
            return Err(Error::InvalidArgument(format!("scorecard {} out of range", self.method)));
        }
        Ok(())
    }
}

/// CSV rows `method,macro_f1,micro_f1,rmse,complexity,universality`.
pub fn write_scorecards<W: Write>(cards: &[MethodScorecard], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for c in cards {
        wr.serialize(c).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_scorecards<R: Read>(r: R) -> Result<Vec<MethodScorecard>> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let mut out = Vec::new();
    for rec in rd.deserialize() {
        let card: MethodScorecard = rec.map_err(csv_err)?;
        card.validate()?;
        out.push(card);
    }
    Ok(out)
}
