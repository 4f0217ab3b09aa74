//! Popularity-series baseline: total count, average rate of change and
//! standard deviation of the observed history.

use crate::features::FeatureMatrix;
use crate::model::TimeSeries;
use crate::{Error, Result};

pub const LATENT_COLUMNS: [&str; 3] = ["sum", "avg_rate_of_change", "std"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatentFeatures {
    pub sum: f64,
    pub avg_rate_of_change: f64,
    pub std: f64,
}

impl LatentFeatures {
    pub fn to_vec(self) -> Vec<f64> {
        vec![self.sum, self.avg_rate_of_change, self.std]
    }
}

/// `(last - first) / (L - 1)` for the rate, population standard deviation.
/// A single observation has zero rate and spread.
pub fn latent_features(counts: &[u64]) -> Result<LatentFeatures> {
    if counts.is_empty() {
        return Err(Error::Empty("popularity series"));
    }
    let n = counts.len() as f64;
    let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let sum: f64 = xs.iter().sum();
    let mean = sum / n;
    let std = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    let rate = if counts.len() > 1 {
        (xs[xs.len() - 1] - xs[0]) / (n - 1.0)
    } else {
        0.0
    };
    Ok(LatentFeatures {
        sum,
        avg_rate_of_change: rate,
        std,
    })
}

/// One row per series over buckets `first..=last`, zero padded.
pub fn latent_matrix(series: &[TimeSeries], first: i64, last: i64) -> Result<FeatureMatrix> {
    if first > last {
        return Err(Error::InvertedRange { start: first, end: last });
    }
    let rows = series
        .iter()
        .map(|s| {
            latent_features(&s.window(first, last)).map(|f| crate::features::FeatureRow {
                topic: s.topic.clone(),
                bucket: last,
                values: f.to_vec(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    FeatureMatrix::new(LATENT_COLUMNS.iter().map(|s| s.to_string()).collect(), rows)
}
