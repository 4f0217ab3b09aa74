//! Time-series features from a least-squares polynomial fit of the
//! popularity window.

use crate::{Error, Result};

pub const DEFAULT_WINDOW: usize = 5;
const MAX_DEGREE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSeriesFeatures {
    pub fit_mean: f64,
    pub fit_std: f64,
    pub slope_mean: f64,
    pub slope_std: f64,
}

/// Least-squares polynomial fit, evaluated at the sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFit {
    /// Coefficients in the scaled variable `u = (i - center) / scale`.
    coeffs: Vec<f64>,
    center: f64,
    scale: f64,
}

impl PolyFit {
    /// Fits degree `min(3, n - 1)` to `(i, values[i])`.
    #[allow(clippy::needless_range_loop)]
    pub fn fit(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::Empty("time-series window"));
        }
        let degree = MAX_DEGREE.min(n - 1);
        let center = (n - 1) as f64 / 2.0;
        let scale = center.max(1.0);
        let m = degree + 1;
        let mut a = vec![vec![0.0; m + 1]; m];
        for (i, &y) in values.iter().enumerate() {
            let u = (i as f64 - center) / scale;
            let mut pows = vec![1.0; 2 * m];
            for p in 1..2 * m {
                pows[p] = pows[p - 1] * u;
            }
            for r in 0..m {
                for c in 0..m {
                    a[r][c] += pows[r + c];
                }
                a[r][m] += pows[r] * y;
            }
        }
        // Gaussian elimination with partial pivoting on the normal equations.
        for col in 0..m {
            let pivot = (col..m)
                .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
                .unwrap_or(col);
            a.swap(col, pivot);
            let d = a[col][col];
            if d.abs() < 1e-300 {
                return Err(Error::InvalidArgument("singular polynomial fit".into()));
            }
            for r in 0..m {
                if r != col {
                    let f = a[r][col] / d;
                    if f != 0.0 {
                        for c in col..=m {
                            a[r][c] -= f * a[col][c];
                        }
                    }
                }
            }
        }
        let coeffs = (0..m).map(|r| a[r][m] / a[r][r]).collect();
        Ok(Self { coeffs, center, scale })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn value(&self, i: f64) -> f64 {
        let u = (i - self.center) / self.scale;
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
    }

    /// Derivative with respect to the sample index.
    pub fn slope(&self, i: f64) -> f64 {
        let u = (i - self.center) / self.scale;
        let mut acc = 0.0;
        for (p, &c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * u + p as f64 * c;
        }
        acc / self.scale
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// `F_{t1..t4}`: mean and population std of the fitted curve and of its
/// absolute derivative at the sample points.
pub fn timeseries_features(counts: &[u64]) -> Result<TimeSeriesFeatures> {
    let values: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let fit = PolyFit::fit(&values)?;
    let xs: Vec<f64> = (0..values.len()).map(|i| i as f64).collect();
    let fitted: Vec<f64> = xs.iter().map(|&x| fit.value(x)).collect();
    let slopes: Vec<f64> = xs.iter().map(|&x| fit.slope(x).abs()).collect();
    let (fit_mean, fit_std) = mean_std(&fitted);
    let (slope_mean, slope_std) = mean_std(&slopes);
    Ok(TimeSeriesFeatures {
        fit_mean,
        fit_std,
        slope_mean,
        slope_std,
    })
}
