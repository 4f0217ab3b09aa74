//! Popularity labels for the next bucket and trailing-window denoising.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::features::csv_err;
use crate::model::TimeSeries;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LabelingPolicy {
    /// Popular iff the next-bucket count reaches `theta`.
    Threshold { theta: u64 },
    /// Popular iff the next-bucket count reaches the `q`-quantile of the
    /// candidates' next-bucket counts.
    Quantile { q: f64 },
}

impl Default for LabelingPolicy {
    fn default() -> Self {
        LabelingPolicy::Quantile { q: 0.9 }
    }
}

impl LabelingPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LabelingPolicy::Threshold { theta } if theta >= 1 => Ok(()),
            LabelingPolicy::Quantile { q } if q > 0.0 && q < 1.0 => Ok(()),
            _ => Err(Error::InvalidArgument(format!("invalid labeling policy {self}"))),
        }
    }
}

impl fmt::Display for LabelingPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelingPolicy::Threshold { theta } => write!(f, "threshold:{theta}"),
            LabelingPolicy::Quantile { q } => write!(f, "quantile:{q}"),
        }
    }
}

/// `threshold:<count>` or `quantile:<q>`.
impl FromStr for LabelingPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad labeling policy {s:?}"));
        let (kind, value) = s.split_once(':').ok_or_else(bad)?;
        let p = match kind {
            "threshold" => LabelingPolicy::Threshold {
                theta: value.parse().map_err(|_| bad())?,
            },
            "quantile" => LabelingPolicy::Quantile {
                q: value.parse().map_err(|_| bad())?,
            },
            _ => return Err(bad()),
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Labels {
    pub labels: BTreeMap<String, u8>,
    pub diagnostics: Vec<String>,
}

impl Labels {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_labels(&self.labels, w)
    }
}

pub fn write_labels<W: Write>(labels: &BTreeMap<String, u8>, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["topic", "label"]).map_err(csv_err)?;
    for (t, l) in labels {
        wr.write_record([t.as_str(), &l.to_string()]).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_labels<R: Read>(r: R) -> Result<BTreeMap<String, u8>> {
    let mut rd = csv::Reader::from_reader(r);
    let mut out = BTreeMap::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != 2 {
            return Err(Error::Parse("labels CSV rows must be topic,label".into()));
        }
        let l: u8 = rec[1].trim().parse().map_err(|_| Error::Parse(format!("bad label {:?}", &rec[1])))?;
        if l > 1 {
            return Err(Error::Parse(format!("label must be 0 or 1, got {l}")));
        }
        out.insert(rec[0].to_string(), l);
    }
    Ok(out)
}

/// Labels each topic by its count at `target_bucket`. Topics whose series
/// does not cover that bucket are left out with a diagnostic.
pub fn label_topics(
    series: &BTreeMap<String, TimeSeries>,
    policy: LabelingPolicy,
    target_bucket: i64,
) -> Result<Labels> {
    policy.validate()?;
    let mut out = Labels::default();
    let mut counts: Vec<(&str, u64)> = Vec::new();
    for (topic, s) in series {
        match s.at(target_bucket) {
            Some(c) => counts.push((topic, c)),
            None => out
                .diagnostics
                .push(format!("{topic}: series does not cover bucket {target_bucket}")),
        }
    }
    if counts.is_empty() {
        return Ok(out);
    }
    let cutoff = match policy {
        LabelingPolicy::Threshold { theta } => theta,
        LabelingPolicy::Quantile { q } => {
            let mut sorted: Vec<u64> = counts.iter().map(|c| c.1).collect();
            sorted.sort_unstable();
            let idx = ((q * sorted.len() as f64).floor() as usize).min(sorted.len() - 1);
            sorted[idx]
        }
    };
    for (topic, c) in counts {
        out.labels.insert(topic.to_string(), u8::from(c >= cutoff));
    }
    Ok(out)
}

/// Keeps candidates with at least `min_active` nonzero buckets in the
/// `window` buckets ending at `bucket`, and a count of at least `min_count`
/// at `bucket`.
pub fn denoise_ts(
    candidates: &[String],
    series: &BTreeMap<String, TimeSeries>,
    bucket: i64,
    window: usize,
    min_active: usize,
    min_count: u64,
) -> Result<Vec<String>> {
    if min_active > window {
        return Err(Error::InvalidArgument(format!(
            "min_active {min_active} exceeds window {window}"
        )));
    }
    Ok(candidates
        .iter()
        .filter(|t| {
            let counts = match series.get(t.as_str()) {
                Some(s) => s.window(bucket - window as i64 + 1, bucket),
                None => vec![0; window],
            };
            let active = counts.iter().filter(|&&c| c > 0).count();
            let current = counts.last().copied().unwrap_or(0);
            active >= min_active && current >= min_count
        })
        .cloned()
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(pairs: &[(&str, &[u64])]) -> BTreeMap<String, TimeSeries> {
        pairs
            .iter()
            .map(|(t, c)| {
                (
                    t.to_string(),
                    TimeSeries {
                        topic: t.to_string(),
                        start_bucket: 0,
                        counts: c.to_vec(),
                    },
                )
            })
            .collect()
    }

    #[test]
    fn absolute_threshold() {
        let s = series(&[("a", &[0, 10]), ("b", &[0, 100]), ("c", &[0, 5])]);
        let l = label_topics(&s, LabelingPolicy::Threshold { theta: 50 }, 1).unwrap();
        assert_eq!(l.labels, [("a".into(), 0), ("b".into(), 1), ("c".into(), 0)].into());
    }

    #[test]
    fn median_quantile() {
        let s = series(&[("a", &[1]), ("b", &[2]), ("c", &[3]), ("d", &[4])]);
        let l = label_topics(&s, LabelingPolicy::Quantile { q: 0.5 }, 0).unwrap();
        assert_eq!(l.labels.values().copied().collect::<Vec<_>>(), vec![0, 0, 1, 1]);
    }

    #[test]
    fn equal_counts_all_popular() {
        let s = series(&[("a", &[3]), ("b", &[3]), ("c", &[3])]);
        let l = label_topics(&s, LabelingPolicy::Quantile { q: 0.9 }, 0).unwrap();
        assert!(l.labels.values().all(|&x| x == 1));
    }

    #[test]
    fn uncovered_bucket_is_diagnosed() {
        let s = series(&[("a", &[3]), ("b", &[3, 4])]);
        let l = label_topics(&s, LabelingPolicy::Threshold { theta: 1 }, 1).unwrap();
        assert_eq!(l.labels.len(), 1);
        assert_eq!(l.diagnostics.len(), 1);
    }

    #[test]
    fn policy_parsing() {
        assert_eq!("quantile:0.9".parse::<LabelingPolicy>().unwrap(), LabelingPolicy::Quantile { q: 0.9 });
        assert_eq!("threshold:5".parse::<LabelingPolicy>().unwrap(), LabelingPolicy::Threshold { theta: 5 });
        assert!("quantile:1.5".parse::<LabelingPolicy>().is_err());
        assert!("threshold:0".parse::<LabelingPolicy>().is_err());
        assert!("median".parse::<LabelingPolicy>().is_err());
    }

    #[test]
    fn denoise_rules() {
        let s = series(&[("dead", &[0, 0, 0, 0, 0]), ("kept", &[0, 3, 0, 2, 5])]);
        let c = vec!["dead".to_string(), "kept".to_string()];
        assert_eq!(denoise_ts(&c, &s, 4, 5, 1, 0).unwrap(), vec!["kept"]);
        assert_eq!(denoise_ts(&c, &s, 4, 5, 0, 0).unwrap(), c);
        assert_eq!(denoise_ts(&c, &s, 4, 5, 3, 1).unwrap(), vec!["kept"]);
        assert!(denoise_ts(&c, &s, 4, 2, 3, 0).is_err());
    }

    #[test]
    fn labels_csv_round_trip() {
        let labels: BTreeMap<String, u8> = [("x,y".into(), 1), ("z".into(), 0)].into();
        let mut buf = Vec::new();
        write_labels(&labels, &mut buf).unwrap();
        assert_eq!(read_labels(buf.as_slice()).unwrap(), labels);
    }
}
