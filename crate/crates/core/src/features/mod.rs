//! Feature extraction per `(topic, bucket)`.
//!
//! [`FeatureContext`] holds everything shared across topics (topic model,
//! PageRank scores, collection word counts, lexicon, wordlist) and is built
//! once per dataset. [`feature_matrix`] then computes one [`FeatureRow`] per
//! topic in [`FeatureSchema`] order, in parallel when the `parallel` feature
//! is on; row order follows the topic order and never the schedule.

pub mod content;
pub mod hashtag;
pub mod lda;
pub mod meme;
pub mod network;
pub mod pagerank;
pub mod schema;
pub mod timeseries;

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

pub use content::{content_features, EmoticonTable, SentimentLexicon};
pub use hashtag::{hashtag_features, CorpusStats, Wordlist};
pub use lda::{topic_vector, LdaConfig, TopicModel};
pub use meme::meme_features;
pub use network::{border_users, network_features, UndirectedGraph};
pub use pagerank::{interaction_pagerank, pagerank, user_features, PageRankConfig};
pub use schema::{schema_hash, FeatureSchema, ValueKind, DIMENSIONS};
pub use timeseries::timeseries_features;

use crate::model::Dataset;
use crate::text::tokenize;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub lda: LdaConfig,
    pub damping: f64,
    pub pagerank_tolerance: f64,
    /// Trailing popularity window for the time-series features.
    pub window: usize,
    /// Replaces the default emoticon table when set.
    pub emoticons: Option<Vec<String>>,
    /// Named features (e.g. `fc4`) whose columns are written as zeros.
    pub disabled: Vec<String>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            lda: LdaConfig::default(),
            damping: 0.85,
            pagerank_tolerance: 1e-9,
            window: timeseries::DEFAULT_WINDOW,
            emoticons: None,
            disabled: Vec::new(),
        }
    }
}

/// Shared, read-only state for extracting rows from one dataset.
pub struct FeatureContext<'a> {
    pub dataset: &'a Dataset,
    pub config: FeatureConfig,
    pub topic_model: TopicModel,
    pub pagerank: BTreeMap<String, f64>,
    pub corpus: CorpusStats,
    pub lexicon: SentimentLexicon,
    pub wordlist: Wordlist,
    pub emoticons: EmoticonTable,
}

impl<'a> FeatureContext<'a> {
    pub fn build(
        dataset: &'a Dataset,
        config: FeatureConfig,
        lexicon: SentimentLexicon,
        wordlist: Wordlist,
    ) -> Result<Self> {
        if config.window == 0 {
            return Err(Error::InvalidArgument("time-series window must be >= 1".into()));
        }
        for f in &config.disabled {
            if FeatureSchema::standard().columns_of(f).is_empty() {
                return Err(Error::InvalidArgument(format!("unknown feature {f:?}")));
            }
        }
        let docs: Vec<Vec<String>> = dataset.messages().iter().map(|m| tokenize(&m.text)).collect();
        let topic_model = TopicModel::fit(&docs, config.lda)?;
        let pagerank = interaction_pagerank(
            dataset.interactions(),
            &PageRankConfig {
                damping: config.damping,
                tolerance: config.pagerank_tolerance,
                ..PageRankConfig::default()
            },
        );
        let corpus = CorpusStats::from_messages(dataset.messages());
        let emoticons = match &config.emoticons {
            Some(list) => EmoticonTable::new(list.iter().cloned()),
            None => EmoticonTable::default(),
        };
        Ok(Self {
            dataset,
            config,
            topic_model,
            pagerank,
            corpus,
            lexicon,
            wordlist,
            emoticons,
        })
    }

    /// All 68 values for one topic in one bucket.
    pub fn row(&self, topic: &str, bucket: i64) -> Result<FeatureRow> {
        let ds = self.dataset;
        let snap = ds.topic_snapshot(topic, bucket);
        let mut v = Vec::with_capacity(DIMENSIONS);

        let c = content_features(&snap, &self.emoticons, &self.lexicon);
        v.extend([c.emoticons, c.special_signals, c.sentiment_pos, c.sentiment_neg]);
        v.extend(topic_vector(&self.topic_model, &snap));

        let u = user_features(&snap, ds.followers(), &self.pagerank);
        v.extend([u.mean_pagerank, u.max_followers, u.mean_followers]);

        let extended = hashtag::extended_messages(ds, &snap);
        let h = hashtag_features(topic, &snap, &extended, &self.corpus, &self.wordlist);
        v.extend([
            h.length,
            h.multi_tag_fraction,
            h.clarity,
            h.extended_clarity,
            h.has_digit,
            h.word_count,
        ]);

        let n = network_features(&snap, ds.followers());
        v.extend([n.mean_degree, n.density, n.order, n.degree_entropy, n.border_users]);
        v.extend(n.exposure);
        v.extend([n.component_fraction, n.mean_edge_weight, n.triangle_fraction]);

        let m = meme_features(&snap, &ds.active_users(bucket));
        v.extend([
            m.users,
            m.user_fraction,
            m.mentions,
            m.mention_fraction,
            m.retweets,
            m.retweet_fraction,
            m.messages,
            m.url_fraction,
        ]);

        let w = self.config.window as i64;
        let series = ds.topic_series(topic, bucket - w + 1..=bucket)?;
        let t = timeseries_features(&series.counts)?;
        v.extend([t.fit_mean, t.fit_std, t.slope_mean, t.slope_std]);

        let schema = FeatureSchema::standard();
        debug_assert_eq!(v.len(), schema.len());
        for f in &self.config.disabled {
            for i in schema.columns_of(f) {
                v[i] = 0.0;
            }
        }
        if let Some(i) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite value in column {}",
                schema.dims()[i].name
            )));
        }
        Ok(FeatureRow {
            topic: topic.to_string(),
            bucket,
            values: v,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub topic: String,
    pub bucket: i64,
    pub values: Vec<f64>,
}

/// Rows aligned to an ordered list of column names.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub columns: Vec<String>,
    pub rows: Vec<FeatureRow>,
    /// Rows that failed extraction, as `topic@bucket: reason`.
    pub diagnostics: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(columns: Vec<String>, rows: Vec<FeatureRow>) -> Result<Self> {
        for r in &rows {
            if r.values.len() != columns.len() {
                return Err(Error::LengthMismatch {
                    left: r.values.len(),
                    right: columns.len(),
                });
            }
        }
        Ok(Self {
            columns,
            rows,
            diagnostics: Vec::new(),
        })
    }

    /// Builds a matrix from plain rows; topics are named `r0, r1, ...`.
    pub fn from_values(columns: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let rows = values
            .into_iter()
            .enumerate()
            .map(|(i, values)| FeatureRow {
                topic: format!("r{i}"),
                bucket: 0,
                values,
            })
            .collect();
        Self::new(columns, rows)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn values(&self) -> Vec<&[f64]> {
        self.rows.iter().map(|r| r.values.as_slice()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.values[j]).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn schema_hash(&self) -> String {
        schema_hash(&self.columns)
    }

    /// Copy without the given column indices.
    pub fn without_columns(&self, drop: &[usize]) -> Self {
        let keep: Vec<usize> = (0..self.n_cols()).filter(|j| !drop.contains(j)).collect();
        Self {
            columns: keep.iter().map(|&j| self.columns[j].clone()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| FeatureRow {
                    topic: r.topic.clone(),
                    bucket: r.bucket,
                    values: keep.iter().map(|&j| r.values[j]).collect(),
                })
                .collect(),
            diagnostics: self.diagnostics.clone(),
        }
    }

    /// Copy with one extra column appended.
    pub fn with_column(&self, name: &str, values: &[f64]) -> Result<Self> {
        if values.len() != self.n_rows() {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: self.n_rows(),
            });
        }
        let mut out = self.clone();
        out.columns.push(name.to_string());
        for (r, &v) in out.rows.iter_mut().zip(values) {
            r.values.push(v);
        }
        Ok(out)
    }

    /// CSV with header `topic,bucket,<columns>`. Values use the shortest
    /// representation that parses back to the same `f64`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["topic".to_string(), "bucket".to_string()];
        header.extend(self.columns.iter().cloned());
        wr.write_record(&header).map_err(csv_err)?;
        for r in &self.rows {
            let mut rec = vec![r.topic.clone(), r.bucket.to_string()];
            rec.extend(r.values.iter().map(|v| format!("{v:?}")));
            wr.write_record(&rec).map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers().map_err(csv_err)?.clone();
        if header.len() < 2 || &header[0] != "topic" || &header[1] != "bucket" {
            return Err(Error::Parse("feature CSV must start with topic,bucket".into()));
        }
        let columns: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, rec) in rd.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let bucket = rec[1]
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: bad bucket", i + 1)))?;
            let values = rec
                .iter()
                .skip(2)
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Parse(format!("row {}: bad number", i + 1)))?;
            rows.push(FeatureRow {
                topic: rec[0].to_string(),
                bucket,
                values,
            });
        }
        Self::new(columns, rows)
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

/// Sidecar describing how a feature matrix was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureManifest {
    pub schema_hash: String,
    pub seed: u64,
    pub bucket: i64,
    pub rows: usize,
    pub dataset_digest: String,
    pub config: FeatureConfig,
    pub diagnostics: Vec<String>,
}

/// One row per topic for `bucket`, in topic order. Rows whose extraction
/// fails are reported in `diagnostics` instead.
pub fn feature_matrix(ctx: &FeatureContext<'_>, topics: &[String], bucket: i64) -> FeatureMatrix {
    let results = crate::par::map_indexed(topics, |_, t| ctx.row(t, bucket));
    let mut rows = Vec::with_capacity(topics.len());
    let mut diagnostics = Vec::new();
    for (t, r) in topics.iter().zip(results) {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => diagnostics.push(format!("{t}@{bucket}: {e}")),
        }
    }
    FeatureMatrix {
        columns: FeatureSchema::standard().names().into_iter().map(str::to_string).collect(),
        rows,
        diagnostics,
    }
}

impl FeatureManifest {
    pub fn new(ctx: &FeatureContext<'_>, matrix: &FeatureMatrix, bucket: i64) -> Self {
        Self {
            schema_hash: matrix.schema_hash(),
            seed: ctx.config.lda.seed,
            bucket,
            rows: matrix.n_rows(),
            dataset_digest: ctx.dataset.digest(),
            config: ctx.config.clone(),
            diagnostics: matrix.diagnostics.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let m = FeatureMatrix::from_values(
            vec!["a".into(), "b".into()],
            vec![vec![0.1 + 0.2, -1e-300], vec![f64::MAX, 3.0]],
        )
        .unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let back = FeatureMatrix::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn drop_and_append_columns() {
        let m = FeatureMatrix::from_values(vec!["a".into(), "b".into()], vec![vec![1.0, 2.0]]).unwrap();
        let d = m.without_columns(&[0]);
        assert_eq!(d.columns, vec!["b"]);
        assert_eq!(d.rows[0].values, vec![2.0]);
        let e = m.with_column("z", &[0.0]).unwrap();
        assert_eq!(e.n_cols(), 3);
        assert!(m.with_column("z", &[]).is_err());
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(FeatureMatrix::from_values(vec!["a".into()], vec![vec![1.0, 2.0]]).is_err());
    }
}
