//! Latent Dirichlet allocation trained by collapsed Gibbs sampling, with
//! fold-in inference for unseen documents.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::digest::stable_key;
use crate::model::TopicSnapshot;
use crate::text::tokenize;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LdaConfig {
    pub topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub infer_iterations: usize,
    pub seed: u64,
    /// Upper bound on training documents; a seeded subsample is used above it.
    pub max_docs: Option<usize>,
}

impl Default for LdaConfig {
    fn default() -> Self {
        Self {
            topics: super::schema::LDA_TOPICS,
            alpha: 0.1,
            beta: 0.01,
            iterations: 100,
            infer_iterations: 30,
            seed: 0,
            max_docs: Some(20_000),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TopicModel {
    config: LdaConfig,
    words: Vec<String>,
    index: HashMap<String, usize>,
    /// `phi[w * k + z]` = p(word w | topic z).
    phi: Vec<f64>,
}

fn sample(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut r = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        r -= w;
        if r < 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

impl TopicModel {
    /// Fits the model on tokenized documents. Empty documents are ignored.
    pub fn fit(docs: &[Vec<String>], config: LdaConfig) -> Result<Self> {
        let k = config.topics;
        if k == 0 {
            return Err(Error::InvalidArgument("LDA needs at least one topic".into()));
        }
        if !(config.alpha > 0.0 && config.beta > 0.0) {
            return Err(Error::InvalidArgument("LDA priors must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut chosen: Vec<&Vec<String>> = docs.iter().filter(|d| !d.is_empty()).collect();
        if let Some(max) = config.max_docs {
            if chosen.len() > max {
                chosen.shuffle(&mut rng);
                chosen.truncate(max);
            }
        }
        let vocab: BTreeSet<&str> = chosen.iter().flat_map(|d| d.iter().map(String::as_str)).collect();
        if vocab.is_empty() {
            return Err(Error::Empty("LDA vocabulary"));
        }
        let words: Vec<String> = vocab.into_iter().map(str::to_string).collect();
        let index: HashMap<String, usize> =
            words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        let v = words.len();
        let corpus: Vec<Vec<usize>> = chosen
            .iter()
            .map(|d| d.iter().map(|w| index[w]).collect())
            .collect();

        let mut n_dk = vec![0u32; corpus.len() * k];
        let mut n_wk = vec![0u32; v * k];
        let mut n_k = vec![0u32; k];
        let mut z: Vec<Vec<usize>> = Vec::with_capacity(corpus.len());
        for (d, doc) in corpus.iter().enumerate() {
            let zs: Vec<usize> = doc
                .iter()
                .map(|&w| {
                    let t = rng.random_range(0..k);
                    n_dk[d * k + t] += 1;
                    n_wk[w * k + t] += 1;
                    n_k[t] += 1;
                    t
                })
                .collect();
            z.push(zs);
        }

        let vbeta = v as f64 * config.beta;
        let mut weights = vec![0.0; k];
        for _ in 0..config.iterations {
            for (d, doc) in corpus.iter().enumerate() {
                for (i, &w) in doc.iter().enumerate() {
                    let old = z[d][i];
                    n_dk[d * k + old] -= 1;
                    n_wk[w * k + old] -= 1;
                    n_k[old] -= 1;
                    for t in 0..k {
                        weights[t] = (n_dk[d * k + t] as f64 + config.alpha)
                            * (n_wk[w * k + t] as f64 + config.beta)
                            / (n_k[t] as f64 + vbeta);
                    }
                    let new = sample(&mut rng, &weights);
                    z[d][i] = new;
                    n_dk[d * k + new] += 1;
                    n_wk[w * k + new] += 1;
                    n_k[new] += 1;
                }
            }
        }

        let mut phi = vec![0.0; v * k];
        for w in 0..v {
            for t in 0..k {
                phi[w * k + t] = (n_wk[w * k + t] as f64 + config.beta) / (n_k[t] as f64 + vbeta);
            }
        }
        Ok(Self {
            config,
            words,
            index,
            phi,
        })
    }

    pub fn topics(&self) -> usize {
        self.config.topics
    }

    pub fn config(&self) -> &LdaConfig {
        &self.config
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.words
    }

    /// Word distribution of one topic, aligned with [`Self::vocabulary`].
    pub fn topic_words(&self, topic: usize) -> Vec<f64> {
        let k = self.config.topics;
        (0..self.words.len()).map(|w| self.phi[w * k + topic]).collect()
    }

    /// Topic mixture of a document with the model frozen. Documents without
    /// known words get the uniform mixture.
    pub fn infer(&self, tokens: &[String], seed: u64) -> Vec<f64> {
        let k = self.config.topics;
        let ids: Vec<usize> = tokens.iter().filter_map(|t| self.index.get(t).copied()).collect();
        if ids.is_empty() {
            return vec![1.0 / k as f64; k];
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut n_k = vec![0u32; k];
        let mut z: Vec<usize> = ids
            .iter()
            .map(|_| {
                let t = rng.random_range(0..k);
                n_k[t] += 1;
                t
            })
            .collect();
        let mut weights = vec![0.0; k];
        for _ in 0..self.config.infer_iterations {
            for (i, &w) in ids.iter().enumerate() {
                n_k[z[i]] -= 1;
                for t in 0..k {
                    weights[t] = (n_k[t] as f64 + self.config.alpha) * self.phi[w * k + t];
                }
                let new = sample(&mut rng, &weights);
                z[i] = new;
                n_k[new] += 1;
            }
        }
        let denom = ids.len() as f64 + k as f64 * self.config.alpha;
        let mut theta: Vec<f64> = n_k.iter().map(|&c| (c as f64 + self.config.alpha) / denom).collect();
        let s: f64 = theta.iter().sum();
        theta.iter_mut().for_each(|x| *x /= s);
        theta
    }
}

/// `F_{c4}`: topic mixture of the concatenated messages of a snapshot.
pub fn topic_vector(model: &TopicModel, snapshot: &TopicSnapshot<'_>) -> Vec<f64> {
    let tokens: Vec<String> = snapshot.messages.iter().flat_map(|m| tokenize(&m.text)).collect();
    let seed = stable_key(&[
        &model.config.seed.to_le_bytes(),
        snapshot.topic.as_bytes(),
        &snapshot.bucket.to_le_bytes(),
    ]);
    model.infer(&tokens, seed)
}
