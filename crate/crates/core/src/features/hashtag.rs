//! Hashtag features: length, multi-tag fraction, clarity, extended clarity,
//! digit presence and word count.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::BufRead;

use crate::model::{Dataset, Message, TopicSnapshot};
use crate::text::tokenize;
use crate::Result;

const DEFAULT_WORDLIST: &str = include_str!("../../data/wordlist.txt");

/// Word counts of the whole message collection.
#[derive(Debug, Clone, Default)]
pub struct CorpusStats {
    counts: HashMap<String, u64>,
    vocab: Vec<String>,
    total: u64,
}

impl CorpusStats {
    pub fn from_messages<'a, I: IntoIterator<Item = &'a Message>>(messages: I) -> Self {
        let mut counts: HashMap<String, u64> = HashMap::new();
        let mut total = 0;
        for m in messages {
            for t in tokenize(&m.text) {
                *counts.entry(t).or_insert(0) += 1;
                total += 1;
            }
        }
        let mut vocab: Vec<String> = counts.keys().cloned().collect();
        vocab.sort();
        Self { counts, vocab, total }
    }

    pub fn vocabulary_size(&self) -> usize {
        self.vocab.len()
    }

    /// KL divergence of an add-one smoothed word distribution of `messages`
    /// from the add-one smoothed collection distribution, both over the
    /// collection vocabulary. Words outside it are ignored. Zero when there
    /// are no messages.
    pub fn clarity<'a, I: IntoIterator<Item = &'a Message>>(&self, messages: I) -> f64 {
        let mut local: HashMap<String, u64> = HashMap::new();
        let mut n_local = 0u64;
        let mut any = false;
        for m in messages {
            any = true;
            for t in tokenize(&m.text) {
                if self.counts.contains_key(&t) {
                    *local.entry(t).or_insert(0) += 1;
                    n_local += 1;
                }
            }
        }
        if !any || self.vocab.is_empty() {
            return 0.0;
        }
        let v = self.vocab.len() as f64;
        let pl_den = n_local as f64 + v;
        let pc_den = self.total as f64 + v;
        let mut kl = 0.0;
        for w in &self.vocab {
            let p = (local.get(w).copied().unwrap_or(0) as f64 + 1.0) / pl_den;
            let q = (self.counts[w] as f64 + 1.0) / pc_den;
            kl += p * (p / q).ln();
        }
        kl.max(0.0)
    }
}

/// `KL(p || q)` in nats with `0 ln 0 = 0`. Infinite when `p` has mass where
/// `q` has none.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&pi, &qi)| {
            if pi <= 0.0 {
                0.0
            } else if qi <= 0.0 {
                f64::INFINITY
            } else {
                pi * (pi / qi).ln()
            }
        })
        .sum()
}

#[derive(Debug, Clone)]
pub struct Wordlist {
    words: HashSet<String>,
    max_len: usize,
}

impl Default for Wordlist {
    fn default() -> Self {
        Self::new(DEFAULT_WORDLIST.lines())
    }
}

impl Wordlist {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let words: HashSet<String> = words
            .into_iter()
            .map(|w| w.as_ref().trim().to_lowercase())
            .filter(|w| !w.is_empty() && !w.starts_with('#'))
            .collect();
        let max_len = words.iter().map(|w| w.chars().count()).max().unwrap_or(0);
        Self { words, max_len }
    }

    /// One word per line.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let lines: Vec<String> = reader.lines().collect::<std::io::Result<_>>()?;
        Ok(Self::new(lines))
    }

    pub fn contains(&self, w: &str) -> bool {
        self.words.contains(w)
    }

    /// Words in a hashtag by greedy longest match. Digit runs are one word
    /// each; unmatched letters between matches form one unknown word.
    pub fn segment(&self, tag: &str) -> usize {
        let chars: Vec<char> = tag.to_lowercase().chars().collect();
        let mut count = 0;
        let mut i = 0;
        let mut pending_unknown = false;
        while i < chars.len() {
            let c = chars[i];
            if c.is_ascii_digit() || !c.is_alphabetic() {
                if pending_unknown {
                    count += 1;
                    pending_unknown = false;
                }
                let digit = c.is_ascii_digit();
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() == digit && !chars[i].is_alphabetic() {
                    i += 1;
                }
                if digit && i > start {
                    count += 1;
                }
                continue;
            }
            let limit = self.max_len.min(chars.len() - i);
            let matched = (1..=limit).rev().find(|&len| {
                let cand: String = chars[i..i + len].iter().collect();
                cand.chars().all(char::is_alphabetic) && self.words.contains(&cand)
            });
            match matched {
                Some(len) => {
                    if pending_unknown {
                        count += 1;
                        pending_unknown = false;
                    }
                    count += 1;
                    i += len;
                }
                None => {
                    pending_unknown = true;
                    i += 1;
                }
            }
        }
        if pending_unknown {
            count += 1;
        }
        count.max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HashtagFeatures {
    pub length: f64,
    pub multi_tag_fraction: f64,
    pub clarity: f64,
    pub extended_clarity: f64,
    pub has_digit: f64,
    pub word_count: f64,
}

/// Messages in the snapshot's bucket by the snapshot's users.
pub fn extended_messages<'a>(dataset: &'a Dataset, snapshot: &TopicSnapshot<'_>) -> Vec<&'a Message> {
    let users: BTreeSet<&str> = snapshot.users.iter().copied().collect();
    dataset
        .bucket_messages(snapshot.bucket)
        .filter(|m| users.contains(m.author.as_str()))
        .collect()
}

pub fn hashtag_features(
    topic: &str,
    snapshot: &TopicSnapshot<'_>,
    extended: &[&Message],
    corpus: &CorpusStats,
    wordlist: &Wordlist,
) -> HashtagFeatures {
    let length = topic.chars().count() as f64;
    let has_digit = if topic.chars().any(|c| c.is_ascii_digit()) { 1.0 } else { 0.0 };
    let word_count = wordlist.segment(topic) as f64;
    if snapshot.is_empty() {
        return HashtagFeatures {
            length,
            multi_tag_fraction: 0.0,
            clarity: 0.0,
            extended_clarity: 0.0,
            has_digit,
            word_count,
        };
    }
    let multi = snapshot.messages.iter().filter(|m| m.hashtags.len() > 1).count();
    HashtagFeatures {
        length,
        multi_tag_fraction: multi as f64 / snapshot.messages.len() as f64,
        clarity: corpus.clarity(snapshot.messages.iter().copied()),
        extended_clarity: corpus.clarity(extended.iter().copied()),
        has_digit,
        word_count,
    }
}
