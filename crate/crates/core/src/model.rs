//! Domain model: messages, the interaction and follower graphs, time
//! bucketing and per-topic views of one bucket.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::digest::sha256_hex;
use crate::{Error, Result};

pub const SECONDS_PER_DAY: i64 = 86_400;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub id: String,
    #[serde(rename = "user")]
    pub author: String,
    #[serde(rename = "ts")]
    pub timestamp: i64,
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub hashtags: Vec<String>,
    #[serde(default)]
    pub mentions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retweet_of: Option<String>,
    #[serde(default)]
    pub urls: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lang: Option<String>,
}

impl Message {
    pub fn new(id: impl Into<String>, author: impl Into<String>, timestamp: i64) -> Self {
        Self {
            id: id.into(),
            author: author.into(),
            timestamp,
            text: String::new(),
            hashtags: Vec::new(),
            mentions: Vec::new(),
            retweet_of: None,
            urls: 0,
            lang: None,
        }
    }

    pub fn with_text(mut self, text: impl Into<String>) -> Self {
        self.text = text.into();
        self
    }

    pub fn with_hashtags<I, S>(mut self, tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.hashtags = normalize_hashtags(tags);
        self
    }

    pub fn with_mentions<I, S>(mut self, users: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.mentions = users.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_retweet_of(mut self, id: impl Into<String>) -> Self {
        self.retweet_of = Some(id.into());
        self
    }

    pub fn with_urls(mut self, urls: u32) -> Self {
        self.urls = urls;
        self
    }

    pub fn has_hashtag(&self, tag: &str) -> bool {
        self.hashtags.iter().any(|h| h == tag)
    }
}

/// Lowercases tags, strips a leading `#` and removes duplicates while
/// keeping first-occurrence order.
pub fn normalize_hashtags<I, S>(tags: I) -> Vec<String>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut out: Vec<String> = Vec::new();
    for t in tags {
        let t = t.as_ref().trim().trim_start_matches('#').to_lowercase();
        if !t.is_empty() && !out.contains(&t) {
            out.push(t);
        }
    }
    out
}

/// Directed, weighted interactions. The key `(target, actor)` is recorded
/// each time `actor` mentions or replies to `target`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InteractionGraph {
    pub nodes: BTreeSet<String>,
    pub edges: BTreeMap<(String, String), u32>,
}

impl InteractionGraph {
    pub fn from_messages(messages: &[Message]) -> Self {
        let mut g = Self::default();
        for m in messages {
            g.nodes.insert(m.author.clone());
            for target in &m.mentions {
                if target.is_empty() {
                    continue;
                }
                g.nodes.insert(target.clone());
                if *target == m.author {
                    continue;
                }
                *g.edges
                    .entry((target.clone(), m.author.clone()))
                    .or_insert(0) += 1;
            }
        }
        g
    }

    pub fn weight(&self, target: &str, actor: &str) -> u32 {
        self.edges
            .get(&(target.to_string(), actor.to_string()))
            .copied()
            .unwrap_or(0)
    }
}

/// Follow relation: `follows[u]` is the set of users `u` follows.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FollowerGraph {
    follows: BTreeMap<String, BTreeSet<String>>,
    followed_by: BTreeMap<String, BTreeSet<String>>,
}

impl FollowerGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `follower -> followee`. Returns false for self-follows and
    /// duplicates, which are not stored.
    pub fn insert(&mut self, follower: &str, followee: &str) -> bool {
        if follower == followee {
            return false;
        }
        let added = self
            .follows
            .entry(follower.to_string())
            .or_default()
            .insert(followee.to_string());
        if added {
            self.followed_by
                .entry(followee.to_string())
                .or_default()
                .insert(follower.to_string());
        }
        added
    }

    pub fn follows(&self, user: &str) -> impl Iterator<Item = &str> {
        self.follows
            .get(user)
            .into_iter()
            .flat_map(|s| s.iter().map(String::as_str))
    }

    pub fn followers_of(&self, user: &str) -> impl Iterator<Item = &str> {
        self.followed_by
            .get(user)
            .into_iter()
            .flat_map(|s| s.iter().map(String::as_str))
    }

    pub fn follower_count(&self, user: &str) -> usize {
        self.followed_by.get(user).map_or(0, BTreeSet::len)
    }

    pub fn edge_count(&self) -> usize {
        self.follows.values().map(BTreeSet::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.follows
            .iter()
            .flat_map(|(a, bs)| bs.iter().map(move |b| (a.as_str(), b.as_str())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeBucketing {
    pub origin: i64,
    pub period: i64,
}

impl TimeBucketing {
    pub fn new(origin: i64, period: i64) -> Result<Self> {
        if period <= 0 {
            return Err(Error::InvalidArgument(format!(
                "bucket period must be positive, got {period}"
            )));
        }
        Ok(Self { origin, period })
    }

    /// Daily buckets starting at midnight UTC of the earliest message.
    pub fn daily_from(messages: &[Message]) -> Self {
        let first = messages.iter().map(|m| m.timestamp).min().unwrap_or(0);
        Self {
            origin: first.div_euclid(SECONDS_PER_DAY) * SECONDS_PER_DAY,
            period: SECONDS_PER_DAY,
        }
    }

    pub fn bucket_of(&self, timestamp: i64) -> i64 {
        (timestamp - self.origin).div_euclid(self.period)
    }
}

/// Groups message ids by bucket index.
pub fn bucketize(messages: &[Message], bucketing: &TimeBucketing) -> BTreeMap<i64, Vec<String>> {
    let mut out: BTreeMap<i64, Vec<String>> = BTreeMap::new();
    for m in messages {
        out.entry(bucketing.bucket_of(m.timestamp))
            .or_default()
            .push(m.id.clone());
    }
    out
}

/// A corpus with its graphs and bucket indices. Immutable once built.
#[derive(Debug, Clone)]
pub struct Dataset {
    messages: Vec<Message>,
    bucketing: TimeBucketing,
    interactions: InteractionGraph,
    followers: FollowerGraph,
    by_bucket: BTreeMap<i64, Vec<usize>>,
    by_topic_bucket: HashMap<(String, i64), Vec<usize>>,
    by_id: HashMap<String, usize>,
}

impl Dataset {
    /// Builds the dataset. `bucketing` defaults to daily buckets anchored at
    /// midnight UTC of the earliest message.
    pub fn new(
        messages: Vec<Message>,
        followers: FollowerGraph,
        bucketing: Option<TimeBucketing>,
    ) -> Result<Self> {
        let bucketing = bucketing.unwrap_or_else(|| TimeBucketing::daily_from(&messages));
        if bucketing.period <= 0 {
            return Err(Error::InvalidArgument("bucket period must be positive".into()));
        }
        let mut by_id = HashMap::with_capacity(messages.len());
        let mut by_bucket: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        let mut by_topic_bucket: HashMap<(String, i64), Vec<usize>> = HashMap::new();
        for (i, m) in messages.iter().enumerate() {
            if m.id.is_empty() {
                return Err(Error::InvalidArgument(format!("message {i} has an empty id")));
            }
            if by_id.insert(m.id.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate message id {}", m.id)));
            }
            let b = bucketing.bucket_of(m.timestamp);
            by_bucket.entry(b).or_default().push(i);
            for h in &m.hashtags {
                by_topic_bucket.entry((h.clone(), b)).or_default().push(i);
            }
        }
        let interactions = InteractionGraph::from_messages(&messages);
        Ok(Self {
            messages,
            bucketing,
            interactions,
            followers,
            by_bucket,
            by_topic_bucket,
            by_id,
        })
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn message(&self, id: &str) -> Option<&Message> {
        self.by_id.get(id).map(|&i| &self.messages[i])
    }

    pub fn bucketing(&self) -> &TimeBucketing {
        &self.bucketing
    }

    pub fn interactions(&self) -> &InteractionGraph {
        &self.interactions
    }

    pub fn followers(&self) -> &FollowerGraph {
        &self.followers
    }

    pub fn buckets(&self) -> impl Iterator<Item = i64> + '_ {
        self.by_bucket.keys().copied()
    }

    pub fn bucket_messages(&self, bucket: i64) -> impl Iterator<Item = &Message> {
        self.by_bucket
            .get(&bucket)
            .into_iter()
            .flat_map(move |ix| ix.iter().map(move |&i| &self.messages[i]))
    }

    /// Users posting anything in `bucket`.
    pub fn active_users(&self, bucket: i64) -> BTreeSet<&str> {
        self.bucket_messages(bucket).map(|m| m.author.as_str()).collect()
    }

    pub fn topic_messages(&self, topic: &str, bucket: i64) -> impl Iterator<Item = &Message> {
        self.by_topic_bucket
            .get(&(topic.to_string(), bucket))
            .into_iter()
            .flat_map(move |ix| ix.iter().map(move |&i| &self.messages[i]))
    }

    pub fn popularity_at(&self, topic: &str, bucket: i64) -> u64 {
        self.by_topic_bucket
            .get(&(topic.to_string(), bucket))
            .map_or(0, |v| v.len() as u64)
    }

    /// Order-sensitive digest of the message list.
    pub fn digest(&self) -> String {
        let mut buf = Vec::new();
        for m in &self.messages {
            // Serializing a plain struct cannot fail.
            serde_json::to_writer(&mut buf, m).expect("message serializes");
            buf.push(b'\n');
        }
        sha256_hex(&buf)
    }

    pub fn topic_snapshot(&self, topic: &str, bucket: i64) -> TopicSnapshot<'_> {
        let messages: Vec<&Message> = self.topic_messages(topic, bucket).collect();
        TopicSnapshot::from_messages(topic, bucket, messages)
    }

    /// Popularity series over an inclusive bucket range.
    pub fn topic_series(&self, topic: &str, buckets: RangeInclusive<i64>) -> Result<TimeSeries> {
        let (start, end) = (*buckets.start(), *buckets.end());
        if start > end {
            return Err(Error::InvertedRange { start, end });
        }
        Ok(TimeSeries {
            topic: topic.to_string(),
            start_bucket: start,
            counts: (start..=end).map(|b| self.popularity_at(topic, b)).collect(),
        })
    }
}

/// `(U^h_t, E^h_t, M^h_t)`: authors, interactions among them and messages
/// carrying one hashtag in one bucket.
#[derive(Debug, Clone)]
pub struct TopicSnapshot<'a> {
    pub topic: String,
    pub bucket: i64,
    pub users: BTreeSet<&'a str>,
    /// `(target, actor) -> count`, restricted to pairs inside `users`.
    pub edges: BTreeMap<(&'a str, &'a str), u32>,
    pub messages: Vec<&'a Message>,
}

impl<'a> TopicSnapshot<'a> {
    pub fn from_messages(topic: &str, bucket: i64, messages: Vec<&'a Message>) -> Self {
        let users: BTreeSet<&str> = messages.iter().map(|m| m.author.as_str()).collect();
        let mut edges = BTreeMap::new();
        for m in &messages {
            for target in &m.mentions {
                let target = target.as_str();
                if target != m.author && users.contains(target) {
                    *edges.entry((target, m.author.as_str())).or_insert(0) += 1;
                }
            }
        }
        Self {
            topic: topic.to_string(),
            bucket,
            users,
            edges,
            messages,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn message_ids(&self) -> Vec<&str> {
        self.messages.iter().map(|m| m.id.as_str()).collect()
    }

    /// `P^h_t = |M^h_t|`.
    pub fn popularity(&self) -> u64 {
        self.messages.len() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub topic: String,
    pub start_bucket: i64,
    pub counts: Vec<u64>,
}

impl TimeSeries {
    pub fn end_bucket(&self) -> i64 {
        self.start_bucket + self.counts.len() as i64 - 1
    }

    pub fn at(&self, bucket: i64) -> Option<u64> {
        if bucket < self.start_bucket {
            return None;
        }
        self.counts.get((bucket - self.start_bucket) as usize).copied()
    }

    /// Counts for the inclusive bucket range, zero outside the series.
    pub fn window(&self, first: i64, last: i64) -> Vec<u64> {
        (first..=last).map(|b| self.at(b).unwrap_or(0)).collect()
    }
}
