//! Seeded synthetic social network with independent-cascade topic spread.
//!
//! Users join one at a time and follow `attachment` earlier users chosen
//! with probability proportional to `followers + 1`; each followed user
//! follows back with probability `reciprocity`. Each topic starts
//! from `seeds_per_topic` random users in bucket 0. A user adopting in
//! bucket `b` gets one chance to convert each of its followers, who then
//! adopt in bucket `b + 1` with the topic's infectivity. Popular topics use
//! the high infectivity, the rest the low one. Every adoption emits one
//! message with the topic hashtag, mentioning and reposting the infector.
//! Untagged background chatter is mixed in.
//!
//! Generation is single-threaded and fully determined by the config.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{Message, SECONDS_PER_DAY};
use crate::{Error, Result};

const WORDLIST: &str = include_str!("../data/wordlist.txt");
const SYLLABLES: [&str; 20] = [
    "ka", "lo", "mi", "su", "ter", "vo", "pra", "den", "qui", "zal", "bor", "fen", "gri", "hol", "jun", "nev",
    "ros", "tam", "wix", "yel",
];
const EMOTICONS: [&str; 4] = [":)", ":(", ":D", ";)"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub users: usize,
    /// Followees picked by each joining user.
    pub attachment: usize,
    /// Probability that a followed user follows back.
    pub reciprocity: f64,
    pub topics: usize,
    pub high_infectivity: f64,
    pub low_infectivity: f64,
    pub popular_fraction: f64,
    pub seeds_per_topic: usize,
    pub buckets: usize,
    /// Mean untagged messages per user over the whole horizon.
    pub background_rate: f64,
    pub seed: u64,
    /// Start of bucket 0; must be a UTC midnight.
    pub start_ts: i64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            users: 2000,
            attachment: 4,
            reciprocity: 0.8,
            topics: 300,
            high_infectivity: 0.4,
            low_infectivity: 0.05,
            popular_fraction: 0.2,
            seeds_per_topic: 4,
            buckets: 7,
            background_rate: 1.0,
            seed: 0,
            start_ts: 1_438_387_200,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if self.users < 2 {
            return bad("users must be at least 2");
        }
        if self.attachment == 0 || self.attachment >= self.users {
            return bad("attachment must be in 1..users");
        }
        if self.topics == 0 {
            return bad("topics must be at least 1");
        }
        if !prob(self.high_infectivity) || !prob(self.low_infectivity) {
            return bad("infectivities must be in [0, 1]");
        }
        if !prob(self.reciprocity) {
            return bad("reciprocity must be in [0, 1]");
        }
        if !prob(self.popular_fraction) {
            return bad("popular_fraction must be in [0, 1]");
        }
        if self.seeds_per_topic == 0 || self.seeds_per_topic > self.users {
            return bad("seeds_per_topic must be in 1..=users");
        }
        if self.buckets == 0 {
            return bad("buckets must be at least 1");
        }
        if !(self.background_rate >= 0.0 && self.background_rate.is_finite()) {
            return bad("background_rate must be a finite non-negative number");
        }
        if self.start_ts < 0 || self.start_ts % SECONDS_PER_DAY != 0 {
            return bad("start_ts must be a non-negative UTC midnight");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cause {
    Seed,
    Cascade { infector: String, parent: String },
    Background,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub id: String,
    pub user: String,
    pub bucket: usize,
    pub topic: Option<String>,
    pub cause: Cause,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicLedger {
    pub tag: String,
    pub popular: bool,
    pub infectivity: f64,
    pub seeds: Vec<String>,
    /// Adoptions per bucket, `0..buckets`.
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionCount {
    pub target: String,
    pub actor: String,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationLedger {
    pub config: SynthConfig,
    pub topics: Vec<TopicLedger>,
    pub messages: Vec<Provenance>,
    pub mentions: Vec<MentionCount>,
}

impl GenerationLedger {
    pub fn labels(&self) -> BTreeMap<String, u8> {
        self.topics.iter().map(|t| (t.tag.clone(), u8::from(t.popular))).collect()
    }

    pub fn topic(&self, tag: &str) -> Option<&TopicLedger> {
        self.topics.iter().find(|t| t.tag == tag)
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    /// Sorted by timestamp, then id.
    pub messages: Vec<Message>,
    /// `(follower, followee)` in insertion order.
    pub follows: Vec<(String, String)>,
    pub ledger: GenerationLedger,
}

fn user_name(i: usize) -> String {
    format!("user{i:05}")
}

/// Pronounceable word unique to `n`.
fn pseudo_word(mut n: usize) -> String {
    let mut s = String::new();
    loop {
        s.push_str(SYLLABLES[n % SYLLABLES.len()]);
        n /= SYLLABLES.len();
        if n == 0 {
            break;
        }
        n -= 1;
    }
    s.push_str("ex");
    s
}

fn follower_graph(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Vec<(String, String)> {
    let mut followers = vec![0usize; cfg.users];
    let mut edges = Vec::new();
    for u in 1..cfg.users {
        let wanted = cfg.attachment.min(u);
        let mut chosen = BTreeSet::new();
        let total: usize = followers[..u].iter().map(|f| f + 1).sum();
        while chosen.len() < wanted {
            let mut r = rng.random_range(0..total);
            let mut v = 0;
            while r > followers[v] {
                r -= followers[v] + 1;
                v += 1;
            }
            chosen.insert(v);
        }
        for v in chosen {
            followers[v] += 1;
            edges.push((u, v));
            if rng.random::<f64>() < cfg.reciprocity {
                followers[u] += 1;
                edges.push((v, u));
            }
        }
    }
    edges.into_iter().map(|(a, b)| (user_name(a), user_name(b))).collect()
}

#[allow(clippy::needless_range_loop)]
pub fn generate(config: &SynthConfig) -> Result<SyntheticCorpus> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let common: Vec<&str> = WORDLIST.lines().map(str::trim).filter(|w| !w.is_empty()).collect();

    let follows = follower_graph(config, &mut rng);
    let mut followers_of: Vec<Vec<usize>> = vec![Vec::new(); config.users];
    let mut followees_of: Vec<Vec<usize>> = vec![Vec::new(); config.users];
    let index = |name: &str| name[4..].parse::<usize>().expect("generated user name");
    for (a, b) in &follows {
        followers_of[index(b)].push(index(a));
        followees_of[index(a)].push(index(b));
    }

    // Distinct two-word tags.
    let mut tags = BTreeSet::new();
    let mut tag_list = Vec::with_capacity(config.topics);
    while tag_list.len() < config.topics {
        let a = common.choose(&mut rng).copied().unwrap_or("topic");
        let b = common.choose(&mut rng).copied().unwrap_or("tag");
        let mut tag = format!("{a}{b}");
        if tags.contains(&tag) {
            tag = format!("{tag}{}", tag_list.len());
        }
        if tags.insert(tag.clone()) {
            tag_list.push(tag);
        }
    }
    let n_popular = (config.popular_fraction * config.topics as f64).round() as usize;
    let mut order: Vec<usize> = (0..config.topics).collect();
    order.shuffle(&mut rng);
    let mut popular = vec![false; config.topics];
    for &t in &order[..n_popular] {
        popular[t] = true;
    }

    let mut drafts: Vec<(Message, Provenance)> = Vec::new();
    let mut mentions: BTreeMap<(String, String), u32> = BTreeMap::new();
    let mut topics = Vec::with_capacity(config.topics);
    let text_for = |rng: &mut ChaCha8Rng, own: &[String]| {
        let mut words: Vec<&str> = Vec::new();
        for _ in 0..3 {
            words.push(own.choose(rng).map(String::as_str).unwrap_or("word"));
        }
        for _ in 0..2 {
            words.push(common.choose(rng).copied().unwrap_or("word"));
        }
        words.shuffle(rng);
        if rng.random::<f64>() < 0.1 {
            words.push(EMOTICONS.choose(rng).copied().unwrap_or(":)"));
        }
        words.join(" ")
    };
    let timestamp = |rng: &mut ChaCha8Rng, bucket: usize| {
        config.start_ts + bucket as i64 * SECONDS_PER_DAY + rng.random_range(0..SECONDS_PER_DAY)
    };

    for (t, tag) in tag_list.iter().enumerate() {
        let p = if popular[t] { config.high_infectivity } else { config.low_infectivity };
        let own: Vec<String> = (0..4).map(|j| pseudo_word(t * 4 + j)).collect();
        let mut seeds: Vec<usize> = (0..config.users).collect::<Vec<_>>();
        seeds.shuffle(&mut rng);
        seeds.truncate(config.seeds_per_topic);
        seeds.sort_unstable();
        let mut adopted: BTreeMap<usize, String> = BTreeMap::new();
        let mut counts = vec![0u64; config.buckets];
        let mut frontier: Vec<usize> = Vec::new();
        let mut serial = 0usize;
        for &s in &seeds {
            let id = format!("t{t:04}m{serial:06}");
            serial += 1;
            let m = Message::new(id.clone(), user_name(s), timestamp(&mut rng, 0))
                .with_text(text_for(&mut rng, &own))
                .with_hashtags([tag.as_str()]);
            drafts.push((
                m,
                Provenance {
                    id: id.clone(),
                    user: user_name(s),
                    bucket: 0,
                    topic: Some(tag.clone()),
                    cause: Cause::Seed,
                },
            ));
            adopted.insert(s, id);
            counts[0] += 1;
            frontier.push(s);
        }
        for bucket in 1..config.buckets {
            let mut next = Vec::new();
            for &infector in &frontier {
                for &f in &followers_of[infector] {
                    if adopted.contains_key(&f) {
                        continue;
                    }
                    if rng.random::<f64>() < p {
                        let id = format!("t{t:04}m{serial:06}");
                        serial += 1;
                        let parent = adopted[&infector].clone();
                        let (actor, target) = (user_name(f), user_name(infector));
                        let m = Message::new(id.clone(), actor.clone(), timestamp(&mut rng, bucket))
                            .with_text(text_for(&mut rng, &own))
                            .with_hashtags([tag.as_str()])
                            .with_mentions([target.as_str()])
                            .with_retweet_of(parent.clone());
                        *mentions.entry((target.clone(), actor.clone())).or_insert(0) += 1;
                        drafts.push((
                            m,
                            Provenance {
                                id: id.clone(),
                                user: actor,
                                bucket,
                                topic: Some(tag.clone()),
                                cause: Cause::Cascade { infector: target, parent },
                            },
                        ));
                        adopted.insert(f, id);
                        counts[bucket] += 1;
                        next.push(f);
                    }
                }
            }
            frontier = next;
            if frontier.is_empty() {
                break;
            }
        }
        topics.push(TopicLedger {
            tag: tag.clone(),
            popular: popular[t],
            infectivity: p,
            seeds: seeds.iter().map(|&s| user_name(s)).collect(),
            counts,
        });
    }

    let n_background = (config.background_rate * config.users as f64).round() as usize;
    for k in 0..n_background {
        let u = rng.random_range(0..config.users);
        let bucket = rng.random_range(0..config.buckets);
        let id = format!("b{k:07}");
        let words: Vec<&str> = (0..5).map(|_| common.choose(&mut rng).copied().unwrap_or("word")).collect();
        let mut m = Message::new(id.clone(), user_name(u), timestamp(&mut rng, bucket)).with_text(words.join(" "));
        if !followees_of[u].is_empty() && rng.random::<f64>() < 0.3 {
            let target = user_name(*followees_of[u].choose(&mut rng).expect("non-empty"));
            *mentions.entry((target.clone(), user_name(u))).or_insert(0) += 1;
            m = m.with_mentions([target.as_str()]);
        }
        if rng.random::<f64>() < 0.2 {
            m = m.with_urls(1);
        }
        drafts.push((
            m,
            Provenance {
                id,
                user: user_name(u),
                bucket,
                topic: None,
                cause: Cause::Background,
            },
        ));
    }

    drafts.sort_by(|a, b| (a.0.timestamp, &a.0.id).cmp(&(b.0.timestamp, &b.0.id)));
    let (messages, provenance): (Vec<Message>, Vec<Provenance>) = drafts.into_iter().unzip();
    Ok(SyntheticCorpus {
        messages,
        follows,
        ledger: GenerationLedger {
            config: config.clone(),
            topics,
            messages: provenance,
            mentions: mentions
                .into_iter()
                .map(|((target, actor), count)| MentionCount { target, actor, count })
                .collect(),
        },
    })
}

pub const MESSAGES_FILE: &str = "messages.jsonl";
pub const FOLLOWERS_FILE: &str = "followers.tsv";
pub const LEDGER_FILE: &str = "ledger.json";

impl SyntheticCorpus {
    pub fn write_messages<W: Write>(&self, mut w: W) -> Result<()> {
        for m in &self.messages {
            serde_json::to_writer(&mut w, m).map_err(|e| Error::Parse(e.to_string()))?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn write_followers<W: Write>(&self, mut w: W) -> Result<()> {
        for (a, b) in &self.follows {
            writeln!(w, "{a}\t{b}")?;
        }
        Ok(())
    }

    pub fn write_ledger<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, &self.ledger).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Writes the three files into `dir`, which must exist.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        let open = |name: &str| File::create(dir.join(name)).map(BufWriter::new);
        let mut w = open(MESSAGES_FILE)?;
        self.write_messages(&mut w)?;
        w.flush()?;
        let mut w = open(FOLLOWERS_FILE)?;
        self.write_followers(&mut w)?;
        w.flush()?;
        let mut w = open(LEDGER_FILE)?;
        self.write_ledger(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

pub fn read_ledger(path: &Path) -> Result<GenerationLedger> {
    let f = File::open(path)?;
    serde_json::from_reader(std::io::BufReader::new(f)).map_err(|e| Error::Parse(format!("ledger: {e}")))
}
