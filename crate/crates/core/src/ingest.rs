//! Corpus ingestion.
//!
//! Messages are read from UTF-8 JSON lines:
//!
//! ```text
//! {"id":"m1","user":"alice","ts":1438387200,"text":"hi #rust","hashtags":["rust"],
//!  "mentions":["bob"],"retweet_of":null,"urls":0}
//! ```
//!
//! Followers are tab-separated `follower<TAB>followee` lines; `#` starts a
//! comment line. Malformed lines are counted and skipped, never fatal.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::model::{normalize_hashtags, FollowerGraph, InteractionGraph, Message};
use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub messages_ok: usize,
    pub messages_rejected: usize,
    pub reject_reasons: BTreeMap<String, usize>,
    pub users: usize,
    pub topics: usize,
    pub hashtag_fraction: f64,
}

impl IngestReport {
    pub fn lines(&self) -> usize {
        self.messages_ok + self.messages_rejected
    }

    fn reject(&mut self, reason: &str) {
        self.messages_rejected += 1;
        *self.reject_reasons.entry(reason.to_string()).or_insert(0) += 1;
    }

    fn finish(&mut self, messages: &[Message]) {
        let users: BTreeSet<&str> = messages.iter().map(|m| m.author.as_str()).collect();
        let topics: BTreeSet<&str> = messages
            .iter()
            .flat_map(|m| m.hashtags.iter().map(String::as_str))
            .collect();
        let tagged = messages.iter().filter(|m| !m.hashtags.is_empty()).count();
        self.users = users.len();
        self.topics = topics.len();
        self.hashtag_fraction = if messages.is_empty() {
            0.0
        } else {
            tagged as f64 / messages.len() as f64
        };
    }
}

/// Options applied while parsing messages.
#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    /// When set, only messages whose `lang` field is in the allowlist are
    /// accepted. Messages without a `lang` field are rejected.
    pub languages: Option<BTreeSet<String>>,
}

fn str_field<'a>(obj: &'a serde_json::Map<String, Value>, key: &str) -> Option<&'a str> {
    obj.get(key).and_then(Value::as_str).filter(|s| !s.is_empty())
}

fn str_list(v: Option<&Value>) -> std::result::Result<Vec<String>, ()> {
    match v {
        None | Some(Value::Null) => Ok(Vec::new()),
        Some(Value::Array(items)) => items
            .iter()
            .map(|i| i.as_str().map(str::to_string).ok_or(()))
            .collect(),
        Some(_) => Err(()),
    }
}

/// Parses one record. The error string is the reject reason.
fn parse_record(
    line: &str,
    opts: &ParseOptions,
) -> std::result::Result<Message, &'static str> {
    let value: Value = serde_json::from_str(line).map_err(|_| "invalid_json")?;
    let obj = value.as_object().ok_or("not_an_object")?;
    let id = str_field(obj, "id").ok_or("missing_id")?;
    let user = str_field(obj, "user").ok_or("missing_user")?;
    let ts = match obj.get("ts") {
        None | Some(Value::Null) => return Err("missing_timestamp"),
        Some(v) => v.as_i64().ok_or("invalid_timestamp")?,
    };
    if ts < 0 {
        return Err("negative_timestamp");
    }
    let text = match obj.get("text") {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err("invalid_text"),
    };
    let hashtags = str_list(obj.get("hashtags")).map_err(|_| "invalid_hashtags")?;
    let mentions = str_list(obj.get("mentions")).map_err(|_| "invalid_mentions")?;
    let retweet_of = match obj.get("retweet_of") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) if !s.is_empty() => Some(s.clone()),
        Some(Value::String(_)) => None,
        Some(_) => return Err("invalid_retweet_of"),
    };
    let urls = match obj.get("urls") {
        None | Some(Value::Null) => 0,
        Some(v) => v
            .as_u64()
            .and_then(|u| u32::try_from(u).ok())
            .ok_or("invalid_urls")?,
    };
    let lang = str_field(obj, "lang").map(str::to_string);
    if let Some(allow) = &opts.languages {
        match &lang {
            Some(l) if allow.contains(l) => {}
            _ => return Err("language_filtered"),
        }
    }
    Ok(Message {
        id: id.to_string(),
        author: user.to_string(),
        timestamp: ts,
        text,
        hashtags: normalize_hashtags(hashtags),
        mentions,
        retweet_of,
        urls,
        lang,
    })
}

fn parse_lines<R: BufRead>(
    reader: R,
    opts: &ParseOptions,
    seen: &mut HashSet<String>,
    messages: &mut Vec<Message>,
    report: &mut IngestReport,
) -> Result<()> {
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            report.reject("blank_line");
            continue;
        }
        match parse_record(&line, opts) {
            Ok(m) => {
                if seen.insert(m.id.clone()) {
                    report.messages_ok += 1;
                    messages.push(m);
                } else {
                    report.reject("duplicate_id");
                }
            }
            Err(reason) => report.reject(reason),
        }
    }
    Ok(())
}

/// Parses line-delimited message records. I/O failures are fatal; schema
/// violations are counted in the report.
pub fn parse_messages<R: BufRead>(
    reader: R,
    opts: &ParseOptions,
) -> Result<(Vec<Message>, IngestReport)> {
    let mut messages = Vec::new();
    let mut report = IngestReport::default();
    parse_lines(reader, opts, &mut HashSet::new(), &mut messages, &mut report)?;
    report.finish(&messages);
    Ok((messages, report))
}

pub fn parse_messages_path(path: &Path, opts: &ParseOptions) -> Result<(Vec<Message>, IngestReport)> {
    let f = File::open(path)?;
    parse_messages(BufReader::new(f), opts)
}

/// Parses several shard files in parallel and merges them in path order.
/// Ids repeated across shards are rejected as `duplicate_id`, keeping the
/// first occurrence in path order.
pub fn parse_message_shards<P: AsRef<Path> + Sync>(
    paths: &[P],
    opts: &ParseOptions,
) -> Result<(Vec<Message>, IngestReport)> {
    let parsed = crate::par::map_indexed(paths, |_, p| parse_messages_path(p.as_ref(), opts));
    let mut messages = Vec::new();
    let mut report = IngestReport::default();
    let mut seen = HashSet::new();
    for shard in parsed {
        let (ms, r) = shard?;
        report.messages_rejected += r.messages_rejected;
        for (k, v) in r.reject_reasons {
            *report.reject_reasons.entry(k).or_insert(0) += v;
        }
        for m in ms {
            if seen.insert(m.id.clone()) {
                report.messages_ok += 1;
                messages.push(m);
            } else {
                report.reject("duplicate_id");
            }
        }
    }
    report.finish(&messages);
    Ok((messages, report))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FollowerReport {
    pub edges: usize,
    pub duplicates: usize,
    pub self_loops: usize,
    pub malformed: usize,
    pub comments: usize,
}

pub fn parse_followers<R: BufRead>(reader: R) -> Result<(FollowerGraph, FollowerReport)> {
    let mut g = FollowerGraph::new();
    let mut report = FollowerReport::default();
    for line in reader.lines() {
        let line = line?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.trim().is_empty() {
            continue;
        }
        if trimmed.trim_start().starts_with('#') {
            report.comments += 1;
            continue;
        }
        let mut parts = trimmed.split('\t');
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            report.malformed += 1;
            continue;
        };
        let (a, b) = (a.trim(), b.trim());
        if a.is_empty() || b.is_empty() {
            report.malformed += 1;
        } else if a == b {
            report.self_loops += 1;
        } else if g.insert(a, b) {
            report.edges += 1;
        } else {
            report.duplicates += 1;
        }
    }
    Ok((g, report))
}

pub fn parse_followers_path(path: &Path) -> Result<(FollowerGraph, FollowerReport)> {
    let f = File::open(path)?;
    parse_followers(BufReader::new(f))
}

pub fn build_interaction_graph(messages: &[Message]) -> InteractionGraph {
    InteractionGraph::from_messages(messages)
}

/// Hashtags carried by at least `min_total_count` messages, most frequent
/// first, ties in lexicographic order.
pub fn extract_topics(messages: &[Message], min_total_count: usize) -> Result<Vec<String>> {
    if min_total_count == 0 {
        return Err(Error::InvalidArgument("min_total_count must be >= 1".into()));
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for m in messages {
        for h in &m.hashtags {
            *counts.entry(h.as_str()).or_insert(0) += 1;
        }
    }
    let mut topics: Vec<(&str, usize)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= min_total_count)
        .collect();
    topics.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    Ok(topics.into_iter().map(|(t, _)| t.to_string()).collect())
}
