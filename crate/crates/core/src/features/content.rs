//! Content features: emoticons, special signals and lexicon sentiment.

use std::collections::HashMap;
use std::io::BufRead;

use crate::model::TopicSnapshot;
use crate::text::tokenize;
use crate::{Error, Result};

pub const DEFAULT_EMOTICONS: &[&str] = &[
    ":)", ":-)", ":(", ":-(", ":D", ":-D", ";)", ";-)", ":P", ":-P", ":p", ":o", ":O", ":/",
    ":-/", ":|", ":'(", ":*", ":-*", "<3", "</3", "XD", "xD", "^_^", "^^", "-_-", "T_T", "=)",
    "=(", ":]", ":[", "8)",
];

const DEFAULT_LEXICON: &str = include_str!("../../data/lexicon.tsv");

#[derive(Debug, Clone)]
pub struct EmoticonTable {
    /// Sorted longest first so longer emoticons win at a position.
    entries: Vec<String>,
}

impl Default for EmoticonTable {
    fn default() -> Self {
        Self::new(DEFAULT_EMOTICONS.iter().copied())
    }
}

impl EmoticonTable {
    pub fn new<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut entries: Vec<String> = entries.into_iter().map(Into::into).collect();
        entries.retain(|e| !e.is_empty());
        entries.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        entries.dedup();
        Self { entries }
    }

    /// Non-overlapping emoticon occurrences in `text`. Links are skipped, and
    /// an emoticon that starts (ends) with an alphanumeric character must not
    /// be glued to another alphanumeric character on that side.
    pub fn count(&self, text: &str) -> usize {
        let mut n = 0;
        for token in text.split_whitespace() {
            if token.starts_with("http://") || token.starts_with("https://") {
                continue;
            }
            let mut i = 0;
            'scan: while i < token.len() {
                for e in &self.entries {
                    if token[i..].starts_with(e.as_str()) && self.bounded(token, i, e) {
                        n += 1;
                        i += e.len();
                        continue 'scan;
                    }
                }
                i += token[i..].chars().next().map_or(1, char::len_utf8);
            }
        }
        n
    }

    fn bounded(&self, token: &str, at: usize, e: &str) -> bool {
        let alnum = |c: Option<char>| c.is_some_and(char::is_alphanumeric);
        let first = e.chars().next();
        let last = e.chars().next_back();
        let before = token[..at].chars().next_back();
        let after = token[at + e.len()..].chars().next();
        !(alnum(first) && alnum(before)) && !(alnum(last) && alnum(after))
    }
}

/// Maximal runs of three or more identical letters or punctuation marks
/// inside a whitespace token. Each run counts once.
pub fn special_signals(text: &str) -> usize {
    let mut n = 0;
    for token in text.split_whitespace() {
        let mut chars = token.chars().peekable();
        while let Some(c) = chars.next() {
            let mut run = 1;
            while chars.peek() == Some(&c) {
                chars.next();
                run += 1;
            }
            if run >= 3 && (c.is_alphabetic() || c.is_ascii_punctuation()) {
                n += 1;
            }
        }
    }
    n
}

/// Term to signed strength score.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SentimentLexicon {
    scores: HashMap<String, f64>,
}

impl SentimentLexicon {
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: AsRef<str>,
    {
        let mut scores = HashMap::new();
        for (t, s) in pairs {
            if !s.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "lexicon score for {:?} is not finite",
                    t.as_ref()
                )));
            }
            scores.insert(t.as_ref().to_lowercase(), s);
        }
        Ok(Self { scores })
    }

    /// Reads `term<TAB>score` lines. Blank lines and `#` comments are skipped.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut pairs = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (term, score) = line
                .split_once('\t')
                .ok_or_else(|| Error::Parse(format!("lexicon line {}: expected term<TAB>score", n + 1)))?;
            let score: f64 = score
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("lexicon line {}: bad score {score:?}", n + 1)))?;
            pairs.push((term.trim().to_string(), score));
        }
        Self::from_pairs(pairs)
    }

    pub fn builtin() -> Self {
        // The shipped file is validated by the tests below.
        Self::parse(DEFAULT_LEXICON.as_bytes()).expect("builtin lexicon parses")
    }

    pub fn score(&self, term: &str) -> Option<f64> {
        self.scores.get(term).copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Positive and negative score sums for one text.
    pub fn score_text(&self, text: &str) -> (f64, f64) {
        let mut pos = 0.0;
        let mut neg = 0.0;
        for tok in tokenize(text) {
            if let Some(s) = self.score(&tok) {
                if s > 0.0 {
                    pos += s;
                } else {
                    neg += s;
                }
            }
        }
        (pos, neg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContentFeatures {
    pub emoticons: f64,
    pub special_signals: f64,
    pub sentiment_pos: f64,
    pub sentiment_neg: f64,
}

pub fn content_features(
    snapshot: &TopicSnapshot<'_>,
    emoticons: &EmoticonTable,
    lexicon: &SentimentLexicon,
) -> ContentFeatures {
    let mut out = ContentFeatures {
        emoticons: 0.0,
        special_signals: 0.0,
        sentiment_pos: 0.0,
        sentiment_neg: 0.0,
    };
    if snapshot.is_empty() {
        return out;
    }
    for m in &snapshot.messages {
        out.emoticons += emoticons.count(&m.text) as f64;
        out.special_signals += special_signals(&m.text) as f64;
        let (p, n) = lexicon.score_text(&m.text);
        out.sentiment_pos += p;
        out.sentiment_neg += n;
    }
    let n = snapshot.messages.len() as f64;
    out.sentiment_pos /= n;
    out.sentiment_neg /= n;
    out
}
