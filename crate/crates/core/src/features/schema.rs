//! The 68-dimension feature schema: 34 named features in six categories.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::digest::sha256_hex;

pub const LDA_TOPICS: usize = 20;
pub const EXPOSURE_DIMS: usize = 15;
pub const DIMENSIONS: usize = 68;
pub const NAMED_FEATURES: usize = 34;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Category {
    Content,
    User,
    Network,
    Meme,
    Hashtag,
    TimeSeries,
}

/// How a dimension's values are constrained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValueKind {
    Count,
    Fraction,
    Real,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dimension {
    /// Column name, e.g. `fc4_d07`.
    pub name: String,
    /// Named feature this dimension belongs to, e.g. `fc4`.
    pub feature: &'static str,
    pub label: &'static str,
    pub category: Category,
    pub kind: ValueKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSchema {
    dims: Vec<Dimension>,
}

struct Spec {
    feature: &'static str,
    label: &'static str,
    category: Category,
    kind: ValueKind,
    width: usize,
}

const fn spec(
    feature: &'static str,
    label: &'static str,
    category: Category,
    kind: ValueKind,
    width: usize,
) -> Spec {
    Spec {
        feature,
        label,
        category,
        kind,
        width,
    }
}

use Category::*;
use ValueKind::*;

const SPECS: &[Spec] = &[
    spec("fc1", "NumEmo", Content, Count, 1),
    spec("fc2", "NumSpeSig", Content, Count, 1),
    spec("fc3", "SentiOHash", Content, Real, 2),
    spec("fc4", "Topics", Content, Fraction, LDA_TOPICS),
    spec("fu1", "ActOUser", User, Fraction, 1),
    spec("fu2", "MaxOF", User, Count, 1),
    spec("fu3", "AvOF", User, Real, 1),
    spec("fh1", "Length", Hashtag, Count, 1),
    spec("fh2", "multiFreq", Hashtag, Fraction, 1),
    spec("fh3", "Clarity", Hashtag, Real, 1),
    spec("fh4", "ExtClar", Hashtag, Real, 1),
    spec("fh5", "NumInHash", Hashtag, Fraction, 1),
    spec("fh6", "NumOWord", Hashtag, Count, 1),
    spec("fn1", "Degree", Network, Real, 1),
    spec("fn2", "Density", Network, Fraction, 1),
    spec("fn3", "Order", Network, Count, 1),
    spec("fn4", "EntrODD", Network, Real, 1),
    spec("fn5", "NumOBUser", Network, Count, 1),
    spec("fn6", "ExpVec", Network, Count, EXPOSURE_DIMS),
    spec("fn7", "CompFrac", Network, Fraction, 1),
    spec("fn8", "Weight", Network, Real, 1),
    spec("fn9", "TriFrac", Network, Fraction, 1),
    spec("fm1", "NumOUser", Meme, Count, 1),
    spec("fm2", "FracOUser", Meme, Fraction, 1),
    spec("fm3", "NumO@", Meme, Count, 1),
    spec("fm4", "FracO@", Meme, Fraction, 1),
    spec("fm5", "NumORT", Meme, Count, 1),
    spec("fm6", "FracORT", Meme, Fraction, 1),
    spec("fm7", "NumOT", Meme, Count, 1),
    spec("fm8", "FracOURL", Meme, Fraction, 1),
    spec("ft1", "Mn", TimeSeries, Real, 1),
    spec("ft2", "MnD", TimeSeries, Real, 1),
    spec("ft3", "Sd", TimeSeries, Real, 1),
    spec("ft4", "SdD", TimeSeries, Real, 1),
];

impl FeatureSchema {
    /// The standard schema, built once.
    pub fn standard() -> &'static FeatureSchema {
        static SCHEMA: OnceLock<FeatureSchema> = OnceLock::new();
        SCHEMA.get_or_init(|| {
            let mut dims = Vec::with_capacity(DIMENSIONS);
            for s in SPECS {
                for i in 0..s.width {
                    let name = match (s.feature, s.width) {
                        (_, 1) => s.feature.to_string(),
                        ("fc3", _) => format!("fc3_{}", ["pos", "neg"][i]),
                        (f, _) => format!("{f}_d{:02}", i + 1),
                    };
                    dims.push(Dimension {
                        name,
                        feature: s.feature,
                        label: s.label,
                        category: s.category,
                        kind: s.kind,
                    });
                }
            }
            FeatureSchema { dims }
        })
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn dims(&self) -> &[Dimension] {
        &self.dims
    }

    pub fn names(&self) -> Vec<&str> {
        self.dims.iter().map(|d| d.name.as_str()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.dims.iter().position(|d| d.name == name)
    }

    /// Named features in schema order.
    pub fn features(&self) -> Vec<&'static str> {
        SPECS.iter().map(|s| s.feature).collect()
    }

    /// Column indices of a named feature (several for multi-dimension ones).
    pub fn columns_of(&self, feature: &str) -> Vec<usize> {
        self.dims
            .iter()
            .enumerate()
            .filter(|(_, d)| d.feature == feature)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn hash(&self) -> String {
        schema_hash(&self.names())
    }
}

/// Digest of an ordered list of column names.
pub fn schema_hash<S: AsRef<str>>(names: &[S]) -> String {
    let joined: Vec<&str> = names.iter().map(AsRef::as_ref).collect();
    sha256_hex(joined.join("\n").as_bytes())
}
