//! Scenario weights from a risk matrix, and MinDis ranking.
//!
//! Each metric is placed in a likelihood x severity cell. Its score is
//! `2^(likelihood rank + severity rank)` with ranks Rare=0..Certain=4 and
//! Negligible=0..Catastrophic=3; weights are the scores normalized to sum
//! to one.
//!
//! MinDis is the weighted Euclidean distance from the ideal method
//! (macro = micro = 1, RMSE = 0, complexity Low, universality High), with
//! qualitative levels valued Low = 0.4, Medium = 0.5, High = 0.6.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::metrics::MethodScorecard;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Level {
    Low,
    Medium,
    High,
}

impl Level {
    pub fn value(self) -> f64 {
        match self {
            Level::Low => 0.4,
            Level::Medium => 0.5,
            Level::High => 0.6,
        }
    }
}

impl FromStr for Level {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "low" => Ok(Level::Low),
            "medium" => Ok(Level::Medium),
            "high" => Ok(Level::High),
            _ => Err(Error::Parse(format!("unknown level {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Likelihood {
    Rare,
    Unlikely,
    Possible,
    Likely,
    Certain,
}

impl Likelihood {
    pub const ALL: [Likelihood; 5] = [
        Likelihood::Rare,
        Likelihood::Unlikely,
        Likelihood::Possible,
        Likelihood::Likely,
        Likelihood::Certain,
    ];

    pub fn rank(self) -> u32 {
        self as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Severity {
    Negligible,
    Marginal,
    Critical,
    Catastrophic,
}

impl Severity {
    pub const ALL: [Severity; 4] = [
        Severity::Negligible,
        Severity::Marginal,
        Severity::Critical,
        Severity::Catastrophic,
    ];

    pub fn rank(self) -> u32 {
        self as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    MacroF1,
    MicroF1,
    Rmse,
    Complexity,
    Universality,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::MacroF1,
        Metric::MicroF1,
        Metric::Rmse,
        Metric::Complexity,
        Metric::Universality,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub likelihood: Likelihood,
    pub severity: Severity,
}

impl Placement {
    pub fn new(likelihood: Likelihood, severity: Severity) -> Self {
        Self { likelihood, severity }
    }

    fn score(self) -> f64 {
        f64::from(1u32 << (self.likelihood.rank() + self.severity.rank()))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RiskMatrix {
    pub placement: BTreeMap<Metric, Placement>,
}

impl RiskMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn place(mut self, metric: Metric, likelihood: Likelihood, severity: Severity) -> Self {
        self.placement.insert(metric, Placement::new(likelihood, severity));
        self
    }

    /// Same cell for every metric.
    pub fn uniform(likelihood: Likelihood, severity: Severity) -> Self {
        Metric::ALL
            .iter()
            .fold(Self::new(), |m, &metric| m.place(metric, likelihood, severity))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioWeights {
    pub complexity: f64,
    pub universality: f64,
    pub macro_f1: f64,
    pub micro_f1: f64,
    pub rmse: f64,
}

impl ScenarioWeights {
    pub fn get(&self, m: Metric) -> f64 {
        match m {
            Metric::MacroF1 => self.macro_f1,
            Metric::MicroF1 => self.micro_f1,
            Metric::Rmse => self.rmse,
            Metric::Complexity => self.complexity,
            Metric::Universality => self.universality,
        }
    }

    fn sum(&self) -> f64 {
        Metric::ALL.iter().map(|&m| self.get(m)).sum()
    }

    /// Explicit weights, rescaled to sum to one.
    pub fn normalized(self) -> Result<Self> {
        let all = Metric::ALL.map(|m| self.get(m));
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument("weights must be finite and non-negative".into()));
        }
        let s = self.sum();
        if s <= 0.0 {
            return Err(Error::InvalidArgument("weights sum to zero".into()));
        }
        Ok(Self {
            complexity: self.complexity / s,
            universality: self.universality / s,
            macro_f1: self.macro_f1 / s,
            micro_f1: self.micro_f1 / s,
            rmse: self.rmse / s,
        })
    }
}

pub fn weights_from_matrix(matrix: &RiskMatrix) -> Result<ScenarioWeights> {
    let score = |m: Metric| -> Result<f64> {
        matrix
            .placement
            .get(&m)
            .map(|p| p.score())
            .ok_or_else(|| Error::InvalidArgument(format!("risk matrix is missing {m:?}")))
    };
    ScenarioWeights {
        complexity: score(Metric::Complexity)?,
        universality: score(Metric::Universality)?,
        macro_f1: score(Metric::MacroF1)?,
        micro_f1: score(Metric::MicroF1)?,
        rmse: score(Metric::Rmse)?,
    }
    .normalized()
}

pub fn min_dis(card: &MethodScorecard, w: &ScenarioWeights) -> f64 {
    let sq = |x: f64| x * x;
    (w.macro_f1 * sq(1.0 - card.macro_f1)
        + w.micro_f1 * sq(1.0 - card.micro_f1)
        + w.rmse * sq(0.0 - card.rmse)
        + w.complexity * sq(Level::Low.value() - card.complexity.value())
        + w.universality * sq(Level::High.value() - card.universality.value()))
    .sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub weights: ScenarioWeights,
}

/// Scenario file: a name plus either `[placement]` cells or `[weights]`.
///
/// ```toml
/// name = "III"
/// [placement]
/// complexity = { likelihood = "Likely", severity = "Marginal" }
/// ```
#[derive(Debug, Clone, Deserialize)]
struct ScenarioFile {
    name: Option<String>,
    placement: Option<BTreeMap<Metric, Placement>>,
    weights: Option<ScenarioWeights>,
}

impl Scenario {
    pub fn from_matrix(name: impl Into<String>, matrix: &RiskMatrix) -> Result<Self> {
        Ok(Self {
            name: name.into(),
            weights: weights_from_matrix(matrix)?,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let f: ScenarioFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let name = f.name.unwrap_or_else(|| "custom".to_string());
        match (f.placement, f.weights) {
            (Some(p), None) => Self::from_matrix(name, &RiskMatrix { placement: p }),
            (None, Some(w)) => Ok(Self {
                name,
                weights: w.normalized()?,
            }),
            _ => Err(Error::Parse(
                "scenario file needs exactly one of [placement] or [weights]".into(),
            )),
        }
    }

    /// Built-in scenario by roman numeral.
    pub fn builtin(name: &str) -> Option<Self> {
        let m = builtin_matrix(name)?;
        Self::from_matrix(name.to_ascii_uppercase(), &m).ok()
    }

    pub fn builtins() -> Vec<Self> {
        ["I", "II", "III", "IV"].iter().filter_map(|n| Self::builtin(n)).collect()
    }
}

/// Risk-matrix placements of the four standard scenarios: balanced (I),
/// complexity-oriented (II), accuracy-oriented (III), consistency (IV).
pub fn builtin_matrix(name: &str) -> Option<RiskMatrix> {
    use Likelihood::*;
    use Metric::*;
    use Severity::*;
    let m = RiskMatrix::new();
    Some(match name.to_ascii_uppercase().as_str() {
        "I" => RiskMatrix::uniform(Possible, Critical),
        "II" => m
            .place(Complexity, Likely, Critical)
            .place(Universality, Possible, Catastrophic)
            .place(MacroF1, Possible, Critical)
            .place(MicroF1, Possible, Critical)
            .place(Rmse, Possible, Critical),
        "III" => m
            .place(Complexity, Likely, Marginal)
            .place(Universality, Possible, Marginal)
            .place(MacroF1, Possible, Catastrophic)
            .place(MicroF1, Possible, Critical)
            .place(Rmse, Possible, Critical),
        "IV" => m
            .place(Complexity, Possible, Marginal)
            .place(Universality, Possible, Marginal)
            .place(MacroF1, Possible, Marginal)
            .place(MicroF1, Possible, Marginal)
            .place(Rmse, Possible, Catastrophic),
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedMethod {
    pub rank: usize,
    pub method: String,
    pub min_dis: f64,
}

/// Ascending MinDis, ties by method name.
pub fn rank(cards: &[MethodScorecard], scenario: &Scenario) -> Vec<RankedMethod> {
    let mut scored: Vec<(String, f64)> = cards
        .iter()
        .map(|c| (c.method.clone(), min_dis(c, &scenario.weights)))
        .collect();
    scored.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    scored
        .into_iter()
        .enumerate()
        .map(|(i, (method, min_dis))| RankedMethod {
            rank: i + 1,
            method,
            min_dis,
        })
        .collect()
}

/// Aligned text table of a ranking.
pub struct RankingTable<'a> {
    pub scenario: &'a str,
    pub rows: &'a [RankedMethod],
}

impl fmt::Display for RankingTable<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.rows.iter().map(|r| r.method.len()).max().unwrap_or(6).max(6);
        writeln!(f, "scenario {}", self.scenario)?;
        writeln!(f, "{:>4}  {:<width$}  {:>8}", "rank", "method", "MinDis")?;
        for r in self.rows {
            writeln!(f, "{:>4}  {:<width$}  {:>8.4}", r.rank, r.method, r.min_dis)?;
        }
        Ok(())
    }
}

pub fn write_ranking_csv<W: std::io::Write>(scenario: &str, rows: &[RankedMethod], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["scenario", "rank", "method", "min_dis"])
        .map_err(crate::features::csv_err)?;
    for r in rows {
        wr.write_record([scenario, &r.rank.to_string(), &r.method, &format!("{:.6}", r.min_dis)])
            .map_err(crate::features::csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn card(m: &str, a: f64, b: f64, r: f64, c: Level, u: Level) -> MethodScorecard {
        MethodScorecard::new(m, a, b, r, c, u).unwrap()
    }

    #[test]
    fn scenario_three_weights() {
        let w = Scenario::builtin("III").unwrap().weights;
        let close = |a: f64, b: f64| (a - b).abs() < 1e-4;
        assert!(close(w.complexity, 2.0 / 11.0));
        assert!(close(w.universality, 1.0 / 11.0));
        assert!(close(w.macro_f1, 4.0 / 11.0));
        assert!(close(w.micro_f1, 2.0 / 11.0));
        assert!(close(w.rmse, 2.0 / 11.0));
    }

    #[test]
    fn uniform_cell_gives_equal_weights() {
        for l in Likelihood::ALL {
            for s in Severity::ALL {
                let w = weights_from_matrix(&RiskMatrix::uniform(l, s)).unwrap();
                for m in Metric::ALL {
                    assert!((w.get(m) - 0.2).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn missing_metric_is_an_error() {
        let m = RiskMatrix::new().place(Metric::Rmse, Likelihood::Rare, Severity::Marginal);
        assert!(weights_from_matrix(&m).is_err());
    }

    #[test]
    fn ideal_method_is_at_zero() {
        let ideal = card("ideal", 1.0, 1.0, 0.0, Level::Low, Level::High);
        for s in Scenario::builtins() {
            assert_eq!(min_dis(&ideal, &s.weights), 0.0);
        }
    }

    #[test]
    fn single_method_ranks_first() {
        let s = Scenario::builtin("I").unwrap();
        let r = rank(&[card("only", 0.5, 0.5, 0.5, Level::Medium, Level::Medium)], &s);
        assert_eq!(r.len(), 1);
        assert_eq!((r[0].rank, r[0].method.as_str()), (1, "only"));
    }

    #[test]
    fn ties_break_by_name() {
        let s = Scenario::builtin("I").unwrap();
        let a = card("b", 0.5, 0.5, 0.5, Level::Low, Level::High);
        let b = card("a", 0.5, 0.5, 0.5, Level::Low, Level::High);
        let r = rank(&[a, b], &s);
        assert_eq!(r[0].method, "a");
    }

    #[test]
    fn scenario_files() {
        let s = Scenario::from_toml(
            r#"
            name = "mine"
            [placement]
            complexity = { likelihood = "Likely", severity = "Marginal" }
            universality = { likelihood = "Possible", severity = "Marginal" }
            macro_f1 = { likelihood = "Possible", severity = "Catastrophic" }
            micro_f1 = { likelihood = "Possible", severity = "Critical" }
            rmse = { likelihood = "Possible", severity = "Critical" }
            "#,
        )
        .unwrap();
        assert_eq!(s.weights, Scenario::builtin("III").unwrap().weights);
        let w = Scenario::from_toml(
            "[weights]\ncomplexity = 1\nuniversality = 1\nmacro_f1 = 1\nmicro_f1 = 1\nrmse = 4\n",
        )
        .unwrap();
        assert_eq!(w.weights.rmse, 0.5);
        assert!(Scenario::from_toml("name = \"x\"").is_err());
    }

    #[test]
    fn table_rendering() {
        let s = Scenario::builtin("I").unwrap();
        let r = rank(&[card("m", 0.5, 0.5, 0.5, Level::Low, Level::High)], &s);
        let text = RankingTable { scenario: "I", rows: &r }.to_string();
        assert!(text.contains("   1  m"));
    }
}
