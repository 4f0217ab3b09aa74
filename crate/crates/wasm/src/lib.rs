//! Browser bindings for the popbench demo page.
//!
//! Every export takes and returns JSON text. The `*_json` functions hold the
//! logic and are plain Rust so they can be tested natively; the
//! `#[wasm_bindgen]` wrappers only convert the error type.

use popbench::features::timeseries::PolyFit;
use popbench::features::timeseries_features;
use popbench::metrics::{read_scorecards, MethodScorecard};
use popbench::ranking::{builtin_matrix, rank, Metric, Placement, RiskMatrix, Scenario};
use popbench::reference::SCORECARDS_CSV;
use popbench::synth::{generate, SynthConfig};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::collections::BTreeMap;
use wasm_bindgen::prelude::*;

/// Keeps a single simulation within what a page can run without stalling.
pub const MAX_USERS: usize = 5000;
pub const MAX_TOPICS: usize = 200;
const CURVE_SAMPLES: usize = 8;

type Out = Result<String, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RankRequest {
    placement: BTreeMap<Metric, Placement>,
    /// Scorecards CSV; the reference scorecards when absent.
    #[serde(default)]
    scorecards: Option<String>,
}

#[derive(Serialize)]
struct RankRow {
    rank: usize,
    method: String,
    min_dis: f64,
}

/// Placements of a built-in scenario as JSON, for presetting the editor.
pub fn scenario_placement_json(name: &str) -> Out {
    let m = builtin_matrix(name).ok_or_else(|| format!("unknown scenario {name:?}"))?;
    serde_json::to_string(&m.placement).map_err(err)
}

/// `{placement, scorecards?}` to `{weights, ranking}`.
pub fn rank_json(request: &str) -> Out {
    let req: RankRequest = serde_json::from_str(request).map_err(err)?;
    let cards: Vec<MethodScorecard> = match &req.scorecards {
        Some(csv) => read_scorecards(csv.as_bytes()).map_err(err)?,
        None => read_scorecards(SCORECARDS_CSV.as_bytes()).map_err(err)?,
    };
    if cards.is_empty() {
        return Err("no scorecards".into());
    }
    let scenario = Scenario::from_matrix("custom", &RiskMatrix { placement: req.placement }).map_err(err)?;
    let ranking: Vec<RankRow> = rank(&cards, &scenario)
        .into_iter()
        .map(|r| RankRow {
            rank: r.rank,
            method: r.method,
            min_dis: r.min_dis,
        })
        .collect();
    serde_json::to_string(&json!({ "weights": scenario.weights, "ranking": ranking })).map_err(err)
}

/// Least-squares fit of a count series (JSON array of non-negative
/// integers): fitted values and slopes at the samples, a dense curve for
/// plotting, and the four time-series features.
pub fn fit_series_json(counts: &str) -> Out {
    let counts: Vec<u64> = serde_json::from_str(counts).map_err(err)?;
    let values: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let fit = PolyFit::fit(&values).map_err(err)?;
    let f = timeseries_features(&counts).map_err(err)?;
    let n = values.len();
    let fitted: Vec<f64> = (0..n).map(|i| fit.value(i as f64)).collect();
    let slopes: Vec<f64> = (0..n).map(|i| fit.slope(i as f64)).collect();
    let steps = (n.max(2) - 1) * CURVE_SAMPLES;
    let curve: Vec<[f64; 2]> = (0..=steps)
        .map(|s| {
            let x = s as f64 / CURVE_SAMPLES as f64;
            [x, fit.value(x)]
        })
        .collect();
    serde_json::to_string(&json!({
        "degree": fit.degree(),
        "fitted": fitted,
        "slopes": slopes,
        "curve": curve,
        "features": {
            "fit_mean": f.fit_mean,
            "fit_std": f.fit_std,
            "slope_mean": f.slope_mean,
            "slope_std": f.slope_std,
        },
    }))
    .map_err(err)
}

/// Runs the cascade generator on a partial `SynthConfig` and summarises
/// each topic's adoption curve.
pub fn simulate_json(config: &str) -> Out {
    let cfg: SynthConfig = serde_json::from_str(config).map_err(err)?;
    if cfg.users > MAX_USERS || cfg.topics > MAX_TOPICS {
        return Err(format!("demo limits: users <= {MAX_USERS}, topics <= {MAX_TOPICS}"));
    }
    let corpus = generate(&cfg).map_err(err)?;
    let topics: Vec<_> = corpus
        .ledger
        .topics
        .iter()
        .map(|t| {
            json!({
                "tag": t.tag,
                "popular": t.popular,
                "infectivity": t.infectivity,
                "counts": t.counts,
                "total": t.counts.iter().sum::<u64>(),
            })
        })
        .collect();
    serde_json::to_string(&json!({
        "messages": corpus.messages.len(),
        "follows": corpus.follows.len(),
        "topics": topics,
    }))
    .map_err(err)
}

fn js(r: Out) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = scenarioPlacement)]
pub fn scenario_placement(name: &str) -> Result<String, JsError> {
    js(scenario_placement_json(name))
}

#[wasm_bindgen(js_name = rankMethods)]
pub fn rank_methods(request: &str) -> Result<String, JsError> {
    js(rank_json(request))
}

#[wasm_bindgen(js_name = fitSeries)]
pub fn fit_series(counts: &str) -> Result<String, JsError> {
    js(fit_series_json(counts))
}

#[wasm_bindgen(js_name = simulateCascades)]
pub fn simulate_cascades(config: &str) -> Result<String, JsError> {
    js(simulate_json(config))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn builtin_placement_round_trips_through_ranking() {
        let p = scenario_placement_json("I").unwrap();
        let out = parse(&rank_json(&format!("{{\"placement\": {p}}}")).unwrap());
        assert_eq!(out["ranking"][0]["method"], "F-I (7 Day)");
        assert!((out["ranking"][0]["min_dis"].as_f64().unwrap() - 0.1848).abs() < 1e-3);
        assert!((out["weights"]["rmse"].as_f64().unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn custom_scorecards_and_bad_requests() {
        let p = scenario_placement_json("iv").unwrap();
        let csv = "method,macro_f1,micro_f1,rmse,complexity,universality\nA,1,1,0,Low,High\nB,0,0,1,High,Low\n";
        let req = json!({ "placement": parse(&p), "scorecards": csv }).to_string();
        let out = parse(&rank_json(&req).unwrap());
        assert_eq!(out["ranking"][0]["method"], "A");
        assert_eq!(out["ranking"][1]["rank"], 2);
        assert!(rank_json("{\"placement\": {}}").is_err());
        assert!(scenario_placement_json("V").is_err());
    }

    #[test]
    fn linear_series_fits_exactly() {
        let out = parse(&fit_series_json("[1, 3, 5, 7, 9]").unwrap());
        assert_eq!(out["degree"], 3);
        for (i, v) in out["fitted"].as_array().unwrap().iter().enumerate() {
            assert!((v.as_f64().unwrap() - (1.0 + 2.0 * i as f64)).abs() < 1e-9);
        }
        assert!((out["features"]["slope_mean"].as_f64().unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(out["curve"].as_array().unwrap().len(), 4 * CURVE_SAMPLES + 1);
        assert!(fit_series_json("[]").is_err());
        assert!(fit_series_json("[-1]").is_err());
    }

    #[test]
    fn simulation_summarises_topics() {
        let out = parse(&simulate_json("{\"users\": 200, \"topics\": 10, \"seed\": 3}").unwrap());
        let topics = out["topics"].as_array().unwrap();
        assert_eq!(topics.len(), 10);
        assert_eq!(topics.iter().filter(|t| t["popular"] == true).count(), 2);
        assert_eq!(simulate_json("{\"users\": 200, \"topics\": 10, \"seed\": 3}").unwrap(), serde_json::to_string(&out).unwrap());
        assert!(simulate_json("{\"users\": 100000}").is_err());
        assert!(simulate_json("{\"usrs\": 10}").is_err());
    }
}
