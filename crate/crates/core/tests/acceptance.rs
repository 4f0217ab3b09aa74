//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use popbench::ablation::{ablation_report, AblationMode, AblationReport};
use popbench::features::network::{border_users, exposure_vector, network_features};
use popbench::features::pagerank::WeightedDigraph;
use popbench::features::{feature_matrix, pagerank, FeatureConfig, FeatureContext, FeatureMatrix, PageRankConfig};
use popbench::features::{SentimentLexicon, Wordlist};
use popbench::ingest::{parse_followers_path, parse_messages_path, ParseOptions};
use popbench::metrics::{micro_f1, rmse};
use popbench::model::{Dataset, FollowerGraph, Message, TopicSnapshot};
use popbench::predict::{cross_validate, latent_matrix, CvConfig, Learner, LogisticRegression};
use popbench::ranking::{min_dis, Scenario};
use popbench::reference;
use popbench::synth::{generate, GenerationLedger, SynthConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-3;
const E2E_SEED: u64 = 42;
const E2E_BUCKET: i64 = 1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let t = Instant::now();
    let mut o = f();
    let took = t.elapsed();
    if took > limit {
        o.pass = false;
    }
    o.detail = format!("{} [{:.2?}, limit {:?}]", o.detail, took, limit);
    o
}

fn golden_min_dis() -> Outcome {
    let cards = reference::scorecards();
    let mut worst = 0.0f64;
    let mut n = 0;
    for s in reference::SCENARIOS {
        let scenario = Scenario::builtin(s).expect("builtin scenario");
        for m in reference::GOLDEN_METHODS {
            let card = cards.iter().find(|c| c.method == m).expect("scorecard");
            let got = min_dis(card, &scenario.weights);
            let want = reference::published_min_dis(s, m).expect("published value");
            worst = worst.max((got - want).abs());
            n += 1;
        }
    }
    check(n == 12 && worst <= TOL, format!("{n} values, max |error| {worst:.2e} (tol {TOL:e})"))
}

fn weight_table() -> Outcome {
    let mut worst = 0.0f64;
    for (s, row) in reference::SCENARIOS.iter().zip(reference::WEIGHTS) {
        let w = Scenario::builtin(s).expect("builtin scenario").weights;
        let got = [w.complexity, w.universality, w.macro_f1, w.micro_f1, w.rmse];
        for (g, p) in got.iter().zip(row) {
            worst = worst.max((g - p).abs());
        }
    }
    check(worst <= TOL, format!("4 rows x 5 weights, max |error| {worst:.2e}"))
}

fn rmse_identity() -> Outcome {
    let cards = reference::scorecards();
    let mut worst = 0.0f64;
    for m in reference::HARD_PREDICTION_METHODS {
        let c = cards.iter().find(|c| c.method == m).expect("scorecard");
        worst = worst.max(((1.0 - c.micro_f1).sqrt() - c.rmse).abs());
    }
    // The identity itself, on random hard predictions.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut identity = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(1..60);
        let truth: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let pred: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let hard: Vec<f64> = pred.iter().map(|&p| f64::from(p)).collect();
        let r = rmse(&truth, &hard).unwrap();
        let mi = micro_f1(&truth, &pred).unwrap();
        identity = identity.max((r - (1.0 - mi).sqrt()).abs());
    }
    check(
        worst <= TOL && identity <= 1e-12,
        format!("published rows max |error| {worst:.2e}; random hard predictions {identity:.1e}"),
    )
}

fn snapshot_of(messages: &[Message]) -> TopicSnapshot<'_> {
    TopicSnapshot::from_messages("h", 0, messages.iter().collect())
}

fn dense_pagerank(n: usize, edges: &[(usize, usize, f64)], d: f64) -> Vec<f64> {
    let mut out = vec![0.0; n];
    let mut m = vec![vec![0.0; n]; n];
    for &(a, b, w) in edges {
        m[a][b] += w;
        out[a] += w;
    }
    let mut p = vec![1.0 / n as f64; n];
    for _ in 0..10_000 {
        let mut next = vec![(1.0 - d) / n as f64; n];
        for i in 0..n {
            if out[i] == 0.0 {
                for x in next.iter_mut() {
                    *x += d * p[i] / n as f64;
                }
            } else {
                for j in 0..n {
                    next[j] += d * p[i] * m[i][j] / out[i];
                }
            }
        }
        let delta: f64 = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
        p = next;
        if delta < 1e-15 {
            break;
        }
    }
    p
}

fn feature_oracles() -> Outcome {
    let mut failures = Vec::new();

    let k3 = [
        Message::new("1", "a", 0).with_mentions(["b"]),
        Message::new("2", "b", 0).with_mentions(["c"]),
        Message::new("3", "c", 0).with_mentions(["a"]),
    ];
    let f = network_features(&snapshot_of(&k3), &FollowerGraph::new());
    let got = [f.mean_degree, f.density, f.order, f.degree_entropy, f.component_fraction, f.mean_edge_weight, f.triangle_fraction];
    if got != [2.0, 1.0, 3.0, 0.0, 1.0 / 3.0, 1.0, 0.5] {
        failures.push(format!("K3 {got:?}"));
    }

    let p3 = [
        Message::new("1", "a", 0).with_mentions(["b"]),
        Message::new("2", "b", 0).with_mentions(["c"]),
        Message::new("3", "c", 0),
    ];
    let f = network_features(&snapshot_of(&p3), &FollowerGraph::new());
    let entropy = -(2.0 / 3.0 * (2.0f64 / 3.0).ln() + 1.0 / 3.0 * (1.0f64 / 3.0).ln());
    if f.mean_degree != 4.0 / 3.0
        || f.density != 2.0 / 3.0
        || f.triangle_fraction != 0.0
        || (f.degree_entropy - entropy).abs() > 1e-15
        || (f.degree_entropy - 0.6365).abs() > 1e-4
    {
        failures.push(format!("P3 {f:?}"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for g in 0..1000 {
        let n = rng.random_range(2..25);
        let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let mut fg = FollowerGraph::new();
        let p = rng.random::<f64>();
        for a in &names {
            for b in &names {
                if rng.random::<f64>() < p {
                    fg.insert(a, b);
                }
            }
        }
        let members: BTreeSet<&str> = names.iter().map(String::as_str).filter(|_| rng.random::<f64>() < 0.4).collect();
        let border = border_users(&members, &fg);
        let total: f64 = exposure_vector(&border).iter().sum();
        if total != border.len() as f64 {
            failures.push(format!("graph {g}: sum exposure {total} != border {}", border.len()));
            break;
        }
    }

    let mut worst_sum = 0.0f64;
    let mut worst_oracle = 0.0f64;
    for _ in 0..100 {
        let n = 20;
        let mut g = WeightedDigraph::new(n);
        let mut edges = Vec::new();
        let p = rng.random_range(0.02..0.4);
        for a in 0..n {
            for b in 0..n {
                if a != b && rng.random::<f64>() < p {
                    let w = rng.random_range(1..4) as f64;
                    g.add_edge(a, b, w);
                    edges.push((a, b, w));
                }
            }
        }
        let pr = pagerank(&g, &PageRankConfig::default());
        worst_sum = worst_sum.max((pr.iter().sum::<f64>() - 1.0).abs());
        let oracle = dense_pagerank(n, &edges, 0.85);
        for (a, b) in pr.iter().zip(&oracle) {
            worst_oracle = worst_oracle.max((a - b).abs());
        }
    }
    if worst_sum > 1e-9 || worst_oracle > 1e-8 {
        failures.push(format!("pagerank sum err {worst_sum:.1e}, oracle err {worst_oracle:.1e}"));
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            format!("K3, P3 exact; 1000 exposure graphs; pagerank sum err {worst_sum:.1e}, oracle err {worst_oracle:.1e}")
        } else {
            failures.join("; ")
        },
    )
}

/// Everything one full synthetic run produces, serialized.
struct Run {
    ledger: GenerationLedger,
    matrix: FeatureMatrix,
    labels: Vec<u8>,
    series_ok: bool,
    feature_macro: f64,
    latent_macro: f64,
    matrix_csv: Vec<u8>,
    model_text: Vec<u8>,
    report: String,
}

fn synth_config() -> SynthConfig {
    SynthConfig {
        users: 2000,
        topics: 300,
        high_infectivity: 0.4,
        low_infectivity: 0.05,
        seed: E2E_SEED,
        ..SynthConfig::default()
    }
}

fn full_run() -> Run {
    let cfg = synth_config();
    let corpus = generate(&cfg).expect("valid synth config");
    let dir = tempfile::tempdir().expect("temp dir");
    corpus.write_dir(dir.path()).expect("write corpus");
    let (messages, _) = parse_messages_path(&dir.path().join("messages.jsonl"), &ParseOptions::default()).expect("ingest");
    let (followers, _) = parse_followers_path(&dir.path().join("followers.tsv")).expect("followers");
    let ds = Dataset::new(messages, followers, None).expect("dataset");
    let ledger = corpus.ledger;

    let last = cfg.buckets as i64 - 1;
    let series_ok = ledger.topics.iter().all(|t| ds.topic_series(&t.tag, 0..=last).map(|s| s.counts == t.counts).unwrap_or(false));

    let tags: Vec<String> = ledger.topics.iter().map(|t| t.tag.clone()).collect();
    let labels: Vec<u8> = ledger.topics.iter().map(|t| u8::from(t.popular)).collect();
    let ctx = FeatureContext::build(&ds, FeatureConfig::default(), SentimentLexicon::builtin(), Wordlist::default()).expect("context");
    let matrix = feature_matrix(&ctx, &tags, E2E_BUCKET);
    assert!(matrix.diagnostics.is_empty(), "{:?}", matrix.diagnostics);

    let learner = LogisticRegression::default();
    let cv = CvConfig { seed: E2E_SEED, ..CvConfig::default() };
    let feat = cross_validate(&learner, &matrix.values(), &labels, &cv).expect("feature cv");
    let series: Vec<_> = tags.iter().map(|t| ds.topic_series(t, 0..=E2E_BUCKET).unwrap()).collect();
    let latent = latent_matrix(&series, 0, E2E_BUCKET).expect("latent matrix");
    let lat = cross_validate(&learner, &latent.values(), &labels, &cv).expect("latent cv");

    let mut matrix_csv = Vec::new();
    matrix.write_csv(&mut matrix_csv).unwrap();
    let mut model_text = Vec::new();
    learner
        .fit(&matrix.values(), &labels)
        .unwrap()
        .with_schema_hash(matrix.schema_hash())
        .write_text(&mut model_text)
        .unwrap();
    let report = format!("{:?}\n{:?}\n{:?}\n{:?}", feat.evaluation, feat.scores, lat.evaluation, lat.scores);
    Run {
        ledger,
        labels,
        series_ok,
        feature_macro: feat.evaluation.macro_f1,
        latent_macro: lat.evaluation.macro_f1,
        matrix,
        matrix_csv,
        model_text,
        report,
    }
}

fn end_to_end(run: &Run) -> Outcome {
    let popular = run.labels.iter().filter(|&&y| y == 1).count();
    check(
        run.series_ok && run.feature_macro >= 0.85 && run.latent_macro >= 0.7,
        format!(
            "{} topics ({popular} planted popular), {} messages; feature macro-F1 {:.4} (>= 0.85), latent macro-F1 {:.4} (>= 0.7), series == ledger: {}",
            run.labels.len(),
            run.ledger.messages.len(),
            run.feature_macro,
            run.latent_macro,
            run.series_ok
        ),
    )
}

fn ablation_on(matrix: &FeatureMatrix, labels: &[u8], threads: usize) -> AblationReport {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let cv = CvConfig { seed: E2E_SEED, ..CvConfig::default() };
    pool.install(|| ablation_report(&LogisticRegression::default(), matrix, labels, &cv, AblationMode::PerDimension)).unwrap()
}

fn ablation(run: &Run) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let planted: Vec<f64> = run.labels.iter().map(|&y| f64::from(y) + 0.2 * (rng.random::<f64>() - 0.5)).collect();
    let zeros = vec![0.0; run.labels.len()];
    let m = run.matrix.with_column("planted_signal", &planted).unwrap().with_column("zero_injected", &zeros).unwrap();
    let a = ablation_on(&m, &run.labels, 1);
    let b = ablation_on(&m, &run.labels, 4);
    let c = ablation_on(&m, &run.labels, 4);
    let rc = |r: &AblationReport, u: &str| r.entries.iter().find(|e| e.unit == u).map(|e| e.rc).unwrap();
    let zero = rc(&a, "zero_injected");
    let signal = rc(&a, "planted_signal");
    check(
        zero == 0.0 && zero.is_sign_positive() && signal > 0.0 && a == b && b == c,
        format!(
            "RC(zero) = {zero}, RC(planted) = {signal:.3}, identical across reruns and 1/4 workers: {}",
            a == b && b == c
        ),
    )
}

fn determinism(first: &Run) -> Outcome {
    let second = full_run();
    let same_matrix = first.matrix_csv == second.matrix_csv;
    let same_model = first.model_text == second.model_text;
    let same_report = first.report == second.report;
    check(
        same_matrix && same_model && same_report,
        format!("feature matrix {same_matrix}, model {same_model}, report {same_report}"),
    )
}

fn main() {
    // Under `cargo test -- --list` etc. only report the target.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut push = |n, name, o| {
        let o: Outcome = o;
        println!("criterion {n} [{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, name, o));
    };
    push(1, "MinDis golden reproduction", timed(Duration::from_secs(1), golden_min_dis));
    push(2, "weight table reproduction", timed(Duration::from_secs(1), weight_table));
    push(3, "rmse = sqrt(1 - micro F1)", timed(Duration::from_secs(1), rmse_identity));
    push(4, "feature oracles", timed(Duration::from_secs(10), feature_oracles));
    let mut run = None;
    push(
        5,
        "end-to-end synthetic run",
        timed(Duration::from_secs(120), || {
            let r = full_run();
            let o = end_to_end(&r);
            run = Some(r);
            o
        }),
    );
    let run = run.expect("run");
    push(6, "ablation properties", ablation(&run));
    push(7, "bit-identical reruns", determinism(&run));
    let failed = results.iter().filter(|(_, _, o)| !o.pass).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
