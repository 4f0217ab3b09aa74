use std::collections::BTreeMap;

use popbench::features::pagerank::WeightedDigraph;
use popbench::features::{feature_matrix, pagerank, FeatureConfig, FeatureContext, FeatureSchema, PageRankConfig};
use popbench::features::{SentimentLexicon, ValueKind, Wordlist};
use popbench::metrics::{macro_f1, micro_f1, MethodScorecard};
use popbench::model::{Dataset, FollowerGraph, Message};
use popbench::predict::{label_topics, LabelingPolicy};
use popbench::ranking::{min_dis, Level, Scenario};
use proptest::prelude::*;

fn level() -> impl Strategy<Value = Level> {
    prop_oneof![Just(Level::Low), Just(Level::Medium), Just(Level::High)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pagerank_is_a_distribution_invariant_under_relabeling(
        n in 1usize..12,
        raw in prop::collection::vec((0usize..12, 0usize..12, 1u32..4), 0..40),
        shift in 0usize..12,
    ) {
        let edges: Vec<(usize, usize, f64)> = raw.into_iter().map(|(a, b, w)| (a % n, b % n, f64::from(w))).collect();
        let mut g = WeightedDigraph::new(n);
        let mut h = WeightedDigraph::new(n);
        let perm = |i: usize| (i + shift) % n;
        for &(a, b, w) in &edges {
            g.add_edge(a, b, w);
            h.add_edge(perm(a), perm(b), w);
        }
        let cfg = PageRankConfig::default();
        let p = pagerank(&g, &cfg);
        let q = pagerank(&h, &cfg);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for i in 0..n {
            prop_assert!((p[i] - q[perm(i)]).abs() < 1e-8);
        }
    }

    #[test]
    fn f1_scores_are_bounded(pairs in prop::collection::vec((0u8..2, 0u8..2), 1..80)) {
        let (t, p): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
        let ma = macro_f1(&t, &p).unwrap();
        let mi = micro_f1(&t, &p).unwrap();
        prop_assert!((0.0..=1.0).contains(&ma));
        prop_assert!((0.0..=1.0).contains(&mi));
        if t == p {
            prop_assert_eq!(mi, 1.0);
        }
    }

    #[test]
    fn min_dis_is_non_negative_and_monotone_in_rmse(
        a in 0.0f64..=1.0, b in 0.0f64..=1.0, r in 0.0f64..0.9, c in level(), u in level(),
    ) {
        for s in Scenario::builtins() {
            let lo = MethodScorecard::new("x", a, b, r, c, u).unwrap();
            let hi = MethodScorecard::new("x", a, b, r + 0.1, c, u).unwrap();
            prop_assert!(min_dis(&lo, &s.weights) >= 0.0);
            prop_assert!(min_dis(&hi, &s.weights) > min_dis(&lo, &s.weights));
        }
    }

    #[test]
    fn quantile_labels_mark_at_least_the_top(counts in prop::collection::vec(0u64..50, 1..40), q in 0.0f64..1.0) {
        let series: BTreeMap<String, popbench::model::TimeSeries> = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let topic = format!("t{i:02}");
                (topic.clone(), popbench::model::TimeSeries { topic, start_bucket: 0, counts: vec![c] })
            })
            .collect();
        let labels = label_topics(&series, LabelingPolicy::Quantile { q }, 0).unwrap();
        let max = *counts.iter().max().unwrap();
        for (i, &c) in counts.iter().enumerate() {
            if c == max {
                prop_assert_eq!(labels.labels[&format!("t{i:02}")], 1);
            }
        }
    }
}

fn random_dataset(seed: u64) -> (Dataset, Vec<String>) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let tags = ["alpha", "beta", "gamma10"];
    let words = ["good", "bad", "sooo", "coool", "rain", "sun", "!!!", ":)"];
    let mut messages = Vec::new();
    let mut fg = FollowerGraph::new();
    for i in 0..150 {
        let u = format!("u{}", rng.random_range(0..25));
        let mut m = Message::new(format!("m{i}"), u.clone(), rng.random_range(0..5 * 86_400));
        let text: Vec<&str> = (0..4).map(|_| words[rng.random_range(0..words.len())]).collect();
        m = m.with_text(text.join(" "));
        let n_tags = rng.random_range(0..3);
        m = m.with_hashtags((0..n_tags).map(|_| tags[rng.random_range(0..tags.len())]));
        if rng.random::<f64>() < 0.5 {
            m = m.with_mentions([format!("u{}", rng.random_range(0..25))]);
        }
        if rng.random::<f64>() < 0.3 {
            m = m.with_retweet_of("m0").with_urls(1);
        }
        messages.push(m);
        fg.insert(&format!("u{}", rng.random_range(0..30)), &u);
    }
    (Dataset::new(messages, fg, None).unwrap(), tags.iter().map(|s| s.to_string()).collect())
}

#[test]
fn typed_columns_respect_their_ranges_and_reruns_agree() {
    let schema = FeatureSchema::standard();
    for seed in 0..5 {
        let (ds, tags) = random_dataset(seed);
        let mut cfg = FeatureConfig::default();
        cfg.lda.iterations = 20;
        let build = || FeatureContext::build(&ds, cfg.clone(), SentimentLexicon::builtin(), Wordlist::default()).unwrap();
        let ctx = build();
        for bucket in 0..5 {
            let m = feature_matrix(&ctx, &tags, bucket);
            assert!(m.diagnostics.is_empty());
            assert_eq!(m.n_cols(), 68);
            for row in &m.rows {
                for (d, &v) in schema.dims().iter().zip(&row.values) {
                    assert!(v.is_finite());
                    match d.kind {
                        ValueKind::Fraction => assert!((0.0..=1.0).contains(&v), "{} = {v}", d.name),
                        ValueKind::Count => assert!(v >= 0.0, "{} = {v}", d.name),
                        ValueKind::Real => {}
                    }
                }
                let tf = row.values[schema.index_of("fn9").unwrap()];
                assert!((0.0..=0.5).contains(&tf));
                let lda: f64 = schema.columns_of("fc4").iter().map(|&j| row.values[j]).sum();
                assert!((lda - 1.0).abs() < 1e-9);
                let border = row.values[schema.index_of("fn5").unwrap()];
                let exposure: f64 = schema.columns_of("fn6").iter().map(|&j| row.values[j]).sum();
                assert_eq!(border, exposure);
            }
            let again = feature_matrix(&build(), &tags, bucket);
            assert_eq!(again, m);
        }
    }
}
