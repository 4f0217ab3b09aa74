use popbench::features::meme_features;
use popbench::ingest::{parse_followers, parse_messages, ParseOptions};
use popbench::model::Dataset;
use popbench::synth::{generate, Cause, SynthConfig};

fn dataset(cfg: &SynthConfig) -> (Dataset, popbench::synth::GenerationLedger) {
    let corpus = generate(cfg).unwrap();
    let (mut msgs, mut fol) = (Vec::new(), Vec::new());
    corpus.write_messages(&mut msgs).unwrap();
    corpus.write_followers(&mut fol).unwrap();
    let (messages, report) = parse_messages(msgs.as_slice(), &ParseOptions::default()).unwrap();
    assert_eq!(report.messages_rejected, 0);
    let (followers, freport) = parse_followers(fol.as_slice()).unwrap();
    assert_eq!(freport.edges, corpus.follows.len());
    (Dataset::new(messages, followers, None).unwrap(), corpus.ledger)
}

fn small() -> SynthConfig {
    SynthConfig {
        users: 300,
        topics: 30,
        seed: 5,
        ..SynthConfig::default()
    }
}

#[test]
fn interaction_weights_equal_ledger_mentions() {
    let (ds, ledger) = dataset(&small());
    let g = ds.interactions();
    let mut total = 0u64;
    for m in &ledger.mentions {
        assert_eq!(g.weight(&m.target, &m.actor), m.count, "{} <- {}", m.target, m.actor);
        total += u64::from(m.count);
    }
    assert_eq!(g.edges.values().map(|&w| u64::from(w)).sum::<u64>(), total);
}

#[test]
fn popularity_series_equal_ledger() {
    let cfg = small();
    let (ds, ledger) = dataset(&cfg);
    for t in &ledger.topics {
        let s = ds.topic_series(&t.tag, 0..=cfg.buckets as i64 - 1).unwrap();
        assert_eq!(s.counts, t.counts, "{}", t.tag);
    }
}

#[test]
fn meme_counts_equal_ledger() {
    let cfg = small();
    let (ds, ledger) = dataset(&cfg);
    for t in &ledger.topics {
        for b in 0..cfg.buckets {
            let snap = ds.topic_snapshot(&t.tag, b as i64);
            let f = meme_features(&snap, &ds.active_users(b as i64));
            let cascades = ledger
                .messages
                .iter()
                .filter(|p| p.bucket == b && p.topic.as_deref() == Some(t.tag.as_str()))
                .filter(|p| matches!(p.cause, Cause::Cascade { .. }))
                .count();
            assert_eq!(f.messages, t.counts[b] as f64);
            assert_eq!(f.users, t.counts[b] as f64);
            assert_eq!(f.retweets, cascades as f64);
            assert_eq!(f.mentions, cascades as f64);
        }
    }
}

#[test]
fn hundred_generated_messages_make_a_snapshot_of_hundred() {
    let cfg = SynthConfig {
        users: 200,
        topics: 1,
        seeds_per_topic: 100,
        high_infectivity: 0.0,
        low_infectivity: 0.0,
        background_rate: 0.0,
        seed: 1,
        ..SynthConfig::default()
    };
    let (ds, ledger) = dataset(&cfg);
    let snap = ds.topic_snapshot(&ledger.topics[0].tag, 0);
    assert_eq!(snap.popularity(), 100);
    assert_eq!(snap.messages.len(), 100);
}
