use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const REFERENCE_CARDS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/reference_scorecards.csv");

fn popbench(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_popbench"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("run popbench")
}

fn ok(args: &[&str], cwd: &Path) -> String {
    let o = popbench(args, cwd);
    assert!(
        o.status.success(),
        "{args:?} failed: {}\n{}",
        String::from_utf8_lossy(&o.stdout),
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout).unwrap()
}

fn manifest(dir: &Path, command: &str) -> serde_json::Value {
    let text = fs::read_to_string(dir.join(format!("{command}.manifest.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn small_synth(cwd: &Path, out: &str, seed: &str) {
    ok(&["synth", "--seed", seed, "--users", "300", "--topics", "40", "--out", out], cwd);
}

#[test]
fn synth_twice_gives_identical_digests() {
    let d = tempfile::tempdir().unwrap();
    small_synth(d.path(), "a", "7");
    small_synth(d.path(), "b", "7");
    let digests = |dir: &str| -> Vec<String> {
        manifest(&d.path().join(dir), "synth")["outputs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|o| o["sha256"].as_str().unwrap().to_string())
            .collect()
    };
    assert_eq!(digests("a").len(), 3);
    assert_eq!(digests("a"), digests("b"));
    for f in ["messages.jsonl", "followers.tsv", "ledger.json"] {
        assert_eq!(fs::read(d.path().join("a").join(f)).unwrap(), fs::read(d.path().join("b").join(f)).unwrap());
    }
}

#[test]
fn rank_reproduces_reference_value() {
    let d = tempfile::tempdir().unwrap();
    let out = ok(&["rank", "--scenario", "I", "--scorecards", REFERENCE_CARDS, "--out", "r"], d.path());
    assert!(out.lines().nth(2).unwrap().contains("F-I (7 Day)"), "{out}");
    let csv = fs::read_to_string(d.path().join("r/ranking.csv")).unwrap();
    assert_eq!(csv.lines().count(), 8);
    let first: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&first[..3], ["I", "1", "F-I (7 Day)"]);
    let value: f64 = first[3].parse().unwrap();
    assert!((value - 0.1848).abs() < 1e-3, "{value}");
    assert!(d.path().join("r/rank.manifest.json").exists());
}

#[test]
fn scenario_file_is_accepted() {
    let d = tempfile::tempdir().unwrap();
    fs::write(
        d.path().join("rmse.toml"),
        "name = \"rmse-heavy\"\n[weights]\ncomplexity = 1\nuniversality = 1\nmacro_f1 = 1\nmicro_f1 = 1\nrmse = 4\n",
    )
    .unwrap();
    let out = ok(&["rank", "--scenario", "rmse.toml", "--scorecards", REFERENCE_CARDS, "--out", "r"], d.path());
    assert!(out.contains("R-III (7 Day)    0.5786"), "{out}");
}

#[test]
fn unknown_flag_is_an_input_error() {
    let d = tempfile::tempdir().unwrap();
    let o = popbench(&["rank", "--bogus"], d.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    let o = popbench(&["--help"], d.path());
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn missing_input_is_exit_one() {
    let d = tempfile::tempdir().unwrap();
    let o = popbench(&["train", "--features", "nope.csv", "--labels", "nope.csv", "--out", "m"], d.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn pipeline_and_schema_mismatch() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    small_synth(p, "s", "3");
    let corpus = ["--messages", "s/messages.jsonl", "--followers", "s/followers.tsv"];
    let with = |cmd: &str, extra: &[&str]| {
        let mut v = vec![cmd];
        v.extend(corpus);
        v.extend(extra);
        v.iter().map(|s| s.to_string()).collect::<Vec<_>>()
    };
    let run = |v: Vec<String>| ok(&v.iter().map(String::as_str).collect::<Vec<_>>(), p);
    run(with("ingest", &["--out", "i"]));
    run(with("features", &["--bucket", "1", "--out", "f"]));
    run(with("features", &["--bucket", "1", "--kind", "latent", "--out", "fl"]));
    ok(&["label", "--ledger", "s/ledger.json", "--out", "l"], p);
    ok(&["train", "--features", "f/features.csv", "--labels", "l/labels.csv", "--out", "m"], p);
    ok(&["eval", "--features", "f/features.csv", "--labels", "l/labels.csv", "--out", "e"], p);
    let metrics: serde_json::Value = serde_json::from_str(&fs::read_to_string(p.join("e/metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["rows"], 40);
    assert!(fs::read_to_string(p.join("e/predictions.csv")).unwrap().starts_with("topic,score,label,truth\n"));

    let o = popbench(
        &["eval", "--features", "fl/features.csv", "--labels", "l/labels.csv", "--model", "m/model.txt", "--out", "x"],
        p,
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("schema"));

    // Manifest digests describe the actual inputs.
    let m = manifest(&p.join("f"), "features");
    let input = &m["inputs"][0];
    assert_eq!(input["path"], "s/messages.jsonl");
    let bytes = fs::read(p.join("s/messages.jsonl")).unwrap();
    assert_eq!(input["sha256"], popbench::digest::sha256_hex(&bytes));
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    small_synth(p, "s", "5");
    ok(&["label", "--ledger", "s/ledger.json", "--out", "l"], p);
    for w in ["1", "3"] {
        let out = format!("f{w}");
        ok(
            &["--workers", w, "features", "--messages", "s/messages.jsonl", "--followers", "s/followers.tsv", "--bucket", "1", "--out", &out],
            p,
        );
        let ab = format!("a{w}");
        ok(&["--workers", w, "ablate", "--features", &format!("{out}/features.csv"), "--labels", "l/labels.csv", "--out", &ab], p);
    }
    assert_eq!(fs::read(p.join("f1/features.csv")).unwrap(), fs::read(p.join("f3/features.csv")).unwrap());
    assert_eq!(fs::read(p.join("a1/ablation.csv")).unwrap(), fs::read(p.join("a3/ablation.csv")).unwrap());
}

#[test]
fn flags_override_config_file() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    fs::write(p.join("run.toml"), "seed = 11\n[synth]\nusers = 250\ntopics = 30\n").unwrap();
    ok(&["--config", "run.toml", "synth", "--topics", "20", "--out", "s"], p);
    let ledger: serde_json::Value = serde_json::from_str(&fs::read_to_string(p.join("s/ledger.json")).unwrap()).unwrap();
    assert_eq!(ledger["config"]["users"], 250);
    assert_eq!(ledger["config"]["topics"], 20);
    assert_eq!(ledger["config"]["seed"], 11);
    ok(&["--config", "run.toml", "--seed", "12", "synth", "--out", "t"], p);
    assert_eq!(manifest(&p.join("t"), "synth")["seed"], 12);

    fs::write(p.join("bad.toml"), "[synth]\nusrs = 3\n").unwrap();
    let o = popbench(&["--config", "bad.toml", "synth", "--out", "u"], p);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn repro_tables_pass() {
    let d = tempfile::tempdir().unwrap();
    let out = ok(&["repro-tables", "--out", "rt"], d.path());
    assert!(out.contains("all golden values within"));
    assert!(d.path().join("rt/repro-tables.manifest.json").exists());
}
