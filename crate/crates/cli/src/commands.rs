use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use popbench::ablation::{ablation_report, AblationMode};
use popbench::features::{feature_matrix, FeatureContext, FeatureManifest, FeatureMatrix, SentimentLexicon, Wordlist};
use popbench::ingest::{extract_topics, parse_followers_path, parse_message_shards, ParseOptions};
use popbench::metrics::{evaluate, read_scorecards, write_scorecards, MethodScorecard};
use popbench::model::{Dataset, FollowerGraph, TimeBucketing, TimeSeries};
use popbench::predict::cv::cross_validate;
use popbench::predict::labeling::{read_labels, write_labels};
use popbench::predict::latent::latent_matrix;
use popbench::predict::{denoise_ts, label_topics, predict, Learner, LinearModel, LogisticRegression};
use popbench::ranking::{rank, write_ranking_csv, Level, RankingTable, Scenario};
use popbench::reference;
use popbench::synth::{generate, read_ledger, FOLLOWERS_FILE, LEDGER_FILE, MESSAGES_FILE};

use crate::args::*;
use crate::config::RunConfig;
use crate::manifest::{now, FileDigest, RunManifest};
use crate::Invariant;

/// Bookkeeping for one invocation: resolved config, digested inputs and
/// outputs, and the manifest written at the end.
pub struct Run {
    command: &'static str,
    out: PathBuf,
    pub config: RunConfig,
    inputs: Vec<FileDigest>,
    outputs: Vec<PathBuf>,
    started: f64,
}

impl Run {
    pub fn new(command: &'static str, out: &Path, config: RunConfig) -> Result<Self> {
        fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        Ok(Self {
            command,
            out: out.to_path_buf(),
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            started: now(),
        })
    }

    fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(FileDigest::of(path)?);
        Ok(())
    }

    fn output_path(&mut self, name: &str) -> PathBuf {
        let p = self.out.join(name);
        self.outputs.push(p.clone());
        p
    }

    /// Creates `name` in the output directory and hands a writer to `f`.
    fn write<F>(&mut self, name: &str, f: F) -> Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<()>,
    {
        let path = self.output_path(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        f(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn finish(self) -> Result<()> {
        let outputs = self.outputs.iter().map(|p| FileDigest::of(p)).collect::<Result<Vec<_>>>()?;
        let manifest = RunManifest {
            command: self.command.to_string(),
            argv: std::env::args().collect(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: self.config.seed(),
            workers: rayon::current_num_threads(),
            config: serde_json::to_value(&self.config)?,
            inputs: self.inputs,
            outputs,
            started_at: self.started,
            finished_at: now(),
        };
        manifest.write(&self.out)?;
        Ok(())
    }
}

fn load_dataset(run: &mut Run, corpus: &CorpusArgs) -> Result<Dataset> {
    for p in &corpus.messages {
        run.input(p)?;
    }
    let opts = ParseOptions {
        languages: corpus.lang.as_ref().map(|l| l.split(',').map(|s| s.trim().to_string()).collect()),
    };
    let (messages, report) = parse_message_shards(&corpus.messages, &opts)?;
    if report.messages_rejected > 0 {
        eprintln!("skipped {} malformed or filtered lines: {:?}", report.messages_rejected, report.reject_reasons);
    }
    if messages.is_empty() {
        bail!("no valid messages in input");
    }
    let followers = match &corpus.followers {
        Some(p) => {
            run.input(p)?;
            parse_followers_path(p)?.0
        }
        None => FollowerGraph::new(),
    };
    let bucketing = match corpus.period {
        Some(period) => Some(TimeBucketing::new(TimeBucketing::daily_from(&messages).origin, period)?),
        None => None,
    };
    Ok(Dataset::new(messages, followers, bucketing)?)
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(String::from).collect())
}

fn candidate_topics(run: &mut Run, ds: &Dataset, topics: Option<&Path>) -> Result<Vec<String>> {
    match topics {
        Some(p) => {
            run.input(p)?;
            let t = read_lines(p)?;
            if t.is_empty() {
                bail!("topic list {} is empty", p.display());
            }
            Ok(t.into_iter().map(|s| s.trim_start_matches('#').to_lowercase()).collect())
        }
        None => Ok(extract_topics(ds.messages(), run.config.topics.min_count)?),
    }
}

fn all_series(ds: &Dataset, topics: &[String]) -> Result<BTreeMap<String, TimeSeries>> {
    let first = ds.buckets().next().unwrap_or(0);
    let last = ds.buckets().last().unwrap_or(0);
    topics.iter().map(|t| Ok((t.clone(), ds.topic_series(t, first..=last)?))).collect()
}

fn maybe_denoise(run: &Run, ds: &Dataset, topics: Vec<String>, bucket: i64, force: bool) -> Result<Vec<String>> {
    let d = &run.config.denoise;
    if !(force || d.enabled) {
        return Ok(topics);
    }
    let series = all_series(ds, &topics)?;
    let kept = denoise_ts(&topics, &series, bucket, d.window, d.min_active, d.min_count)?;
    eprintln!("denoising kept {} of {} topics", kept.len(), topics.len());
    Ok(kept)
}

pub fn ingest(args: &IngestArgs, config: RunConfig) -> Result<()> {
    let mut run = Run::new("ingest", &args.out, config)?;
    for p in &args.corpus.messages {
        run.input(p)?;
    }
    let opts = ParseOptions {
        languages: args.corpus.lang.as_ref().map(|l| l.split(',').map(|s| s.trim().to_string()).collect()),
    };
    let (messages, report) = parse_message_shards(&args.corpus.messages, &opts)?;
    let follower_report = match &args.corpus.followers {
        Some(p) => {
            run.input(p)?;
            Some(parse_followers_path(p)?.1)
        }
        None => None,
    };
    let min = args.min_topic_count.unwrap_or(run.config.topics.min_count);
    let topics = extract_topics(&messages, min)?;
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for m in &messages {
        for h in &m.hashtags {
            *counts.entry(h.as_str()).or_insert(0) += 1;
        }
    }
    run.write(MESSAGES_FILE, |w| {
        for m in &messages {
            serde_json::to_writer(&mut *w, m)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })?;
    run.write("topics.csv", |w| {
        writeln!(w, "topic,messages")?;
        for t in &topics {
            writeln!(w, "{t},{}", counts[t.as_str()])?;
        }
        Ok(())
    })?;
    let summary = serde_json::json!({ "messages": report, "followers": follower_report });
    run.write("ingest_report.json", |w| {
        serde_json::to_writer_pretty(&mut *w, &summary)?;
        w.write_all(b"\n")?;
        Ok(())
    })?;
    println!(
        "{} messages accepted, {} rejected, {} users, {} topics (>= {min} messages), hashtag fraction {:.4}",
        report.messages_ok,
        report.messages_rejected,
        report.users,
        topics.len(),
        report.hashtag_fraction
    );
    run.finish()
}

pub fn features(args: &FeaturesArgs, config: RunConfig) -> Result<()> {
    let mut run = Run::new("features", &args.out, config)?;
    let ds = load_dataset(&mut run, &args.corpus)?;
    let topics = candidate_topics(&mut run, &ds, args.topics.as_deref())?;
    let topics = maybe_denoise(&run, &ds, topics, args.bucket, args.denoise)?;
    if topics.is_empty() {
        bail!("no candidate topics");
    }
    match args.kind {
        FeatureKind::Full => {
            for f in &args.disable {
                run.config.features.disabled.push(f.clone());
            }
            let ctx = FeatureContext::build(
                &ds,
                run.config.features.clone(),
                SentimentLexicon::builtin(),
                Wordlist::default(),
            )?;
            let matrix = feature_matrix(&ctx, &topics, args.bucket);
            for d in &matrix.diagnostics {
                eprintln!("row skipped: {d}");
            }
            let meta = FeatureManifest::new(&ctx, &matrix, args.bucket);
            run.write("features.csv", |w| Ok(matrix.write_csv(w)?))?;
            run.write("features.meta.json", |w| Ok(serde_json::to_writer_pretty(w, &meta)?))?;
            println!("{} rows x {} columns, schema {}", matrix.n_rows(), matrix.n_cols(), &meta.schema_hash[..12]);
        }
        FeatureKind::Latent => {
            let first = match args.history {
                Some(0) => bail!("--history must be at least 1"),
                Some(h) => args.bucket - h as i64 + 1,
                None => ds.buckets().next().unwrap_or(args.bucket).min(args.bucket),
            };
            let series: Vec<TimeSeries> = topics
                .iter()
                .map(|t| ds.topic_series(t, first..=args.bucket))
                .collect::<popbench::Result<_>>()?;
            let matrix = latent_matrix(&series, first, args.bucket)?;
            let meta = serde_json::json!({
                "schema_hash": matrix.schema_hash(),
                "kind": "latent",
                "first_bucket": first,
                "bucket": args.bucket,
                "rows": matrix.n_rows(),
                "dataset_digest": ds.digest(),
            });
            run.write("features.csv", |w| Ok(matrix.write_csv(w)?))?;
            run.write("features.meta.json", |w| Ok(serde_json::to_writer_pretty(w, &meta)?))?;
            println!("{} rows x {} latent columns over buckets {first}..={}", matrix.n_rows(), matrix.n_cols(), args.bucket);
        }
    }
    run.finish()
}

pub fn label(args: &LabelArgs, config: RunConfig) -> Result<()> {
    let mut run = Run::new("label", &args.out, config)?;
    let labels = if let Some(ledger) = &args.ledger {
        run.input(ledger)?;
        read_ledger(ledger)?.labels()
    } else {
        let corpus = args.corpus.as_ref().context("label needs --messages or --ledger")?;
        let bucket = args.bucket.context("label needs --bucket with --messages")?;
        let ds = load_dataset(&mut run, corpus)?;
        let topics = candidate_topics(&mut run, &ds, args.topics.as_deref())?;
        let topics = maybe_denoise(&run, &ds, topics, bucket, args.denoise)?;
        if let Some(p) = &args.policy {
            run.config.labeling.policy = p.parse()?;
        }
        let series = all_series(&ds, &topics)?;
        let l = label_topics(&series, run.config.labeling.policy, bucket + 1)?;
        for d in &l.diagnostics {
            eprintln!("excluded {d}");
        }
        l.labels
    };
    if labels.is_empty() {
        bail!("no topics could be labeled");
    }
    let positives = labels.values().filter(|&&l| l == 1).count();
    run.write("labels.csv", |w| Ok(write_labels(&labels, w)?))?;
    println!("{} topics labeled, {positives} popular", labels.len());
    run.finish()
}

fn read_matrix(run: &mut Run, path: &Path) -> Result<FeatureMatrix> {
    run.input(path)?;
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    FeatureMatrix::read_csv(BufReader::new(f)).with_context(|| format!("reading features {}", path.display()))
}

/// Rows of the matrix that have a label, with the labels in row order.
fn join_labels(run: &mut Run, matrix: &FeatureMatrix, path: &Path) -> Result<(Vec<usize>, Vec<u8>)> {
    run.input(path)?;
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let labels = read_labels(BufReader::new(f))?;
    let mut idx = Vec::new();
    let mut y = Vec::new();
    let mut missing = 0;
    for (i, r) in matrix.rows.iter().enumerate() {
        match labels.get(&r.topic) {
            Some(&l) => {
                idx.push(i);
                y.push(l);
            }
            None => missing += 1,
        }
    }
    if missing > 0 {
        eprintln!("{missing} feature rows have no label and are ignored");
    }
    if idx.is_empty() {
        bail!("no feature row has a label");
    }
    Ok((idx, y))
}

pub fn train(args: &TrainArgs, config: RunConfig) -> Result<()> {
    let mut run = Run::new("train", &args.out, config)?;
    let matrix = read_matrix(&mut run, &args.features)?;
    let (idx, y) = join_labels(&mut run, &matrix, &args.labels)?;
    let all = matrix.values();
    let rows: Vec<&[f64]> = idx.iter().map(|&i| all[i]).collect();
    let model = LogisticRegression::new(run.config.learner).fit(&rows, &y)?;
    let model = model.with_schema_hash(matrix.schema_hash());
    if model.weights.iter().any(|w| !w.is_finite()) || !model.bias.is_finite() {
        return Err(Invariant("training produced non-finite weights".into()).into());
    }
    let (pred, _) = predict(&model, &rows, 0.5)?;
    let acc = pred.iter().zip(&y).filter(|(a, b)| a == b).count() as f64 / y.len() as f64;
    run.write("model.txt", |w| Ok(model.write_text(w)?))?;
    println!("trained on {} rows x {} columns, training accuracy {acc:.4}", rows.len(), matrix.n_cols());
    run.finish()
}

pub fn eval(args: &EvalArgs, config: RunConfig) -> Result<()> {
    let mut run = Run::new("eval", &args.out, config)?;
    run.config.set_rmse(args.rmse_on_scores);
    if let Some(k) = args.folds {
        run.config.cv.k = k;
    }
    let matrix = read_matrix(&mut run, &args.features)?;
    let (idx, y) = join_labels(&mut run, &matrix, &args.labels)?;
    let all = matrix.values();
    let rows: Vec<&[f64]> = idx.iter().map(|&i| all[i]).collect();
    let threshold = run.config.cv.threshold;
    let (mode, pred, scores) = match &args.model {
        Some(path) => {
            run.input(path)?;
            let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let model = LinearModel::read_text(BufReader::new(f))?;
            model.check_schema(&matrix.schema_hash())?;
            let (p, s) = predict(&model, &rows, threshold)?;
            ("model", p, s)
        }
        None => {
            let r = cross_validate(&LogisticRegression::new(run.config.learner), &rows, &y, &run.config.cv)?;
            ("cross_validation", r.predicted, r.scores)
        }
    };
    let e = evaluate(&y, &pred, &scores, run.config.cv.rmse_on)?;
    let complexity: Level = args.complexity.parse()?;
    let universality: Level = args.universality.parse()?;
    let card = MethodScorecard::from_evaluation(args.method.clone(), &e, complexity, universality)?;
    run.write("predictions.csv", |w| {
        writeln!(w, "topic,score,label,truth")?;
        for (k, &i) in idx.iter().enumerate() {
            writeln!(w, "{},{:?},{},{}", matrix.rows[i].topic, scores[k], pred[k], y[k])?;
        }
        Ok(())
    })?;
    let report = serde_json::json!({
        "mode": mode,
        "rows": y.len(),
        "positives": y.iter().filter(|&&l| l == 1).count(),
        "precision": e.precision,
        "recall": e.recall,
        "macro_f1": e.macro_f1,
        "micro_f1": e.micro_f1,
        "rmse": e.rmse,
        "rmse_on": run.config.cv.rmse_on,
    });
    run.write("metrics.json", |w| Ok(serde_json::to_writer_pretty(w, &report)?))?;
    run.write("scorecard.csv", |w| Ok(write_scorecards(&[card], w)?))?;
    println!(
        "{mode}: precision {:.4} recall {:.4} macro-F1 {:.4} micro-F1 {:.4} rmse {:.4}",
        e.precision, e.recall, e.macro_f1, e.micro_f1, e.rmse
    );
    run.finish()
}

fn scenario(run: &mut Run, spec: &str) -> Result<Scenario> {
    if let Some(s) = Scenario::builtin(spec) {
        return Ok(s);
    }
    let path = Path::new(spec);
    if !path.exists() {
        bail!("unknown scenario {spec:?}: not a builtin (I, II, III, IV) and no such file");
    }
    run.input(path)?;
    let text = fs::read_to_string(path)?;
    Ok(Scenario::from_toml(&text)?)
}

pub fn rank_cmd(args: &RankArgs, config: RunConfig) -> Result<()> {
    let mut run = Run::new("rank", &args.out, config)?;
    run.input(&args.scorecards)?;
    let cards = read_scorecards(File::open(&args.scorecards)?)?;
    if cards.is_empty() {
        bail!("no scorecards in {}", args.scorecards.display());
    }
    let mut csv = Vec::new();
    let mut text = String::new();
    for (n, spec) in args.scenario.iter().enumerate() {
        let s = scenario(&mut run, spec)?;
        let ranked = rank(&cards, &s);
        let mut buf = Vec::new();
        write_ranking_csv(&s.name, &ranked, &mut buf)?;
        // One header for the concatenated CSV.
        let body = String::from_utf8(buf)?;
        if n == 0 {
            csv.extend(body.as_bytes());
        } else {
            csv.extend(body.split_once('\n').map_or("", |x| x.1).as_bytes());
        }
        text.push_str(&RankingTable { scenario: &s.name, rows: &ranked }.to_string());
        text.push('\n');
    }
    print!("{text}");
    run.write("ranking.csv", |w| Ok(w.write_all(&csv)?))?;
    run.write("ranking.txt", |w| Ok(w.write_all(text.as_bytes())?))?;
    run.finish()
}

pub fn ablate(args: &AblateArgs, config: RunConfig) -> Result<()> {
    let mut run = Run::new("ablate", &args.out, config)?;
    let mode: AblationMode = args.mode.parse()?;
    let matrix = read_matrix(&mut run, &args.features)?;
    let (idx, y) = join_labels(&mut run, &matrix, &args.labels)?;
    let labeled = FeatureMatrix::new(matrix.columns.clone(), idx.iter().map(|&i| matrix.rows[i].clone()).collect())?;
    let report = ablation_report(&LogisticRegression::new(run.config.learner), &labeled, &y, &run.config.cv, mode)?;
    run.write("ablation.csv", |w| Ok(report.write_csv(w)?))?;
    println!("baseline accuracy A_s = {:.4}", report.baseline_accuracy);
    let width = report.entries.iter().map(|e| e.unit.len()).max().unwrap_or(4).max(4);
    println!("{:>4}  {:<width$}  {:>8}  {:>10}", "rank", "unit", "A_i", "RC");
    for e in &report.entries {
        println!("{:>4}  {:<width$}  {:>8.4}  {:>10.3}", e.rank, e.unit, e.accuracy, e.rc);
    }
    run.finish()
}

pub fn synth(args: &SynthArgs, config: RunConfig) -> Result<()> {
    let mut run = Run::new("synth", &args.out, config)?;
    let c = &mut run.config.synth;
    if let Some(v) = args.users {
        c.users = v;
    }
    if let Some(v) = args.topics {
        c.topics = v;
    }
    if let Some(v) = args.high {
        c.high_infectivity = v;
    }
    if let Some(v) = args.low {
        c.low_infectivity = v;
    }
    if let Some(v) = args.buckets {
        c.buckets = v;
    }
    let corpus = generate(&run.config.synth)?;
    run.write(MESSAGES_FILE, |w| Ok(corpus.write_messages(w)?))?;
    run.write(FOLLOWERS_FILE, |w| Ok(corpus.write_followers(w)?))?;
    run.write(LEDGER_FILE, |w| Ok(corpus.write_ledger(w)?))?;
    let popular = corpus.ledger.topics.iter().filter(|t| t.popular).count();
    println!(
        "{} messages, {} follow edges, {} topics ({popular} popular)",
        corpus.messages.len(),
        corpus.follows.len(),
        corpus.ledger.topics.len()
    );
    run.finish()
}

pub fn repro_tables(args: &ReproArgs, config: RunConfig) -> Result<()> {
    let mut run = Run::new("repro-tables", &args.out, config)?;
    let cards = reference::scorecards();
    let mut text = String::new();
    let mut mismatches = Vec::new();
    let tol = 1e-3;

    text.push_str("weights     w_c     w_u    w_a1    w_a2    w_rm\n");
    for (name, published) in reference::SCENARIOS.iter().zip(reference::WEIGHTS) {
        let w = Scenario::builtin(name).expect("builtin scenario").weights;
        let got = [w.complexity, w.universality, w.macro_f1, w.micro_f1, w.rmse];
        text.push_str(&format!("{name:<8}"));
        for (g, p) in got.iter().zip(published) {
            text.push_str(&format!("  {g:.4}"));
            if (g - p).abs() > tol {
                mismatches.push(format!("scenario {name} weight {g:.4} vs {p}"));
            }
        }
        text.push('\n');
    }
    text.push('\n');

    let mut csv = String::from("scenario,method,min_dis,published,golden\n");
    for name in reference::SCENARIOS {
        let s = Scenario::builtin(name).expect("builtin scenario");
        let ranked = rank(&cards, &s);
        text.push_str(&RankingTable { scenario: name, rows: &ranked }.to_string());
        for r in &ranked {
            let published = reference::published_min_dis(name, &r.method).expect("published value");
            let golden = reference::GOLDEN_METHODS.contains(&r.method.as_str());
            if golden && (r.min_dis - published).abs() > tol {
                mismatches.push(format!("scenario {name} {} {:.4} vs {published}", r.method, r.min_dis));
            }
            csv.push_str(&format!("{name},{},{:.6},{published},{golden}\n", r.method, r.min_dis));
        }
        text.push('\n');
    }
    print!("{text}");
    run.write("repro_tables.txt", |w| Ok(w.write_all(text.as_bytes())?))?;
    run.write("repro_ranking.csv", |w| Ok(w.write_all(csv.as_bytes())?))?;
    run.finish()?;
    if !mismatches.is_empty() {
        return Err(Invariant(format!("golden mismatch: {}", mismatches.join("; "))).into());
    }
    println!("all golden values within {tol}");
    Ok(())
}
