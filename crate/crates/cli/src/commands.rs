//! Subcommand implementations. Each returns its full stdout text so the
//! process writes one stream at the end.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;
use webcred::corpus::{
    factcheck_report, load_rated_corpus, parse_claim_evidence, parse_url_list, CorpusError, Credibility, LoadOptions,
    RatedFormat, RatedUrl,
};
use webcred::eval::{
    classification_report, cross_validate, fit_pipeline, out_of_fold_probabilities, padding_sweep, regression_report,
    selection_scores, stacked_cross_validate, sweep_plot_data, sweep_table, tag_dataset, ClassScheme, CvConfig,
    Dataset, EvalError, MetricsReport, RunRecord, StackConfig, TargetData,
};
use webcred::features::{DomainVocab, FeatureVector};
use webcred::html2seq::{encode_window, window_to_counts, TagVocab};
use webcred::ingest::{normalize_url, parse_html, Fetcher, RawDocument, SnapshotStore};
use webcred::learn::{
    fit, predict, stack_features, LearnError, LearnerSpec, ModelArtifact, Prediction, Selection, TagProbabilities,
    TagStack, TaskKind,
};

use crate::config::{Config, TablesConfig};
use crate::pipeline::{extract_page, FeatureRecord, FeaturesFile, Tables};
use crate::{Failure, ModelArgs, Outcome, TableArgs};

fn eval_err(e: EvalError) -> Failure {
    match e {
        EvalError::UnknownScheme(_)
        | EvalError::Stratification { .. }
        | EvalError::EmptyGrid
        | EvalError::InvalidParameter(_)
        | EvalError::Learn(LearnError::UnsupportedTask { .. } | LearnError::InvalidParameter(_)) => {
            Failure::usage(e.to_string())
        }
        _ => Failure::data(e.to_string()),
    }
}

fn open_store(cfg: &Config) -> Result<SnapshotStore, Failure> {
    SnapshotStore::open(&cfg.cache_dir)
        .map_err(|e| Failure::usage(format!("cannot open cache {}: {e}", cfg.cache_dir.display())))
}

fn table_config(cfg: &Config, args: &TableArgs) -> TablesConfig {
    let mut t = cfg.tables.clone();
    if let Some(d) = &args.tables {
        t.dir = d.clone();
    }
    t.disable.extend(args.disable.iter().cloned());
    if let Some(a) = &args.as_of {
        t.as_of = Some(a.clone());
    }
    t
}

struct Settings {
    scheme: ClassScheme,
    learner: LearnerSpec,
    selection: Selection,
    folds: usize,
    stack_pad: Option<usize>,
}

fn settings(cfg: &Config, m: &ModelArgs) -> Result<Settings, Failure> {
    let scheme = ClassScheme::from_name(m.scheme.as_deref().unwrap_or(&cfg.learn.scheme)).map_err(eval_err)?;
    let learner = match &m.learner {
        Some(n) => crate::config::LearnerChoice::Name(n.clone()).resolve()?,
        None => cfg.learn.learner.resolve()?,
    };
    let selection = match (m.top_k, m.percentile, cfg.learn.top_k) {
        (Some(k), _, _) => Selection::TopK(k),
        (None, Some(p), _) => Selection::Percentile(p),
        (None, None, Some(k)) => Selection::TopK(k),
        (None, None, None) => Selection::Percentile(cfg.learn.percentile),
    };
    if let Selection::Percentile(p) = selection {
        if !(p > 0.0 && p <= 100.0) {
            return Err(Failure::usage(format!("percentile {p} outside (0, 100]")));
        }
    }
    let folds = m.folds.unwrap_or(cfg.learn.folds);
    if folds < 2 {
        return Err(Failure::usage("at least 2 folds are needed"));
    }
    Ok(Settings {
        scheme,
        learner,
        selection,
        folds,
        stack_pad: m.stack_pad.or(cfg.learn.stack_pad).filter(|&p| p > 0),
    })
}

fn load_labels(cfg: &Config, path: &Path, m: &ModelArgs) -> Result<Vec<RatedUrl>, Failure> {
    let format = RatedFormat::from_name(m.format.as_deref().unwrap_or(&cfg.corpus.format))
        .map_err(|e| Failure::usage(e.to_string()))?;
    let opts = LoadOptions {
        skip_bad_rows: cfg.corpus.skip_bad_rows,
        aggregation: cfg.corpus.aggregation,
    };
    let loaded = load_rated_corpus(path, format, opts).map_err(|e| match e {
        CorpusError::Io(e) => Failure::usage(format!("cannot read labels {}: {e}", path.display())),
        CorpusError::Header(_) => Failure::usage(format!("{}: {e}", path.display())),
        e => Failure::data(format!("{}: {e}", path.display())),
    })?;
    for s in &loaded.skipped {
        log::warn!("{}: skipped {s}", path.display());
    }
    Ok(loaded.items)
}

fn write_record(path: Option<&Path>, record: &RunRecord) -> Result<(), Failure> {
    let Some(path) = path else { return Ok(()) };
    std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .and_then(|mut f| f.write_all(record.to_json_line().as_bytes()))
        .map_err(|e| Failure::data(format!("cannot write run record {}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::data(format!("cannot write {}: {e}", path.display())))
}

pub fn ingest(cfg: &Config, corpus: &Path) -> Result<Outcome, Failure> {
    let text = std::fs::read_to_string(corpus)
        .map_err(|e| Failure::usage(format!("cannot read corpus {}: {e}", corpus.display())))?;
    let urls = parse_url_list(&text).map_err(|e| Failure::usage(format!("{}: {e}", corpus.display())))?;
    let mut store = open_store(cfg)?;
    let (cached, todo): (Vec<String>, Vec<String>) = urls.into_iter().partition(|u| store.contains(u));
    let fetcher = Fetcher::new(cfg.fetch.clone()).map_err(|e| Failure::usage(e.to_string()))?;
    let mut fetched = 0;
    let mut failures = Vec::new();
    for (url, result) in todo.iter().zip(fetcher.fetch_all(&todo)) {
        match result.and_then(|doc| store.store(&doc)) {
            Ok(_) => fetched += 1,
            Err(e) => failures.push(format!("failed {url}: {e}")),
        }
    }
    let mut out = format!("{fetched} fetched, {} cached, {} failed\n", cached.len(), failures.len());
    for f in &failures {
        out.push_str(f);
        out.push('\n');
    }
    Ok(Outcome {
        stdout: out,
        code: if fetched + cached.len() >= 1 { 0 } else { 1 },
    })
}

pub fn extract(cfg: &Config, args: &TableArgs, out: &Path) -> Result<Outcome, Failure> {
    let store = open_store(cfg)?;
    if store.is_empty() {
        return Err(Failure::data(format!("cache {} is empty; run ingest first", cfg.cache_dir.display())));
    }
    let tables = Tables::load(&table_config(cfg, args), cfg.fetch.timeout_secs)?;
    let urls: Vec<String> = store.urls().map(str::to_string).collect();
    let docs: Vec<Result<RawDocument, String>> = urls.iter().map(|u| store.load(u).map_err(|e| e.to_string())).collect();
    let as_of = tables.reference_time(docs.iter().filter_map(|d| d.as_ref().ok()));
    let vocab = DomainVocab::build(&urls);
    let res = tables.resources(&vocab);
    let results: Vec<_> = docs
        .par_iter()
        .map(|d| {
            d.as_ref()
                .map_err(Clone::clone)
                .and_then(|doc| extract_page(doc, &tables, &res, &cfg.features, as_of))
        })
        .collect();
    let mut file = FeaturesFile::new(webcred::features::feature_schema(&cfg.features), &vocab, as_of);
    let mut failed = 0;
    for (url, r) in urls.iter().zip(results) {
        match r {
            Ok((_, ex)) => file.records.push(FeatureRecord {
                url: url.clone(),
                schema_version: file.header.schema_version.clone(),
                values: ex.vector.values,
                provenance: ex.provenance,
            }),
            Err(e) => {
                log::warn!("skipped {url}: {e}");
                failed += 1;
            }
        }
    }
    let text = file.to_jsonl();
    let stdout = if out == Path::new("-") {
        text
    } else {
        write_file(out, &text)?;
        format!("{} pages extracted, {failed} failed\n", file.records.len())
    };
    Ok(Outcome {
        stdout,
        code: u8::from(failed > 0),
    })
}

/// Feature rows with ratings, in URL order.
struct Labelled {
    file: FeaturesFile,
    urls: Vec<String>,
    ds: Dataset,
}

fn join(cfg: &Config, features: &Path, labels: &Path, m: &ModelArgs, scheme: ClassScheme) -> Result<Labelled, Failure> {
    let mut file = FeaturesFile::read(features)?;
    file.records.sort_by(|a, b| a.url.cmp(&b.url));
    let rated: HashMap<String, i64> = load_labels(cfg, labels, m)?
        .into_iter()
        .map(|r| (r.url, r.aggregated))
        .collect();
    let mut urls = Vec::new();
    let mut x = Vec::new();
    let mut ratings = Vec::new();
    for r in &file.records {
        if let Some(&rating) = rated.get(&r.url) {
            urls.push(r.url.clone());
            x.push(r.values.clone());
            ratings.push(rating);
        }
    }
    if rated.len() > urls.len() {
        log::warn!("{} labelled URLs have no features", rated.len() - urls.len());
    }
    if urls.is_empty() {
        return Err(Failure::data("no labelled URL has features"));
    }
    let ds = Dataset::from_ratings(file.header.schema.clone(), x, &ratings, scheme).map_err(eval_err)?;
    Ok(Labelled { file, urls, ds })
}

fn tag_streams(store: &SnapshotStore, urls: &[String]) -> Result<Vec<Vec<String>>, Failure> {
    urls.par_iter()
        .map(|u| {
            store
                .load(u)
                .and_then(|d| parse_html(&d))
                .map(|p| p.tag_stream)
                .map_err(|e| Failure::data(format!("{u}: {e}")))
        })
        .collect()
}

fn class_names(target: &TargetData) -> Result<&[String], Failure> {
    match target {
        TargetData::Classes { names, .. } => Ok(names),
        TargetData::Real(_) => Err(Failure::usage("tag stacking needs a classification scheme")),
    }
}

fn resubstitution(target: &TargetData, preds: &[Prediction]) -> Result<MetricsReport, Failure> {
    match target {
        TargetData::Classes { y, names } => {
            let p: Vec<usize> = preds.iter().map(|p| p.class().unwrap_or(0)).collect();
            classification_report(y, &p, names).map(MetricsReport::Classification)
        }
        TargetData::Real(y) => {
            let p: Vec<f64> = preds
                .iter()
                .map(|p| if let Prediction::Value(v) = p { *v } else { f64::NAN })
                .collect();
            regression_report(y, &p).map(MetricsReport::Regression)
        }
    }
    .map_err(eval_err)
}

fn file_name(p: &Path) -> String {
    p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned())
}

pub fn train(cfg: &Config, features: &Path, labels: &Path, m: &ModelArgs, out: &Path) -> Result<Outcome, Failure> {
    let s = settings(cfg, m)?;
    let Labelled { file, urls, ds } = join(cfg, features, labels, m, s.scheme)?;
    let mut schema = ds.schema.clone();
    let mut x = ds.x.clone();
    let mut tag_stack = None;
    if let Some(pad) = s.stack_pad {
        let names = class_names(&ds.target)?.to_vec();
        let store = open_store(cfg)?;
        let streams = tag_streams(&store, &urls)?;
        let vocab = TagVocab::build(&streams).map_err(|e| Failure::data(e.to_string()))?;
        let tags = tag_dataset(&streams, &vocab, pad, &ds.target).map_err(eval_err)?;
        let tag_learner = cfg.learn.tag_learner.resolve()?;
        let inner = CvConfig {
            learner: tag_learner,
            selection: Selection::Percentile(100.0),
            folds: cfg.learn.inner_folds,
            seed: cfg.seed,
        };
        let oof = out_of_fold_probabilities(&tags, &inner).map_err(eval_err)?;
        for (row, probs) in x.iter_mut().zip(oof) {
            let tp = TagProbabilities {
                probs,
                class_names: names.clone(),
                training_folds: BTreeSet::new(),
            };
            let v = stack_features(&FeatureVector::new(schema.clone(), row.clone()), &tp, None)
                .map_err(|e| Failure::data(e.to_string()))?;
            *row = v.values;
        }
        schema.extend(names.iter().map(|c| format!("html2seq_prob_{c}")));
        let model = fit(&tag_learner, &tags.x, tags.target.as_targets()).map_err(|e| eval_err(e.into()))?;
        tag_stack = Some(TagStack {
            pad,
            vocab: (2..vocab.size() as u32).filter_map(|id| vocab.name(id).map(str::to_string)).collect(),
            model,
        });
    }
    let pipe = fit_pipeline(&x, &ds.target, &s.learner, s.selection).map_err(eval_err)?;
    let preds: Vec<Prediction> = x.iter().map(|r| pipe.predict(r)).collect();
    let metrics = resubstitution(&ds.target, &preds)?;
    let task = match &ds.target {
        TargetData::Classes { names, .. } => TaskKind::Classification {
            scheme: s.scheme.name().into(),
            class_order: names.clone(),
        },
        TargetData::Real(_) => TaskKind::Regression {
            scheme: s.scheme.name().into(),
        },
    };
    let mut artifact = ModelArtifact::new(s.learner, task, s.selection, pipe.mask, schema, pipe.model);
    artifact.feature_scores = selection_scores(&x, &ds.target);
    artifact.domain_vocab = file.header.domain_vocab.clone();
    artifact.tag_stack = tag_stack;
    artifact.notes = BTreeMap::from([
        ("seed".to_string(), cfg.seed.to_string()),
        ("rows".to_string(), urls.len().to_string()),
        ("features".to_string(), file_name(features)),
        ("labels".to_string(), file_name(labels)),
    ]);
    write_file(out, &artifact.to_json())?;
    let record = RunRecord {
        command: "train".into(),
        protocol: format!("fit on all {} labelled rows; metrics are training-set", urls.len()),
        seed: cfg.seed,
        scheme: s.scheme.name().into(),
        learner: s.learner,
        selection: s.selection.describe(),
        metrics,
    };
    write_record(m.record.as_deref(), &record)?;
    let mut stdout = format!(
        "trained {} on {} rows, {} of {} features selected\n",
        s.learner.name(),
        urls.len(),
        artifact.mask.iter().filter(|&&b| b).count(),
        artifact.schema.len()
    );
    stdout.push_str(&record.metrics.to_table());
    let _ = writeln!(stdout, "artifact written to {}", out.display());
    Ok(Outcome::ok(stdout))
}

pub fn eval(cfg: &Config, features: &Path, labels: &Path, m: &ModelArgs) -> Result<Outcome, Failure> {
    let s = settings(cfg, m)?;
    let Labelled { urls, ds, .. } = join(cfg, features, labels, m, s.scheme)?;
    let outer = CvConfig {
        learner: s.learner,
        selection: s.selection,
        folds: s.folds,
        seed: cfg.seed,
    };
    let mut stdout = String::new();
    let record = if let Some(pad) = s.stack_pad {
        class_names(&ds.target)?;
        let store = open_store(cfg)?;
        let streams = tag_streams(&store, &urls)?;
        let vocab = TagVocab::build(&streams).map_err(|e| Failure::data(e.to_string()))?;
        let tags = tag_dataset(&streams, &vocab, pad, &ds.target).map_err(eval_err)?;
        let stack = StackConfig {
            outer,
            tag_learner: cfg.learn.tag_learner.resolve()?,
            tag_selection: Selection::Percentile(100.0),
            inner_folds: cfg.learn.inner_folds,
        };
        let report = stacked_cross_validate(&ds, &tags, &stack).map_err(eval_err)?;
        let _ = writeln!(stdout, "{}\n\nlexical only", report.protocol);
        stdout.push_str(&report.lexical_only.to_table());
        let _ = writeln!(stdout, "\nstacked with tag probabilities (pad {pad})");
        stdout.push_str(&report.stacked.to_table());
        let _ = writeln!(stdout, "\ngain {:+.4}", report.gain);
        RunRecord {
            command: "eval".into(),
            protocol: report.protocol,
            seed: cfg.seed,
            scheme: s.scheme.name().into(),
            learner: s.learner,
            selection: s.selection.describe(),
            metrics: report.stacked,
        }
    } else {
        let report = cross_validate(&ds, &outer).map_err(eval_err)?;
        let _ = writeln!(stdout, "{}\n", report.protocol);
        stdout.push_str(&report.metrics.to_table());
        RunRecord {
            command: "eval".into(),
            protocol: report.protocol,
            seed: cfg.seed,
            scheme: s.scheme.name().into(),
            learner: s.learner,
            selection: s.selection.describe(),
            metrics: report.metrics,
        }
    };
    write_record(m.record.as_deref(), &record)?;
    Ok(Outcome::ok(stdout))
}

pub fn sweep(
    cfg: &Config,
    labels: &Path,
    m: &ModelArgs,
    grid: Option<Vec<usize>>,
    plot: Option<&Path>,
) -> Result<Outcome, Failure> {
    let scheme = ClassScheme::from_name(m.scheme.as_deref().unwrap_or(&cfg.learn.scheme)).map_err(eval_err)?;
    if scheme.is_regression() {
        return Err(Failure::usage("the padding sweep needs a classification scheme"));
    }
    let grid = grid.unwrap_or_else(|| cfg.sweep.grid.clone());
    if grid.contains(&0) {
        return Err(Failure::usage("pad lengths must be at least 1"));
    }
    let learner = match &m.learner {
        Some(n) => crate::config::LearnerChoice::Name(n.clone()).resolve()?,
        None => cfg.sweep.learner.resolve()?,
    };
    let selection = match m.top_k {
        Some(k) => Selection::TopK(k),
        None => Selection::Percentile(m.percentile.unwrap_or(cfg.sweep.percentile)),
    };
    let mut rated = load_labels(cfg, labels, m)?;
    rated.sort_by(|a, b| a.url.cmp(&b.url));
    let store = open_store(cfg)?;
    let (cached, missing): (Vec<RatedUrl>, Vec<RatedUrl>) = rated.into_iter().partition(|r| store.contains(&r.url));
    if !missing.is_empty() {
        log::warn!("{} labelled URLs are not cached", missing.len());
    }
    if cached.is_empty() {
        return Err(Failure::data("no labelled URL is cached"));
    }
    let urls: Vec<String> = cached.iter().map(|r| r.url.clone()).collect();
    let streams = tag_streams(&store, &urls)?;
    let y = cached
        .iter()
        .map(|r| scheme.class_of(r.aggregated))
        .collect::<Result<Vec<_>, _>>()
        .map_err(eval_err)?;
    let target = TargetData::Classes {
        y,
        names: scheme.labels().iter().map(|s| s.to_string()).collect(),
    };
    let cv = CvConfig {
        learner,
        selection,
        folds: m.folds.unwrap_or(cfg.learn.folds),
        seed: cfg.seed,
    };
    let rows = padding_sweep(&streams, &target, &cv, &grid).map_err(eval_err)?;
    if let Some(p) = plot {
        write_file(p, &sweep_plot_data(&rows))?;
    }
    let mut stdout = format!("{}\n", cv.protocol(true));
    stdout.push_str(&sweep_table(&rows));
    Ok(Outcome::ok(stdout))
}

fn load_artifact(path: &Path) -> Result<ModelArtifact, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read model {}: {e}", path.display())))?;
    ModelArtifact::from_json(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// Lexical features, plus tag probabilities when the model was stacked.
fn model_input(artifact: &ModelArtifact, lexical: FeatureVector, tag_stream: &[String]) -> Result<FeatureVector, Failure> {
    let Some(ts) = &artifact.tag_stack else {
        return Ok(lexical);
    };
    let tsv: String = ts.vocab.iter().enumerate().map(|(i, t)| format!("{t}\t{}\n", i + 2)).collect();
    let vocab = TagVocab::from_tsv(&tsv).map_err(|e| Failure::usage(format!("model tag vocabulary: {e}")))?;
    let counts = window_to_counts(&encode_window(tag_stream, &vocab, ts.pad), &vocab);
    let names = artifact.class_order().unwrap_or_default().to_vec();
    let probs = match ts.model.predict_row(&counts) {
        Prediction::Probabilities(p) => p,
        Prediction::Value(_) => return Err(Failure::usage("model tag classifier is not a classifier")),
    };
    let tp = TagProbabilities {
        probs,
        class_names: names,
        training_folds: BTreeSet::new(),
    };
    stack_features(&lexical, &tp, None).map_err(|e| Failure::usage(e.to_string()))
}

fn predict_checked(artifact: &ModelArtifact, x: &FeatureVector) -> Result<Prediction, Failure> {
    predict(artifact, x).map_err(|e| match e {
        LearnError::Schema { .. } => Failure::usage(format!(
            "{e}; extract with the feature configuration the model was trained with"
        )),
        e => Failure::data(e.to_string()),
    })
}

pub fn score(cfg: &Config, artifact_path: &Path, url: &str, args: &TableArgs, no_fetch: bool, top: usize) -> Result<Outcome, Failure> {
    let artifact = load_artifact(artifact_path)?;
    let url = normalize_url(url).map_err(|e| Failure::usage(e.to_string()))?;
    let mut store = open_store(cfg)?;
    let doc = if store.contains(&url) {
        store.load(&url).map_err(|e| Failure::data(e.to_string()))?
    } else if no_fetch {
        return Err(Failure::data(format!("{url} is not cached")));
    } else {
        let fetcher = Fetcher::new(cfg.fetch.clone()).map_err(|e| Failure::usage(e.to_string()))?;
        let doc = fetcher.fetch(&url).map_err(|e| Failure::data(format!("{url}: {e}")))?;
        store.store(&doc).map_err(|e| Failure::data(e.to_string()))?;
        doc
    };
    let tables = Tables::load(&table_config(cfg, args), cfg.fetch.timeout_secs)?;
    let vocab = DomainVocab::from_map(artifact.domain_vocab.clone());
    let as_of = tables.reference_time(std::iter::once(&doc));
    let (page, ex) =
        extract_page(&doc, &tables, &tables.resources(&vocab), &cfg.features, as_of).map_err(Failure::data)?;
    let x = model_input(&artifact, ex.vector, &page.tag_stream)?;
    let pred = predict_checked(&artifact, &x)?;

    let mut out = format!("url {url}\nmodel {}\n", artifact.learner.name());
    match (&pred, &artifact.task) {
        (Prediction::Probabilities(p), TaskKind::Classification { scheme, class_order }) => {
            let best = pred.class().unwrap_or(0);
            let _ = writeln!(out, "scheme {scheme}\nprediction {}", class_order[best]);
            for (c, v) in class_order.iter().zip(p) {
                let _ = writeln!(out, "p({c}) {v:.6}");
            }
        }
        (Prediction::Value(v), TaskKind::Regression { scheme }) => {
            let _ = writeln!(out, "scheme {scheme}\nlikert {:.4}", v.clamp(1.0, 5.0));
        }
        _ => return Err(Failure::usage("model task and prediction kind disagree")),
    }
    out.push_str("top features\n");
    for (col, name) in artifact.ranked_features().into_iter().take(top) {
        let score = artifact.feature_scores.get(col).map_or(String::new(), |s| format!(" (score {s:.4e})"));
        let _ = writeln!(out, "  {name} = {:.6}{score}", x.values[col]);
    }
    for note in &ex.provenance {
        let _ = writeln!(out, "note {note}");
    }
    Ok(Outcome::ok(out))
}

pub fn factcheck(cfg: &Config, evidence: &Path, artifact_path: &Path, args: &TableArgs) -> Result<Outcome, Failure> {
    let text = std::fs::read_to_string(evidence)
        .map_err(|e| Failure::usage(format!("cannot read evidence {}: {e}", evidence.display())))?;
    let claims = parse_claim_evidence(&text).map_err(|e| Failure::data(format!("{}: {e}", evidence.display())))?;
    let artifact = load_artifact(artifact_path)?;
    let order = artifact.class_order().unwrap_or_default();
    if order.len() != 2 || order.iter().any(|c| Credibility::from_two_class(c).is_none()) {
        return Err(Failure::usage("fact-checking needs a two_class model (low = non-credible, high = credible)"));
    }
    let store = open_store(cfg)?;
    let urls: BTreeSet<&str> = claims
        .iter()
        .flat_map(|c| &c.evidence)
        .filter(|e| e.annotation.is_some() && store.contains(&e.url))
        .map(|e| e.url.as_str())
        .collect();
    let mut predictions = HashMap::new();
    if !urls.is_empty() {
        let tables = Tables::load(&table_config(cfg, args), cfg.fetch.timeout_secs)?;
        let vocab = DomainVocab::from_map(artifact.domain_vocab.clone());
        let res = tables.resources(&vocab);
        let docs: Vec<RawDocument> = urls
            .iter()
            .map(|u| store.load(u).map_err(|e| Failure::data(e.to_string())))
            .collect::<Result<_, _>>()?;
        let as_of = tables.reference_time(docs.iter());
        let labels: Vec<Result<Option<Credibility>, Failure>> = docs
            .par_iter()
            .map(|doc| {
                let Ok((page, ex)) = extract_page(doc, &tables, &res, &cfg.features, as_of) else {
                    return Ok(None);
                };
                let x = model_input(&artifact, ex.vector, &page.tag_stream)?;
                let class = predict_checked(&artifact, &x)?.class().unwrap_or(0);
                Ok(Credibility::from_two_class(&order[class]))
            })
            .collect();
        for (doc, label) in docs.iter().zip(labels) {
            if let Some(c) = label? {
                predictions.insert(doc.url.clone(), c);
            }
        }
    }
    let report = factcheck_report(&claims, &predictions).map_err(|e| Failure::data(e.to_string()))?;
    Ok(Outcome::ok(report.to_table()))
}
