use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;

use pdcnet::baseline::{featurize_baseline, predict_lr, save_lr, train_lr, BaselineError, LrConfig};
use pdcnet::dataset::{
    labels, read_raw_rows, split, split_stratified, write_records, write_report, write_split,
    PdcRecord, ReferenceSet, SimilarityReport,
};
use pdcnet::explain::{explain_record, export_fused, ExportMode, ShapleyValue};
use pdcnet::model::{
    load_checkpoint, save_checkpoint, Checkpoint, ChannelMask, EmbeddingTables, Model, ModelConfig,
    ModelError,
};
use pdcnet::traineval::{
    ablation_study, crossval, evaluate, example_labels, format_table, hpo_search,
    predict_examples, prepare_examples, train, write_history, Example, HpoResult, HpoSpace,
    TrainConfig,
};

use crate::cli::*;
use crate::support::*;

/// Runs one subcommand; returns its name and what it read and wrote.
pub fn run(command: &Command) -> (&'static str, Result<Outcome>) {
    match command {
        Command::Curate(a) => ("curate", curate(a)),
        Command::Split(a) => ("split", split_cmd(a)),
        Command::Train(a) => ("train", train_cmd(a)),
        Command::Evaluate(a) => ("evaluate", evaluate_cmd(a)),
        Command::Predict(a) => ("predict", predict(a)),
        Command::Crossval(a) => ("crossval", crossval_cmd(a)),
        Command::Hpo(a) => ("hpo", hpo(a)),
        Command::Baseline(a) => ("baseline", baseline(a)),
        Command::Similarity(a) => ("similarity", similarity(a)),
        Command::Explain(a) => ("explain", explain(a)),
        Command::ExportFeatures(a) => ("export-features", export_features(a)),
        Command::Ablation(a) => ("ablation", ablation(a)),
    }
}

fn check_jobs(jobs: usize) -> Result<()> {
    if jobs == 0 {
        return Err(anyhow::anyhow!("--jobs must be at least 1")).usage();
    }
    Ok(())
}

fn check_threshold(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(anyhow::anyhow!("--threshold must lie in [0, 1], got {t}")).usage();
    }
    Ok(())
}

fn load_model(path: &std::path::Path) -> Result<Checkpoint> {
    load_checkpoint(path)
        .with_context(|| format!("loading checkpoint {}", path.display()))
        .data()
}

fn model_error_is_data(e: &ModelError) -> bool {
    matches!(
        e,
        ModelError::MissingEmbedding { .. } | ModelError::Embedding(_) | ModelError::Chem(_)
    )
}

fn record_inputs<T>(record: &PdcRecord, r: std::result::Result<T, ModelError>) -> Result<T> {
    r.map_err(|e| {
        let data = model_error_is_data(&e);
        let err = anyhow::Error::new(e).context(format!("record {}", record.id));
        if data {
            err.context(InvalidData)
        } else {
            err
        }
    })
}

fn examples(model: &Model, records: &[PdcRecord], tables: &EmbeddingTables) -> Result<Vec<Example>> {
    classify_train(prepare_examples(model, records, tables))
}

fn curate(a: &CurateArgs) -> Result<Outcome> {
    if !(a.threshold_um > 0.0 && a.threshold_um.is_finite()) {
        return Err(anyhow::anyhow!("--threshold-um must be positive, got {}", a.threshold_um)).usage();
    }
    let rows = read_raw_rows(&a.input)
        .with_context(|| format!("reading {}", a.input.display()))
        .data()?;
    let curated = pdcnet::dataset::curate(rows, a.threshold_um);
    write_records(&a.out, &curated.records)?;
    let report = a.report.clone().unwrap_or_else(|| sibling(&a.out, "report.json"));
    write_report(&report, &curated.report)?;
    println!(
        "retained {} of {} records at {} uM",
        curated.report.retained, curated.report.input_records, a.threshold_um
    );
    Ok(Outcome::new(json!({ "threshold_um": a.threshold_um }))?
        .input("raw", &a.input)
        .output("curated", &a.out)
        .output("report", &report))
}

fn split_cmd(a: &SplitArgs) -> Result<Outcome> {
    let records = load_records(&a.input)?;
    let s = if a.stratified {
        split_stratified(&labels(&records), a.seed)
    } else {
        split(records.len(), a.seed)
    }
    .data()?;
    let out = a.out.clone().unwrap_or_else(|| sibling(&a.input, "split.json"));
    write_split(&out, &s)?;
    println!("train {} / val {} / test {}", s.train.len(), s.val.len(), s.test.len());
    Ok(Outcome::new(json!({ "stratified": a.stratified }))?
        .seed(a.seed)
        .input("records", &a.input)
        .output("split", &out))
}

fn train_cmd(a: &TrainArgs) -> Result<Outcome> {
    let (mut mc, tc, tables) = resolve_net(&a.net, a.seed)?;
    if a.ablation.is_some() {
        mc.ablation = a.ablation;
    }
    let (records, s) = load_split(&a.data, &a.split)?;
    let model = Model::new(mc.clone(), a.seed)?;
    let tr = examples(&model, &pick(&records, &s.train), &tables)?;
    let va = examples(&model, &pick(&records, &s.val), &tables)?;
    let outcome = classify_train(train(model, &tr, &va, &tc))?;
    let summary = &outcome.summary;
    let ckpt = Checkpoint {
        model: outcome.model,
        seed: a.seed,
        history: summary.history.clone(),
        metadata: json!({
            "train": tc,
            "split_seed": s.seed,
            "best_epoch": summary.best_epoch,
            "best_val_auc": summary.best_val_auc,
            "stopped_early": summary.stopped_early,
        }),
    };
    save_checkpoint(&a.out, &ckpt)?;
    let history = a.history.clone().unwrap_or_else(|| sibling(&a.out, "history.csv"));
    write_history(&history, &ckpt.history)?;
    println!(
        "best epoch {} of {}, validation AUC {:.4}",
        summary.best_epoch,
        summary.history.len(),
        summary.best_val_auc
    );
    Ok(Outcome::new(json!({ "model": mc, "train": tc }))?
        .seed(a.seed)
        .input("data", &a.data)
        .input("split", &a.split)
        .output("checkpoint", &a.out)
        .output("history", &history))
}

fn evaluate_cmd(a: &EvaluateArgs) -> Result<Outcome> {
    check_threshold(a.threshold)?;
    let ckpt = load_model(&a.checkpoint)?;
    let tables = load_tables(&a.embeddings)?;
    let (records, s) = load_split(&a.data, &a.split)?;
    let part = pick(&records, part_indices(&s, a.part));
    let ex = examples(&ckpt.model, &part, &tables)?;
    let scores = classify_train(predict_examples(&ckpt.model, &ex))?;
    let report = evaluate(&scores, &example_labels(&ex), a.threshold).data()?;
    write_json(&a.out, &report)?;
    print!("{}", format_table(&[("PDCNet".into(), report.table_cells())]));
    Ok(Outcome::new(json!({ "part": a.part, "threshold": a.threshold }))?
        .input("checkpoint", &a.checkpoint)
        .input("data", &a.data)
        .input("split", &a.split)
        .output("metrics", &a.out))
}

fn predict(a: &PredictArgs) -> Result<Outcome> {
    check_threshold(a.threshold)?;
    let ckpt = load_model(&a.checkpoint)?;
    let tables = load_tables(&a.embeddings)?;
    tables.validate(&ckpt.model.config).data()?;
    let records = load_records(&a.input)?;
    let mut w = csv::Writer::from_path(&a.out).with_context(|| format!("writing {}", a.out.display()))?;
    w.write_record(["id", "score", "prediction"])?;
    for r in &records {
        let inputs = record_inputs(r, ckpt.model.prepare(r, &tables))?;
        let p = ckpt.model.predict(&inputs, ChannelMask::NONE)?;
        w.write_record([r.id.clone(), p.to_string(), u8::from(p >= a.threshold).to_string()])?;
    }
    w.flush()?;
    println!("scored {} records", records.len());
    Ok(Outcome::new(json!({ "threshold": a.threshold }))?
        .input("checkpoint", &a.checkpoint)
        .input("records", &a.input)
        .output("scores", &a.out))
}

fn crossval_cmd(a: &CrossvalArgs) -> Result<Outcome> {
    check_jobs(a.jobs)?;
    if a.k < 2 {
        return Err(anyhow::anyhow!("--k must be at least 2")).usage();
    }
    let (mc, tc, tables) = resolve_net(&a.net, a.seed)?;
    let records = load_records(&a.data)?;
    let ex = examples(&Model::new(mc.clone(), a.seed)?, &records, &tables)?;
    let report = classify_train(crossval(&mc, &ex, a.k, a.seed, &tc, a.jobs))?;
    write_json(&a.out, &report)?;
    print!("{}", report.table("PDCNet"));
    Ok(Outcome::new(json!({ "k": a.k, "model": mc, "train": tc }))?
        .seed(a.seed)
        .input("data", &a.data)
        .output("report", &a.out))
}

/// Search log plus the winning configuration, readable as a `--config` file.
#[derive(Serialize)]
struct HpoOutput {
    model: ModelConfig,
    train: TrainConfig,
    search: HpoResult,
}

fn hpo(a: &HpoArgs) -> Result<Outcome> {
    check_jobs(a.jobs)?;
    let (mc, tc, tables) = resolve_net(&a.net, a.seed)?;
    let space = HpoSpace {
        trials: a.trials,
        ..HpoSpace::default()
    };
    space.validate().usage()?;
    let (records, s) = load_split(&a.data, &a.split)?;
    let model = Model::new(mc.clone(), a.seed)?;
    let tr = examples(&model, &pick(&records, &s.train), &tables)?;
    let va = examples(&model, &pick(&records, &s.val), &tables)?;
    let search = classify_train(hpo_search(&space, &mc, &tc, &tr, &va, a.seed, a.jobs))?;
    let best = search.best().clone();
    let (model, train) = best.params.apply(&mc, &tc);
    write_json(&a.out, &HpoOutput { model, train, search })?;
    println!(
        "best trial {}: validation AUC {:.4}",
        best.trial,
        best.val_auc.unwrap_or(f64::NAN)
    );
    Ok(Outcome::new(json!({ "space": space, "model": mc, "train": tc }))?
        .seed(a.seed)
        .input("data", &a.data)
        .input("split", &a.split)
        .output("search", &a.out))
}

fn baseline_features(records: &[PdcRecord]) -> Result<(Vec<Vec<f64>>, Vec<u8>)> {
    let mut xs = Vec::with_capacity(records.len());
    for r in records {
        xs.push(
            featurize_baseline(r)
                .with_context(|| format!("record {}", r.id))
                .data()?
                .into_vec(),
        );
    }
    Ok((xs, labels(records)))
}

fn baseline(a: &BaselineArgs) -> Result<Outcome> {
    check_threshold(a.threshold)?;
    let cfg = LrConfig {
        lambda: a.lambda,
        learning_rate: a.lr,
        epochs: a.epochs,
    };
    let (records, s) = load_split(&a.data, &a.split)?;
    let (xs, ys) = baseline_features(&pick(&records, &s.train))?;
    let model = match train_lr(&xs, &ys, &cfg) {
        Ok(m) => m,
        Err(e @ BaselineError::Config(_)) => return Err(e).usage(),
        Err(e @ BaselineError::SingleClass) => return Err(e).data(),
        Err(e) => return Err(e.into()),
    };
    save_lr(&a.out, &model)?;
    let (xe, ye) = baseline_features(&pick(&records, part_indices(&s, a.part)))?;
    let scores = xe.iter().map(|x| predict_lr(&model, x)).collect::<Result<Vec<_>, _>>()?;
    let report = evaluate(&scores, &ye, a.threshold).data()?;
    let metrics = a.metrics.clone().unwrap_or_else(|| sibling(&a.out, "metrics.json"));
    write_json(&metrics, &report)?;
    print!("{}", format_table(&[("LR_Morgan".into(), report.table_cells())]));
    Ok(Outcome::new(json!({ "lr": cfg, "part": a.part, "threshold": a.threshold }))?
        .input("data", &a.data)
        .input("split", &a.split)
        .output("model", &a.out)
        .output("metrics", &metrics))
}

#[derive(Serialize)]
struct SimilarityRow {
    id: String,
    #[serde(flatten)]
    report: SimilarityReport,
}

fn similarity(a: &SimilarityArgs) -> Result<Outcome> {
    let queries = load_records(&a.query)?;
    let reference = load_records(&a.reference)?;
    let set = ReferenceSet::new(&reference).data()?;
    let mut rows = Vec::with_capacity(queries.len());
    for q in &queries {
        let report = set.score(q).with_context(|| format!("record {}", q.id)).data()?;
        rows.push(SimilarityRow { id: q.id.clone(), report });
    }
    write_json(&a.out, &rows)?;
    println!("scored {} queries against {} references", queries.len(), reference.len());
    Ok(Outcome::new(json!({}))?
        .input("query", &a.query)
        .input("reference", &a.reference)
        .output("similarity", &a.out))
}

fn explain(a: &ExplainArgs) -> Result<Outcome> {
    let ckpt = load_model(&a.checkpoint)?;
    let tables = load_tables(&a.embeddings)?;
    tables.validate(&ckpt.model.config).data()?;
    let records = load_records(&a.input)?;
    let value = match a.value {
        Value::Probability => ShapleyValue::Probability,
        Value::Logit => ShapleyValue::Logit,
    };
    let mut out = Vec::with_capacity(records.len());
    for r in &records {
        out.push(record_inputs(r, explain_record(&ckpt.model, r, &tables, value))?);
    }
    write_json(&a.out, &out)?;
    println!("explained {} records", out.len());
    Ok(Outcome::new(json!({ "value": a.value }))?
        .input("checkpoint", &a.checkpoint)
        .input("records", &a.input)
        .output("explanations", &a.out))
}

fn export_features(a: &ExportArgs) -> Result<Outcome> {
    let records = load_records(&a.input)?;
    let (model, tables, mode) = match &a.checkpoint {
        Some(path) => {
            if a.net.config.is_some() || a.net.d_h.is_some() || a.net.hidden.is_some() {
                bail!("network flags cannot be combined with --checkpoint");
            }
            let tables = load_tables(&a.net.embeddings)?;
            (load_model(path)?.model, tables, ExportMode::PostTraining)
        }
        None => {
            let (mc, _, tables) = resolve_net(&a.net, a.seed)?;
            (Model::new(mc, a.seed)?, tables, ExportMode::PreTraining)
        }
    };
    tables.validate(&model.config).data()?;
    for r in &records {
        record_inputs(r, model.prepare(r, &tables))?;
    }
    let n = export_fused(&model, &records, &tables, mode, &a.out)?;
    println!("wrote {n} {} fused vectors", mode.as_str());
    let mut outcome = Outcome::new(json!({ "mode": mode, "model": model.config }))?;
    if let Some(path) = &a.checkpoint {
        outcome = outcome.input("checkpoint", path);
    } else {
        outcome = outcome.seed(a.seed);
    }
    Ok(outcome.input("records", &a.input).output("features", &a.out))
}

fn ablation(a: &AblationArgs) -> Result<Outcome> {
    check_jobs(a.jobs)?;
    let (mc, tc, tables) = resolve_net(&a.net, a.seed)?;
    let (records, s) = load_split(&a.data, &a.split)?;
    let model = Model::new(mc.clone(), a.seed)?;
    let tr = examples(&model, &pick(&records, &s.train), &tables)?;
    let va = examples(&model, &pick(&records, &s.val), &tables)?;
    let te = examples(&model, &pick(&records, &s.test), &tables)?;
    let report = classify_train(ablation_study(&mc, &tr, &va, &te, &tc, a.jobs))?;
    write_json(&a.out, &report)?;
    print!("{}", report.table());
    Ok(Outcome::new(json!({ "model": mc, "train": tc }))?
        .seed(a.seed)
        .input("data", &a.data)
        .input("split", &a.split)
        .output("report", &a.out))
}
