use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::Serialize;
use tempo_core::corpus_io::{self, PredictionRecord};
use tempo_core::dataset::{generate_event_corpus, generate_timex_pairs, ClassBalance, SyntheticEventCorpusConfig};
use tempo_core::distant::build_distant_dataset;
use tempo_core::event_model::{
    evaluate_events, prediction_records, train_events_with, EventModel, EventModelConfig, EventSidecar, TimexMode,
};
use tempo_core::experiments::{bootstrap_compare, learning_curve, write_run_echo, LearningCurveConfig};
use tempo_core::timex_model::{
    evaluate_timex, label_swap_consistency, predict_pairs, sidecar_path, train_timex_with, TimexModel, TimexModelConfig,
};
use tempo_core::{list_templates, parse_timex, TimexLabel};

use crate::failure::Failure;
use crate::{Cli, Command, Common, EventArgs};

type Result<T> = std::result::Result<T, Failure>;

pub fn run(cli: Cli) -> Result<()> {
    let c = &cli.common;
    match cli.command {
        Command::GenPairs { n, explicit_fraction } => gen_pairs(c, n, explicit_fraction),
        Command::GenEvents { n } => gen_events(c, n),
        Command::TrainTimex { train, dev } => train_timex(c, &train, &dev),
        Command::EvalTimex { model, test } => eval_timex(c, &model, &test),
        Command::Embed { model, surfaces } => embed(&model, &surfaces),
        Command::TrainEvents { train, dev, model } => train_events(c, &train, &dev, &model),
        Command::EvalEvents { model, test, timex } => eval_events(c, &model, &test, timex),
        Command::DistantLabel { input } => distant_label(c, &input),
        Command::Normalize { surface } => normalize(c, &surface),
        Command::Significance { a, b, resamples } => significance(c, &a, &b, resamples),
        Command::Templates => templates(c),
        Command::LearningCurve { pool, dev, test, sizes, seeds, model } => {
            curve(c, [&pool, &dev, &test], sizes, seeds, &model)
        }
    }
}

fn load_config<T: DeserializeOwned + Default>(c: &Common) -> Result<T> {
    match &c.config {
        None => Ok(T::default()),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::data(format!("{}: {e}", path.display())))
        }
    }
}

fn out_dir(c: &Common) -> Result<PathBuf> {
    let dir = c.out.clone().ok_or_else(|| Failure::usage("--out <DIR> is required"))?;
    fs::create_dir_all(&dir).map_err(|e| Failure::data(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_json<T: Serialize>(path: &Path, value: &T, force: bool) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("value serializes") + "\n";
    corpus_io::write_atomic(path, text.as_bytes(), force)?;
    Ok(())
}

fn echo<T: Serialize>(c: &Common, dir: &Path, command: &str, seed: u64, config: &T) -> Result<()> {
    write_run_echo(&dir.join("config.json"), command, seed, config, c.force)?;
    Ok(())
}

fn gen_pairs(c: &Common, n: usize, explicit_fraction: f64) -> Result<()> {
    if n == 0 || !(0.0..=1.0).contains(&explicit_fraction) {
        return Err(Failure::usage("--n must be positive and --explicit-fraction within [0, 1]"));
    }
    if c.anchor.is_some() {
        return Err(Failure::usage("generated timex pairs always resolve against the default anchor"));
    }
    let seed = c.seed.unwrap_or(0);
    let dir = out_dir(c)?;
    let pairs = generate_timex_pairs(n, seed, explicit_fraction);
    corpus_io::write_pairs(&dir.join("pairs.jsonl"), &pairs, c.force)?;
    let params = serde_json::json!({ "n": n, "explicit_fraction": explicit_fraction });
    echo(c, &dir, "gen-pairs", seed, &params)?;
    let b = ClassBalance::of(&pairs);
    println!("{} pairs: {} before, {} after, {} simultaneous", b.total(), b.before, b.after, b.simultaneous);
    Ok(())
}

fn gen_events(c: &Common, n: Option<usize>) -> Result<()> {
    let mut cfg: SyntheticEventCorpusConfig = load_config(c)?;
    if let Some(n) = n {
        cfg.n_examples = n;
    }
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(a) = c.anchor {
        cfg.anchor = a;
    }
    cfg.validate()?;
    let dir = out_dir(c)?;
    let docs = generate_event_corpus(&cfg)?;
    corpus_io::write_documents(&dir.join("docs.jsonl"), &docs, c.force)?;
    echo(c, &dir, "gen-events", cfg.seed, &cfg)?;
    println!("{} documents", docs.len());
    Ok(())
}

fn train_timex(c: &Common, train: &Path, dev: &Path) -> Result<()> {
    let mut cfg: TimexModelConfig = load_config(c)?;
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let dir = out_dir(c)?;
    let (train, dev) = (corpus_io::read_pairs(train)?, corpus_io::read_pairs(dev)?);
    echo(c, &dir, "train-timex", cfg.seed, &cfg)?;
    let (model, history) = train_timex_with(&train, &dev, &cfg, |m| {
        eprintln!("epoch {}: train loss {:.4}, train acc {:.4}, dev acc {:.4}", m.epoch, m.train_loss, m.train_accuracy, m.dev_accuracy);
    })?;
    if history.iter().any(|m| !m.train_loss.is_finite()) {
        return Err(Failure::Numeric("training loss diverged".into()));
    }
    model.save(&dir.join("timex.ckpt"), c.force)?;
    write_json(&dir.join("metrics.json"), &history, c.force)?;
    Ok(())
}

fn eval_timex(c: &Common, model: &Path, test: &Path) -> Result<()> {
    let model = TimexModel::load(model)?;
    let test = corpus_io::read_pairs(test)?;
    let report = evaluate_timex(&model, &test)?;
    let swap = label_swap_consistency(&model, &test)?;
    println!("accuracy {:.4} over {} pairs; label-swap consistency {:.4}", report.accuracy, report.n, swap);
    if c.out.is_some() {
        let dir = out_dir(c)?;
        let preds = predict_pairs(&model, &test)?;
        let records: Vec<PredictionRecord> = test
            .iter()
            .zip(&preds)
            .enumerate()
            .map(|(i, (ex, &p))| {
                let probs = model.classify_pair(&ex.t1.surface, &ex.t2.surface)?;
                Ok(PredictionRecord {
                    pair_id: i.to_string(),
                    gold: ex.label.name().to_string(),
                    pred: TimexLabel::ALL[p].name().to_string(),
                    probs,
                })
            })
            .collect::<Result<_>>()?;
        corpus_io::write_predictions(&dir.join("predictions.jsonl"), &records, c.force)?;
        let metrics = serde_json::json!({ "report": report, "label_swap_consistency": swap });
        write_json(&dir.join("metrics.json"), &metrics, c.force)?;
        echo(c, &dir, "eval-timex", 0, model.config())?;
    }
    Ok(())
}

fn embed(model: &Path, surfaces: &[String]) -> Result<()> {
    let model = TimexModel::load(model)?;
    for s in surfaces {
        let v = model.embed(s)?.vector;
        let line: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        println!("{}", line.join(" "));
    }
    Ok(())
}

fn load_timex(path: Option<&PathBuf>) -> Result<Option<Arc<TimexModel>>> {
    Ok(match path {
        Some(p) => Some(Arc::new(TimexModel::load(p)?)),
        None => None,
    })
}

fn single_mode(args: &EventArgs) -> Result<Option<TimexMode>> {
    match args.mode.as_slice() {
        [] => Ok(None),
        [m] => Ok(Some(*m)),
        _ => Err(Failure::usage("--mode takes a single value here")),
    }
}

fn event_config(c: &Common, args: &EventArgs) -> Result<EventModelConfig> {
    let mut cfg: EventModelConfig = load_config(c)?;
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if args.baseline_no_lower_bilstm {
        cfg.baseline_no_lower_bilstm = true;
    }
    if let Some(t) = &args.timex {
        cfg.timex_checkpoint = Some(t.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn train_events(c: &Common, train: &Path, dev: &Path, args: &EventArgs) -> Result<()> {
    let mut cfg = event_config(c, args)?;
    if let Some(m) = single_mode(args)? {
        cfg.mode = m;
    }
    let timex = match cfg.mode {
        TimexMode::WithTimex => load_timex(cfg.timex_checkpoint.as_ref())?,
        _ => None,
    };
    let dir = out_dir(c)?;
    let (train, dev) = (corpus_io::read_documents(train)?, corpus_io::read_documents(dev)?);
    echo(c, &dir, "train-events", cfg.seed, &cfg)?;
    let (model, history) = train_events_with(&train, &dev, &cfg, timex, |m| {
        eprintln!("epoch {}: train loss {:.4}, train acc {:.4}, dev acc {:.4}", m.epoch, m.train_loss, m.train_accuracy, m.dev_accuracy);
    })?;
    if history.iter().any(|m| !m.train_loss.is_finite()) {
        return Err(Failure::Numeric("training loss diverged".into()));
    }
    model.save(&dir.join("event.ckpt"), c.force)?;
    write_json(&dir.join("metrics.json"), &history, c.force)?;
    Ok(())
}

fn eval_events(c: &Common, model: &Path, test: &Path, timex: Option<PathBuf>) -> Result<()> {
    let side = sidecar_path(model);
    let text = fs::read_to_string(&side).map_err(|e| Failure::data(format!("{}: {e}", side.display())))?;
    let sc: EventSidecar = serde_json::from_str(&text).map_err(|e| Failure::data(format!("{}: {e}", side.display())))?;
    let timex = match sc.config.mode {
        TimexMode::WithTimex => load_timex(timex.or(sc.config.timex_checkpoint).as_ref())?,
        _ => None,
    };
    let model = EventModel::load(model, timex)?;
    let test = corpus_io::read_documents(test)?;
    let report = evaluate_events(&model, &test)?;
    println!("accuracy {:.4} over {} pairs", report.accuracy, report.n);
    for m in &report.per_class {
        println!("  {:<13} p {:.3} r {:.3} f1 {:.3} (n={})", m.label, m.precision, m.recall, m.f1, m.support);
    }
    if c.out.is_some() {
        let dir = out_dir(c)?;
        corpus_io::write_predictions(&dir.join("predictions.jsonl"), &prediction_records(&model, &test)?, c.force)?;
        write_json(&dir.join("metrics.json"), &report, c.force)?;
        echo(c, &dir, "eval-events", model.config().seed, model.config())?;
    }
    Ok(())
}

fn distant_label(c: &Common, input: &Path) -> Result<()> {
    let out = c.out.clone().ok_or_else(|| Failure::usage("--out <FILE> is required"))?;
    let anchor = c.anchor.unwrap_or_default();
    let docs = corpus_io::read_documents(input)?;
    let (labelled, stats) = build_distant_dataset(&docs, anchor);
    corpus_io::write_documents(&out, &labelled, c.force)?;
    let mut echo_path = out.into_os_string();
    echo_path.push(".config.json");
    let params = serde_json::json!({ "input": input, "anchor": anchor.date().to_string(), "stats": stats });
    write_run_echo(Path::new(&echo_path), "distant-label", 0, &params, c.force)?;
    println!("{}", serde_json::to_string(&stats).expect("stats serialize"));
    Ok(())
}

fn normalize(c: &Common, surface: &str) -> Result<()> {
    let iv = parse_timex(surface, c.anchor.unwrap_or_default())?;
    println!("{}/{}", iv.start_date(), iv.end_date());
    Ok(())
}

fn significance(c: &Common, a: &Path, b: &Path, resamples: usize) -> Result<()> {
    let (ra, rb) = (corpus_io::read_predictions(a)?, corpus_io::read_predictions(b)?);
    if ra.len() != rb.len() {
        return Err(Failure::data(format!("{} predictions in {} but {} in {}", ra.len(), a.display(), rb.len(), b.display())));
    }
    if let Some(k) = (0..ra.len()).find(|&k| ra[k].pair_id != rb[k].pair_id || ra[k].gold != rb[k].gold) {
        return Err(Failure::data(format!("record {} differs in pair id or gold label between the two files", k + 1)));
    }
    let labels: BTreeSet<&str> = ra.iter().chain(&rb).flat_map(|r| [r.gold.as_str(), r.pred.as_str()]).collect();
    let labels: Vec<&str> = labels.into_iter().collect();
    let idx = |s: &str| labels.binary_search(&s).expect("label collected above");
    let gold: Vec<usize> = ra.iter().map(|r| idx(&r.gold)).collect();
    let pa: Vec<usize> = ra.iter().map(|r| idx(&r.pred)).collect();
    let pb: Vec<usize> = rb.iter().map(|r| idx(&r.pred)).collect();
    let seed = c.seed.unwrap_or(0);
    let p = bootstrap_compare(&pa, &pb, &gold, resamples, seed)?;
    let acc = |pred: &[usize]| tempo_core::metrics::accuracy(&gold, pred);
    let result = serde_json::json!({
        "accuracy_a": acc(&pa),
        "accuracy_b": acc(&pb),
        "n": gold.len(),
        "n_resamples": resamples,
        "p_value": p,
    });
    println!("accuracy a {:.4}, b {:.4}, n {}: p = {p:.4}", acc(&pa), acc(&pb), gold.len());
    if c.out.is_some() {
        let dir = out_dir(c)?;
        write_json(&dir.join("significance.json"), &result, c.force)?;
        let params = serde_json::json!({ "a": a, "b": b, "n_resamples": resamples });
        echo(c, &dir, "significance", seed, &params)?;
    }
    Ok(())
}

fn templates(c: &Common) -> Result<()> {
    let text = serde_json::to_string_pretty(&list_templates()).expect("templates serialize") + "\n";
    match &c.out {
        Some(path) => corpus_io::write_atomic(path, text.as_bytes(), c.force)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn curve(c: &Common, [pool, dev, test]: [&PathBuf; 3], sizes: Option<Vec<usize>>, seeds: Option<Vec<u64>>, args: &EventArgs) -> Result<()> {
    let mut cfg: LearningCurveConfig = load_config(c)?;
    if let Some(s) = sizes {
        cfg.sizes = s;
    }
    if let Some(s) = seeds {
        cfg.seeds = s;
    } else if let Some(s) = c.seed {
        cfg.seeds = vec![s];
    }
    if !args.mode.is_empty() {
        cfg.modes = args.mode.clone();
    }
    if args.baseline_no_lower_bilstm {
        cfg.event.baseline_no_lower_bilstm = true;
    }
    if let Some(t) = &args.timex {
        cfg.event.timex_checkpoint = Some(t.clone());
    }
    cfg.event.validate()?;
    let timex = if cfg.modes.contains(&TimexMode::WithTimex) {
        let path = cfg.event.timex_checkpoint.as_ref().ok_or_else(|| Failure::usage("with mode needs --timex <CKPT>"))?;
        load_timex(Some(path))?
    } else {
        None
    };
    let dir = out_dir(c)?;
    let (pool, dev, test) =
        (corpus_io::read_documents(pool)?, corpus_io::read_documents(dev)?, corpus_io::read_documents(test)?);
    let seed = cfg.seeds.first().copied().unwrap_or(0);
    echo(c, &dir, "learning-curve", seed, &cfg)?;
    let lc = learning_curve(&cfg, &pool, &dev, &test, timex, |cell| {
        eprintln!("n={} {}: {:?} mean {:.4}", cell.size, cell.mode.name(), cell.per_seed, cell.mean);
    })?;
    write_json(&dir.join("curve.json"), &lc, c.force)?;
    corpus_io::write_atomic(&dir.join("curve.md"), lc.to_table().as_bytes(), c.force)?;
    print!("{}", lc.to_table());
    Ok(())
}
