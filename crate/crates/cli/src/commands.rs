use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;
use wehrl_core::ann::write_loss_csv;
use wehrl_core::dataset::{read_jsonl, split_dataset, write_jsonl, SCHEMA_VERSION};
use wehrl_core::gme::max_gme_bound;
use wehrl_core::metrics::{evaluate_method, write_predictions_csv, write_report_csv};
use wehrl_core::{
    accel_estimate, gme_reference, moments_dicke, moments_permanent, moments_quadrature, predict_gme,
    ratio_estimate, to_majorana, train as train_network, DatasetBuilder, DatasetRecord, EvalReport, Manifest,
    Method, MlpModel, MomentSequence, Preset, Subset,
};

use crate::failure::{config, missing, Failure};
use crate::state_spec::parse_state;
use crate::{EvaluateArgs, ExportArgs, GenerateArgs, GmeArgs, MethodArg, MomentsArgs, Route, TrainArgs};

pub const MIN_QUBITS: usize = 2;
pub const MAX_QUBITS: usize = 10;

/// Sidecar written to every output directory.
#[derive(Serialize)]
struct RunConfig<'a, A: Serialize> {
    tool: &'static str,
    version: &'static str,
    schema_version: u32,
    command: &'a str,
    deterministic: bool,
    args: &'a A,
}

fn prepare_out<A: Serialize>(out: &Path, command: &str, args: &A, deterministic: bool) -> Result<(), Failure> {
    fs::create_dir_all(out)?;
    let cfg = RunConfig {
        tool: "wehrl",
        version: env!("CARGO_PKG_VERSION"),
        schema_version: SCHEMA_VERSION,
        command,
        deterministic,
        args,
    };
    write_json(&out.join("config.json"), &cfg)
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn method_of(m: MethodArg) -> Method {
    match m {
        MethodArg::Ratio => Method::Ratio,
        MethodArg::Accel => Method::Accel,
        MethodArg::Ann => Method::Ann,
    }
}

fn model_path(dir: &Path, q_max: usize) -> PathBuf {
    dir.join(format!("model_q{q_max}.json"))
}

fn load_model(path: &Path) -> Result<MlpModel, Failure> {
    if !path.exists() {
        return Err(missing(format!("model file {}", path.display())));
    }
    Ok(MlpModel::load(path)?)
}

struct Dataset {
    manifest: Manifest,
    dir: PathBuf,
}

impl Dataset {
    fn open(dir: &Path) -> Result<Self, Failure> {
        let path = dir.join("manifest.json");
        if !path.exists() {
            return Err(missing(format!("{} (not a generated dataset directory)", path.display())));
        }
        Ok(Self {
            manifest: Manifest::read(&path)?,
            dir: dir.to_path_buf(),
        })
    }

    fn split(&self, name: &str) -> Result<Vec<DatasetRecord>, Failure> {
        let file = self
            .manifest
            .files
            .get(name)
            .ok_or_else(|| missing(format!("dataset in {} has no {name} split", self.dir.display())))?;
        let path = self.dir.join(file);
        if !path.exists() {
            return Err(missing(path.display().to_string()));
        }
        let records = read_jsonl(&path)?;
        if let Some(bad) = records.iter().find(|r| r.n_qubits() != self.manifest.n_qubits) {
            return Err(config(format!(
                "{}: record {} has {} qubits, manifest says {}",
                path.display(),
                bad.id,
                bad.n_qubits(),
                self.manifest.n_qubits
            )));
        }
        Ok(records)
    }

    fn check_q(&self, q_max: usize) -> Result<(), Failure> {
        if q_max < 2 || q_max > self.manifest.q_max {
            return Err(config(format!(
                "q_max {q_max} outside 2..={} stored in the dataset",
                self.manifest.q_max
            )));
        }
        Ok(())
    }
}

pub fn generate(a: &GenerateArgs, deterministic: bool) -> Result<(), Failure> {
    if !(MIN_QUBITS..=MAX_QUBITS).contains(&a.n_qubits) {
        return Err(config(format!(
            "--n-qubits must be in {MIN_QUBITS}..={MAX_QUBITS}, got {}",
            a.n_qubits
        )));
    }
    if a.q_max < 2 {
        return Err(config("--q-max must be at least 2"));
    }
    if !(a.dt.is_finite() && a.dt > 0.0) || a.steps == 0 {
        return Err(config("--steps and --dt must be positive"));
    }
    let preset = Preset::from(a.preset).values();
    let per_subset = a.per_subset.unwrap_or(preset.records_per_subset);
    let squeezed = a.squeezed.unwrap_or(preset.squeezed_count);
    if per_subset == 0 {
        return Err(config("--per-subset must be positive"));
    }
    prepare_out(&a.out, "generate", a, deterministic)?;

    let builder = DatasetBuilder::new(a.n_qubits, a.q_max, a.seed);
    let records = builder.main_subsets(per_subset)?;
    let (train, test) = split_dataset(&records, a.seed)?;
    write_jsonl(&a.out.join("train.jsonl"), &train)?;
    write_jsonl(&a.out.join("test.jsonl"), &test)?;

    let mut files = BTreeMap::from([
        ("train".to_string(), "train.jsonl".to_string()),
        ("test".to_string(), "test.jsonl".to_string()),
    ]);
    let mut sizes: BTreeMap<String, usize> = [Subset::Uniform, Subset::Degenerate, Subset::GhzDicke]
        .into_iter()
        .map(|s| (s.as_str().to_string(), per_subset))
        .collect();
    if squeezed > 0 {
        let sq = builder.squeezed(squeezed, a.steps, a.dt, 3 * per_subset as u64)?;
        write_jsonl(&a.out.join("squeezed.jsonl"), &sq)?;
        files.insert("squeezed".into(), "squeezed.jsonl".into());
        sizes.insert(Subset::Squeezed.as_str().to_string(), sq.len());
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        generator_version: format!("wehrl {}", env!("CARGO_PKG_VERSION")),
        seed: a.seed,
        n_qubits: a.n_qubits,
        q_max: a.q_max,
        sizes,
        files,
    };
    manifest.write(&a.out.join("manifest.json"))?;
    println!(
        "wrote {} train, {} test, {} squeezed records (N={}, q_max={}) to {}",
        train.len(),
        test.len(),
        manifest.sizes.get("squeezed").copied().unwrap_or(0),
        a.n_qubits,
        a.q_max,
        a.out.display()
    );
    Ok(())
}

fn compute_moments(state: &wehrl_core::SymmetricState, q_max: usize, route: Route) -> Result<MomentSequence, Failure> {
    if q_max < 2 {
        return Err(config("--q-max must be at least 2"));
    }
    Ok(match route {
        Route::Dicke => moments_dicke(state, q_max)?,
        Route::Quadrature => moments_quadrature(state, q_max)?,
        Route::Permanent => moments_permanent(&to_majorana(state), q_max)?,
    })
}

fn emit(out: Option<&Path>, file: &str, value: &serde_json::Value) -> Result<(), Failure> {
    match out {
        Some(dir) => write_json(&dir.join(file), value),
        None => {
            println!("{}", serde_json::to_string_pretty(value)?);
            Ok(())
        }
    }
}

pub fn moments(a: &MomentsArgs, deterministic: bool) -> Result<(), Failure> {
    let state = parse_state(&a.state.state, a.state.n_qubits)?;
    let seq = compute_moments(&state, a.q_max, a.route)?;
    if let Some(out) = &a.out {
        prepare_out(out, "moments", a, deterministic)?;
    }
    let value = json!({
        "n_qubits": seq.n_qubits,
        "route": a.route,
        "moments": seq.moments,
        "ratios": seq.ratios,
    });
    emit(a.out.as_deref(), "moments.json", &value)
}

pub fn gme(a: &GmeArgs, deterministic: bool) -> Result<(), Failure> {
    let state = parse_state(&a.state.state, a.state.n_qubits)?;
    let model = match (&a.model, a.methods.contains(&MethodArg::Ann)) {
        (Some(path), true) => Some(load_model(path)?),
        (None, true) => return Err(config("the ann method needs --model")),
        _ => None,
    };
    let q_needed = a.q_max.max(model.as_ref().map_or(0, |m| m.input_width() + 1));
    let seq = compute_moments(&state, q_needed, Route::Dicke)?;
    let own = seq.truncated(a.q_max)?;

    let mut estimates = Vec::new();
    for &m in &a.methods {
        let est = match m {
            MethodArg::Ratio => ratio_estimate(&own),
            MethodArg::Accel => accel_estimate(&own)?,
            MethodArg::Ann => {
                let model = model.as_ref().expect("model loaded above");
                predict_gme(model, &seq.truncated(model.input_width() + 1)?)?
            }
        };
        estimates.push(est);
    }
    if let Some(out) = &a.out {
        prepare_out(out, "gme", a, deterministic)?;
    }
    let value = json!({
        "n_qubits": state.n_qubits(),
        "reference": gme_reference(&state),
        "estimates": estimates,
    });
    emit(a.out.as_deref(), "gme.json", &value)
}

pub fn train(a: &TrainArgs, deterministic: bool) -> Result<(), Failure> {
    let data = Dataset::open(&a.data)?;
    if a.q_max.is_empty() {
        return Err(config("no --q-max given"));
    }
    for &q in &a.q_max {
        data.check_q(q)?;
    }
    if a.eval_every == 0 {
        return Err(config("--eval-every must be positive"));
    }
    let mut cfg = Preset::from(a.preset).train_config(a.seed);
    if let Some(e) = a.epochs {
        cfg.epochs = e;
    }
    if let Some(b) = a.batch_size {
        cfg.batch_size = b;
    }
    cfg.eval_every = a.eval_every;
    if cfg.epochs == 0 || cfg.batch_size == 0 {
        return Err(config("--epochs and --batch-size must be positive"));
    }
    let train_set = data.split("train")?;
    let test_set = data.split("test")?;
    prepare_out(&a.out, "train", a, deterministic)?;

    for &q in &a.q_max {
        let outcome = train_network(&train_set, q, &cfg, Some(&test_set))?;
        outcome.model.save(&model_path(&a.out, q))?;
        write_loss_csv(&a.out.join(format!("loss_q{q}.csv")), &outcome.history)?;
        let meta = &outcome.model.meta;
        println!(
            "q_max={q}: {} epochs, train loss {:.3e}, test loss {}",
            meta.epochs_trained,
            meta.final_train_loss.unwrap_or(f64::NAN),
            meta.final_test_loss.map_or("n/a".to_string(), |l| format!("{l:.3e}")),
        );
    }
    Ok(())
}

pub fn evaluate(a: &EvaluateArgs, deterministic: bool) -> Result<(), Failure> {
    let data = Dataset::open(&a.data)?;
    let explicit_q = !a.q_max.is_empty();
    let qs: Vec<usize> = if explicit_q {
        a.q_max.clone()
    } else {
        (2..=data.manifest.q_max).collect()
    };
    for &q in &qs {
        data.check_q(q)?;
    }
    if a.methods.is_empty() {
        return Err(config("no --methods given"));
    }

    let mut models = BTreeMap::new();
    if a.methods.contains(&MethodArg::Ann) {
        let dir = a.models.as_ref().ok_or_else(|| config("the ann method needs --models"))?;
        if !dir.is_dir() {
            return Err(missing(format!("model directory {}", dir.display())));
        }
        for &q in &qs {
            let path = model_path(dir, q);
            if path.exists() || explicit_q {
                models.insert(q, load_model(&path)?);
            }
        }
        if models.is_empty() {
            return Err(missing(format!("no model_q*.json in {}", dir.display())));
        }
        if let Some((q, m)) = models.iter().find(|(_, m)| m.meta.n_qubits != data.manifest.n_qubits) {
            return Err(config(format!(
                "model for q_max={q} was trained on N={}, dataset has N={}",
                m.meta.n_qubits, data.manifest.n_qubits
            )));
        }
    }

    let records = data.split(a.split.name())?;
    prepare_out(&a.out, "evaluate", a, deterministic)?;

    let mut reports: Vec<EvalReport> = Vec::new();
    for &q in &qs {
        for &m in &a.methods {
            let model = match m {
                MethodArg::Ann => match models.get(&q) {
                    Some(model) => Some(model),
                    None => continue,
                },
                _ => None,
            };
            reports.push(evaluate_method(&records, method_of(m), q, model, a.dump_predictions)?);
        }
    }
    write_report_csv(&a.out.join("report.csv"), &reports)?;
    if a.dump_predictions {
        for r in &reports {
            if let Some(p) = &r.predictions {
                write_predictions_csv(&a.out.join(format!("predictions_{}_q{}.csv", r.method, r.q_max)), p)?;
            }
        }
    }
    println!("{:<8}{:>6}{:>14}{:>12}{:>12}{:>10}", "method", "q_max", "mre", "err_low", "err_high", "excluded");
    for r in &reports {
        println!(
            "{:<8}{:>6}{:>14.4e}{:>12.3e}{:>12.3e}{:>10}",
            r.method.to_string(),
            r.q_max,
            r.mre,
            r.err_low,
            r.err_high,
            r.n_excluded
        );
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
struct ReportRow {
    method: String,
    n_qubits: usize,
    q_max: usize,
    mre: f64,
}

fn export_comparison(reports_dir: &Path, out: &Path) -> Result<(), Failure> {
    let path = reports_dir.join("report.csv");
    if !path.exists() {
        return Err(missing(path.display().to_string()));
    }
    let mut reader = csv::Reader::from_path(&path)?;
    let mut table: BTreeMap<(usize, usize), BTreeMap<String, f64>> = BTreeMap::new();
    let mut methods = Vec::new();
    for row in reader.deserialize() {
        let row: ReportRow = row.map_err(|e| config(format!("{}: {e}", path.display())))?;
        if !methods.contains(&row.method) {
            methods.push(row.method.clone());
        }
        table.entry((row.n_qubits, row.q_max)).or_default().insert(row.method, row.mre);
    }
    let mut w = csv::Writer::from_path(out.join("comparison.csv"))?;
    let mut header = vec!["n_qubits".to_string(), "q_max".to_string()];
    header.extend(methods.iter().map(|m| format!("mre_{m}")));
    w.write_record(&header)?;
    for ((n, q), row) in &table {
        let mut rec = vec![n.to_string(), q.to_string()];
        rec.extend(methods.iter().map(|m| row.get(m).map_or(String::new(), |v| v.to_string())));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn export_histograms(data: &Dataset, bins: usize, out: &Path) -> Result<(), Failure> {
    let upper = max_gme_bound(data.manifest.n_qubits);
    let mut w = csv::Writer::from_path(out.join("gme_histogram.csv"))?;
    w.write_record(["split", "subset", "bin_low", "bin_high", "count"])?;
    for split in data.manifest.files.keys() {
        let records = data.split(split)?;
        let mut counts: BTreeMap<&'static str, Vec<usize>> = BTreeMap::new();
        for r in &records {
            let bin = ((r.gme / upper * bins as f64) as usize).min(bins - 1);
            counts.entry(r.subset.as_str()).or_insert_with(|| vec![0; bins])[bin] += 1;
        }
        for (subset, hist) in counts {
            for (i, c) in hist.iter().enumerate() {
                w.write_record([
                    split.clone(),
                    subset.to_string(),
                    (upper * i as f64 / bins as f64).to_string(),
                    (upper * (i + 1) as f64 / bins as f64).to_string(),
                    c.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn export(a: &ExportArgs, deterministic: bool) -> Result<(), Failure> {
    if a.reports.is_none() && a.data.is_none() {
        return Err(config("export needs --reports, --data or both"));
    }
    if a.bins == 0 {
        return Err(config("--bins must be positive"));
    }
    let data = a.data.as_deref().map(Dataset::open).transpose()?;
    if let Some(dir) = &a.reports {
        if !dir.join("report.csv").exists() {
            return Err(missing(dir.join("report.csv").display().to_string()));
        }
    }
    prepare_out(&a.out, "export", a, deterministic)?;
    if let Some(dir) = &a.reports {
        export_comparison(dir, &a.out)?;
    }
    if let Some(data) = &data {
        export_histograms(data, a.bins, &a.out)?;
    }
    println!("wrote tables to {}", a.out.display());
    Ok(())
}
