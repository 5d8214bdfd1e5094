use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn wehrl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wehrl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = wehrl(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    wehrl(args).status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_dataset(dir: &Path, extra: &[&str]) {
    let mut args = vec![
        "generate",
        "--n-qubits",
        "3",
        "--q-max",
        "5",
        "--seed",
        "7",
        "--per-subset",
        "20",
        "--squeezed",
        "12",
        "--steps",
        "6",
        "--out",
        s(dir),
    ];
    args.extend_from_slice(extra);
    ok(&args);
}

#[test]
fn pipeline_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let models = tmp.path().join("models");
    let eval = tmp.path().join("eval");
    let export = tmp.path().join("export");

    small_dataset(&data, &[]);
    for f in ["train.jsonl", "test.jsonl", "squeezed.jsonl", "manifest.json", "config.json"] {
        assert!(data.join(f).exists(), "{f}");
    }
    let train_lines = fs::read_to_string(data.join("train.jsonl")).unwrap().lines().count();
    assert_eq!(train_lines, 30);
    assert_eq!(fs::read_to_string(data.join("squeezed.jsonl")).unwrap().lines().count(), 12);

    ok(&[
        "train", "--data", s(&data), "--q-max", "2,3", "--epochs", "3", "--batch-size", "10", "--out", s(&models),
    ]);
    for f in ["model_q2.json", "model_q3.json", "loss_q2.csv", "loss_q3.csv", "config.json"] {
        assert!(models.join(f).exists(), "{f}");
    }
    let loss = fs::read_to_string(models.join("loss_q3.csv")).unwrap();
    assert_eq!(loss.lines().next().unwrap(), "epoch,train_loss,test_loss");
    assert_eq!(loss.lines().count(), 4);

    let stdout = ok(&[
        "evaluate",
        "--data",
        s(&data),
        "--methods",
        "ratio,accel,ann",
        "--models",
        s(&models),
        "--dump-predictions",
        "--out",
        s(&eval),
    ]);
    assert!(stdout.contains("ann"));
    let report = fs::read_to_string(eval.join("report.csv")).unwrap();
    assert_eq!(
        report.lines().next().unwrap(),
        "method,n_qubits,q_max,mre,err_low,err_high,n_excluded,n_evaluated"
    );
    // ratio and accel at q = 2..=5, ann where a model exists
    assert_eq!(report.lines().count(), 1 + 4 * 2 + 2);
    let dump = fs::read_to_string(eval.join("predictions_accel_q4.csv")).unwrap();
    assert_eq!(dump.lines().next().unwrap(), "id,gme_true,gme_pred,delta");
    assert_eq!(dump.lines().count(), 31);

    ok(&["export", "--reports", s(&eval), "--data", s(&data), "--bins", "5", "--out", s(&export)]);
    let cmp = fs::read_to_string(export.join("comparison.csv")).unwrap();
    assert_eq!(cmp.lines().next().unwrap(), "n_qubits,q_max,mre_ratio,mre_accel,mre_ann");
    assert_eq!(cmp.lines().count(), 5);
    let hist = fs::read_to_string(export.join("gme_histogram.csv")).unwrap();
    let total: usize = hist
        .lines()
        .skip(1)
        .filter(|l| l.starts_with("test,"))
        .map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(total, 30);

    for dir in [&data, &models, &eval, &export] {
        let cfg: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("config.json")).unwrap()).unwrap();
        assert_eq!(cfg["tool"], "wehrl");
    }
}

#[test]
fn generation_is_reproducible_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    small_dataset(&a, &[]);
    small_dataset(&b, &["--deterministic"]);
    for f in ["train.jsonl", "test.jsonl", "squeezed.jsonl", "manifest.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn single_state_commands() {
    let out = ok(&["moments", "--state", "coherent:0.3:1.1", "--n-qubits", "3", "--q-max", "4"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let w = v["moments"].as_array().unwrap();
    for (i, m) in w.iter().enumerate() {
        let q = (i + 1) as f64;
        assert!((m.as_f64().unwrap() - 1.0 / (3.0 * q + 1.0)).abs() < 1e-12);
    }

    for route in ["dicke", "permanent", "quadrature"] {
        let out = ok(&["moments", "--state", "dicke:1", "--n-qubits", "3", "--q-max", "3", "--route", route]);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        // D_3^1 has W^(2) = C(3,1)^2 / (7 C(6,2)) = 3/35
        assert!((v["moments"][1].as_f64().unwrap() - 3.0 / 35.0).abs() < 1e-10, "{route}");
    }

    let tmp = tempfile::tempdir().unwrap();
    ok(&["gme", "--state", "dicke:2", "--n-qubits", "4", "--out", s(tmp.path())]);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("gme.json")).unwrap()).unwrap();
    assert!((v["reference"]["value"].as_f64().unwrap() - 0.625).abs() < 1e-8);
    assert_eq!(v["estimates"].as_array().unwrap().len(), 2);
    assert!(tmp.path().join("config.json").exists());
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = s(tmp.path());
    assert_eq!(code(&["generate", "--n-qubits", "1", "--out", out]), 2);
    assert_eq!(code(&["generate", "--n-qubits", "11", "--out", out]), 2);
    assert_eq!(code(&["generate", "--n-qubits", "3", "--preset", "huge", "--out", out]), 2);
    assert_eq!(code(&["moments", "--state", "dicke:9", "--n-qubits", "3"]), 2);
    assert_eq!(code(&["gme", "--state", "ghz", "--n-qubits", "3", "--methods", "ann"]), 2);
    assert_eq!(code(&["train", "--data", "/nonexistent/wehrl", "--out", out]), 3);
    assert_eq!(code(&["evaluate", "--data", "/nonexistent/wehrl", "--out", out]), 3);
    assert_eq!(code(&["export", "--reports", "/nonexistent/wehrl", "--out", out]), 3);
    assert_eq!(code(&["export", "--out", out]), 2);
}

#[test]
fn schema_mismatch_and_bad_requests_are_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    small_dataset(&data, &[]);
    let manifest = data.join("manifest.json");
    let text = fs::read_to_string(&manifest).unwrap();
    fs::write(&manifest, text.replace("\"squeezed\": \"squeezed.jsonl\"", "\"nothing\": \"squeezed.jsonl\"")).unwrap();
    let out = tmp.path().join("o");

    assert_eq!(code(&["evaluate", "--data", s(&data), "--split", "squeezed", "--out", s(&out)]), 3);
    assert_eq!(code(&["evaluate", "--data", s(&data), "--q-max", "9", "--out", s(&out)]), 2);
    assert_eq!(code(&["evaluate", "--data", s(&data), "--methods", "ann", "--out", s(&out)]), 2);
    assert_eq!(
        code(&["evaluate", "--data", s(&data), "--methods", "ann", "--models", s(tmp.path()), "--q-max", "3", "--out", s(&out)]),
        3
    );
    assert_eq!(code(&["train", "--data", s(&data), "--q-max", "3", "--batch-size", "500", "--epochs", "1", "--out", s(&out)]), 2);

    let manifest = data.join("manifest.json");
    let text = fs::read_to_string(&manifest).unwrap();
    fs::write(&manifest, text.replace("\"schema_version\": 1", "\"schema_version\": 2")).unwrap();
    assert_eq!(code(&["evaluate", "--data", s(&data), "--out", s(&out)]), 2);

    fs::write(&manifest, text).unwrap();
    fs::write(data.join("test.jsonl"), "{\"not\": \"a record\"}\n").unwrap();
    assert_eq!(code(&["evaluate", "--data", s(&data), "--out", s(&out)]), 2);
}
