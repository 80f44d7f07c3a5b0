use std::path::Path;
use std::process::Command;

fn run(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_vandalscore"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| {
            let mut cols = l.split('\t');
            (cols.next()? == key).then(|| cols.next()?.parse().ok())?
        })
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

#[test]
fn pipeline_from_synth_to_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let corpus = p("corpus");
    run(&[
        "synth",
        "--out",
        &corpus,
        "--n",
        "3000",
        "--seed",
        "3",
        "--vandalism-rate",
        "0.05",
    ]);

    let split = run(&["split", "--corpus", &corpus]);
    let total: f64 = ["train", "validation", "test", "outside"]
        .iter()
        .map(|k| field(&split, k))
        .sum();
    assert_eq!(total, 3000.0);

    let (model, state) = (p("model.txt"), p("state"));
    run(&[
        "train",
        "--corpus",
        &corpus,
        "--model",
        &model,
        "--state",
        &state,
        "--rounds",
        "15",
        "--depth",
        "4",
        "--schema",
        &p("schema.tsv"),
    ]);
    assert!(Path::new(&state).join("MANIFEST").exists());
    let schema = std::fs::read_to_string(p("schema.tsv")).unwrap();
    assert_eq!(
        schema,
        std::fs::read_to_string(Path::new(&state).join("schema.tsv")).unwrap()
    );

    let scores = p("scores.csv");
    run(&[
        "score", "--corpus", &corpus, "--model", &model, "--state", &state, "--out", &scores,
    ]);
    let text = std::fs::read_to_string(&scores).unwrap();
    assert!(text.starts_with("revisionId,score\n"));
    assert_eq!(text.lines().count() as f64, field(&split, "test") + 1.0);

    let eval = run(&["evaluate", "--corpus", &corpus, "--scores", &scores]);
    assert!(field(&eval, "roc_auc") > 0.8, "{eval}");

    let features = p("features.csv");
    run(&[
        "extract",
        "--corpus",
        &corpus,
        "--state",
        &state,
        "--partition",
        "test",
        "--out",
        &features,
    ]);
    let header = std::fs::read_to_string(&features).unwrap();
    assert!(header.starts_with("revisionId,label,upperCaseRatio,"));

    let bench = run(&[
        "benchmark",
        "--corpus",
        &corpus,
        "--model",
        &model,
        "--state",
        &state,
    ]);
    assert!(field(&bench, "throughput") > 0.0);
}

#[test]
fn missing_model_is_reported() {
    let out = Command::new(env!("CARGO_BIN_EXE_vandalscore"))
        .args([
            "benchmark",
            "--corpus",
            "/nonexistent",
            "--model",
            "m",
            "--state",
            "s",
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
