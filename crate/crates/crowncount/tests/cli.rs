use std::path::Path;
use std::process::{Command, Output};

fn crowncount(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crowncount"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const CONFIG: &str = r#"{
  "seed": 11,
  "synth": { "rows": 4, "cols": 5, "noise_sigma": 15.0 },
  "classifier": { "kind": "gaussian_nb" },
  "bench": { "classifiers": [ { "kind": "gaussian_nb" }, { "kind": "logistic" }, { "kind": "flda" } ] },
  "paths": { "out_dir": "run" }
}"#;

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), CONFIG).unwrap();
    let o = crowncount(dir.path(), &["synth", "--config", "c.json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    dir
}

#[test]
fn synth_then_bench_writes_report() {
    let dir = setup();
    let run = dir.path().join("run");
    for f in [
        "image.png",
        "annotation.png",
        "truth.csv",
        "effective-config.json",
    ] {
        assert!(run.join(f).exists(), "{f}");
    }
    let o = crowncount(dir.path(), &["bench", "--config", "c.json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(run.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("classifier,train_s,segment_s,total_s,count,error,error_pct"));
    let table = stdout(&o);
    assert!(table.starts_with("Classifier"));
    assert!(table.contains("NaiveBayes") && table.contains("Logistic") && table.contains("FLDA"));
    assert!(run.join("report.txt").exists());
}

#[test]
fn bench_parallel_mode_omits_timing() {
    let dir = setup();
    let o = crowncount(
        dir.path(),
        &[
            "bench",
            "--config",
            "c.json",
            "--parallel",
            "--only",
            "gaussian_nb",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("run/report.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("NaiveBayes,,,,"));
}

fn count_of(out: &str) -> usize {
    let line = out.lines().find(|l| l.starts_with("count: ")).unwrap();
    line["count: ".len()..]
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn train_count_and_min_radius_monotonicity() {
    let dir = setup();
    let o = crowncount(dir.path(), &["train", "--config", "c.json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("run/model.json").exists());
    let mut last = usize::MAX;
    for r in ["0", "8", "12", "15", "40"] {
        let o = crowncount(
            dir.path(),
            &["count", "--config", "c.json", "--min-radius", r],
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let c = count_of(&stdout(&o));
        assert!(c <= last, "min_radius {r}: {c} > {last}");
        last = c;
    }
    assert_eq!(last, 0);
    let o = crowncount(dir.path(), &["count", "--config", "c.json"]);
    let text = stdout(&o);
    assert!(text.contains("filtered: "), "{text}");
    for f in [
        "detections.csv",
        "detections_filtered.csv",
        "removed.csv",
        "overlay.png",
        "mask.png",
        "labels.png",
    ] {
        assert!(dir.path().join("run").join(f).exists(), "{f}");
    }

    let o = crowncount(
        dir.path(),
        &["segment", "--config", "c.json", "--dump-features"],
    );
    assert!(o.status.success());
    assert!(dir.path().join("run/probability.png").exists());
    assert!(dir.path().join("run/features/00_red.png").exists());

    let o = crowncount(
        dir.path(),
        &[
            "filter",
            "--config",
            "c.json",
            "--input",
            "run/detections.csv",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("kept "));
    assert!(dir.path().join("run/filtered.csv").exists());
}

#[test]
fn effective_config_round_trip() {
    let dir = setup();
    let first = std::fs::read_to_string(dir.path().join("run/effective-config.json")).unwrap();
    std::fs::copy(
        dir.path().join("run/effective-config.json"),
        dir.path().join("eff.json"),
    )
    .unwrap();
    let img1 = std::fs::read(dir.path().join("run/image.png")).unwrap();
    let o = crowncount(dir.path(), &["synth", "--config", "eff.json"]);
    assert!(o.status.success());
    let second = std::fs::read_to_string(dir.path().join("run/effective-config.json")).unwrap();
    assert_eq!(first, second);
    assert_eq!(
        img1,
        std::fs::read(dir.path().join("run/image.png")).unwrap()
    );
}

#[test]
fn usage_and_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = crowncount(dir.path(), &["synth", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(crowncount(dir.path(), &["nonsense"]).status.code(), Some(1));
    assert_eq!(crowncount(dir.path(), &[]).status.code(), Some(1));
    assert_eq!(crowncount(dir.path(), &["--help"]).status.code(), Some(0));

    assert_eq!(
        crowncount(dir.path(), &["count", "--config", "missing.json"])
            .status
            .code(),
        Some(2)
    );
    std::fs::write(dir.path().join("bad.json"), "{\"seed\": \"x\"}").unwrap();
    assert_eq!(
        crowncount(dir.path(), &["synth", "--config", "bad.json"])
            .status
            .code(),
        Some(2)
    );
    let o = crowncount(dir.path(), &["train", "--out-dir", "o"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("image.png"));
    assert_eq!(
        crowncount(
            dir.path(),
            &["train", "--out-dir", "o", "--classifier", "nope"]
        )
        .status
        .code(),
        Some(2)
    );
}
